import logging

import pytest
from hypothesis import given, strategies as st

from nfcsim.clock import ActivityLog, Interval, SimClock, SimEvent, format_trace, ms_to_us
from nfcsim.errors import SchedulingInPast


def test_event_fires_at_scheduled_time():
    clock = SimClock()
    fired = []
    clock.schedule(700_000, SimEvent("e", action=lambda: fired.append(clock.now)))
    clock.run()
    assert fired == [700_000]


def test_schedule_at_now_fires_at_now():
    clock = SimClock(start=5)
    fired = []
    clock.schedule(5, SimEvent("e", action=lambda: fired.append(clock.now)))
    clock.run()
    assert fired == [5]


def test_ties_fire_in_insertion_order():
    clock = SimClock()
    order = []
    clock.schedule(10, SimEvent("a", action=lambda: order.append(1)))
    clock.schedule(10, SimEvent("b", action=lambda: order.append(2)))
    clock.run()
    assert order == [1, 2]


def test_scheduling_in_past_rejected():
    clock = SimClock(start=10)
    with pytest.raises(SchedulingInPast):
        clock.schedule(9, SimEvent("late"))
    with pytest.raises(SchedulingInPast):
        clock.run(until=3)


def test_cancelled_events_do_not_fire():
    clock = SimClock()
    h = clock.schedule(3, SimEvent("x"))
    clock.cancel(h)
    assert clock.pending() == 0
    clock.run()
    assert clock.trace == []


def test_run_until_leaves_clock_at_bound():
    clock = SimClock()
    clock.schedule(5, SimEvent("a"))
    clock.schedule(50, SimEvent("b"))
    clock.run(until=20)
    assert clock.now == 20 and [r.event_kind for r in clock.trace] == ["a"]


def test_trace_line_format():
    clock = SimClock()
    clock.schedule(12, SimEvent("apdu_send", "main", "aid=00"))
    clock.run()
    assert format_trace(clock.trace) == "12\tmain\tapdu_send\taid=00\n"


def test_trace_lines_are_logged_at_debug(caplog):
    clock = SimClock()
    with caplog.at_level(logging.DEBUG, logger="nfcsim.trace"):
        clock.note("ping", "dev", "x")
    assert "0\tdev\tping\tx" in caplog.text


@given(st.lists(st.integers(0, 10_000), max_size=50))
def test_fired_timestamps_non_decreasing(times):
    clock = SimClock()
    for t in times:
        clock.schedule(t, SimEvent("e"))
    clock.run()
    stamps = [r.timestamp_us for r in clock.trace]
    assert stamps == sorted(stamps) and len(stamps) == len(times)


def test_ms_to_us_rounds():
    assert ms_to_us(329) == 329_000 and ms_to_us(0.0015) == 2


def test_activity_log_fills_gaps_and_skips_empty():
    log = ActivityLog()
    log.add("a", "nfc", 10, 20)
    log.add("a", "nfc", 30, 30)
    with pytest.raises(ValueError):
        log.add("a", "nfc", 5, 1)
    filled = log.filled(["a"], 0, 40)
    assert filled == [Interval("a", "idle", 0, 10), Interval("a", "nfc", 10, 20),
                      Interval("a", "idle", 20, 40)]
