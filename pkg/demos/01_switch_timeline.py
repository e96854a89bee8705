"""Watch two phones trade reader and card roles.

Runs one round trip of each role-switching variant with deterministic
readiness and prints the event trace, so the order of disable, enable and
reconnect can be read straight off the timeline.
"""

from nfcsim import ProtocolConfig, Variant, run_disabling_enabling, run_enabling_disabling
from nfcsim.clock import format_trace

KEEP = {"connected", "apdu_send", "apdu_response", "apdu_returned", "reader_enable",
        "reader_disable", "enable_timer", "role_ready", "deactivated"}


def show(title, report):
    print(f"== {title}")
    lines = [r for r in report.trace if r.event_kind in KEEP]
    print(format_trace(lines), end="")
    print(f"-> {report.outcome}, {report.total_time_ms:.0f} ms total, "
          f"{report.t_switching_avg_ms:.0f} ms per switch\n")


if __name__ == "__main__":
    de = ProtocolConfig(Variant.DISABLING_ENABLING, t_ms=700)
    ed = ProtocolConfig(Variant.ENABLING_DISABLING, t1_ms=310, t2_ms=100)
    show("disabling-enabling, t = 700 ms", run_disabling_enabling(de, 1))
    # The card side turns its reader on before the other side turns its reader off.
    show("enabling-disabling, t1 = 310 ms, t2 = 100 ms", run_enabling_disabling(ed, 1))
