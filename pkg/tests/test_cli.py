import csv
import io
import json
import subprocess
import sys

import pytest

from nfcsim import cli
from nfcsim.report import CSV_HEADER, Report, fmt_float
from nfcsim.scenario import bundled_scenarios, load_scenario, bundled_scenario_path


def rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bundled_scenarios_all_parse():
    names = bundled_scenarios()
    assert "de_t700.yaml" in names and len(names) >= 9
    for n in names:
        load_scenario(bundled_scenario_path(n))


def test_simulate_csv_header_and_blank_stddev(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.run(["simulate", "timing_closed_form", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    data = rows(out)
    assert data and all(r["stddev"] == "" for r in data)
    lat = [r for r in data if r["metric"] == "latency_ms" and r["size"] == "2048"]
    assert float(lat[0]["value"]) == pytest.approx(1968)


def test_repeats_fill_stddev(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.run(["simulate", "de_t700", "--repeats", "5", "--seed", "3", "--out", str(out)]) == 0
    data = rows(out)
    assert all(r["stddev"] != "" for r in data if r["metric"] == "success_rate")


def test_json_format(tmp_path):
    out = tmp_path / "r.json"
    assert cli.run(["simulate", "timing_closed_form", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["scenario_id"] == "closed-form" and doc["rows"]


def test_malformed_scenario_exits_2(tmp_path, capsys):
    assert cli.run(["simulate", str(write(tmp_path, "schema: 1\nprotocol: [\n"))]) == 2
    assert cli.run(["simulate", str(write(tmp_path, "schema: 2\n"))]) == 2
    assert cli.run(["simulate", str(write(tmp_path, "schema: 1\nbogus: 1\n"))]) == 2
    assert cli.run(["simulate", str(tmp_path / "missing.yaml")]) == 2
    assert cli.run(["offload-bench", str(write(tmp_path, "schema: 1\n"))]) == 2
    assert cli.run(["offload-bench", str(write(
        tmp_path, "schema: 1\nworkload: {name: sha}\n"))]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_strict_exits_1_on_failures(tmp_path):
    scn = write(tmp_path, "schema: 1\nid: bad\nrepeats: 3\nstochastic: true\n"
                          "protocol: {variant: disabling_enabling, t: 680}\n"
                          "experiment: {round_trips: 50}\n")
    out = tmp_path / "o.csv"
    assert cli.run(["simulate", str(scn), "--out", str(out)]) == 0
    assert cli.run(["simulate", str(scn), "--strict", "--out", str(out)]) == 1


def test_seed_override_changes_stochastic_output(tmp_path):
    scn = write(tmp_path, "schema: 1\nid: mid\nrepeats: 30\nstochastic: true\n"
                          "protocol: {variant: disabling_enabling, t: 690}\n"
                          "experiment: {round_trips: 50}\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.run(["simulate", str(scn), "--seed", "1", "--out", str(a)])
    cli.run(["simulate", str(scn), "--seed", "2", "--out", str(b)])
    assert a.read_text() != b.read_text()


def test_compare_protocols_rows(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.run(["compare-protocols", "compare_protocols", "--out", str(out)]) == 0
    metrics = {r["metric"] for r in rows(out)}
    assert {"ratio.latency", "ratio.bandwidth", "ratio.t_switching",
            "disabling_enabling.latency_ms", "enabling_disabling.bandwidth_kbps"} <= metrics


def test_offload_bench_small_board_is_slower_offloaded(tmp_path):
    scn = write(tmp_path, "schema: 1\nid: nq\nprotocol: {variant: enabling_disabling}\n"
                          "workload: {name: nqueens, sizes: [9], execute: true}\n")
    out = tmp_path / "o.csv"
    assert cli.run(["offload-bench", str(scn), "--out", str(out)]) == 0
    v = {r["metric"]: float(r["value"]) for r in rows(out)}
    assert v["offloaded.time_ms"] > v["local_main.time_ms"]
    assert v["time_ratio"] > 1


def test_offload_bench_rsa_plaintext_file(tmp_path):
    pt = tmp_path / "pt.bin"
    pt.write_bytes(b"\x00secret\xff")
    scn = write(tmp_path, "schema: 1\nid: r\nworkload: {name: rsa, sizes: [512], execute: true}\n")
    out = tmp_path / "o.csv"
    assert cli.run(["offload-bench", str(scn), "--plaintext", str(pt), "--out", str(out)]) == 0
    pt.write_bytes(bytes(100))
    assert cli.run(["offload-bench", str(scn), "--plaintext", str(pt), "--out", str(out)]) == 2


def test_calibrate_default_and_file(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert cli.run(["calibrate", "default", "--out", str(out)]) == 0
    model = json.loads(out.read_text())
    assert model["recommended"]["disabling_enabling"]["t"] == 700
    assert "recommended.enabling_disabling.t2" in capsys.readouterr().err
    bad = write(tmp_path, "variant,stage\n", "bad.csv")
    assert cli.run(["calibrate", str(bad)]) == 2
    assert cli.run(["calibrate", "default", "--threshold", "2"]) == 2


def test_calibrated_model_feeds_scenario(tmp_path):
    model = tmp_path / "m.json"
    cli.run(["calibrate", "default", "--out", str(model)])
    scn = write(tmp_path, "schema: 1\nid: m\nreadiness: m.json\n"
                          "protocol: {variant: disabling_enabling, t: 700}\n")
    assert load_scenario(scn).readiness.recommended["disabling_enabling"]["t"] == 700


def test_module_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "nfcsim", "simulate", "timing_closed_form"],
                         capture_output=True, text=True, timeout=60)
    assert res.returncode == 0 and res.stdout.startswith("scenario_id,metric")


def test_report_formatting():
    rep = Report("x", repeats=3)
    rep.add("m", 1, [1.0, 1.0, 1.0])
    rep.add("n", None, [])
    assert rep.rows[0].stddev == 0.0
    assert rep.to_csv().splitlines()[1] == "x,m,1,1,0"
    assert fmt_float(None) == "" and fmt_float(0.1 + 0.2) == "0.3"
