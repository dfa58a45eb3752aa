import csv
import io
import subprocess
import sys

import pytest

from vhetnet.cli import COLUMNS, ScenarioError, main, parse_scenario, run_scenario
from vhetnet.presets import PRESETS, list_presets

STABLE_IDS = [
    "fig-los-fit", "fig-assoc-height", "fig-cov-threshold", "fig-cov-cylinder", "fig-cov-tilt", "fig-cov-height",
    "fig-cov-density", "fig-cov-num-aerial", "fig-los-only", "fig-rate-fading", "table-defaults",
]

SMALL = """\
params: {h_A: 300}
sweep: {variable: T_dB, values: [0, 10]}
outputs: [coverage, association]
paths: [analytical_approx, montecarlo]
n_trials: 400
seed: 3
"""


def _rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# vhetnet-csv schema")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_registry():
    names = [n for n, _ in list_presets()]
    assert len(names) >= 10
    assert names == STABLE_IDS
    assert all(fig.strip() for _, fig in list_presets())


@pytest.mark.parametrize("name", STABLE_IDS)
def test_every_preset_parses(name):
    sc = parse_scenario(PRESETS[name].text, name)
    assert sc.series


def test_assoc_height_preset_shape():
    sc = parse_scenario(PRESETS["fig-assoc-height"].text)
    assert sc.variable == "h_U" and sc.values[0] == 50 and sc.values[-1] == 290
    assert {s.name for s in sc.series} == {"urban", "suburban"}
    assert all(s.params["h_A"] == 500 for s in sc.series)


def test_threshold_preset_shape():
    sc = parse_scenario(PRESETS["fig-cov-threshold"].text)
    assert sc.values[0] == -10 and sc.values[-1] == 20
    cyl = [s for s in sc.series if s.mode.kind == "bpp3d"]
    assert cyl and cyl[0].mode.H_C == 50
    assert all(s.params == {"h_U": 70, "h_A": 200} for s in sc.series)


def test_empty_sweep_gives_header_only():
    text = run_scenario("sweep: {variable: h_U, values: []}\n")
    assert text.splitlines() == ["# vhetnet-csv schema 1", ",".join(COLUMNS)]


def test_rows_and_determinism():
    a = run_scenario(SMALL)
    b = run_scenario(SMALL)
    assert a == b
    rows = _rows(a)
    # 2 values x (coverage + 3 association metrics) x 2 paths
    assert len(rows) == 16
    assert [r["value"] for r in rows[:8]] == ["0"] * 8
    mc = [r for r in rows if r["path"] == "montecarlo" and r["metric"] == "coverage"]
    assert all(r["n_trials"] == "400" and r["seed"] == "3" and r["ci_low"] for r in mc)
    assert all(r["runtime_ms"] == "" and r["error"] == "" for r in rows)


def test_worker_pool_keeps_bytes(monkeypatch):
    base = run_scenario(SMALL, workers=1)
    assert run_scenario(SMALL, workers=2) == base


def test_timing_column():
    rows = _rows(run_scenario(SMALL, timing=True))
    assert all(float(r["runtime_ms"]) >= 0 for r in rows)


def test_partial_failure_rows():
    text = run_scenario("sweep: {variable: h_U, values: [10, 50]}\noutputs: [coverage]\n")
    rows = _rows(text)
    assert "height ordering" in rows[0]["error"] and rows[0]["result"] == ""
    assert rows[1]["error"] == "" and 0 < float(rows[1]["result"]) < 1


def test_unsupported_combination_is_an_error_row():
    rows = _rows(run_scenario("sweep: {variable: T_dB, values: [5]}\noutputs: [los_prob]\n"))
    assert rows[0]["error"]


def test_los_prob_rows():
    rows = _rows(run_scenario(
        "sweep: {variable: theta_deg, values: [10]}\noutputs: [los_prob]\n"
        "paths: [analytical_exact, analytical_approx]\n"))
    assert float(rows[1]["result"]) == pytest.approx(0.77909, abs=1e-5)
    assert 0 < float(rows[0]["result"]) < 1


def test_line_diagnostics():
    bad = "sweep: {variable: T_dB, values: [1]}\noutputs: [coverage]\nparams:\n  h_U: 50\n  h_Q: 3\n"
    with pytest.raises(ScenarioError, match=r":5: unknown parameter 'h_Q'"):
        parse_scenario(bad, "s.yaml")
    with pytest.raises(ScenarioError, match=r":2: unknown output"):
        parse_scenario("sweep: {variable: T_dB, values: [1]}\noutputs: [sinr]\n", "s.yaml")
    with pytest.raises(ScenarioError, match=r"s.yaml:\d+"):
        parse_scenario("outputs: [coverage]\nparams: {h_U: 5\n", "s.yaml")
    with pytest.raises(ScenarioError, match="unknown sweep variable"):
        parse_scenario("sweep: {variable: colour, values: [1]}\n")
    with pytest.raises(ScenarioError, match="height ordering"):
        parse_scenario("params: {h_U: 400}\n")


def test_range_values():
    sc = parse_scenario("sweep: {variable: T_dB, values: {start: -10, stop: 20, step: 2}}\n")
    assert len(sc.values) == 16 and sc.values[-1] == 20.0
    with pytest.raises(ScenarioError):
        parse_scenario("sweep: {variable: T_dB, values: {start: 0, stop: 1, step: 0}}\n")


def test_main_list_and_show(capsys):
    assert main(["--list-presets"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in STABLE_IDS)
    assert main(["--show-preset", "fig-cov-height"]) == 0
    assert "sweep:" in capsys.readouterr().out


def test_main_file_with_overrides(tmp_path):
    scen = tmp_path / "s.yaml"
    scen.write_text(SMALL)
    out = tmp_path / "o.csv"
    assert main([str(scen), "--paths", "montecarlo", "--trials", "300", "--seed", "9", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert {r["path"] for r in rows} == {"montecarlo"}
    assert {r["n_trials"] for r in rows} == {"300"} and {r["seed"] for r in rows} == {"9"}


def test_main_reports_errors(tmp_path, capsys):
    scen = tmp_path / "bad.yaml"
    scen.write_text("outputs: [coverage]\nmode: {kind: spiral}\n")
    assert main([str(scen)]) == 2
    assert "bad.yaml:2" in capsys.readouterr().err
    assert main(["--preset", "table-defaults", "--paths", "nope"]) == 2
    with pytest.raises(SystemExit):
        main([])


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "vhetnet.cli", "--list-presets"], capture_output=True, text=True,
                         check=True)
    assert "fig-los-fit" in res.stdout
