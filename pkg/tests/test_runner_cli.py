import csv
import json
import subprocess
import sys
import threading

import pytest

from hbar_sim import runner
from hbar_sim.cli import main
from hbar_sim.config import parse_config
from hbar_sim.constants import SOLAR_MASS
from hbar_sim.errors import ConvergenceError
from hbar_sim.geometry import gravitational_radius
from hbar_sim.runner import (emit_outputs, format_float, run_scenario, write_atomic)

SMALL = """
workers = 2
[atom]
omega = 100.0
[beam]
injection_rate = 1.0e4
[modes]
nu = [0.1, 0.5, 1.0]
[evolution]
samples = 11
[outputs]
directory = "unused"
"""


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture(scope="module")
def small_report():
    return run_scenario(parse_config(SMALL), trajectory=True)


def test_excite_grid_within_two_percent(small_report):
    assert small_report.checks["max_rel_diff"].value <= 0.02
    assert small_report.passed


def test_xi_grid_steady_state():
    cfg = parse_config(SMALL, ["modes.nu=[]", "modes.xi=[0.5, 1.0, 2.0]"])
    report = run_scenario(cfg, parts=("evolve",))
    assert report.checks["steady_linf_max"].value < 1e-8
    assert all(m.steady_linf < 1e-8 for m in report.modes)


def test_modes_sorted_and_complete(small_report):
    keys = [(m.omega, m.nu) for m in small_report.modes]
    assert keys == sorted(keys) and len(keys) == 3
    assert all(m.ok for m in small_report.modes)


def test_outputs_byte_identical_and_idempotent(small_report, tmp_path):
    a = emit_outputs(small_report, directory=tmp_path / "a")
    again = run_scenario(parse_config(SMALL), trajectory=True)
    b = emit_outputs(again, directory=tmp_path / "b")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    first = {p.name: p.read_bytes() for p in a}
    emit_outputs(again, directory=tmp_path / "a")
    assert {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()} == first


def test_csv_schema_and_round_trip(small_report, tmp_path):
    emit_outputs(small_report, subcommand="excite", directory=tmp_path)
    text = (tmp_path / "excite.csv").read_text()
    assert text.startswith("# schema: hbar-sim/excite v1\n")
    assert "\r" not in text
    rows = read_csv(tmp_path / "excite.csv")
    assert list(rows[0]) == list(runner.EXCITE_COLUMNS)
    for row, m in zip(rows, small_report.modes):
        assert float(row["P_exc_numeric"]) == m.P_exc_numeric  # bit-exact
        assert float(row["rel_diff"]) == m.rel_diff


def test_formats_selection(small_report, tmp_path):
    cfg = parse_config(SMALL, ["outputs.formats=['csv']"])
    paths = emit_outputs(small_report, cfg, directory=tmp_path)
    assert paths and all(p.suffix == ".csv" for p in paths)
    cfg = parse_config(SMALL, ["outputs.formats=['json']"])
    paths = emit_outputs(small_report, cfg, subcommand="entropy", directory=tmp_path / "j")
    assert [p.name for p in paths] == ["entropy.json"]


def test_entropy_json_fields(small_report, tmp_path):
    emit_outputs(small_report, subcommand="entropy", directory=tmp_path)
    data = json.loads((tmp_path / "entropy.json").read_text())
    per_mode = data["entropy"]["per_mode"]
    assert len(per_mode) == 3
    for key in ("nu", "n_dot", "m_dot_p", "A_dot_p", "S_dot_p", "S_dot_from_area"):
        assert key in per_mode[0]
    assert data["provenance"]["constants_version"] == "CODATA-2018"
    assert len(data["provenance"]["config_hash"]) == 64
    rows = read_csv(tmp_path / "entropy.csv")
    assert list(rows[0]) == list(runner.ENTROPY_COLUMNS)


def test_evolve_and_trajectory_tables(small_report, tmp_path):
    paths = emit_outputs(small_report, subcommand="evolve", directory=tmp_path)
    names = sorted(p.name for p in paths)
    assert names[:3] == ["evolve.json", "evolve_000.csv", "evolve_001.csv"]
    rows = read_csv(tmp_path / "evolve_000.csv")
    assert list(rows[0]) == list(runner.EVOLVE_COLUMNS) and len(rows) == 11
    assert float(rows[0]["n_mean"]) == 0.0
    assert abs(float(rows[-1]["total_prob"]) - 1) < 1e-9
    emit_outputs(small_report, subcommand="trajectory", directory=tmp_path)
    traj = read_csv(tmp_path / "trajectory.csv")
    assert list(traj[0]) == list(runner.TRAJECTORY_COLUMNS)
    assert float(traj[0]["r"]) == 50.0 and float(traj[-1]["r"]) == 1.01


def test_format_float():
    for x in (0.1, 1 / 3, 6.02214076e23, -2.5e-300):
        assert float(format_float(x)) == x
    assert format_float(1 / 3, 6) == "0.333333"
    assert format_float(float("nan")) == "nan"


def test_low_precision_output(small_report, tmp_path):
    cfg = parse_config(SMALL, ["outputs.precision=6"])
    emit_outputs(small_report, cfg, subcommand="excite", directory=tmp_path)
    row = read_csv(tmp_path / "excite.csv")[0]
    assert len(row["P_exc_numeric"].replace(".", "").split("e")[0].lstrip("0")) <= 6


def test_atomic_write_leaves_nothing_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "out.csv"
    write_atomic(target, "old\n")

    def boom(src, dst):
        raise OSError(28, "No space left on device")

    monkeypatch.setattr(runner.os, "replace", boom)
    with pytest.raises(OSError):
        write_atomic(target, "new\n")
    assert target.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_mode_failure_is_isolated(monkeypatch):
    real = runner.excitation_probability_numeric

    def flaky(atom, mode, cfg):
        if mode.nu == 0.5:
            raise ConvergenceError("extrapolation did not settle")
        return real(atom, mode, cfg)

    monkeypatch.setattr(runner, "excitation_probability_numeric", flaky)
    report = run_scenario(parse_config(SMALL), parts=("excite",))
    bad = [m for m in report.modes if not m.ok]
    assert len(bad) == 1 and "nu=0.5" in bad[0].status
    assert sum(m.ok for m in report.modes) == 2
    assert not report.passed and "modes_ok" in report.failed_checks()


def test_concurrent_scenarios(tmp_path):
    cfg = parse_config(SMALL, ["modes.nu=[0.5]", "evolution.enabled=false"])
    results = {}

    def job(name):
        rep = run_scenario(cfg, parts=("excite", "entropy"))
        results[name] = {p.name: p.read_bytes()
                         for p in emit_outputs(rep, directory=tmp_path / name)}

    threads = [threading.Thread(target=job, args=(n,)) for n in ("x", "y")]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results["x"] == results["y"] and results["x"]


def test_si_scenario_checks():
    r_g = gravitational_radius(SOLAR_MASS)
    scale = 299792458.0 / r_g
    cfg = parse_config(f"""
[black_hole]
mass = {SOLAR_MASS!r}
units = "si"
[atom]
omega = {100 * scale!r}
g = {scale!r}
[beam]
injection_rate = {1e4 * scale!r}
[modes]
nu = [{0.25 * scale!r}, {0.5 * scale!r}]
[evolution]
samples = 5
""")
    report = run_scenario(cfg, parts=("evolve", "entropy"))
    assert report.passed, report.failed_checks()
    dimless = run_scenario(parse_config(SMALL, ["modes.nu=[0.25, 0.5]", "evolution.samples=5"]),
                           parts=("evolve", "entropy"))
    for a, b in zip(report.modes, dimless.modes):
        assert a.gamma_e == pytest.approx(b.gamma_e, rel=1e-12)
        assert a.steady_linf < 1e-8


# -- command line ------------------------------------------------------------


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(SMALL.replace("nu = [0.1, 0.5, 1.0]", "nu = [0.5]"))
    return path


def test_cli_excite_ok(scenario, tmp_path, capsys):
    assert main(["excite", "--config", str(scenario), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "excite.csv").exists()
    assert "PASS max_rel_diff" in capsys.readouterr().out


def test_cli_physics_failure_exit_2(scenario, tmp_path):
    code = main(["excite", "--config", str(scenario), "--out", str(tmp_path / "o"),
                 "--set", "checks.max_rel_diff=1e-12", "--quiet"])
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["excite", "--config", "does-not-exist.toml"],
    ["excite", "--set", "atom.omega=-1"],
    ["excite", "--set", "atom.colour='red'"],
    ["frobnicate"],
    [],
])
def test_cli_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_cli_unwritable_output(scenario, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["trajectory", "--config", str(scenario), "--out", str(blocker), "--quiet"]) == 1


def test_cli_trajectory(scenario, tmp_path):
    out = tmp_path / "t"
    assert main(["trajectory", "--config", str(scenario), "--out", str(out), "--quiet"]) == 0
    data = json.loads((out / "trajectory.json").read_text())
    assert data["trajectory"]["tau_residual"] < 1e-8
    assert data["checks"]["geodesic_residual"]["passed"]


def test_console_script_entry_point(scenario, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hbar_sim.cli", "entropy", "--config",
                           str(scenario), "--out", str(tmp_path / "e"), "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "e" / "entropy.csv").exists()
