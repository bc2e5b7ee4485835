import csv
import json
import subprocess
import sys

import pytest

from iqnkit.cli import COMPARE_COLUMNS, SCALING_COLUMNS, STEPS_COLUMNS, main
from iqnkit.cli.config import ConfigError, parse_config

ZERO = """
[problem]
generator = explicit
matrix = 0 0; 0 0
forcing = 1 2

[accelerator ils]
scheme = ILS
omega0 = 1.0
"""

SURROGATE = """
[problem]
generator = added_mass
m = 30
rho_spectral = 1.2
n_steps = 4
seed = 0

[accelerator a]
scheme = {a}
omega0 = {omega}

[accelerator b]
scheme = {b}
"""


def write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_golden_headers():
    assert STEPS_COLUMNS == ["step", "iterations", "residual_final", "update_seconds", "apply_seconds"]
    assert COMPARE_COLUMNS == ["scheme", "status", "avg_iterations", "relative_iterations_pct",
                               "relative_runtime_pct", "update_share_pct"]
    assert SCALING_COLUMNS == ["scheme", "m", "status", "update_seconds", "flops"]


def test_run_zero_operator(tmp_path):
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, ZERO), "--out", str(out)]) == 0
    rows = read_csv(out / "steps.csv")
    assert rows[0] == STEPS_COLUMNS
    assert rows[1][:2] == ["0", "1"]
    summary = json.loads((out / "summary.json").read_text())
    assert {"version", "scheme", "avg_iterations", "converged", "flops", "warnings"} <= set(summary)
    assert (out / "config.ini").exists()


def test_malformed_config_writes_nothing(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, "[problem]\ngenerator = moon\n"), "--out", str(out)]) == 2
    assert not out.exists()
    assert "iqnkit:" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "o")]) == 2


def test_compare_identical_specs(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, SURROGATE.format(a="ILS", omega=0.5, b="ILS"))
    assert main(["compare", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "compare.csv")
    assert rows[0] == COMPARE_COLUMNS
    assert rows[1][3] == "100.00" and rows[2][3] == "100.00"


def test_compare_marks_diverged(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, SURROGATE.format(a="ConstRelax", omega=1.0, b="ILS"))
    assert main(["compare", cfg, "--out", str(out)]) == 3
    rows = read_csv(out / "compare.csv")
    assert rows[1][1] == "DIVERGED" and rows[2][1] == "OK"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schemes"][0]["failure"].startswith("NotConverged")


def test_compare_needs_two(tmp_path):
    assert main(["compare", write(tmp_path, ZERO), "--out", str(tmp_path / "o")]) == 2


def test_scaling_small(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, SURROGATE.format(a="IMVLSImplicit", omega=0.5, b="IMVJ"))
    assert main(["scaling", cfg, "--out", str(out), "--m", "20,40,80"]) == 0
    rows = read_csv(out / "scaling.csv")
    assert rows[0] == SCALING_COLUMNS
    assert len(rows) == 7
    summary = json.loads((out / "summary.json").read_text())
    assert summary["m"] == [20, 40, 80]
    assert set(summary["schemes"][0]["slope"]) == {"flops", "seconds"}


def test_scaling_rejects_unsorted_m(tmp_path):
    cfg = write(tmp_path, SURROGATE.format(a="ILS", omega=0.5, b="IMVJ"))
    assert main(["scaling", cfg, "--out", str(tmp_path / "o"), "--m", "40,20,80"]) == 2


def test_seed_override(tmp_path):
    cfg = parse_config(SURROGATE.format(a="ILS", omega=0.5, b="IMVJ"), seed=9)
    assert cfg.problem["seed"] == 9


def test_config_round_trip():
    cfg = parse_config(SURROGATE.format(a="ConstRelax", omega=0.3, b="IMVLSImplicit"))
    again = parse_config(cfg.to_text())
    assert again.problem == cfg.problem
    assert again.accelerators == cfg.accelerators
    assert again.criteria == cfg.criteria
    explicit = parse_config(ZERO)
    assert parse_config(explicit.to_text()).problem == explicit.problem


@pytest.mark.parametrize("text", [
    "",
    "[problem]\nm = 10\nrho_spectral = 1.2\n",
    "[problem]\nm = 10\nrho_spectral = 1.2\n[accelerator x]\nomega0 = 0.5\n",
    "[problem]\nm = 10\nrho_spectral = 1.2\n[accelerator x]\nscheme = ILS\nspeed = 3\n",
    "[problem]\nm = ten\nrho_spectral = 1.2\n[accelerator x]\nscheme = ILS\n",
    "[problem]\ngenerator = explicit\nmatrix = 1 0; 0 1\nforcing = 1 1\n[accelerator x]\nscheme = ILS\n",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_module_entry_point(tmp_path):
    out = tmp_path / "out"
    proc = subprocess.run([sys.executable, "-m", "iqnkit", "run", write(tmp_path, ZERO), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "steps.csv").exists()
