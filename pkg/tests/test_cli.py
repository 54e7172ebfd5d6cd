import numpy as np
import pytest

from sgvi.cli import main
from sgvi.report import read_csv

BENCH = """
[experiment]
scenario = "benchmark1d"
estimators = ["sgvi", "map"]
trials = 3
steps = 8
seed = 4
[model]
Q = 1.0
R = 1.0
"""

LINEAR = """
[experiment]
scenario = "linear"
estimators = ["sgvi", "ief", "map"]
trials = 3
steps = 15
seed = 2
[sgvi]
epsilon = 1e-12
max_iters = 200
"""

CT = """
[experiment]
scenario = "coordinated-turn"
trials = 2
steps = 10
seed = 1
[mismatch]
enabled = true
"""


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", write(tmp_path, BENCH)]) == 0
    assert "benchmark1d" in capsys.readouterr().out


@pytest.mark.parametrize("edit", [
    ("trials = 3", "trials = 0"),
    ('["sgvi", "map"]', '["sgvi", "ukf"]'),
    ("Q = 1.0", ""),
    ("[model]", "[modle]"),
])
def test_config_errors_exit_2(tmp_path, capsys, edit):
    assert main(["validate", write(tmp_path, BENCH.replace(*edit))]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "none.toml")]) == 2


def test_negative_seed_exit_2(tmp_path):
    assert main(["validate", write(tmp_path, BENCH), "--seed", "-1"]) == 2


def test_run_writes_csvs(tmp_path):
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, BENCH), "--out", str(out)]) == 0
    rows = read_csv(out / "steps.csv")
    assert len(rows) == 2 * 3 * 8
    assert set(rows[0]) >= {"estimator", "trial", "seed", "t", "est_0", "var_0", "truth_0", "nees",
                            "iterations", "converged"}
    err = float(rows[5]["est_0"]) - float(rows[5]["truth_0"])
    assert float(rows[5]["err_0"]) == err
    summary = read_csv(out / "summary.csv")
    assert [r["estimator"] for r in summary] == ["sgvi", "map"]
    assert (out / "timing.csv").exists() and (out / "wallclock.csv").exists()


def test_run_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path, BENCH)
    for d in ("a", "b"):
        assert main(["run", cfg, "--out", str(tmp_path / d), "--threads", "2"]) == 0
    for name in ("steps.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override_changes_output(tmp_path):
    cfg = write(tmp_path, BENCH)
    main(["run", cfg, "--out", str(tmp_path / "a")])
    main(["run", cfg, "--out", str(tmp_path / "b"), "--seed", "99"])
    assert (tmp_path / "a" / "steps.csv").read_bytes() != (tmp_path / "b" / "steps.csv").read_bytes()


def test_linear_run_matches_information_filter(tmp_path):
    out = tmp_path / "lin"
    assert main(["run", write(tmp_path, LINEAR), "--out", str(out)]) == 0
    rows = {r["estimator"]: r for r in read_csv(out / "summary.csv")}
    assert float(rows["sgvi"]["max_dev_vs_ief"]) < 1e-6
    assert float(rows["map"]["max_dev_vs_ief"]) < 1e-6


def test_compare_linearization(tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare-linearization", write(tmp_path, CT), "--out", str(out)]) == 0
    rows = read_csv(out / "compare.csv")
    assert [r["method"] for r in rows] == ["S-GVI (w/ SLR)", "S-GVI (w/ Jacobian)", "MAP"]
    assert all(np.isfinite(float(r["rmse"])) for r in rows)
    assert "S-GVI (w/ SLR)" in capsys.readouterr().out


def test_unwritable_output_exit_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", write(tmp_path, BENCH), "--out", str(blocker / "sub")]) == 3
    assert "runtime error" in capsys.readouterr().err
