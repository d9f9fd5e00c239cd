import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from copula_gof import __version__
from copula_gof.cli import main, read_csv
from copula_gof.errors import GofError

ROOT = Path(__file__).resolve().parents[1]
TABLE = str(ROOT / "data" / "reference_100x100.json")
DATA = str(ROOT / "data" / "synthetic_frank_normal.csv")


def test_bundled_data_is_the_seed_zero_synthetic():
    from copula_gof.harness import synthetic_frank_normal

    data = read_csv(DATA)
    np.testing.assert_allclose(data.values, synthetic_frank_normal(0).values, rtol=1e-11)
    assert data.labels == ["Co", "Sc"]


def test_gof_report_and_reproducibility(tmp_path):
    args = ["gof", "--data", DATA, "--margins", "normal", "--copula", "frank", "--table", TABLE]
    assert main(args + ["--report", str(tmp_path / "a.json"), "--wn-grid", str(tmp_path / "w.csv")]) == 0
    assert main(args + ["--report", str(tmp_path / "b.json")]) == 0
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "b.json").read_text())
    assert a["reproducibility_hash"] == b["reproducibility_hash"]
    assert a["statistics"] == b["statistics"]
    assert a["p_values"]["kappa"] > 0.05 and abs(a["fitted"]["copula_params"][0] - 6.589) < 0.8
    assert a["column_order"] == ["Co", "Sc"] and a["version"] == __version__
    assert len((tmp_path / "w.csv").read_text().splitlines()) == 10001


def test_rejection_is_not_an_error(tmp_path):
    rc = main(["gof", "--data", DATA, "--margins", "normal", "--copula", "clayton", "--table", TABLE,
               "--report", str(tmp_path / "r.json")])
    assert rc == 0
    assert json.loads((tmp_path / "r.json").read_text())["p_values"]["kappa"] <= 0.01


def test_column_order_is_recorded(tmp_path):
    rc = main(["gof", "--data", DATA, "--margins", "normal", "--copula", "frank", "--column-order", "Sc,Co",
               "--report", str(tmp_path / "r.json")])
    assert rc == 0
    assert json.loads((tmp_path / "r.json").read_text())["column_order"] == ["Sc", "Co"]
    assert main(["gof", "--data", DATA, "--margins", "normal", "--copula", "frank", "--column-order", "Co"]) == 1


def test_grid_mismatch_exit_code(tmp_path):
    err = tmp_path / "err.json"
    rc = main(["gof", "--data", DATA, "--margins", "normal", "--copula", "frank", "--table", TABLE,
               "--grid", "50x50", "--error-json", str(err)])
    assert rc == 1
    assert json.loads(err.read_text())["error"] == "GridMismatch"


def test_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1.0,2.0\n3.0,oops\n")
    with pytest.raises(GofError):
        read_csv(bad)
    err = tmp_path / "e.json"
    assert main(["gof", "--data", str(bad), "--margins", "normal", "--copula", "frank", "--error-json", str(err)]) == 1
    assert json.loads(err.read_text())["error"] == "DataError"
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("a,b\n1.0,2.0\n3.0\n")
    with pytest.raises(GofError):
        read_csv(ragged)


def test_ties_need_jitter(tmp_path):
    from copula_gof.copulas import CLAYTON

    x = -np.log1p(-CLAYTON.sample(np.array([2.0]), 80, np.random.default_rng(0)))
    x[1, 0] = x[0, 0]
    path = tmp_path / "ties.csv"
    path.write_text("x,y\n" + "\n".join(f"{a:.17g},{b:.17g}" for a, b in x) + "\n")
    base = ["gof", "--data", str(path), "--margins", "exponential", "--copula", "clayton", "--quad-nodes", "100",
            "--grid", "20x20"]
    err = tmp_path / "e.json"
    assert main(base + ["--error-json", str(err)]) == 1
    assert json.loads(err.read_text())["error"] == "TiesInData"
    assert main(base + ["--jitter"]) == 0


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gof", "--data", DATA])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_tabulate_and_ppplot(tmp_path):
    out = tmp_path / "t.json"
    assert main(["tabulate", "--grid", "10x10", "--paths", "200", "--seed", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["n_paths"] == 200 and len(doc["grid"]["axes"]) == 2
    stats = tmp_path / "s.csv"
    stats.write_text("index,kappa\n" + "\n".join(f"{i},{v}" for i, v in enumerate(doc["kappa_samples"][::5])) + "\n")
    pp = tmp_path / "pp.csv"
    assert main(["ppplot", "--stats", str(stats), "--table", str(out), "--out", str(pp)]) == 0
    assert len(pp.read_text().splitlines()) == 41
    short = tmp_path / "short.csv"
    short.write_text("kappa\n1.0\n2.0\n")
    assert main(["ppplot", "--stats", str(short), "--table", str(out), "--out", str(pp)]) == 1


def test_simulate_writes_results(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        f"""
replicates = 2
table = "{TABLE}"

[[experiment]]
scenario = "tiny"
null_copula = "clayton"
null_margin = "exponential"
fix_lambda = [2.0]
generator = {{ margin = "exponential", margin_params = [1.0], copula = "clayton", copula_params = [2.0] }}
"""
    )
    out = tmp_path / "res"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary[0]["scenario"] == "tiny" and summary[0]["replicates"] == 2
    assert (out / "tiny.csv").exists()


def test_synth_and_module_entry(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["synth", "--seed", "1", "--n", "50", "--out", str(out)]) == 0
    assert read_csv(out).n == 50
    res = subprocess.run([sys.executable, "-m", "copula_gof", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == __version__
