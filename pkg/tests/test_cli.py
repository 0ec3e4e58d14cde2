import json
import subprocess
import sys

import numpy as np
import pytest

from toposeries.cli import main
from toposeries.persistence import PersistenceDiagram


@pytest.fixture
def series_csv(tmp_path):
    path = tmp_path / "x.csv"
    assert main(["generate", "--kind", "sinusoid", "--n", "120", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_generate_writes_value_column(series_csv):
    lines = series_csv.read_text().splitlines()
    assert lines[0] == "value" and len(lines) == 121


def test_generate_params_and_seed_override(tmp_path, monkeypatch):
    a, b, c = (tmp_path / f"{n}.csv" for n in "abc")
    main(["generate", "--kind", "ou", "--n", "50", "--seed", "1", "--params", "theta=-0.1", "--out", str(a)])
    monkeypatch.setenv("TDA_SEED", "1")
    main(["generate", "--kind", "ou", "--n", "50", "--seed", "99", "--params", "theta=-0.1", "--out", str(b)])
    monkeypatch.delenv("TDA_SEED")
    main(["generate", "--kind", "ou", "--n", "50", "--seed", "99", "--params", "theta=-0.1", "--out", str(c)])
    assert a.read_text() == b.read_text() != c.read_text()


def test_featurize_json_and_artifacts(series_csv, tmp_path):
    out, plot, dgm = tmp_path / "f.json", tmp_path / "p.csv", tmp_path / "d.json"
    code = main(["featurize", "--input", str(series_csv), "--m", "10", "--tau", "2", "--ndim", "1",
                 "--kappa", "0.1", "--concat", "--out", str(out), "--plot-data", str(plot),
                 "--diagram-out", str(dgm)])
    assert code == 0
    fv = json.loads(out.read_text())
    assert fv["dims"] == [0, 1] and sum(map(len, fv["values"])) == 20
    assert len(plot.read_text().splitlines()) == 21
    assert PersistenceDiagram.from_json(dgm.read_text()).n_dim == 1


def test_flags_win_over_config(series_csv, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"version": 1, "m": 10, "tau": 2, "n_dim": 1, "kappa": 0.25, "concat": True}))
    out = tmp_path / "f.json"
    assert main(["featurize", "--config", str(cfg), "--input", str(series_csv), "--kappa", "0.1",
                 "--out", str(out)]) == 0
    assert sum(map(len, json.loads(out.read_text())["values"])) == 20


def test_multiple_columns_concatenate(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "two.csv"
    rows = ["a,b"] + [f"{float(u)!r},{float(v)!r}" for u, v in rng.normal(size=(60, 2))]
    path.write_text("\n".join(rows) + "\n")
    out = tmp_path / "f.json"
    assert main(["featurize", "--input", str(path), "--column", "a", "--column", "b", "--m", "3", "--tau", "1",
                 "--ndim", "1", "--kappa", "0.5", "--out", str(out)]) == 0
    assert sum(map(len, json.loads(out.read_text())["values"])) == 8


def test_config_errors_exit_2(series_csv, tmp_path, capsys):
    assert main(["featurize", "--m", "10"]) == 2
    assert main(["featurize", "--input", str(tmp_path / "missing.csv")]) == 2
    assert main(["featurize", "--input", str(series_csv), "--m", "200", "--tau", "1"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["featurize", "--input", str(series_csv), "--config", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_simplex_cap_exits_3(series_csv):
    assert main(["featurize", "--input", str(series_csv), "--m", "4", "--tau", "1", "--dmax", "100",
                 "--cap", "50"]) == 3


def test_bottleneck_command(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(PersistenceDiagram([(1, 0.0, 2.0)], 1).to_json())
    b.write_text(PersistenceDiagram([], 1).to_json())
    assert main(["bottleneck", "--a", str(a), "--b", str(b), "--dim", "1"]) == 0
    assert float(capsys.readouterr().out) == 1.0
    b.write_text("{}")
    assert main(["bottleneck", "--a", str(a), "--b", str(b), "--dim", "1"]) == 2


def test_stability_command(tmp_path, capsys):
    cfg, out = tmp_path / "s.json", tmp_path / "r.json"
    cfg.write_text(json.dumps({"N": 60, "m": 2, "tau": 3, "trials": 20}))
    assert main(["stability-test", "--config", str(cfg), "--trials", "2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["trials_run"] == 2 and rep["all_passed"]
    assert "2/2" in capsys.readouterr().err
    cfg.write_text(json.dumps({"N": 60, "unknown": 1}))
    assert main(["stability-test", "--config", str(cfg), "--out", str(out)]) == 2


def test_classify_demo_command(tmp_path):
    out = tmp_path / "r.json"
    code = main(["classify-demo", "--sequences-per-class", "8", "--n", "60", "--knn-k", "1",
                 "--train-fraction", "0.5", "--m", "5", "--tau", "2", "--ndim", "1", "--kappa", "0.1",
                 "--grid", "m=4,5,tau=1", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["n_test"] == 12 and len(rep["grid_scores"]) == 2
    assert main(["classify-demo", "--sequences-per-class", "1", "--train-fraction", "0.9",
                 "--out", str(out)]) == 2


def test_label_patterns_command(tmp_path, capsys):
    from toposeries.patterns import synthetic_ou_prices

    prices = tmp_path / "p.csv"
    prices.write_text("price\n" + "\n".join(repr(float(v)) for v in synthetic_ou_prices(500, seed=2)) + "\n")
    out = tmp_path / "labels.csv"
    assert main(["label-patterns", "--input", str(prices), "--patterns", "P1,P4", "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["balance"]) == {"P1", "P4"}
    rows = out.read_text().splitlines()
    assert rows[0] == "t,pattern,label" and len(rows) > 1
    assert main(["label-patterns", "--input", str(prices), "--patterns", "P7"]) == 2


def test_console_entry_point(series_csv):
    proc = subprocess.run([sys.executable, "-m", "toposeries.cli", "featurize", "--input", str(series_csv),
                           "--m", "10", "--tau", "2", "--ndim", "0", "--kappa", "0.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["values"] == [[0.25, 0.25]]
