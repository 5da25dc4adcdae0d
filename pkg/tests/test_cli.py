import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ctspline import L2Params, SvrParams, fit_l1, fit_l2
from ctspline import cli, experiment
from ctspline.errors import ConvergenceError
from ctspline.experiment import paper_times

SYSTEM = {"A": [[0, 1], [1, 0]], "b": [1, 0], "c": [0, 1]}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def write_data(path, t, y, header="t,y"):
    rows = [header] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(t, y)]
    path.write_text("\n".join(rows) + "\n")
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture
def files(tmp_path, demo_samples):
    data = write_data(tmp_path / "data.csv", demo_samples.times, demo_samples.values)
    l2 = write_json(tmp_path / "l2.json", {"system": SYSTEM, "fit": {"mode": "l2", "lambda": 0.01},
                                           "output": {"grid_points": 201}})
    l1 = write_json(tmp_path / "l1.json", {"system": SYSTEM, "fit": {"mode": "l1", "C": 10, "epsilon": 0.1}})
    return tmp_path, data, l2, l1


def test_fit_l2_outputs(files, capsys):
    tmp, data, l2, _ = files
    out, plot = tmp / "curve.csv", tmp / "fit.svg"
    assert cli.main(["fit", "--config", l2, "--data", data, "--output", str(out), "--plot", str(plot)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["t", "u", "y_fit"] and len(rows) - 1 == 201
    res = read_csv(tmp / "curve.residuals.csv")
    assert res[0] == ["t_i", "y_i", "y_fit_i", "residual"] and len(res) == 22
    assert plot.read_text().startswith("<?xml") and 'width="800"' in plot.read_text()
    assert "<circle" in plot.read_text()


def test_fit_l1_matches_library(files, gram, demo_samples):
    tmp, data, _, l1 = files
    out = tmp / "l1.csv"
    assert cli.main(["fit", "--config", l1, "--data", data, "--output", str(out)]) == 0
    res = np.array(read_csv(tmp / "l1.residuals.csv")[1:], dtype=float)
    theta, _ = fit_l1(gram, demo_samples.values, SvrParams(10.0, 0.1))
    assert np.allclose(res[:, 2], gram.entries @ theta, atol=1e-10)
    assert len(read_csv(out)) == 502


def test_decreasing_times_cite_the_row(tmp_path, files, capsys):
    _, _, l2, _ = files
    data = write_data(tmp_path / "bad.csv", [0.1, 0.5, 0.4], [1, 2, 3])
    code = cli.main(["fit", "--config", l2, "--data", data, "--output", str(tmp_path / "o.csv")])
    assert code == 2
    err = capsys.readouterr().err
    assert "line 4" in err and "increasing" in err
    assert not (tmp_path / "o.csv").exists()


def test_missing_C_is_named(tmp_path, files, capsys):
    _, data, _, _ = files
    cfg = write_json(tmp_path / "c.json", {"system": SYSTEM, "fit": {"mode": "l1", "epsilon": 0.1}})
    assert cli.main(["fit", "--config", cfg, "--data", data, "--output", str(tmp_path / "o.csv")]) == 2
    assert '"C"' in capsys.readouterr().err


@pytest.mark.parametrize("config, needle", [
    ({"system": SYSTEM, "fit": {"mode": "l2"}}, '"lambda"'),
    ({"system": SYSTEM, "fit": {"mode": "l2", "lambda": -1}}, "lambda"),
    ({"system": SYSTEM, "fit": {"mode": "svm", "C": 1}}, '"mode"'),
    ({"system": {"A": [[1]], "b": [1]}, "fit": {"mode": "l2", "lambda": 1}}, '"c"'),
    ({"system": {"A": [[1, 0]], "b": [1], "c": [1]}, "fit": {"mode": "l2", "lambda": 1}}, "system"),
    ({"system": SYSTEM, "fit": {"mode": "l1", "C": 1, "epsilon": "wide"}}, '"epsilon"'),
    ({"system": SYSTEM, "fit": {"mode": "l2", "lambda": 1, "weights": [1, 2]}}, '"weights"'),
    ({"system": SYSTEM, "fit": {"mode": "l2", "lambda": 1}, "output": {"grid_points": 1}}, '"grid_points"'),
    ({"system": SYSTEM, "fit": {"mode": "l2", "lambda": 1}, "quadrature": {"tol": 0}}, "quadrature"),
])
def test_config_errors(tmp_path, files, capsys, config, needle):
    _, data, _, _ = files
    cfg = write_json(tmp_path / "c.json", config)
    assert cli.main(["fit", "--config", cfg, "--data", data, "--output", str(tmp_path / "o.csv")]) == 2
    assert needle in capsys.readouterr().err


@pytest.mark.parametrize("text, needle", [
    ("time,value\n0.1,1\n", "header"),
    ("t,y\n0.1,1\n0.2\n", "line 3"),
    ("t,y\n0.1,abc\n", "line 2"),
    ("t,y\n-0.1,1\n", "line 2"),
    ("t,y\n", "no data"),
    ("t,y\n0.1,nan\n", "line 2"),
])
def test_data_errors(tmp_path, files, capsys, text, needle):
    _, _, l2, _ = files
    (tmp_path / "d.csv").write_text(text)
    code = cli.main(["fit", "--config", l2, "--data", str(tmp_path / "d.csv"), "--output", str(tmp_path / "o.csv")])
    assert code == 2
    assert needle in capsys.readouterr().err


def test_missing_files(tmp_path, files):
    _, data, l2, _ = files
    assert cli.main(["fit", "--config", str(tmp_path / "nope.json"), "--data", data,
                     "--output", str(tmp_path / "o.csv")]) == 2
    assert cli.main(["fit", "--config", l2, "--data", str(tmp_path / "nope.csv"),
                     "--output", str(tmp_path / "o.csv")]) == 2


def test_numerical_failure_leaves_no_files(tmp_path, files):
    _, data, _, _ = files
    cfg = write_json(tmp_path / "q.json", {"system": SYSTEM, "fit": {"mode": "l2", "lambda": 0.01},
                                           "quadrature": {"tol": 1e-14, "max_evals": 20}})
    out = tmp_path / "sub" / "o.csv"
    assert cli.main(["fit", "--config", cfg, "--data", data, "--output", str(out), "--plot",
                     str(tmp_path / "p.svg")]) == 4
    assert not out.exists() and not (tmp_path / "p.svg").exists()
    assert not list(tmp_path.glob("**/*.tmp"))


def test_convergence_failure_exit_code(files, monkeypatch, tmp_path):
    _, data, _, l1 = files

    def stuck(model, samples, config, gram=None):
        raise ConvergenceError("stuck", theta=np.zeros(21), gap=1.0)

    monkeypatch.setattr(cli, "fit_spline", stuck)
    assert cli.main(["fit", "--config", l1, "--data", data, "--output", str(tmp_path / "o.csv")]) == 3
    assert not (tmp_path / "o.csv").exists()


def test_non_minimal_system_warns(tmp_path, files, capsys):
    _, data, _, _ = files
    cfg = write_json(tmp_path / "n.json", {"system": {"A": [[1, 0], [0, 1]], "b": [1, 0], "c": [1, 0]},
                                           "fit": {"mode": "l2", "lambda": 0.1}})
    assert cli.main(["fit", "--config", cfg, "--data", data, "--output", str(tmp_path / "o.csv")]) == 0
    assert "not minimal" in capsys.readouterr().err


def test_gram_dump(files, gram):
    tmp, data, l2, _ = files
    out = tmp / "G.csv"
    assert cli.main(["gram", "--config", l2, "--data", data, "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0][0] != "t" and len(rows) == 21 and all(len(r) == 21 for r in rows)
    G = np.array(rows, dtype=float)
    assert G[0, 0] == pytest.approx(3.3400e-4, abs=1e-8)
    assert np.array_equal(G, G.T)
    assert np.array_equal(G, gram.entries)


def test_gram_single_sample(tmp_path, files):
    _, _, l2, _ = files
    data = write_data(tmp_path / "one.csv", [0.1], [0.3])
    out = tmp_path / "G1.csv"
    assert cli.main(["gram", "--config", l2, "--data", data, "--output", str(out)]) == 0
    assert len(read_csv(out)) == 1 and len(read_csv(out)[0]) == 1


def test_gram_round_trip(files, demo_samples):
    tmp, data, l2, l1 = files
    out = tmp / "G.csv"
    cli.main(["gram", "--config", l2, "--data", data, "--output", str(out)])
    G = np.loadtxt(out, delimiter=",")
    cli.main(["fit", "--config", l2, "--data", data, "--output", str(tmp / "c.csv")])
    integrated = np.array(read_csv(tmp / "c.residuals.csv")[1:], dtype=float)[:, 2]
    theta = fit_l2(G, demo_samples.values, L2Params(0.01))
    assert np.abs(G @ theta - integrated).max() <= 1e-12


def test_fmt_is_lossless():
    rng = np.random.default_rng(0)
    for v in rng.normal(size=100) * 10.0 ** rng.integers(-20, 20, 100):
        assert float(cli.fmt(v)) == v


def test_demo_outputs_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["demo", "--out", str(a)]) == 0
    assert cli.main(["demo", "--out", str(b)]) == 0
    names = ["report.json", "l2_curve.csv", "l1_curve.csv", "comparison.svg", "errors.svg"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    report = json.loads((a / "report.json").read_text())
    assert report["robustness_demonstrated"] is True
    assert read_csv(a / "l1_curve.csv")[0] == ["t", "u", "y_fit"]
    assert 'stroke-dasharray' in (a / "comparison.svg").read_text()


def test_demo_overrides_are_recorded(tmp_path):
    out = tmp_path / "o"
    args = ["demo", "--out", str(out), "--seed", "3", "--lambda", "0.1", "--C", "50", "--epsilon", "0.2",
            "--outlier-index", "12", "--outlier-offset", "-1.5", "--noise-sigma", "0.02"]
    assert cli.main(args) == 0
    spec = json.loads((out / "report.json").read_text())["spec"]
    assert spec == {**spec, "seed": 3, "lambda": 0.1, "C": 50.0, "epsilon": 0.2, "outlier_index": 12,
                    "outlier_offset": -1.5, "noise_sigma": 0.02}


def test_demo_clean_data_with_light_regularization(tmp_path):
    out = tmp_path / "clean"
    assert cli.main(["demo", "--out", str(out), "--outlier-offset", "0", "--noise-sigma", "0",
                     "--lambda", "1e-6", "--C", "1e7", "--epsilon", "0.02"]) == 0
    r = json.loads((out / "report.json").read_text())
    assert r["l2"]["max_abs_error"] <= 0.05 and r["l1"]["max_abs_error"] <= 0.05


def test_demo_bad_override(tmp_path, capsys):
    assert cli.main(["demo", "--out", str(tmp_path / "x"), "--outlier-index", "30"]) == 2
    assert "outlier_index" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_demo_regression_guard(tmp_path, monkeypatch):
    # with C = 10 as the default the robust fit loses, which must surface as exit 5
    literal = experiment.DemoSpec(l1=SvrParams(10.0, 0.1))
    monkeypatch.setattr(experiment, "DemoSpec", lambda: literal)
    assert cli.main(["demo", "--out", str(tmp_path / "g")]) == 5
    assert json.loads((tmp_path / "g" / "report.json").read_text())["robustness_demonstrated"] is False


def test_module_entry_point(tmp_path, files):
    _, data, l2, _ = files
    out = tmp_path / "m" / "c.csv"
    proc = subprocess.run([sys.executable, "-m", "ctspline", "fit", "--config", l2, "--data", data,
                           "--output", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
    proc = subprocess.run([sys.executable, "-m", "ctspline", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
