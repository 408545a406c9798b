import json

import numpy as np
import pytest

from penreg.cli import dumps_csv, dumps_json, load_csv, main
from penreg.errors import InputOutputError, ValidationError


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def raw_csv(tmp_path):
    return write(tmp_path / "raw.csv", "y,x1,x2\n1,1,2\n2,2,4\n")


@pytest.fixture
def dgp_config(tmp_path):
    cfg = {
        "seed": 3,
        "replications": 40,
        "dgp": {
            "design": {"type": "gaussian", "n": 60, "p": 8, "seed": 1},
            "theta0": {"s0": 2, "value": 1.5},
            "error": {"family": "gaussian", "scale": 1.0},
        },
    }
    return write(tmp_path / "cfg.json", json.dumps(cfg))


class TestLoadCsv:
    def test_header(self, tmp_path):
        p = write(tmp_path / "a.csv", "y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n")
        d = load_csv(p, True, "y")
        assert (d.n, d.p) == (3, 2)
        assert d.names == ("x1", "x2")
        np.testing.assert_array_equal(d.y, [1, 4, 7])

    def test_trailing_blank_line(self, tmp_path):
        a = load_csv(write(tmp_path / "a.csv", "y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n"), True, "y")
        b = load_csv(write(tmp_path / "b.csv", "y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n\n"), True, "y")
        np.testing.assert_array_equal(a.X, b.X)

    def test_non_numeric_cell_location(self, tmp_path):
        p = write(tmp_path / "a.csv", "y,x1,x2\n1,2,3\n4,5,abc\n")
        with pytest.raises(ValidationError, match=r"row 2, col 3"):
            load_csv(p, True, "y")

    def test_ragged(self, tmp_path):
        with pytest.raises(ValidationError, match="row 2"):
            load_csv(write(tmp_path / "a.csv", "y,x\n1,2\n3\n"), True, "y")

    def test_missing_target(self, tmp_path):
        with pytest.raises(ValidationError, match="target"):
            load_csv(write(tmp_path / "a.csv", "y,x\n1,2\n"), True, "z")

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputOutputError):
            load_csv(tmp_path / "nope.csv")

    def test_no_header_index_target(self, tmp_path):
        d = load_csv(write(tmp_path / "a.csv", "1,10\n2,20\n"), False, "2")
        np.testing.assert_array_equal(d.y, [10, 20])
        assert d.column_name(0) == "x1"

    def test_quoted_fields(self, tmp_path):
        d = load_csv(write(tmp_path / "a.csv", '"y","x, one"\n"1.5","2"\n'), True, "y")
        assert d.names == ("x, one",)


class TestSerialization:
    def test_json_17_digits(self):
        text = dumps_json({"a": 0.1, "b": [1.0 / 3.0], "c": float("nan"), "d": True, "e": None})
        assert "0.10000000000000001" in text
        back = json.loads(text)
        assert back["b"][0] == 1.0 / 3.0
        assert back["c"] is None and back["d"] is True

    def test_csv_flattening(self):
        text = dumps_csv([{"a": 1, "coef": {"x1": 0.5}, "v": [1.0, 2.0], "ok": False}])
        header, row = text.strip().split("\n")
        assert header == "a,coef.x1,v.1,v.2,ok"
        assert row == "1,0.5,1,2,false"


class TestFit:
    def test_worked_rank_deficient_system(self, capsys, raw_csv):
        code, out, _ = run_cli(capsys, "fit", "--input", raw_csv, "--estimator", "ridgeless")
        assert code == 0
        coefs = json.loads(out)["records"][0]["coefficients"]
        assert coefs["x1"] == pytest.approx(0.2, abs=1e-12)
        assert coefs["x2"] == pytest.approx(0.4, abs=1e-12)

    def test_round_trip(self, capsys, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((20, 3))
        y = X @ [1.0, -2.0, 0.5] + rng.standard_normal(20)
        lines = ["y,a,b,c"] + [",".join(format(v, ".17g") for v in (y[i], *X[i])) for i in range(20)]
        p = write(tmp_path / "d.csv", "\n".join(lines) + "\n")
        out = tmp_path / "fit.json"
        assert main(["fit", "--input", p, "--estimator", "ls", "--out", str(out)]) == 0
        coefs = json.loads(out.read_text())["records"][0]["coefficients"]
        theta = np.linalg.lstsq(X, y, rcond=None)[0]
        np.testing.assert_allclose([coefs[k] for k in "abc"], theta, atol=1e-12)

    def test_lasso_standardizes_by_default(self, capsys, tmp_path):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((30, 2)) + 3
        y = 5 + X @ [2.0, 0.0] + 0.1 * rng.standard_normal(30)
        lines = ["y,a,b"] + [",".join(format(v, ".17g") for v in (y[i], *X[i])) for i in range(30)]
        p = write(tmp_path / "d.csv", "\n".join(lines) + "\n")
        code, out, _ = run_cli(capsys, "fit", "--input", p, "--estimator", "lasso", "--lambda", "0.01")
        rec = json.loads(out)["records"][0]
        assert code == 0 and rec["standardized"] and rec["converged"] is True
        assert rec["intercept"] == pytest.approx(5.0, abs=0.5)

    def test_nonconvergence_marked(self, capsys, tmp_path):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((10, 30))
        lines = ["y," + ",".join(f"x{j}" for j in range(30))]
        lines += [",".join(format(v, ".17g") for v in (rng.standard_normal(), *X[i])) for i in range(10)]
        p = write(tmp_path / "d.csv", "\n".join(lines) + "\n")
        code, out, _ = run_cli(capsys, "fit", "--input", p, "--estimator", "lasso", "--lambda", "0.001",
                               "--max-iter", "1")
        assert code == 0
        assert json.loads(out)["records"][0]["converged"] is False

    def test_l0(self, capsys, raw_csv):
        code, out, _ = run_cli(capsys, "fit", "--input", raw_csv, "--estimator", "l0", "--radius", "1")
        assert code == 0 and json.loads(out)["records"][0]["support"] in ([1], [2])


class TestPath:
    def test_two_point_path(self, capsys, tmp_path):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((25, 4))
        y = X[:, 0] + rng.standard_normal(25)
        lines = ["y,a,b,c,d"] + [",".join(format(v, ".17g") for v in (y[i], *X[i])) for i in range(25)]
        p = write(tmp_path / "d.csv", "\n".join(lines) + "\n")
        code, out, _ = run_cli(capsys, "path", "--input", p, "--n-lambda", "2", "--format", "csv")
        assert code == 0
        rows = out.strip().split("\n")
        header = rows[0].split(",")
        first = dict(zip(header, rows[1].split(",")))
        assert len(rows) == 3 and first["nonzero"] == "0"

    def test_default_grid_size(self, capsys, dgp_config):
        code, out, _ = run_cli(capsys, "path", "--config", dgp_config)
        assert code == 0 and len(json.loads(out)["records"]) == 100

    def test_path_rejects_other_estimators(self, capsys, raw_csv):
        code, _, err = run_cli(capsys, "path", "--input", raw_csv, "--estimator", "ridge")
        assert code == 2 and "path" in err


class TestRiskBoundsMc:
    def test_risk_from_dgp(self, capsys, dgp_config):
        code, out, _ = run_cli(capsys, "risk", "--config", dgp_config, "--estimator", "ls")
        recs = json.loads(out)["records"]
        assert code == 0
        assert recs[0]["source"] == "theoretical" and recs[1]["source"] == "empirical"
        assert recs[0]["mpr"] == pytest.approx(8 / 60)

    def test_risk_from_csv(self, capsys, tmp_path, raw_csv):
        cfg = write(tmp_path / "c.json", json.dumps({"theta0": [1.0, 0.0], "sigma": 1.0}))
        code, out, _ = run_cli(capsys, "risk", "--config", cfg, "--input", raw_csv)
        rec = json.loads(out)["records"][0]
        assert code == 0 and rec["estimator"] == "ridgeless"
        assert rec["mpr"] == pytest.approx(0.5)

    def test_lambda_star_scan(self, capsys, tmp_path, dgp_config):
        cfg = json.loads(open(dgp_config).read())
        cfg["lambda_grid"] = [0.1, 1.0, 10.0, 100.0]
        cfg.pop("replications")
        p = write(tmp_path / "c2.json", json.dumps(cfg))
        code, out, _ = run_cli(capsys, "risk", "--config", p, "--estimator", "ridge")
        recs = json.loads(out)["records"]
        assert code == 0 and len(recs) == 5
        assert sum(bool(r.get("is_lambda_star")) for r in recs) <= 1

    def test_bounds(self, capsys, dgp_config):
        code, out, _ = run_cli(capsys, "bounds", "--config", dgp_config)
        rec = json.loads(out)["records"][0]
        assert code == 0
        assert rec["lambda"] == rec["lambda_oracle"]
        assert rec["kappa_source"] == "exact" and rec["violated"] is False
        assert rec["lemma_audit_passed"] is True

    def test_mc_risk_and_coverage(self, capsys, dgp_config):
        code, out, _ = run_cli(capsys, "mc", "--config", dgp_config, "--estimator", "ridgeless")
        assert code == 0 and {r["source"] for r in json.loads(out)["records"]} == {"empirical", "theoretical"}
        code, out, _ = run_cli(capsys, "mc", "--config", dgp_config, "--experiment", "coverage")
        rec = json.loads(out)["records"][0]
        assert code == 0 and rec["violations"] == 0 and rec["consistent"] is True


class TestExitCodes:
    def test_validation(self, capsys, tmp_path):
        p = write(tmp_path / "a.csv", "y,x\n1,abc\n")
        code, _, err = run_cli(capsys, "fit", "--input", p)
        assert code == 2 and "fit" in err and "(row 1, col 2)" in err

    def test_io(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "fit", "--input", str(tmp_path / "missing.csv"))
        assert code == 4

    def test_unwritable_output(self, capsys, raw_csv, tmp_path):
        code, _, _ = run_cli(capsys, "fit", "--input", raw_csv, "--out", str(tmp_path / "no" / "dir.json"))
        assert code == 4

    def test_numerical(self, capsys, raw_csv, monkeypatch):
        def boom(*a, **k):
            raise np.linalg.LinAlgError("SVD did not converge")

        monkeypatch.setattr(np.linalg, "svd", boom)
        code, _, _ = run_cli(capsys, "fit", "--input", raw_csv)
        assert code == 3

    def test_no_input(self, capsys):
        code, _, err = run_cli(capsys, "fit")
        assert code == 2 and "input" in err

    def test_bad_config_key(self, capsys, tmp_path, raw_csv):
        p = write(tmp_path / "c.json", json.dumps({"lamda": 1.0}))
        code, _, err = run_cli(capsys, "fit", "--config", p, "--input", raw_csv)
        assert code == 2 and "lamda" in err

    def test_flags_override_config(self, capsys, tmp_path, raw_csv):
        p = write(tmp_path / "c.json", json.dumps({"estimator": "ridge", "lambda": -1.0}))
        code, out, _ = run_cli(capsys, "fit", "--config", p, "--input", raw_csv, "--lambda", "2")
        assert code == 0 and json.loads(out)["records"][0]["lambda"] == 2.0

    def test_argparse_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--estimator", "nonsense"])
        assert exc.value.code == 2


class TestDeterminism:
    @pytest.mark.parametrize("sub, extra", [
        ("fit", ["--estimator", "lasso", "--lambda", "0.1"]),
        ("path", ["--n-lambda", "10"]),
        ("risk", ["--estimator", "ridge", "--lambda", "1"]),
        ("bounds", []),
        ("mc", ["--estimator", "ridge", "--lambda", "1"]),
        ("mc", ["--experiment", "coverage"]),
    ])
    def test_byte_identical(self, tmp_path, dgp_config, sub, extra):
        outs = []
        for i, workers in enumerate(("1", "2", "1")):
            out = tmp_path / f"{sub}{i}.json"
            assert main([sub, "--config", dgp_config, "--workers", workers, "--out", str(out), *extra]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]
