"""
命令行: 退出码约定、输出文件与确定性
"""

import json
import math

import numpy as np
import pytest

from app.cli import main, parse_point
from app.core.exceptions import ConfigurationError
from tests.conftest import SIGMA2_EXAMPLE

EXTERIOR_RAY = [0.0, 6.0, np.pi / 2, 0.0, 0.0, -1.0, 0.0, 0.5]


@pytest.fixture
def run(tmp_path, capsys):
    """以 tmp_path 为输出目录与数据库位置调用 main，返回 (退出码, stdout, stderr)"""
    db_url = f"sqlite:///{tmp_path / 'runs.db'}"

    def _run(*argv, out=None):
        code = main([*argv, "--out", str(out or tmp_path), "--db", db_url, "--log-level", "WARNING"])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


def test_parse_point_forms(tmp_path):
    assert parse_point(json.dumps(SIGMA2_EXAMPLE)).as_tuple() == tuple(SIGMA2_EXAMPLE)
    named = parse_point('{"r": 3, "theta": 1, "p_t": 1, "p_r": 0, "p_theta": 0, "p_phi": 0}')
    assert named.base.r == 3.0 and named.base.t == 0.0
    path = tmp_path / "point.json"
    path.write_text(json.dumps(SIGMA2_EXAMPLE), encoding="utf-8")
    assert parse_point(f"@{path}").mom.p_r == 7.0
    for bad in ["not json", "[1, 2, 3]", '"text"', f"@{tmp_path / 'missing.json'}"]:
        with pytest.raises(ConfigurationError):
            parse_point(bad)


def test_classify_sigma2(run):
    code, out, _ = run("classify", json.dumps(SIGMA2_EXAMPLE))
    assert code == 0
    data = json.loads(out)
    assert data["region"] == "Sigma2"
    assert data["delta"] == 0.0
    assert data["phi"] == pytest.approx(0.25)


def test_classify_exterior(run):
    code, out, _ = run("classify", json.dumps([0.0, 3.0, 1.0, 0.0, 0.2, -0.3, 0.1, 0.4]))
    assert code == 0
    assert json.loads(out)["region"] == "Exterior"


def test_classify_zero_covector(run):
    code, _, err = run("classify", json.dumps([0.0, 3.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
    assert code == 3
    assert json.loads(err)["error"] == "ZeroCovectorError"


def test_parse_failures(run):
    assert run("classify", "not json")[0] == 2
    assert run("classify", "[1, 2]")[0] == 2
    assert main(["no-such-command"]) == 2


def test_unknown_config_key(run, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"seed": 1, "bogus": true}', encoding="utf-8")
    assert run("classify", json.dumps(SIGMA2_EXAMPLE), "--config", str(cfg))[0] == 2
    assert run("classify", json.dumps(SIGMA2_EXAMPLE), "--config", str(tmp_path / "missing.json"))[0] == 2


def test_verify_all(run, tmp_path):
    code, out, _ = run("verify", "all", "--n-samples", "20")
    assert code == 0
    assert json.loads(out)["passed"] is True
    for lemma in ["double-char", "involutive", "hessian-rank", "subprincipal"]:
        report = json.loads((tmp_path / f"verify_{lemma}.json").read_text(encoding="utf-8"))
        assert report["pass"] is True
        assert report["lemma"] == lemma


def test_verify_zero_samples(run):
    assert run("verify", "double-char", "--n-samples", "0")[0] == 2


def test_verify_subextremal_control(run):
    code, out, _ = run("verify", "double-char", "--n-samples", "20", "--control-spin", "0.9")
    assert code == 1
    assert json.loads(out)["passed"] is False
    assert run("verify", "involutive", "--n-samples", "20", "--control-spin", "0.9")[0] == 0


def test_verify_is_deterministic(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("verify", "hessian-rank", "--n-samples", "15", "--seed", "7", out=a)[0] == 0
    assert run("verify", "hessian-rank", "--n-samples", "15", "--seed", "7", out=b)[0] == 0
    name = "verify_hessian-rank.json"
    assert (a / name).read_bytes() == (b / name).read_bytes()


def test_trace_zero_span(run, tmp_path):
    code, out, _ = run("trace", "--point", json.dumps(EXTERIOR_RAY), "--span", "0", "0", "--normalize")
    assert code == 0
    assert json.loads(out)["n_samples"] == 1
    lines = (tmp_path / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",")[0] == "s"
    assert len(lines) == 2


def test_trace_requires_null_start(run):
    assert run("trace", "--point", json.dumps(EXTERIOR_RAY))[0] == 3


def test_orbit_wraps_phi(run, tmp_path):
    s1_max = 2 * math.pi * 2.0
    code, _, _ = run("orbit", "--point", json.dumps(SIGMA2_EXAMPLE), "--s1-max", repr(s1_max), "--steps", "4")
    assert code == 0
    fibre = json.loads((tmp_path / "orbit.json").read_text(encoding="utf-8"))
    end = fibre["points"][-1]["point"]
    assert end["base"]["phi"] == pytest.approx(2 * math.pi)
    assert math.remainder(end["base"]["phi"], 2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    rows = (tmp_path / "orbit.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "s1,s2,t,r,theta,phi,p_t,p_r,p_theta,p_phi"
    assert len(rows) == 6


def test_orbit_off_sigma2(run):
    assert run("orbit", "--point", json.dumps(EXTERIOR_RAY), "--s1-max", "1")[0] == 3


def test_propagate_from_file(run, tmp_path):
    samples = tmp_path / "samples.json"
    samples.write_text(json.dumps([SIGMA2_EXAMPLE]), encoding="utf-8")
    code, out, _ = run("propagate", "--samples", str(samples))
    assert code == 0
    census = json.loads(out)
    assert census["leaf_count"] == 3
    assert census["by_channel"]["HorizonOrbit"] == 3
    assert (tmp_path / "propagation.csv").exists()
    result = json.loads((tmp_path / "propagation.json").read_text(encoding="utf-8"))
    assert result["initial_ids"] == [0]


def test_kernels_chart_and_boxcar(run, tmp_path):
    code, out, _ = run("kernels", "chart")
    assert code == 0
    assert json.loads(out)["example_x"] == [1, 1, 0, 0]

    code, out, _ = run("kernels", "boxcar")
    assert code == 0
    report = json.loads(out)
    assert report["pass"] is True
    assert report["max_quadrature_residual"] < 1e-8
    assert (tmp_path / "kernels_boxcar.json").exists()


def test_kernels_sweep(run, tmp_path):
    code, out, _ = run("kernels", "sweep", "--family", "E2")
    assert code == 0
    assert json.loads(out)["rows"] == 61
    header = (tmp_path / "kernels_sweep_E2.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "x0,x1,x2,x3,y1,y2,y3,Re,Im,epsilon"
