import numpy as np
import pytest
import yaml

from impulsecert import cli
from impulsecert import compfun as cf
from impulsecert import config as cfg
from impulsecert import gronwall as gw
from impulsecert import hybrid_time as ht
from impulsecert.errors import ConfigError


# -- descriptor grammar ----------------------------------------------------------


@pytest.mark.parametrize("doc,probe,expect", [
    ({"form": "identity"}, 3.0, 3.0),
    ({"form": "affine-power", "params": [2.0, 2.0]}, 3.0, 18.0),
    ({"form": "affine-power", "params": [1.0, 2.0, 0.5]}, 2.0, 5.0),
    ({"form": "log1p", "params": [1.0, 1.0, 1.0]}, 0.0, 0.0),
    ({"form": "min-of-two", "children": [
        {"form": "affine-power", "params": [1.0, 0.5]},
        {"form": "affine-power", "params": [0.5, 1.0]}]}, 4.0, 2.0),
    ({"form": "composition", "children": [
        {"form": "affine-power", "params": [2.0, 1.0]},
        {"form": "affine-power", "params": [1.0, 2.0]}]}, 2.0, 8.0),
    ({"form": "sum-of-two", "children": [
        {"form": "identity"}, {"form": "affine-power", "params": [1.0, 2.0]}]},
     2.0, 6.0),
    ({"form": "tabulated", "knots": [[0.0, 0.0], [1.0, 2.0]]}, 0.5, 1.0),
    ({"form": "inverse", "children": [
        {"form": "affine-power", "params": [1.0, 2.0]}]}, 9.0, 3.0),
])
def test_kfn_descriptors(doc, probe, expect):
    f = cfg.KFnSpec.model_validate(doc).build()
    assert abs(cf.eval_k(f, probe) - expect) <= 1e-8


def test_kfn_unknown_form_lists_supported():
    with pytest.raises(ConfigError) as exc:
        cfg.KFnSpec.model_validate({"form": "mystery"}).build()
    assert "identity" in str(exc.value) and "tabulated" in str(exc.value)


def test_kfn_missing_params_flagged():
    with pytest.raises(ConfigError):
        cfg.KFnSpec.model_validate({"form": "affine-power"}).build()


def test_kl_descriptor():
    doc = {"amplitude": {"form": "identity"},
           "decay": {"form": "exp", "params": [1.0]}, "scale": 2.0}
    beta = cfg.KLSpec.model_validate(doc).build()
    assert abs(cf.eval_kl(beta, 1.0, 0.0) - 2.0) <= 1e-12


def test_gamma_literal_and_generator():
    lit = cfg.GammaSpec.model_validate({"times": [1.0, 2.0]}).build(5.0)
    assert lit.times == (1.0, 2.0)
    gen = cfg.GammaSpec.model_validate(
        {"kind": "dwell", "delta": 1.0, "horizon": 3.0}).build(10.0)
    assert gen.times == (1.0, 2.0, 3.0)
    with pytest.raises(Exception):
        cfg.GammaSpec.model_validate({})


def test_input_pieces():
    doc = {"dimension": 1,
           "pieces": [
               {"t0": 0.0, "t1": 1.0, "kind": "constant", "values": [2.0]},
               {"t0": 1.0, "t1": 2.0, "kind": "sine", "amplitude": 1.0,
                "frequency": 2.0},
           ],
           "point_values": [[1.0, [5.0]]]}
    u = cfg.InputSpec.model_validate(doc).build()
    assert u.magnitude(0.5) == 2.0
    assert abs(u.magnitude(1.5) - abs(np.sin(3.0))) <= 1e-12
    np.testing.assert_allclose(u.value_at_impulse(1.0), [5.0])


def test_config_round_trip_identity():
    doc = {"system": {"name": "scalar_linear",
                      "params": {"a": -1.0, "jump_scale": -0.5}},
           "gamma": {"times": [1.0, 2.0]}}
    m1 = cfg.FamilyMemberSpec.model_validate(doc)
    dumped = yaml.safe_dump(m1.model_dump(mode="json"))
    m2 = cfg.FamilyMemberSpec.model_validate(yaml.safe_load(dumped))
    assert m1 == m2


def test_serialize_k_round_trip_evaluates_identically():
    f = cf.minimum(cf.compose_k(cf.inverse_of(cf.power(1.0, 2.0)),
                                cf.linear(0.5)), cf.linear(0.5))
    spec = cfg.serialize_k(f)
    g = spec.build()
    grid = np.linspace(0.0, 20.0, 41)
    np.testing.assert_allclose(cf.eval_k(g, grid), cf.eval_k(f, grid),
                               atol=1e-8)


def test_serialize_callable_tabulates():
    f = cf.from_callable(lambda r: np.asarray(r) * 2.0, kind="KInf")
    spec = cfg.serialize_k(f, sample_domain=10.0, sample_count=11)
    assert spec.form == "tabulated"
    g = spec.build()
    assert abs(cf.eval_k(g, 3.0) - 6.0) <= 1e-9


# -- CLI ----------------------------------------------------------------------


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return str(path)


def test_cli_simulate_csv(tmp_path, capsys):
    config = _write(tmp_path, "s1.yaml", {
        "system": {"name": "scalar_linear",
                   "params": {"a": -1.0, "jump_scale": -0.5}},
        "gamma": {"times": [1.0, 2.0, 3.0]},
        "x0": [1.0], "horizon": 4.0, "grid": 41,
        "output": {"path": str(tmp_path / "traj.csv")},
    })
    assert cli.main(["simulate", "--config", config]) == 0
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "# schema: impulsecert/trajectory/1"
    assert lines[1].split(",")[:3] == ["t", "x1", "jump_flag"]
    # full-precision numbers round-trip through text
    row = lines[2].split(",")
    assert float(row[0]) == 0.0 and float(row[1]) == 1.0
    # a jump row carries the left limit column
    jump_rows = [l for l in lines[2:] if l.split(",")[2] == "1"]
    assert len(jump_rows) == 3
    left = float(jump_rows[0].split(",")[3])
    assert abs(left - np.exp(-1.0)) <= 1e-6


def test_cli_bound_matches_library(tmp_path):
    config = _write(tmp_path, "g.yaml", {
        "problem": {"p": 1.0, "rate": {"kind": "const", "value": 1.0},
                    "c_seq": [1.0], "omega": {"form": "identity"},
                    "sigma": [0.5], "t0": 0.0, "T": 1.0},
        "count": 9,
        "output": {"path": str(tmp_path / "bound.csv")},
    })
    assert cli.main(["bound", "--config", config]) == 0
    rows = [l.split(",") for l in
            (tmp_path / "bound.csv").read_text().splitlines()[2:]]
    prob = gw.GronwallProblem(1.0, 1.0, (1.0,), cf.identity(),
                              ht.ImpulseSequence((0.5,), 1.0), 0.0, 1.0)
    for t_txt, h_txt in rows:
        expect = gw.h_bound(prob, float(t_txt))
        assert abs(float(h_txt) - expect) <= 1e-9 * max(1.0, expect)


def test_cli_certify_exit_codes(tmp_path):
    base = {
        "mode": "estimate",
        "family": [{"system": {"name": "scalar_linear",
                               "params": {"a": -1.0, "jump_scale": -0.5}},
                    "gamma": {"times": [1.0, 2.0, 3.0]}}],
        "horizon": 4.0,
        "scenarios": {"seed": 1, "count": 6},
        "estimate": {"kind": "0-guas",
                     "beta": {"amplitude": {"form": "identity"},
                              "decay": {"form": "exp",
                                        "params": [0.6931471805599453]}}},
    }
    ok = _write(tmp_path, "ok.yaml", base)
    assert cli.main(["certify", "--config", ok]) == 0
    bad = dict(base)
    bad["estimate"] = {"kind": "0-guas",
                       "beta": {"amplitude": {"form": "identity"},
                                "decay": {"form": "exp", "params": [2.0]}}}
    bad_path = _write(tmp_path, "bad.yaml", bad)
    assert cli.main(["certify", "--config", bad_path]) == 2


def test_cli_config_errors_exit_one(tmp_path):
    missing = str(tmp_path / "nope.yaml")
    with pytest.raises(SystemExit):
        cli.main(["simulate", "--config", missing])
    broken = tmp_path / "broken.yaml"
    broken.write_text("system: {name: scalar_linear", encoding="utf-8")
    with pytest.raises(SystemExit):
        cli.main(["simulate", "--config", str(broken)])
    wrong = _write(tmp_path, "wrong.yaml", {
        "problem": {"p": 1.0, "rate": {"kind": "const", "value": 1.0},
                    "c_seq": [1.0], "omega": {"form": "who-knows"},
                    "sigma": [0.5], "T": 1.0}})
    assert cli.main(["bound", "--config", wrong]) == 1


def test_cli_norms_worked_value(tmp_path, capsys):
    config = _write(tmp_path, "n.yaml", {
        "input": {"dimension": 1,
                  "pieces": [{"t0": 0.0, "t1": 2.0, "kind": "constant",
                              "values": [3.0]}]},
        "gamma": {"times": [1.0], "horizon": 2.0},
        "interval": [0.0, 2.0],
        "rho1": {"form": "identity"}, "rho2": {"form": "identity"},
    })
    assert cli.main(["norms", "--config", config]) == 0
    out = capsys.readouterr().out
    assert "sup = 3" in out and "energy = 9" in out


def test_cli_server_dispatch_round_trip(tmp_path, monkeypatch, capsys):
    # --server routes the same request model through HTTP; emulate the wire
    # with the in-process ASGI test transport
    import httpx
    from fastapi.testclient import TestClient

    from impulsecert.service import app

    tc = TestClient(app)

    def fake_post(url, json=None, timeout=None):
        endpoint = url.rsplit("/", 1)[-1]
        return tc.post(f"/{endpoint}", json=json)

    monkeypatch.setattr(httpx, "post", fake_post)
    config = _write(tmp_path, "n.yaml", {
        "input": {"dimension": 1,
                  "pieces": [{"t0": 0.0, "t1": 2.0, "kind": "constant",
                              "values": [3.0]}]},
        "gamma": {"times": [1.0], "horizon": 2.0},
        "interval": [0.0, 2.0],
        "rho1": {"form": "identity"}, "rho2": {"form": "identity"},
    })
    assert cli.main(["--server", "http://fake:1", "norms",
                     "--config", config]) == 0
    remote = capsys.readouterr().out
    assert cli.main(["norms", "--config", config]) == 0
    local = capsys.readouterr().out
    assert remote == local


def test_cli_suite_filter_and_determinism(tmp_path, capsys):
    assert cli.main(["suite", "--only", "closed_form"]) == 0
    first = capsys.readouterr().out
    assert cli.main(["suite", "--only", "closed_form"]) == 0
    second = capsys.readouterr().out
    strip = lambda s: [l.split(")", 1)[-1] for l in s.splitlines()[:-1]]
    assert strip(first) == strip(second)
    assert "[PASS] closed-form-trajectory" in first
