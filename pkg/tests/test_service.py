import numpy as np
from fastapi.testclient import TestClient

from impulsecert.service import app

client = TestClient(app)


def test_health():
    assert client.get("/health").json() == {"status": "ok"}


def test_simulate_endpoint():
    req = {"system": {"name": "scalar_linear",
                      "params": {"a": -1.0, "jump_scale": -0.5}},
           "gamma": {"times": [1.0, 2.0, 3.0]},
           "x0": [1.0], "horizon": 4.0, "grid": 21}
    resp = client.post("/simulate", json=req)
    assert resp.status_code == 200
    body = resp.json()
    assert body["columns"] == ["t", "x1", "jump_flag"]
    assert len(body["jumps"]) == 3
    assert not body["blown_up"]
    t1 = body["jumps"][0]
    assert abs(t1["post"][0] - t1["left"][0] / 2) <= 1e-9


def test_simulate_reports_escape():
    req = {"system": {"name": "scalar_linear", "params": {"a": 1.0}},
           "gamma": {"times": []},
           "x0": [1.0], "horizon": 40.0, "grid": 21}
    body = client.post("/simulate", json=req).json()
    assert body["blown_up"]
    assert abs(body["escape_time"] - np.log(1e12)) <= 1e-3


def test_norms_endpoint():
    req = {"input": {"dimension": 1,
                     "pieces": [{"t0": 0.0, "t1": 2.0, "kind": "constant",
                                 "values": [3.0]}]},
           "gamma": {"times": [1.0], "horizon": 2.0},
           "interval": [0.0, 2.0],
           "rho1": {"form": "identity"}, "rho2": {"form": "identity"},
           "truncate_level": 1.0, "exceedance_level": 1.0}
    body = client.post("/norms", json=req).json()
    assert body["sup"] == 3.0
    assert abs(body["energy"] - 9.0) <= 1e-9
    assert body["truncated_sup"] <= 1.0 + 1e-12
    assert abs(body["exceedance_measure"] - 2.0) <= 1e-9
    assert body["exceedance_count"] == 1


def test_bound_endpoint_and_validation_error():
    good = {"problem": {"p": 2.0, "rate": {"kind": "const", "value": 0.0},
                        "c_seq": [1.0], "omega": {"form": "identity"},
                        "sigma": [0.5], "T": 1.0}, "count": 3}
    body = client.post("/bound", json=good).json()
    assert abs(body["rows"][-1][1] - 4.0) <= 1e-9
    bad = dict(good)
    bad["problem"] = dict(good["problem"], p=-1.0)
    assert client.post("/bound", json=bad).status_code == 422


def test_certify_endpoint_witness_on_failure():
    req = {"mode": "estimate",
           "family": [{"system": {"name": "scalar_linear",
                                  "params": {"a": -1.0, "jump_scale": -0.5}},
                       "gamma": {"times": [1.0, 2.0, 3.0]}}],
           "horizon": 4.0,
           "scenarios": {"seed": 1, "count": 5},
           "estimate": {"kind": "0-guas",
                        "beta": {"amplitude": {"form": "identity"},
                                 "decay": {"form": "exp", "params": [2.0]}}}}
    body = client.post("/certify", json=req).json()
    assert not body["passed"]
    stage = body["stages"][0]
    assert stage["witness"]["lhs"] > stage["witness"]["rhs"]
    assert body["scenario_margins"]


def test_gains_endpoint_descriptors_rebuild():
    unit = {"form": "constant", "params": [1.0]}
    zero = {"form": "constant", "params": [0.0]}
    req = {"certificate": {"beta": {"amplitude": {"form": "identity"},
                                    "decay": {"form": "exp", "params": [1.0]}},
                           "rho": {"form": "identity"}},
           "envelopes": {"phi_tilde_f": {"form": "identity"},
                         "eta_f": {"form": "identity"},
                         "phi_f": {"form": "identity"},
                         "N_f": unit, "O_f": zero, "P_f": unit,
                         "phi_tilde_g": {"form": "identity"},
                         "eta_g": {"form": "identity"},
                         "phi_g": {"form": "identity"},
                         "N_g": unit, "O_g": zero, "P_g": unit,
                         "L_f": unit},
           "grid": {"r_max": 4.0, "n_r": 8}}
    body = client.post("/gains", json=req).json()
    assert body["offset"] >= 0.0
    from impulsecert import compfun as cf
    from impulsecert.config import KFnSpec

    alpha = KFnSpec.model_validate(body["alpha"]).build()
    assert cf.eval_k(alpha, 0.0) == 0.0
    assert "gain synthesis" in body["report"]


def test_probe_endpoint():
    req = {"family": [{"system": {"name": "scalar_linear",
                                  "params": {"a": -1.0, "jump_scale": -0.5,
                                             "assumptions": None},
                       },
                       "gamma": {"times": [1.0, 2.0]}}],
           "rho1": {"form": "identity"}, "rho2": {"form": "identity"},
           "eps_grid": [0.5], "r_grid": [1.0], "T_search": [2.0, 4.0],
           "budget": 60, "horizon": 4.0, "seed": 2}
    body = client.post("/probe", json=req).json()
    assert body["deltas"][0]["status"] == "found"
    assert body["sims_used"] <= 2 * body["budget"]


def test_suite_endpoint_single_criterion():
    body = client.post("/suite", json={"only": "closed_form"}).json()
    assert body["all_passed"] and len(body["rows"]) == 1
    assert body["rows"][0]["name"] == "closed-form-trajectory"
