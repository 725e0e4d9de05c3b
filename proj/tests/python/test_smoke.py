import json
import math

import pytest

import memheat

ODE_BLOWUP = {
    "exponents": {"p": 2, "q": 1},
    "c": {"family": "constant", "amplitude": 1},
    "k": {"family": "constant", "amplitude": 0},
    "initial": {"family": "constant", "value": 1},
    "solver": {"t_max": 2},
}


def test_coefficients():
    assert memheat.Coefficient.power(1.0, 2.0)(1.0) == pytest.approx(0.25)
    c = memheat.Coefficient.power_log(1.0, 2.0, 1, 0.0)
    assert c(math.e**2 - math.e) == pytest.approx(1 / (2 * math.e**4))
    assert c.family == "power_log"


def test_integrals():
    status, value, _ = memheat.integrate_improper(memheat.Coefficient.power(1.0, 3.0), 1.0)
    assert status == "Converges"
    assert value == pytest.approx(0.5)
    status, _, _ = memheat.integrate_improper(memheat.Coefficient.constant(1.0))
    assert status == "Diverges"


def test_classify():
    v = memheat.classify(2, 2, memheat.Coefficient.power(1.0, 2.0), memheat.Coefficient.power(1.0, 3.0))
    assert v["regime"] == "BoundedGlobalSmallData"
    assert "memory_window" in v["conditions"]


def test_run_blowup():
    out = memheat.run(ODE_BLOWUP)
    assert out["status"] == "BlowUp"
    assert abs(out["t_fit"] - 1.0) <= 0.02
    assert len(out["t"]) == len(out["sup_norm"])
    assert memheat.run(json.dumps(ODE_BLOWUP), refine=1)["status"] == "BlowUp"


def test_config_errors():
    bad = dict(ODE_BLOWUP, colour=1)
    with pytest.raises(ValueError, match="unknown key 'colour'"):
        memheat.run(bad)
    normalized = json.loads(memheat.normalize_config(json.dumps(ODE_BLOWUP)))
    assert normalized["domain"]["nodes"] == 201


def test_ode_oracle():
    out = memheat.integrate_ode(memheat.Coefficient.constant(1.0), 2.0, yp_a=math.sqrt(2 / 3))
    assert out["status"] == "BlowUp"
    assert out["r_star"] == pytest.approx(math.sqrt(6), rel=5e-3)


def test_blowup_fit():
    t = [0.9 + 1e-3 * i for i in range(100)]
    t_cross, t_fit, r2 = memheat.estimate_blowup_time(t, [1 / (1 - s) for s in t], 2.0, 900.0)
    assert t_fit == pytest.approx(1.0)
    assert r2 == pytest.approx(1.0)
