import math

import numpy as np
import pytest

from zrl.errors import PrecisionError
from zrl.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureConfig, integrate


def test_rule_weights():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert np.allclose(NODES, -NODES[::-1])


def test_polynomial_and_trig():
    assert integrate(np.sin, 0, math.pi).value == pytest.approx(2.0, abs=1e-13)
    r = integrate(lambda x: x**7, -1, 2)
    assert r.value == pytest.approx((2**8 - 1) / 8, rel=1e-14)


def test_complex_and_reversed():
    r = integrate(lambda x: np.exp(1j * x), 0, 1)
    assert r.value == pytest.approx((np.exp(1j) - 1) / 1j, abs=1e-14)
    assert integrate(np.cos, 1, 0).value == pytest.approx(-math.sin(1), abs=1e-14)


def test_oscillatory_adaptive():
    cfg = QuadratureConfig(rel_tol=1e-11, abs_tol=1e-13, panel_width=0.5)
    r = integrate(lambda x: np.cos(50 * x) * np.exp(-x), 0, 10, cfg)
    exact = (math.exp(-10) * (50 * math.sin(500) - math.cos(500)) + 1) / 2501
    assert r.value == pytest.approx(exact, abs=1e-12)


def test_breakpoint_kink():
    r = integrate(np.abs, -1, 2, breakpoints=[0.0])
    assert r.value == pytest.approx(2.5, abs=1e-14)


def test_budget_exhaustion_carries_partial():
    cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-16, max_panels=3)
    with pytest.raises(PrecisionError) as exc:
        integrate(lambda x: np.sqrt(np.abs(x)), 0, 1, cfg)
    assert exc.value.partial == pytest.approx(2 / 3, abs=1e-2)
