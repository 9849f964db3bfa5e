"""Checked quadrature and Euler-accelerated oscillatory tails."""

import math

import numpy as np
import pytest
from scipy import special

from errors import ConfigError, QuadratureError
from quadrature import (
    DEFAULT_QUAD, QuadratureConfig, euler_accelerate, integrate, integrate_complex,
    oscillatory_tail,
)


class TestQuadratureConfig:
    def test_defaults(self):
        assert DEFAULT_QUAD.abs_tol == 1e-8
        assert DEFAULT_QUAD.max_segments == 10_000
        assert DEFAULT_QUAD.t_min == 1e-12

    @pytest.mark.parametrize("overrides", [
        {"abs_tol": 0.0},
        {"rel_tol": -1e-3},
        {"t_min": 0.0},
        {"max_segments": 5},
        {"accel_terms": 2},
        {"t_huge": -1.0},
    ])
    def test_rejects_invalid(self, overrides):
        with pytest.raises(ConfigError):
            QuadratureConfig(**overrides)


class TestIntegrate:
    def test_exponential_to_infinity(self, quad):
        value, err, used = integrate(lambda x: math.exp(-x), 0.0, np.inf, quad)
        assert value == pytest.approx(1.0, abs=1e-10)
        assert err < 1e-8
        assert used >= 1

    def test_polynomial(self, quad):
        value, _, _ = integrate(lambda x: x * x, 0.0, 3.0, quad)
        assert value == pytest.approx(9.0, rel=1e-12)

    def test_divergent_integral_raises(self, quad):
        with pytest.raises(QuadratureError) as info:
            integrate(lambda x: 1.0 / x, 0.0, 1.0, quad)
        assert info.value.residual > 0

    def test_complex(self, quad):
        value, _, _ = integrate_complex(lambda x: complex(math.cos(x), math.sin(x)), 0.0, math.pi / 2, quad)
        assert value.real == pytest.approx(1.0, abs=1e-10)
        assert value.imag == pytest.approx(1.0, abs=1e-10)


class TestEulerAccelerate:
    def test_alternating_harmonic(self):
        terms = [(-1) ** k / (k + 1) for k in range(40)]
        value, err = euler_accelerate(np.cumsum(terms))
        assert value == pytest.approx(math.log(2.0), abs=1e-9)
        assert err < 1e-9

    def test_degenerate_inputs(self):
        assert euler_accelerate([]) == (0.0, 0.0)
        value, err = euler_accelerate([0.25])
        assert value == 0.25
        assert math.isinf(err)


class TestOscillatoryTail:
    def test_sinc_tail(self, quad):
        """int_pi^inf sin(x)/x dx = pi/2 - Si(pi)"""
        value, _, used = oscillatory_tail(lambda x: math.sin(x) / x, lambda k: k * math.pi, quad, first=1)
        si_pi, _ = special.sici(math.pi)
        assert value == pytest.approx(0.5 * math.pi - si_pi, abs=1e-7)
        assert used >= quad.accel_terms

    def test_gives_up_after_segment_budget(self):
        cfg = QuadratureConfig(max_segments=40, accel_terms=4)
        # non-alternating slowly decaying segments never settle
        with pytest.raises(QuadratureError):
            oscillatory_tail(lambda x: 1.0 / x, lambda k: float(k + 1), cfg)
