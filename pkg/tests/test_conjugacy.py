import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aquarium import conjugacy as cj, geometry as geo, rotation as rot
from aquarium.arithmetic import diophantine_profile
from aquarium.billiard import ChessBilliard
from aquarium.errors import ResonantDivisor

GOLDEN = (math.sqrt(5) - 1) / 2


class SineMap:
    def __init__(self, alpha, eps):
        self.alpha, self.eps = alpha, eps

    def lift(self, x):
        return x + self.alpha + self.eps * np.sin(2 * np.pi * x)


def _random_g(rng, K):
    c = rng.normal(size=2 * K + 1) + 1j * rng.normal(size=2 * K + 1)
    c *= np.exp(-0.05 * np.abs(np.arange(-K, K + 1)))
    c[K] = 0
    return cj.FourierFunction(c)


@given(st.integers(0, 2**31))
def test_cohomological_round_trip(seed):
    g = _random_g(np.random.default_rng(seed), 16)
    v = cj.solve_cohomological(g, GOLDEN)
    x = np.linspace(0, 1, 257)
    assert np.max(np.abs(v(x) - v(x + GOLDEN) - g(x))) <= 1e-10


def test_sobolev_bound():
    prof = diophantine_profile(GOLDEN)
    C = cj.sobolev_constant(prof)
    g = _random_g(np.random.default_rng(3), 64)
    v = cj.solve_cohomological(g, GOLDEN, prof)
    for s in (0, 1, 2):
        assert v.sobolev_norm(s) <= C * g.sobolev_norm(s + prof.beta + 1)


def test_mean_and_resonance_errors():
    g = cj.FourierFunction.from_modes(2, {0: 1.0})
    with pytest.raises(ValueError):
        cj.solve_cohomological(g, GOLDEN)
    g = cj.FourierFunction.from_modes(4, {2: 1.0, -2: 1.0})
    with pytest.raises(ResonantDivisor):
        cj.solve_cohomological(g, 0.5)
    with pytest.raises(ResonantDivisor):
        cj.solve_cohomological(g, 0.5, diophantine_profile(0.5))
    # mode 1 is fine at alpha = 1/2
    g = cj.FourierFunction.from_modes(4, {1: 1.0, -1: 1.0})
    assert cj.solve_cohomological(g, 0.5)[1] == pytest.approx(0.5)


def test_fourier_function_basics(rng):
    x = np.arange(64) / 64
    vals = np.cos(2 * np.pi * 3 * x) + 0.5 * np.sin(2 * np.pi * 5 * x)
    f = cj.FourierFunction.from_samples(vals, 8)
    assert np.allclose(f(x), vals, atol=1e-14)
    assert f.shift(0.1)(0.2) == pytest.approx(f(0.3))
    assert f.derivative()(0.0) == pytest.approx(0.5 * 2 * np.pi * 5)
    assert (f - f).sup_norm() == 0.0
    assert f.sobolev_norm(0) == pytest.approx(np.sqrt(np.mean(vals**2)))


@given(st.floats(-0.5, 0.5))
def test_invert_lift(y):
    p = cj.FourierFunction.from_modes(3, {1: 0.05j, -1: -0.05j, 2: 0.01})
    x = cj.invert_lift(p, np.array([y]))
    assert x[0] + p(np.mod(x, 1.0))[0] == pytest.approx(y, abs=1e-13)


def test_birkhoff_weights_normalized():
    w = cj.birkhoff_weights(1000)
    assert w.sum() == pytest.approx(1.0) and w[0] == 0.0 and np.all(w >= 0)


def test_kam_golden_sine():
    f = SineMap(GOLDEN, 0.05)
    res = cj.kam_refine(f, cj.ConjugacyResult(cj.FourierFunction.zeros(256), GOLDEN), 6, 1024, 256)
    assert res.residual < 1e-9
    assert res.is_monotone()
    assert res.residual_history[0] > res.residual


def test_kam_rational_raises():
    f = SineMap(0.5, 0.05)
    with pytest.raises(ResonantDivisor):
        cj.kam_refine(f, cj.ConjugacyResult(cj.FourierFunction.zeros(64), 0.5), 6, 256, 64)


def test_birkhoff_disk_recovers_rotation():
    lam = 0.6
    cb = ChessBilliard(geo.disk(), lam)
    r = float(rot.disk_rotation_closed_form(lam))
    res = cj.birkhoff_conjugacy(cb, r, N=2000, grid_size=256)
    assert res.alpha == pytest.approx(r, abs=1e-10)
    assert res.residual < 1e-8


def test_birkhoff_sine_map():
    f = SineMap(GOLDEN, 0.05)
    res = cj.birkhoff_conjugacy(f, GOLDEN, N=4000, grid_size=256)
    assert res.residual < 1e-9
    d = res.to_dict()
    assert set(d) >= {"alpha", "residual_history", "phi_fourier"}
