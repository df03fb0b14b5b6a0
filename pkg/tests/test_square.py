import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from aquarium import square as sq
from aquarium.errors import QuadratureNotConverged
from aquarium.forcing import Bump

FORCING = Bump(center=(0.5, 0.375), radius=0.35, kind="gauss", sigma=0.04)


def test_eigenvalues_and_grid():
    assert sq.eigenvalue((3, 4)) == pytest.approx(16 / 25)
    k1, k2 = sq.mode_grid(3)
    assert k1.shape == (3, 3) and k1[2, 0] == 3 and k2[0, 2] == 3


def test_mode_ode_symbolic():
    # the closed form solves u'' + w^2 u = -4 fhat cos(lam t) / (pi^2 |k|^2), u(0) = u'(0) = 0
    t, lam, w, c = sp.symbols("t lam w c", positive=True)
    A = c / (lam**2 - w**2)
    u = A * (sp.cos(lam * t) - sp.cos(w * t))
    assert sp.simplify(sp.diff(u, t, 2) + w**2 * u + c * sp.cos(lam * t)) == 0
    assert u.subs(t, 0) == 0 and sp.diff(u, t).subs(t, 0) == 0


@pytest.mark.parametrize("k,lam", [((2, 1), 0.3), ((1, 3), 0.55), ((3, 4), 0.8), ((5, 2), 0.8)])
def test_mode_solution_against_ode(k, lam):
    k1, k2 = k
    ksq = k1**2 + k2**2
    w2 = k2**2 / ksq
    rhs = lambda t, y: [y[1], -w2 * y[0] - 4.0 * math.cos(lam * t) / (math.pi**2 * ksq)]
    sol = solve_ivp(rhs, (0, 40), [0.0, 0.0], rtol=1e-12, atol=1e-14, dense_output=True)
    for t in (0.5, 7.3, 40.0):
        assert sq.mode_solution(k, lam, t).value == pytest.approx(sol.sol(t)[0], abs=1e-9)
    assert sq.mode_solution((3, 4), 0.8, 1.0).resonant


@given(st.floats(0.1, 50.0))
def test_resonant_limit_continuity(t):
    exact = sq.mode_solution((3, 4), 0.8, t).value
    near = float(sq._mode_values(3, 4, 0.8 + 1e-10, t))
    assert near == pytest.approx(exact, abs=1e-8 * (1 + t))


def test_sine_coeffs_exact_mode():
    f = lambda x1, x2: np.sin(np.pi * x1) * np.sin(2 * np.pi * x2)
    data = sq.sine_coeffs(f, K=8)
    expect = np.zeros((8, 8))
    expect[0, 1] = 0.25
    assert np.allclose(data.fhat, expect, atol=1e-13)


def test_sine_coeffs_grid_input():
    n = 64
    x = (np.arange(n) + 0.5) / n
    F = np.sin(3 * np.pi * x)[:, None] * np.sin(np.pi * x)[None, :]
    data = sq.sine_coeffs(F, K=6)
    assert data.fhat[2, 0] == pytest.approx(0.25, abs=1e-13)


def test_quadrature_not_converged():
    with pytest.raises(QuadratureNotConverged):
        sq.sine_coeffs(FORCING, K=64, max_panels=8)


def test_parseval():
    data = sq.sine_coeffs(FORCING, K=128)
    x, w = np.polynomial.legendre.leggauss(200)
    x = 0.5 * (x + 1)
    w = 0.5 * w
    F = FORCING(x[:, None], x[None, :])
    assert data.l2_norm_sq() == pytest.approx(w @ (F**2) @ w, rel=1e-10)
    pts = np.array([[0.5, 0.375], [0.3, 0.4]])
    assert np.allclose(data.synthesize(pts[:, 0], pts[:, 1]), FORCING(pts[:, 0], pts[:, 1]), atol=1e-9)


def test_energy_matches_direct_sum():
    data = sq.sine_coeffs(FORCING, K=32, lambda0=0.8)
    t = np.linspace(0, 30, 61)
    es = sq.evolve_energy(data, t, drop=0.0)
    E = [np.sum(0.25 * np.pi**2 * data.ksq * sq.mode_amplitudes(data, 0.8, tt) ** 2) for tt in t]
    assert np.allclose(es.energy, E, rtol=1e-12, atol=1e-300)
    es2 = sq.evolve_energy(data, t[[0, 3, 7]], drop=0.0)
    assert np.allclose(es2.energy, np.array(E)[[0, 3, 7]], rtol=1e-12)


def test_growth_exponent_synthetic():
    t = np.linspace(1, 1e4, 20001)
    E = t**2 * (1.5 + np.sin(t))
    assert sq.growth_exponent(t, E, 100, 1e4) == pytest.approx(2.0, abs=0.02)


def test_cluster_monotone_and_brute_force():
    data = sq.sine_coeffs(FORCING, K=64)
    center = 0.7236
    prev = None
    for eps in (1e-1, 1e-2, 1e-3):
        c = sq.spectral_cluster(data, center, eps)
        assert c.mass >= 0
        if prev is not None:
            assert c.mass <= prev.mass and c.count <= prev.count
        prev = c
    brute = [(a, b) for a in range(1, 65) for b in range(1, 65) if abs(b * b / (a * a + b * b) - center) < 1e-2]
    assert sorted(map(tuple, sq.cluster_members(64, center, 1e-2))) == sorted(brute)
    with pytest.raises(ValueError):
        sq.spectral_cluster(data, center, 0.0)


def test_zero_forcing():
    data = sq.SquareSpectralData(np.zeros((8, 8)), 0.8)
    assert np.all(sq.evolve_energy(data, np.linspace(0, 5, 6)).energy == 0)
