"""Exact sine-series solution of the forced internal-wave problem on the unit square.

With ``e_k(x) = sin(pi k1 x1) sin(pi k2 x2)`` (``||e_k||^2 = 1/4``) and
``f = sum 4 fhat_k e_k``, the equation ``(d_t^2 Delta + d_x2^2) u = f cos(lam0 t)``
with zero Cauchy data decouples into

    -pi^2 |k|^2 u_k'' - pi^2 k2^2 u_k = 4 fhat_k cos(lam0 t),

whose solution is ``u_k = 4 fhat_k (cos lam0 t - cos w_k t) / (pi^2 D_k)`` with
``w_k = k2 / |k|`` and ``D_k = lam0^2 k1^2 - (1 - lam0^2) k2^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureNotConverged

RESONANCE_ETA = 1e-9


def eigenvalue(k1, k2=None):
    """Eigenvalue ``k2^2 / (k1^2 + k2^2)`` of ``e_k``; accepts a pair or two arrays."""
    if k2 is None:
        k1, k2 = k1
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    return k2**2 / (k1**2 + k2**2)


def mode_grid(K: int):
    """Index arrays ``(k1, k2)`` of shape ``(K, K)``, ``k_i = 1..K``."""
    k = np.arange(1, K + 1)
    return np.meshgrid(k, k, indexing="ij")


@dataclass
class SquareSpectralData:
    """Sine coefficients ``fhat[k1 - 1, k2 - 1] = int f e_k`` for ``1 <= k_i <= K``."""

    fhat: np.ndarray
    lambda0: float | None = None
    panels: int = 0

    @property
    def K(self) -> int:
        return self.fhat.shape[0]

    @property
    def k1(self):
        return mode_grid(self.K)[0]

    @property
    def k2(self):
        return mode_grid(self.K)[1]

    @property
    def ksq(self):
        k1, k2 = mode_grid(self.K)
        return (k1**2 + k2**2).astype(float)

    @property
    def eigenvalues(self):
        k1, k2 = mode_grid(self.K)
        return eigenvalue(k1, k2)

    @property
    def weights(self):
        """``H^{-1}`` spectral weights ``4 fhat^2 / (pi^2 |k|^2)``."""
        return 4.0 * self.fhat**2 / (np.pi**2 * self.ksq)

    def l2_norm_sq(self) -> float:
        """Parseval partial sum ``sum 4 fhat^2 / 4`` approximating ``int f^2``."""
        return float(np.sum(self.fhat**2) * 4.0)

    def synthesize(self, x1, x2, coeffs=None):
        """``sum_k 4 c_k e_k(x)`` for ``c = fhat`` (or given coefficients)."""
        c = self.fhat if coeffs is None else coeffs
        k = np.arange(1, self.K + 1)
        s1 = np.sin(np.pi * np.multiply.outer(np.ravel(x1), k))
        s2 = np.sin(np.pi * np.multiply.outer(np.ravel(x2), k))
        return 4.0 * np.einsum("pi,ij,pj->p", s1, c, s2).reshape(np.shape(x1))

    def decay_fit(self, kmin: int = 4):
        """Least-squares fit ``log max_{|k| in shell} |fhat| ~ a - N log|k|``; returns ``N``."""
        r = np.sqrt(self.ksq)
        shells = np.arange(kmin, self.K)
        m = np.array([np.max(np.abs(self.fhat[(r >= s) & (r < s + 1)]), initial=0.0) for s in shells])
        ok = m > 1e-14 * np.max(np.abs(self.fhat))
        if ok.sum() < 2:
            return np.inf
        return float(-np.polyfit(np.log(shells[ok] + 0.5), np.log(m[ok]), 1)[0])


def _gauss_nodes(a, b, panels, order):
    x, w = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    xs = (edges[:-1, None] + 0.5 * h[:, None] * (x[None, :] + 1.0)).ravel()
    ws = (0.5 * h[:, None] * w[None, :]).ravel()
    return xs, ws


def sine_coeffs(f, K: int = 128, box=None, order: int = 16, panels: int | None = None,
                tol: float = 1e-12, max_panels: int = 4096, lambda0=None) -> SquareSpectralData:
    """Sine coefficients of ``f`` by tensor composite Gauss-Legendre quadrature.

    Parameters
    ----------
    f : callable or ndarray
        Vectorized ``f(x1, x2)``, or samples on the midpoint grid
        ``((i + 1/2)/n, (j + 1/2)/n)`` (midpoint rule, spectrally accurate for
        compactly supported smooth data).
    K : int
        Mode cutoff.
    box : tuple, optional
        ``(x1_lo, x1_hi, x2_lo, x2_hi)`` containing the support; defaults to
        ``f.box`` when available, else the whole square.

    Raises
    ------
    QuadratureNotConverged
        If panel doubling fails to reach ``tol`` before ``max_panels``.
    """
    k = np.arange(1, K + 1)
    if not callable(f):
        F = np.asarray(f, dtype=float)
        n1, n2 = F.shape
        x1 = (np.arange(n1) + 0.5) / n1
        x2 = (np.arange(n2) + 0.5) / n2
        S1 = np.sin(np.pi * np.outer(x1, k)) / n1
        S2 = np.sin(np.pi * np.outer(x2, k)) / n2
        return SquareSpectralData(S1.T @ F @ S2, lambda0, 0)
    if box is None:
        box = getattr(f, "box", (0.0, 1.0, 0.0, 1.0))
    a1, b1, a2, b2 = box
    P = panels or max(4, int(np.ceil(K * max(b1 - a1, b2 - a2) / 8)))
    prev = None
    while P <= max_panels:
        x1, w1 = _gauss_nodes(a1, b1, P, order)
        x2, w2 = _gauss_nodes(a2, b2, P, order)
        F = f(x1[:, None], x2[None, :])
        S1 = np.sin(np.pi * np.outer(x1, k)) * w1[:, None]
        S2 = np.sin(np.pi * np.outer(x2, k)) * w2[:, None]
        fh = S1.T @ F @ S2
        if prev is not None and np.max(np.abs(fh - prev)) < tol:
            return SquareSpectralData(fh, lambda0, P)
        prev = fh
        P *= 2
    raise QuadratureNotConverged(f"sine coefficients did not converge with {max_panels} panels")


@dataclass(frozen=True)
class ModeAmplitude:
    k: tuple
    t: float
    value: float
    resonant: bool


def _mode_values(k1, k2, lambda0, t, fhat=1.0):
    """Vectorized mode amplitudes via the cancellation-free product form.

    ``cos a t - cos b t = -2 sin((a + b) t / 2) sin((a - b) t / 2)`` turns the
    amplitude into ``-4 fhat t sin((lam0 + w) t / 2) sinc / (pi^2 |k|^2 (lam0 + w))``,
    exact at resonance ``w = lam0`` as well.
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    ksq = k1**2 + k2**2
    w = k2 / np.sqrt(ksq)
    t = np.asarray(t, dtype=float)
    d = lambda0 - w
    s = lambda0 + w
    sinc = np.sinc(d * t / (2.0 * np.pi))
    return -4.0 * fhat * t * np.sin(0.5 * s * t) * sinc / (np.pi**2 * ksq * s)


def is_resonant(k1, k2, lambda0, eta: float = RESONANCE_ETA):
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    D = lambda0**2 * k1**2 - (1.0 - lambda0**2) * k2**2
    return np.abs(D) < eta * (k1**2 + k2**2)


def mode_solution(k, lambda0: float, t: float, fhat: float = 1.0) -> ModeAmplitude:
    """Amplitude ``u_k(t)`` of one mode driven by coefficient ``fhat``.

    At resonance (``|D| < 1e-9 |k|^2``) the value is the limit
    ``-2 fhat t sin(lam0 t) / (pi^2 lam0 |k|^2)`` and the flag is set.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    k1, k2 = k
    res = bool(is_resonant(k1, k2, lambda0))
    if res:
        val = -2.0 * fhat * t * np.sin(lambda0 * t) / (np.pi**2 * lambda0 * (k1**2 + k2**2))
    else:
        val = float(_mode_values(k1, k2, lambda0, t, fhat))
    return ModeAmplitude((int(k1), int(k2)), float(t), float(val), res)


def mode_amplitudes(data: SquareSpectralData, lambda0: float, t: float):
    """All amplitudes ``u_k(t)`` as a ``(K, K)`` array."""
    k1, k2 = mode_grid(data.K)
    return _mode_values(k1, k2, lambda0, t, data.fhat)


def solution(data: SquareSpectralData, lambda0: float, t: float, x1, x2):
    """``u(t, x) = sum u_k(t) e_k(x)``."""
    u = mode_amplitudes(data, lambda0, t)
    return data.synthesize(x1, x2, u / 4.0)


@dataclass
class EnergySeries:
    t: np.ndarray
    energy: np.ndarray
    tail: float
    modes_used: int


def _energy_envelope(fh, ksq, d, s, tmax):
    # uniform-in-time bound on pi^2 |k|^2 u_k^2 / 4 from |t sinc(d t / 2)| <= min(t, 2/|d|)
    with np.errstate(divide="ignore"):
        env = np.minimum(tmax, np.where(d != 0, 2.0 / np.abs(d), np.inf))
    amp = 4.0 * fh / (np.pi**2 * ksq * s)
    return 0.25 * np.pi**2 * ksq * (amp * env) ** 2


@njit(cache=True)
def _energy_direct(t, hs, hd, wE):
    E = np.zeros(t.shape[0])
    for j in range(hs.shape[0]):
        for n in range(t.shape[0]):
            x = hd[j] * t[n]
            sc = t[n] if x == 0.0 else np.sin(x) / hd[j]
            v = np.sin(hs[j] * t[n]) * sc
            E[n] += wE[j] * v * v
    return E


@njit(cache=True)
def _energy_uniform(t0, dt, nt, hs, hd, wE):
    # sin(hs t) and sin(hd t) by complex rotation, re-seeded every 128 steps
    E = np.zeros(nt)
    for j in range(hs.shape[0]):
        rs = np.cos(hs[j] * dt) + 1j * np.sin(hs[j] * dt)
        rd = np.cos(hd[j] * dt) + 1j * np.sin(hd[j] * dt)
        zs = 0j
        zd = 0j
        for n in range(nt):
            if n % 128 == 0:
                tn = t0 + n * dt
                zs = np.cos(hs[j] * tn) + 1j * np.sin(hs[j] * tn)
                zd = np.cos(hd[j] * tn) + 1j * np.sin(hd[j] * tn)
            tn = t0 + n * dt
            sc = tn if hd[j] == 0.0 else zd.imag / hd[j]
            if hd[j] != 0.0 and abs(hd[j] * tn) < 1e-4:
                x = hd[j] * tn
                sc = tn * (1.0 - x * x / 6.0)
            v = zs.imag * sc
            E[n] += wE[j] * v * v
            zs *= rs
            zd *= rd
    return E


def evolve_energy(data: SquareSpectralData, t_grid, lambda0: float | None = None,
                  drop: float = 1e-15, chunk: int = 1024) -> EnergySeries:
    """Squared ``H^1`` seminorm ``E(t) = sum pi^2 |k|^2 u_k(t)^2 / 4``.

    Modes with ``|fhat| <= drop * max|fhat|`` are skipped; ``tail`` bounds,
    uniformly over ``t_grid``, the energy of the skipped modes plus that of
    the outer modes ``max(k1, k2) > K/2``, as a truncation indicator.
    """
    lam = data.lambda0 if lambda0 is None else lambda0
    if lam is None:
        raise ValueError("lambda0 required")
    t = np.asarray(t_grid, dtype=float)
    tmax = float(np.max(t)) if len(t) else 0.0
    k1, k2 = mode_grid(data.K)
    ksq_all = (k1**2 + k2**2).astype(float)
    w_all = k2 / np.sqrt(ksq_all)
    bound = _energy_envelope(data.fhat, ksq_all, lam - w_all, lam + w_all, tmax)
    keep = np.abs(data.fhat) > drop * np.max(np.abs(data.fhat), initial=0.0)
    outer = np.maximum(k1, k2) > data.K // 2
    tail = float(np.sum(bound[~keep | outer]))
    k1, k2, fh = k1[keep], k2[keep], data.fhat[keep]
    ksq = ksq_all[keep]
    w = w_all[keep]
    d = lam - w
    s = lam + w
    amp = -4.0 * fh / (np.pi**2 * ksq * s)
    wE = 0.25 * np.pi**2 * ksq * amp**2
    dt = np.diff(t)
    if len(t) > 2 and np.all(np.abs(dt - dt[0]) <= 1e-12 * max(1.0, abs(t[-1]))):
        E = _energy_uniform(t[0], dt[0], len(t), 0.5 * s, 0.5 * d, wE)
    else:
        E = _energy_direct(t, 0.5 * s, 0.5 * d, wE)
    return EnergySeries(t, E, tail, int(keep.sum()))


def growth_exponent(t, E, tmin: float, tmax: float, windows: int = 40) -> float:
    """Slope of ``log max_window E`` against ``log t`` on log-spaced windows."""
    t = np.asarray(t)
    E = np.asarray(E)
    edges = np.geomspace(tmin, tmax, windows + 1)
    tc, em = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (t >= a) & (t < b)
        if m.any() and np.max(E[m]) > 0:
            j = np.argmax(E[m])
            tc.append(t[m][j])
            em.append(E[m][j])
    return float(np.polyfit(np.log(tc), np.log(em), 1)[0])


@dataclass(frozen=True)
class ClusterResult:
    count: int
    mass: float
    min_k: float


def spectral_cluster(data: SquareSpectralData, center: float, epsilon: float) -> ClusterResult:
    """Eigenvalues within ``epsilon`` of ``center`` and their ``H^{-1}`` mass."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    sel = np.abs(data.eigenvalues - center) < epsilon
    if not sel.any():
        return ClusterResult(0, 0.0, np.inf)
    return ClusterResult(int(sel.sum()), float(np.sum(data.weights[sel])), float(np.sqrt(data.ksq[sel]).min()))


def cluster_members(K: int, center: float, epsilon: float):
    """Modes ``(k1, k2)`` with ``|eigenvalue - center| < epsilon``, ``k_i <= K``."""
    k1, k2 = mode_grid(K)
    sel = np.abs(eigenvalue(k1, k2) - center) < epsilon
    return np.stack([k1[sel], k2[sel]], axis=-1)
