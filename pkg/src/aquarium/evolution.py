"""Duhamel multiplier of the forced evolution and its dyadic spectral splitting.

The solution with forcing ``f cos(lam0 t)`` and zero Cauchy data is
``u(t) = Re(e^{i lam0 t} W_t(P) g)``, where ``g`` is the forcing expressed in
the energy space and

    W_t(z) = int_0^t sin(s sqrt z) / sqrt z e^{-i lam0 s} ds
           = sum_pm (1 - e^{-i t (lam0 pm sqrt z)}) / (2 sqrt z (sqrt z pm lam0)).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .square import SquareSpectralData, mode_grid

BAND = 1e-6


def _phi_stable(w, t):
    # (1 - e^{-i t w}) / w = i t e^{-i t w / 2} sin(t w / 2) / (t w / 2), exact for all w
    return 1j * t * np.exp(-0.5j * t * w) * np.sinc(t * w / (2.0 * np.pi))


def w_multiplier(z, lambda0: float, t: float, band: float = BAND):
    """Evaluate ``W_t(z)`` with ``lam0 = lambda0``.

    Away from ``sqrt z = lam0`` the two-term closed form is used directly;
    within ``|sqrt z - lam0| < band * lam0`` the singular term switches to the
    cancellation-free form ``(1 - e^{-itw})/w = i t e^{-itw/2} sinc(tw/2)``.

    Raises
    ------
    DomainError
        For ``z <= 0``.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("z must be positive")
    s = np.sqrt(z)
    plus = (1.0 - np.exp(-1j * t * (lambda0 + s))) / (2.0 * s * (s + lambda0))
    w = lambda0 - s
    near = np.abs(w) < band * lambda0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (1.0 - np.exp(-1j * t * w)) / w
    minus_phi = np.where(near, _phi_stable(w, t), direct)
    out = plus - minus_phi / (2.0 * s)
    return out if out.ndim else out[()]


def w_multiplier_direct(z, lambda0: float, t: float):
    """Two-term closed form without the stable switch (reference only)."""
    z = np.asarray(z, dtype=float)
    s = np.sqrt(z)
    return sum((1.0 - np.exp(-1j * t * (lambda0 + sg * s))) / (2.0 * s * (s + sg * lambda0)) for sg in (1, -1))


def w_multiplier_quad(z: float, lambda0: float, t: float, n: int = 4096):
    """``W_t(z)`` by composite Gauss-Legendre quadrature of its integral definition."""
    x, wts = np.polynomial.legendre.leggauss(32)
    edges = np.linspace(0.0, t, n // 32 + 1)
    h = np.diff(edges)
    s = (edges[:-1, None] + 0.5 * h[:, None] * (x + 1.0)).ravel()
    ws = (0.5 * h[:, None] * wts).ravel()
    r = np.sqrt(z)
    return np.sum(ws * np.sin(s * r) / r * np.exp(-1j * lambda0 * s))


def real_part_identity(z, lambda0: float, t: float):
    """``(cos(t sqrt z) - cos(t lam0)) / (lam0^2 - z)``, equal to ``Re(e^{i lam0 t} W_t(z))``."""
    z = np.asarray(z, dtype=float)
    return (np.cos(t * np.sqrt(z)) - np.cos(t * lambda0)) / (lambda0**2 - z)


def shell_bound(z, lambda0: float):
    """Uniform-in-``t`` bound ``2 max(lam0, sqrt z) / (sqrt z |lam0^2 - z|)`` on ``|W_t(z)|``."""
    s = np.sqrt(np.asarray(z, dtype=float))
    return 2.0 * np.maximum(lambda0, s) / (s * np.abs(lambda0**2 - s * s))


@dataclass
class DyadicSplit:
    """Squared ``H^{-1}`` masses of ``1_{delta^{k+1} <= |lam0^2 - z| < delta^k}(P) W_t(P) f``."""

    delta: float
    t: float
    masses: np.ndarray
    counts: np.ndarray
    total: float
    remainder: float = 0.0
    resonant_modes: list = field(default_factory=list)

    @property
    def resonant_shell(self) -> bool:
        return bool(self.resonant_modes)

    @property
    def k_max(self) -> int:
        return len(self.masses) - 1

    def partial_sums(self):
        return np.cumsum(self.masses)


def shell_index(dist, delta: float):
    """``k`` with ``delta^{k+1} <= dist < delta^k`` (for ``0 < dist < 1``)."""
    dist = np.asarray(dist, dtype=float)
    k = np.floor(np.log(dist) / np.log(delta)).astype(int)
    # repair rounding at shell edges
    k = np.where(dist >= delta ** k.astype(float), k - 1, k)
    k = np.where(dist < delta ** (k + 1.0), k + 1, k)
    return k


def dyadic_split_energy(data: SquareSpectralData, lambda0: float, delta: float = 0.5, t: float = 1.0,
                        k_max: int | None = None) -> DyadicSplit:
    """Bin the square eigenvalues into dyadic shells about ``lam0^2``.

    Modes with an eigenvalue at ``lam0^2`` (to rounding) are listed in
    ``resonant_modes`` and their mass is kept in ``remainder``, as is the
    mass of eigenvalues closer than ``delta^(k_max + 1)``.
    """
    if not 0.0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    k1, k2 = mode_grid(data.K)
    eig = data.eigenvalues
    dist = np.abs(lambda0**2 - eig)
    weight = data.weights
    Wv = w_multiplier(eig, lambda0, t)
    m = np.abs(Wv) ** 2 * weight
    exact = dist <= 8 * np.finfo(float).eps
    active = (weight > 0) & ~exact
    if k_max is None:
        dmin = dist[active].min() if active.any() else 1.0
        k_max = max(0, int(np.ceil(np.log(dmin) / np.log(delta))))
    idx = np.full(dist.shape, -1)
    pos = ~exact
    idx[pos] = shell_index(dist[pos], delta)
    in_range = pos & (idx >= 0) & (idx <= k_max)
    masses = np.bincount(idx[in_range], weights=m[in_range], minlength=k_max + 1)
    counts = np.bincount(idx[in_range], minlength=k_max + 1)
    remainder = float(np.sum(m[~in_range]))
    resonant = [(int(a), int(b)) for a, b in zip(k1[exact & (weight > 0)], k2[exact & (weight > 0)])]
    return DyadicSplit(delta, float(t), masses, counts, float(np.sum(m)), remainder, resonant)


def solution_via_multiplier(data: SquareSpectralData, lambda0: float, t: float, x1, x2):
    """``u(t, x)`` synthesized from ``Re(e^{i lam0 t} W_t(eig_k))``.

    The energy-space forcing has coefficients ``-4 fhat / (pi^2 |k|^2)``
    (inverse Dirichlet Laplacian), so ``u_k = -4 fhat Re(e^{i lam0 t} W) / (pi^2 |k|^2)``.
    """
    W = w_multiplier(data.eigenvalues, lambda0, t)
    u = -4.0 * data.fhat * np.real(np.exp(1j * lambda0 * t) * W) / (np.pi**2 * data.ksq)
    return data.synthesize(x1, x2, u / 4.0)
