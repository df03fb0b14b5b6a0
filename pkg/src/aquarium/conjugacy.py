"""Cohomological equations over rotations and numerical conjugacies to rotations.

Circle maps are handled through their lifts: any vectorized callable ``F``
with ``F(x + 1) = F(x) + 1`` works, and a :class:`ChessBilliard` is used via
its :meth:`~aquarium.billiard.ChessBilliard.lift`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceDetected, NonmonotoneResult, ResonantDivisor

DIVISOR_FLOOR = 1e-13


class FourierFunction:
    """Trigonometric polynomial ``g(x) = sum_{|k| <= K} c_k exp(2 pi i k x)``.

    Parameters
    ----------
    coeffs : array_like, shape (2K + 1,)
        Coefficients ordered ``k = -K, ..., K``.
    real : bool
        Enforce Hermitian symmetry ``c_{-k} = conj(c_k)`` (exactly, by
        symmetrizing the input).
    """

    def __init__(self, coeffs, real: bool = True):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 1 or len(c) % 2 != 1:
            raise ValueError("coeffs must have odd length 2K + 1")
        if real:
            c = 0.5 * (c + np.conj(c[::-1]))
        self.coeffs = c
        self.real = real

    @property
    def K(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def k(self):
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, k):
        return self.coeffs[k + self.K]

    @classmethod
    def zeros(cls, K: int, real: bool = True):
        return cls(np.zeros(2 * K + 1), real)

    @classmethod
    def from_modes(cls, K: int, modes: dict, real: bool = True):
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in modes.items():
            c[k + K] = v
        return cls(c, real)

    @classmethod
    def from_samples(cls, values, K: int | None = None, real: bool = True):
        """Interpolating coefficients from samples on the grid ``j / M``.

        The Nyquist mode (even ``M``) is split evenly between ``+-M/2``.
        """
        v = np.asarray(values)
        M = len(v)
        vh = np.fft.fft(v) / M
        Kmax = (M - 1) // 2 if M % 2 else M // 2
        K = Kmax if K is None else K
        c = np.zeros(2 * K + 1, dtype=complex)
        for k in range(-min(K, Kmax), min(K, Kmax) + 1):
            val = vh[k % M]
            if M % 2 == 0 and abs(k) == M // 2:
                val = 0.5 * val
            c[k + K] = val
        return cls(c, real)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        K = self.K
        if K == 0:
            out = np.full(x.shape, self.coeffs[0])
            return out.real if self.real else out
        e = np.exp(2j * np.pi * np.multiply.outer(x.ravel(), np.arange(1, K + 1)))
        if self.real:
            out = self.coeffs[K].real + 2.0 * (e @ self.coeffs[K + 1:]).real
        else:
            out = self.coeffs[K] + e @ self.coeffs[K + 1:] + np.conj(e) @ self.coeffs[K - 1::-1]
        return out.reshape(x.shape)

    def derivative(self) -> "FourierFunction":
        return FourierFunction(2j * np.pi * self.k * self.coeffs, self.real)

    def shift(self, alpha) -> "FourierFunction":
        """The pullback ``x -> g(x + alpha)``."""
        return FourierFunction(self.coeffs * np.exp(2j * np.pi * self.k * alpha), self.real)

    def mean(self):
        c = self.coeffs[self.K]
        return c.real if self.real else c

    def sobolev_norm(self, s: float) -> float:
        """``(sum (1 + k^2)^s |c_k|^2)^(1/2)``."""
        return float(np.sqrt(np.sum((1.0 + self.k.astype(float) ** 2) ** s * np.abs(self.coeffs) ** 2)))

    def sup_norm(self, grid: int = 4096) -> float:
        return float(np.max(np.abs(self(np.arange(grid) / grid))))

    def __add__(self, other):
        K = max(self.K, other.K)
        return FourierFunction(_pad(self.coeffs, K) + _pad(other.coeffs, K), self.real and other.real)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, scalar):
        return FourierFunction(self.coeffs * scalar, self.real and np.isrealobj(scalar))

    __rmul__ = __mul__

    def truncate(self, K: int) -> "FourierFunction":
        return FourierFunction(_pad(self.coeffs, K), self.real)

    def to_list(self):
        return [[int(k), float(c.real), float(c.imag)] for k, c in zip(self.k, self.coeffs)]


def _pad(c, K):
    k0 = (len(c) - 1) // 2
    out = np.zeros(2 * K + 1, dtype=complex)
    m = min(k0, K)
    out[K - m:K + m + 1] = c[k0 - m:k0 + m + 1]
    return out


def solve_cohomological(g: FourierFunction, alpha: float, profile=None, mean_tol: float = 1e-12) -> FourierFunction:
    """Solve ``v(x) - v(x + alpha) = g(x)`` with ``v`` of mean zero.

    Mode by mode ``v_k = g_k / (1 - exp(2 pi i k alpha))``.

    Parameters
    ----------
    g : FourierFunction
        Mean-zero right-hand side.
    alpha : float
    profile : DiophantineProfile, optional
        If given and resonant, refuse to solve.

    Raises
    ------
    ResonantDivisor
        If some divisor with a nonzero ``g_k`` has modulus below ``1e-13``.
    """
    if abs(g.mean()) > mean_tol * max(1.0, np.max(np.abs(g.coeffs))):
        raise ValueError("right-hand side must have zero mean")
    if profile is not None and profile.is_resonant:
        p, q = profile.resonance
        if q <= g.K and np.any(g.coeffs[g.k % q == 0][g.k[g.k % q == 0] != 0] != 0):
            raise ResonantDivisor(f"alpha is resonant at {p}/{q} within the mode range")
    k = g.k
    div = 1.0 - np.exp(2j * np.pi * k * alpha)
    active = (k != 0) & (g.coeffs != 0)
    bad = active & (np.abs(div) < DIVISOR_FLOOR)
    if np.any(bad):
        kb = int(np.abs(k[bad]).min())
        raise ResonantDivisor(f"small divisor at k={kb} for alpha={alpha!r}")
    v = np.zeros_like(g.coeffs)
    v[active] = g.coeffs[active] / div[active]
    return FourierFunction(v, g.real)


def sobolev_constant(profile) -> float:
    """Constant ``C`` in ``||v||_{H^s} <= C ||g||_{H^{s + beta + 1}}``.

    From ``|1 - e^{2 pi i k alpha}| >= 4 ||k alpha|| >= 4 c / |k|^(1 + beta)``,
    valid for ``|k| <= q_max`` of the profile.
    """
    if profile.c <= 0:
        return np.inf
    return 1.0 / (4.0 * profile.c)


# ----------------------------------------------------------- conjugacies --

def _as_lift(cmap):
    lift = getattr(cmap, "lift", None)
    return lift if callable(lift) else cmap


def _raised_cosine(K: int, start: float = 0.5):
    k = np.abs(np.arange(-K, K + 1)).astype(float)
    k0 = start * K
    w = np.ones_like(k)
    tail = k > k0
    w[tail] = 0.5 * (1.0 + np.cos(np.pi * (k[tail] - k0) / (K - k0)))
    return w


@dataclass
class ConjugacyResult:
    """Conjugacy ``phi = id + p`` with ``phi^{-1} o F o phi ~ x + alpha``."""

    p: FourierFunction
    alpha: float
    residual_history: list = field(default_factory=list)
    trial_history: list = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else np.inf

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        return x + self.p(np.mod(x, 1.0))

    def phi_inv(self, y, tol: float = 1e-14):
        return invert_lift(self.p, y, tol)

    def is_monotone(self, grid: int = 4096) -> bool:
        return bool(np.all(1.0 + self.p.derivative()(np.arange(grid) / grid) > 0))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "residual_history": [float(r) for r in self.residual_history],
            "phi_fourier": self.p.to_list(),
        }


def invert_lift(p: FourierFunction, y, tol: float = 1e-14, maxiter: int = 100):
    """Solve ``x + p(x) = y`` for an increasing ``id + p`` (safeguarded Newton)."""
    y = np.asarray(y, dtype=float)
    bound = np.max(np.abs(p.coeffs)) * len(p.coeffs) + 1e-300
    lo, hi = y - bound, y + bound
    dp = p.derivative()
    x = y - p(np.mod(y, 1.0))
    for _ in range(maxiter):
        xm = np.mod(x, 1.0)
        r = x + p(xm) - y
        lo = np.where(r < 0, np.maximum(lo, x), lo)
        hi = np.where(r > 0, np.minimum(hi, x), hi)
        d = 1.0 + dp(xm)
        xn = x - r / np.where(d > 0, d, 1.0)
        out = (xn <= lo) | (xn >= hi) | (d <= 0)
        xn = np.where(out, 0.5 * (lo + hi), xn)
        done = np.max(np.abs(xn - x)) < tol
        x = xn
        if done:
            break
    return x


def conjugacy_residual(cmap, result: ConjugacyResult, grid: int = 1024) -> float:
    """``max_j |phi^{-1}(F(phi(x_j))) - x_j - alpha|`` on ``x_j = j / grid``."""
    F = _as_lift(cmap)
    x = np.arange(grid) / grid
    z = result.phi_inv(F(result.phi(x)))
    return float(np.max(np.abs(z - x - result.alpha)))


def birkhoff_weights(N: int):
    """Bump weights ``w(n / N)`` with ``w(t) = exp(-1 / (t (1 - t)))``."""
    t = np.arange(N) / N
    w = np.zeros(N)
    inner = (t > 0) & (t < 1)
    w[inner] = np.exp(-1.0 / (t[inner] * (1.0 - t[inner])))
    return w / w.sum()


def _normalize(phi_minus_id: np.ndarray, K: int, filt=None) -> FourierFunction:
    q = FourierFunction.from_samples(phi_minus_id, K)
    m = q.mean()
    # phi o rho_{-m} has periodic part with mean zero
    c = q.coeffs * np.exp(-2j * np.pi * q.k * m)
    c[K] = 0.0
    if filt is not None:
        c = c * filt
    return FourierFunction(c, True)


def birkhoff_conjugacy(cmap, alpha: float, N: int = 10_000, grid_size: int = 2048, K: int | None = None) -> ConjugacyResult:
    """Conjugacy to a rotation from weighted Birkhoff averages.

    ``h_N(x) = sum_n w(n/N) (F^n(x) - n alpha) / sum_n w(n/N)`` satisfies
    ``h_N o F = h_N + rho`` up to super-polynomially small error, where
    ``rho`` is the weighted average of the displacement (the refined rotation
    number, independent of the input ``alpha``). Returns ``phi = h_N^{-1}``.

    Raises
    ------
    NonmonotoneResult
        If the sampled ``h_N`` is not strictly increasing.
    """
    F = _as_lift(cmap)
    K = grid_size // 2 - 1 if K is None else K
    w = birkhoff_weights(N)
    x0 = np.arange(grid_size) / grid_size
    # orbit kept in [0, 1); D accumulates F^n(x0) - x0 - n alpha increment by increment
    x = x0.copy()
    D = np.zeros(grid_size)
    h = np.zeros(grid_size)
    rho = np.zeros(grid_size)
    for n in range(N):
        disp = F(x) - x
        if w[n]:
            h += w[n] * D
            rho += w[n] * disp
        D += disp - alpha
        x = np.mod(x + disp, 1.0)
    rho_bar = float(np.mean(rho))
    h += x0
    nxt = np.append(h[1:], h[0] + 1.0)
    if np.any(nxt - h <= 0):
        raise NonmonotoneResult("averaged conjugacy is not strictly increasing")
    hp = FourierFunction.from_samples(h - x0, K)
    # phi = h^{-1} sampled on the grid, then the periodic part re-expanded
    phi = invert_lift(hp, x0)
    p = _normalize(phi - x0, K)
    res = ConjugacyResult(p, rho_bar, [])
    res.residual_history.append(conjugacy_residual(cmap, res))
    return res


def kam_refine(cmap, initial: ConjugacyResult, iterations: int = 6, grid_size: int = 2048,
               K: int = 512, tol: float = 1e-13) -> ConjugacyResult:
    """Newton-type refinement of a conjugacy to a rotation.

    Each step measures ``beta = phi^{-1} o F o phi - id - alpha`` on a grid,
    absorbs its mean into ``alpha``, solves ``q - q(. + alpha) = -(beta - mean)``
    and composes ``phi <- phi o (id + q)``. Stops early once the residual is
    below ``tol``.

    Raises
    ------
    ResonantDivisor
        From the cohomological solve.
    DivergenceDetected
        If the residual grows on two consecutive iterations.
    """
    F = _as_lift(cmap)
    filt = _raised_cosine(K)
    x = np.arange(grid_size) / grid_size
    cur = ConjugacyResult(initial.p, float(initial.alpha), list(initial.residual_history))
    if not cur.residual_history:
        cur.residual_history.append(conjugacy_residual(cmap, cur))
    best = cur
    ups = 0
    for _ in range(iterations):
        if cur.residual < tol:
            break
        beta = cur.phi_inv(F(cur.phi(x))) - x - cur.alpha
        alpha = cur.alpha + float(np.mean(beta))
        g = FourierFunction.from_samples(-(beta - np.mean(beta)), K)
        g.coeffs[K] = 0.0
        q = solve_cohomological(g, alpha)
        z = x + q(x)
        new_phi = cur.phi(z)
        p = _normalize(new_phi - x, K, filt)
        nxt = ConjugacyResult(p, alpha, cur.residual_history[:])
        r = conjugacy_residual(cmap, nxt)
        nxt.residual_history.append(r)
        ups = ups + 1 if r > cur.residual else 0
        if ups >= 2:
            raise DivergenceDetected(f"residual increased twice in a row: {nxt.residual_history[-3:]}")
        if not nxt.is_monotone():
            raise NonmonotoneResult("refined conjugacy lost monotonicity")
        cur = nxt
        if r <= best.residual:
            best = ConjugacyResult(cur.p, cur.alpha, cur.residual_history[:])
    best.trial_history = cur.residual_history[:]
    return best
