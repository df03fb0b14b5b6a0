"""Single-layer boundary integral solver for ``P(omega) u = f``, ``u = 0`` on the boundary.

``P(omega) = (1 - omega^2) d_2^2 - omega^2 d_1^2`` has the fundamental
solution ``E(x) = c log A(x)`` with ``A = -x_1^2/omega^2 + x_2^2/(1 - omega^2)``
and ``c = i sgn(Im omega) / (4 pi omega sqrt(1 - omega^2))``. The solution is
``u = R f - S v`` where ``R f = E * (1_Omega f)``, ``S v(x) = int E(x - x(t)) v(t) dt``
and the density ``v`` solves ``S v = R f`` on the boundary.

Quadrature
----------
For a Fourier curve, ``t -> A(p - x(t))`` is a Laurent polynomial in
``w = exp(2 pi i t)``, the product of the two factors ``ell^pm(p - x(t))``.
Its roots are computed explicitly, which splits the kernel exactly into

* ``log 4 sin^2(pi (t - t_p))`` when ``p = x(t_p)`` lies on the boundary,
* ``log(1 - w_r / w)`` for roots inside the unit circle and
  ``log(1 - w / w_r)`` for roots outside, with explicit Fourier series,
* a constant.

Integrating each term against the trigonometric interpolant of the density
gives product-integration weights whose accuracy depends only on the
resolution of the density, not on how close the roots come to the circle
(the regime ``Im omega -> 0``).

The Newton potential uses star-fan coordinates ``y = p + s (x(t) - p)`` about
the evaluation point, so ``log A(p - y) = 2 log s + log A(p - x(t))`` reuses
the same weights in ``t`` and a log-weighted Gauss rule in ``s``. This needs a
convex domain and allows ``f`` that does not vanish at the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc
from shapely.geometry import Point, Polygon as _ShapelyPolygon

from . import geometry as geo
from .errors import (
    DomainError,
    GeometryError,
    OriginSingularity,
    SingularSystem,
    SupportTouchesBoundary,
    TooCloseToBoundary,
)
from .forcing import Bump

COND_LIMIT = 1e13


def _omega(omega) -> complex:
    if isinstance(omega, geo.SpectralParameter):
        return omega.omega
    return complex(omega)


def c_omega(omega) -> complex:
    """``i sgn(Im omega) / (4 pi omega sqrt(1 - omega^2))``."""
    if isinstance(omega, geo.SpectralParameter) and omega.h == 0:
        w, sg = omega.lam, omega.sign
    else:
        w = _omega(omega)
        if w.imag == 0:
            raise DomainError("real omega needs a SpectralParameter with a half-plane sign")
        sg = np.sign(w.imag)
    return 1j * sg / (4.0 * np.pi * w * np.sqrt(1.0 - w * w + 0j))


@dataclass(frozen=True)
class FundamentalSolution:
    """``E(x) = c log A(x)``; for real ``lam`` the limit from the side ``sign``.

    The limiting case uses ``log(A + i0 sign)``, that is ``log|A| + i pi sign``
    where ``A < 0``.
    """

    omega: object

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(np.all(x == 0, axis=-1)):
            raise OriginSingularity("E is singular at the origin")
        om = self.omega
        c = c_omega(om)
        if isinstance(om, geo.SpectralParameter) and om.h == 0:
            A = geo.quadratic_form(x, om.lam).real
            return c * (np.log(np.abs(A)) + 1j * np.pi * om.sign * (A < 0))
        return c * np.log(geo.quadratic_form(x, _omega(om)))


def fundamental_solution(x, omega):
    return FundamentalSolution(omega)(x)


def manufactured_solution(sigma: float = 0.1, radius: float = geo.DISK_RADIUS):
    """``u*(x) = (1 - (|x|/R)^2) exp(-|x|^2 / sigma^2)`` and ``f = P(omega) u*``.

    Returns
    -------
    u : callable ``u(x1, x2)``
    f_of : callable ``omega -> f``, with ``f(x1, x2)`` complex.
    """
    a = 1.0 / radius**2
    s2 = sigma**2

    def u(x1, x2):
        r2 = np.asarray(x1) ** 2 + np.asarray(x2) ** 2
        return (1.0 - a * r2) * np.exp(-r2 / s2)

    def second(xi, q, g):
        return g * (-2.0 * a + 8.0 * a * xi**2 / s2 + q * (4.0 * xi**2 / s2**2 - 2.0 / s2))

    def f_of(omega):
        w = _omega(omega)

        def f(x1, x2):
            x1 = np.asarray(x1, dtype=float)
            x2 = np.asarray(x2, dtype=float)
            r2 = x1**2 + x2**2
            g = np.exp(-r2 / s2)
            q = 1.0 - a * r2
            return (1.0 - w * w) * second(x2, q, g) - w * w * second(x1, q, g)

        return f

    return u, f_of


# ------------------------------------------------------------ quadrature --

def log_moment_weights(n: int):
    """Gauss-Legendre nodes on [0, 1] with weights for plain and ``log s`` integrals.

    The log weights integrate ``g(s) log s`` exactly for polynomials ``g`` of
    degree below ``n``, using ``int_0^1 P_m(2s - 1) log s ds = (-1)^(m+1) / (m (m+1))``
    (``-1`` for ``m = 0``).
    """
    x, w = leggauss(n)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    m = np.arange(n)
    mu = np.empty(n)
    mu[0] = -1.0
    mu[1:] = (-1.0) ** (m[1:] + 1) / (m[1:] * (m[1:] + 1.0))
    P = np.polynomial.legendre.legvander(x, n - 1)  # P_m(2s - 1)
    wlog = w * (P @ ((2 * m + 1) * mu))
    return s, w, wlog


def kress_weights(N: int, t0: float):
    """Weights ``R_j`` with ``sum_j R_j g(j/N) = int_0^1 log(4 sin^2 pi(t - t0)) g(t) dt``.

    Exact for trigonometric polynomials of degree below ``N/2``.
    """
    k = np.arange(1, N // 2 + 1)
    h = np.ones_like(k, dtype=float)
    h[-1] = 0.5
    t = np.arange(N) / N - t0
    return -(2.0 / N) * (np.cos(2.0 * np.pi * np.outer(t, k)) @ (h / k))


class _CurveData:
    """Per-(curve, omega, N) cache of nodes, tangents and Laurent coefficients."""

    def __init__(self, curve: geo.FourierCurve, omega: complex, N: int):
        if not isinstance(curve, geo.FourierCurve):
            raise GeometryError("layer potentials need a smooth Fourier curve")
        if N < 8 or N & (N - 1):
            raise ValueError("N must be a power of two, at least 8")
        self.curve = curve
        self.omega = omega
        self.N = N
        self.theta = np.arange(N) / N
        self.x = curve.point(self.theta)
        self.dx = curve.tangent(self.theta)
        self.coef = {}
        self.L = {}
        for sg in (1, -1):
            a, b = geo.ell_coefficients(omega, sg)
            self.coef[sg] = (a, b)
            self.L[sg] = curve.laurent(a, b)
        self.M = curve.degree
        kk = np.arange(N // 2 + 1, dtype=float)
        self._h = np.ones(N // 2 + 1)
        self._h[-1] = 0.5
        self._k = kk
        self._kress0 = kress_weights(N, 0.0)

    def ell_at(self, p, sg):
        a, b = self.coef[sg]
        return a * p[0] + b * p[1]

    def roots(self, p, t_on=None):
        """Roots in ``w`` of ``ell^pm(p - x(t))``; the known root ``e^{2 pi i t_on}`` is deflated."""
        out = []
        M = self.M
        for sg in (1, -1):
            asc = -self.L[sg].copy()
            asc[M] += self.ell_at(p, sg)
            desc = np.trim_zeros(asc[::-1], "f")
            if t_on is not None:
                w0 = np.exp(2j * np.pi * t_on)
                q, _ = np.polydiv(desc, np.array([1.0, -w0]))
                r = np.roots(q) if len(q) > 1 else np.array([])
            else:
                r = np.roots(desc) if len(desc) > 1 else np.array([])
            # Newton polish on the undeflated polynomial
            dd = np.polyder(desc)
            for _ in range(3):
                val = np.polyval(desc, r)
                der = np.polyval(dd, r)
                ok = der != 0
                r = np.where(ok, r - val / np.where(ok, der, 1.0), r)
            out.append(r)
        return np.concatenate(out)

    def log_weights(self, p, t_on=None):
        """Weights ``W_j`` with ``sum_j W_j g(t_j) ~ int_0^1 log A(p - x(t)) g(t) dt``.

        ``t_on`` marks ``p = x(t_on)`` on the boundary.
        """
        N, M = self.N, self.M
        roots = self.roots(p, t_on)
        inner = roots[np.abs(roots) < 1.0]
        outer = roots[np.abs(roots) >= 1.0]
        n_in = len(inner) + (1 if t_on is not None else 0)
        if n_in != 2 * M:
            raise GeometryError(f"root count inside the unit circle is {n_in}, expected {2 * M}")
        k = self._k[1:]
        hk = self._h[1:]
        a = np.zeros(N, dtype=complex)
        b = np.zeros(N, dtype=complex)
        if len(inner):
            a[1:N // 2 + 1] = (np.power.outer(inner, k).sum(0)) * hk / k
        if len(outer):
            b[1:N // 2 + 1] = (np.power.outer(1.0 / outer, k).sum(0)) * hk / k
        W = -(np.fft.fft(a) + N * np.fft.ifft(b)) / N
        if t_on is not None:
            j0 = t_on * N
            if abs(j0 - round(j0)) < 1e-12:
                W = W + np.roll(self._kress0, int(round(j0)) % N)
            else:
                W = W + kress_weights(N, t_on)
        # constant from one evaluation point
        ts = (t_on + 0.5) if t_on is not None else 0.5 / N
        ws = np.exp(2j * np.pi * ts)
        xs = self.curve.point(np.array([ts % 1.0]))[0]
        logA = np.log(geo.quadratic_form(p - xs, self.omega))
        rest = np.sum(np.log(1.0 - inner / ws)) + np.sum(np.log(1.0 - ws / outer))
        if t_on is not None:
            rest += np.log(4.0 * np.sin(np.pi * (ts - t_on)) ** 2)
        const = logA - rest
        return W + const / N

    def fan_terms(self, p, f, s, w, wlog):
        """Star-fan integrands ``Phi1(t_j) = J int s f ds`` and ``Phi2(t_j) = 2 J int s log s f ds``.

        If ``f`` exposes ``support_disk``, each ray is integrated only over
        its chord through the support.
        """
        d = self.x - p
        J = d[:, 0] * self.dx[:, 1] - d[:, 1] * self.dx[:, 0]
        disk = getattr(f, "support_disk", None)
        if disk is None:
            fv = f(p[0] + np.outer(d[:, 0], s), p[1] + np.outer(d[:, 1], s))
            return J * (fv @ (w * s)), 2.0 * J * (fv @ (wlog * s))
        c, rho = disk
        # chord s in [s1, s2] of the ray p + s d through the support disk
        q = p - c
        a = np.einsum("ij,ij->i", d, d)
        b = d @ q
        disc = np.where(a > 0, b * b - a * (q @ q - rho * rho), -1.0)
        a = np.where(a > 0, a, 1.0)
        root = np.sqrt(np.maximum(disc, 0.0))
        s1 = np.clip((-b - root) / a, 0.0, 1.0)
        s2 = np.clip((-b + root) / a, 0.0, 1.0)
        hit = (disc > 0) & (s2 > s1)
        s1, s2 = np.where(hit, s1, 0.0), np.where(hit, s2, 0.0)
        inside = s1 == 0.0
        # regular chords use Gauss nodes on [s1, s2]; chords from p use the log rule on [0, s2]
        L = s2 - s1
        sn = s1[:, None] + L[:, None] * s[None, :]
        fv = f(p[0] + d[:, :1] * sn, p[1] + d[:, 1:] * sn)
        fv = np.where(hit[:, None], fv, 0.0)
        phi1 = J * L * ((fv * sn) @ w)
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(sn > 0, np.log(np.where(sn > 0, sn, 1.0)), 0.0)
        reg = L * ((fv * sn * logs) @ w)
        logs2 = np.log(np.where(s2 > 0, s2, 1.0))
        sing = s2 * s2 * ((fv * s[None, :]) @ wlog + logs2 * ((fv * s[None, :]) @ w))
        phi2 = 2.0 * J * np.where(inside, sing, reg)
        return phi1, phi2


@dataclass
class LayerSystem:
    """Discretized single-layer problem at one ``omega``."""

    curve: geo.FourierCurve
    omega: complex
    N: int
    theta: np.ndarray
    nodes: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    density: np.ndarray
    cond: float
    c: complex
    forcing: object = None
    n_radial: int = 32
    _data: object = field(default=None, repr=False)

    @property
    def v_l2(self) -> float:
        """``(int |v|^2 dtheta)^(1/2)``."""
        return float(np.sqrt(np.mean(np.abs(self.density) ** 2)))


def _check_forcing(curve, f):
    if isinstance(f, Bump):
        th = np.arange(4096) / 4096
        dist = np.linalg.norm(curve.point(th) - np.asarray(f.center), axis=1)
        poly = _ShapelyPolygon(curve.point(th))
        if not poly.contains(Point(f.center)) or np.min(dist) <= f.radius:
            raise SupportTouchesBoundary("forcing support reaches the boundary")


def _zero(x1, x2):
    return np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)


def _newton_potential(data: _CurveData, f, points, t_on=None, n_radial=32, weights=None):
    s, w, wlog = log_moment_weights(n_radial)
    c = c_omega(data.omega)
    out = np.empty(len(points), dtype=complex)
    for i, p in enumerate(points):
        W = weights[i] if weights is not None else data.log_weights(p, None if t_on is None else t_on[i])
        phi1, phi2 = data.fan_terms(p, f, s, w, wlog)
        out[i] = c * (W @ phi1 + np.mean(phi2))
    return out


def _prepare(curve, omega, N):
    om = _omega(omega)
    if om.imag == 0:
        raise DomainError("the boundary solve needs Im omega != 0")
    if not 0 < om.real < 1:
        raise DomainError("Re omega must lie in (0, 1)")
    if not curve.is_convex():
        raise GeometryError("the star-fan Newton potential needs a convex domain")
    return _CurveData(curve, om, N)


def newton_potential_on_boundary(f, curve, omega, N: int = 256, n_radial: int = 32):
    """``F(t_j) = int_Omega E(x(t_j) - y) f(y) dy`` at the boundary nodes."""
    if f is None:
        return np.zeros(N, dtype=complex)
    _check_forcing(curve, f)
    data = _prepare(curve, omega, N)
    return _newton_potential(data, f, data.x, data.theta, n_radial)


def assemble_and_solve(curve, omega, f=None, N: int = 256, n_radial: int = 32,
                       cond_limit: float = COND_LIMIT) -> LayerSystem:
    """Assemble ``S`` on the boundary, compute ``R f`` there and solve for ``v``.

    Raises
    ------
    SingularSystem
        If the condition number of the matrix exceeds ``cond_limit``.
    """
    if f is not None:
        _check_forcing(curve, f)
    data = _prepare(curve, omega, N)
    c = c_omega(data.omega)
    rows = np.array([data.log_weights(data.x[i], data.theta[i]) for i in range(N)])
    A = c * rows
    ff = f if f is not None else _zero
    rhs = _newton_potential(data, ff, data.x, data.theta, n_radial, weights=rows) if f is not None \
        else np.zeros(N, dtype=complex)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularSystem(f"condition number {cond:.3e} exceeds {cond_limit:.0e}", cond=cond)
    v = np.linalg.solve(A, rhs)
    return LayerSystem(curve, data.omega, N, data.theta, data.x, A, rhs, v, cond, c, f, n_radial, data)


def boundary_distance(curve, points, grid: int = 4096):
    """Signed distance to the boundary, positive inside."""
    th = np.arange(grid) / grid
    poly = _ShapelyPolygon(curve.point(th))
    ring = poly.exterior
    out = []
    for p in np.atleast_2d(points):
        pt = Point(p)
        dd = ring.distance(pt)
        out.append(dd if poly.contains(pt) else -dd)
    return np.array(out)


def evaluate_interior(system: LayerSystem, points, min_distance: float | None = None):
    """``u(p) = (R f)(p) - (S v)(p)`` at interior points.

    Raises
    ------
    TooCloseToBoundary
        If a point is within ``min_distance`` (default ``2/N``) of the boundary.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lim = 2.0 / system.N if min_distance is None else min_distance
    dist = boundary_distance(system.curve, pts)
    if np.any(dist <= lim):
        raise TooCloseToBoundary(f"points closer than {lim:g} to the boundary")
    data = system._data
    W = np.array([data.log_weights(p) for p in pts])
    Sv = system.c * (W @ system.density)
    if system.forcing is None:
        return -Sv
    Rf = _newton_potential(data, system.forcing, pts, None, system.n_radial, weights=W)
    return Rf - Sv


def evaluate_on_boundary(system: LayerSystem, theta):
    """``u(x(t))`` at arbitrary boundary parameters (zero for an exact solve)."""
    th = np.atleast_1d(np.asarray(theta, dtype=float)) % 1.0
    data = system._data
    pts = system.curve.point(th)
    W = np.array([data.log_weights(p, t) for p, t in zip(pts, th)])
    Sv = system.c * (W @ system.density)
    if system.forcing is None:
        return -Sv
    Rf = _newton_potential(data, system.forcing, pts, th, system.n_radial, weights=W)
    return Rf - Sv


def stencil_residual(system: LayerSystem, points, f=None, h: float = 0.01, levels: int = 4):
    """Richardson-extrapolated five-point residual ``P(omega) u - f`` at ``points``.

    Second differences with steps ``h, h/2, ...`` are combined to order
    ``2 levels``.
    """
    om = system.omega
    f = system.forcing if f is None else f
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    table = []
    for lev in range(levels):
        hh = h / 2**lev
        stencil = [pts] + [pts + sg * hh * e for e in (e1, e2) for sg in (1, -1)]
        u = evaluate_interior(system, np.concatenate(stencil), min_distance=0.0).reshape(5, len(pts))
        d11 = (u[1] - 2 * u[0] + u[2]) / hh**2
        d22 = (u[3] - 2 * u[0] + u[4]) / hh**2
        table.append((1 - om * om) * d22 - om * om * d11)
    # Richardson on even powers of the step
    for m in range(1, levels):
        fac = 4.0**m
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
    return table[0] - f(pts[:, 0], pts[:, 1])


def boundary_trace(system: LayerSystem, theta, deltas=None, degree: int = 8):
    """Extrapolate ``u`` along the inward normal to the boundary point ``x(t)``.

    The product weights stay accurate arbitrarily close to the boundary, so the
    default samples sit between ``0.5/N`` and ``4/N``.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    curve = system.curve
    if deltas is None:
        deltas = np.linspace(0.5, 4.0, degree + 3) / system.N
    out = []
    for t in th:
        x0 = curve.point(np.array([t]))[0]
        tg = curve.tangent(np.array([t]))[0]
        n = np.array([-tg[1], tg[0]]) / np.linalg.norm(tg)
        vals = evaluate_interior(system, x0 + np.outer(deltas, n), min_distance=0.0)
        cr = np.polynomial.polynomial.polyfit(deltas, vals.real, degree)
        ci = np.polynomial.polynomial.polyfit(deltas, vals.imag, degree)
        out.append(cr[0] + 1j * ci[0])
    return np.array(out)


def halton_probes(curve, n: int = 20, fraction: float = 0.6, seed: int | None = None):
    """``n`` Halton points in the disk of radius ``fraction * inradius`` about the centroid."""
    th = np.arange(4096) / 4096
    pts = curve.point(th)
    poly = _ShapelyPolygon(pts)
    c = np.array(poly.centroid.coords[0])
    rad = fraction * np.min(np.linalg.norm(pts - c, axis=1))
    u = qmc.Halton(d=2, scramble=seed is not None, seed=seed).random(n + 1)[1:]
    r = rad * np.sqrt(u[:, 0])
    a = 2 * np.pi * u[:, 1]
    return c + np.stack([r * np.cos(a), r * np.sin(a)], axis=1)


# --------------------------------------------------------------- sweeps --

@dataclass
class SweepEntry:
    h: float
    eps: float
    omega: complex
    v_l2: float = np.nan
    u_max: float = np.nan
    bdry_resid: float = np.nan
    cond: float = np.nan
    status: str = "ok"
    series: str = "vertical"


@dataclass
class SweepResult:
    lambda0: float
    d: float
    h: np.ndarray
    entries: list = field(default_factory=list)

    def series(self, name: str):
        return [e for e in self.entries if e.series == name]

    def slope(self, name: str = "vertical") -> float:
        """Least-squares slope of ``log ||v||`` against ``log h`` over successful entries."""
        es = [e for e in self.series(name) if e.status == "ok"]
        if len(es) < 2:
            return np.nan
        return float(np.polyfit(np.log([e.h for e in es]), np.log([e.v_l2 for e in es]), 1)[0])

    @property
    def growing(self) -> bool:
        return self.slope() < -0.5


def lap_sweep(curve, lambda0: float, d: float, h_list, f, probes=None, N: int = 256,
              sign: int = 1, with_eps: bool = True, n_radial: int = 32) -> SweepResult:
    """Solve along ``omega = lam0 + eps + i sign h`` for decreasing ``h``.

    Two series are recorded: ``"vertical"`` (``eps = 0``, used for the
    trend) and ``"edge"`` (``eps = h^(1/d)``, the edge of the polynomial
    region). Entries with ``Re omega`` outside ``(0, 1)`` are flagged
    ``"out_of_strip"`` and skipped; singular systems are recorded inline.
    """
    h = np.asarray(h_list, dtype=float)
    if np.any(h <= 0) or np.any(np.diff(h) >= 0):
        raise ValueError("h_list must be positive and strictly decreasing")
    if probes is None:
        probes = halton_probes(curve)
    res = SweepResult(float(lambda0), float(d), h)
    mids = (np.arange(16) + 0.5) / 16
    plan = [("vertical", 0.0)] + ([("edge", 1.0)] if with_eps else [])
    for name, on in plan:
        for hh in h:
            eps = on * hh ** (1.0 / d)
            om = complex(lambda0 + eps, sign * hh)
            e = SweepEntry(float(hh), float(eps), om, series=name)
            if not 0 < om.real < 1:
                e.status = "out_of_strip"
                res.entries.append(e)
                continue
            try:
                sysm = assemble_and_solve(curve, om, f, N, n_radial)
                e.v_l2 = sysm.v_l2
                e.cond = sysm.cond
                e.u_max = float(np.max(np.abs(evaluate_interior(sysm, probes))))
                e.bdry_resid = float(np.max(np.abs(evaluate_on_boundary(sysm, mids))))
            except SingularSystem as exc:
                e.status = "singular"
                e.cond = exc.cond
            res.entries.append(e)
    return res
