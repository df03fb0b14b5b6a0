"""Chess billiard involutions, the map b = gamma+ o gamma-, and lifted orbits.

Heavy loops run in numba kernels which report failures through integer
status codes; the Python layer turns those into exceptions and handles the
corner-hit perturbation protocol.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .errors import CornerHit, GeometryError, NotLambdaSimple, PeriodicCornerOrbit
from .geometry import FourierCurve, Polygon, check_lambda_simple, ell, ell_coefficients

OK = 0
CORNER = 1
NO_ROOT = 2

FIXED_TOL = 1e-12
CORNER_TOL = 1e-13
PERTURB = 1e-12
MAX_RETRIES = 100


# ---------------------------------------------------------------- kernels --

@njit(cache=True)
def _trig(A, B, t):
    # f(t) = sum_m A_m cos 2 pi m t + B_m sin 2 pi m t and its derivative
    f = A[0]
    df = 0.0
    for m in range(1, A.shape[0]):
        w = 2.0 * np.pi * m
        c = np.cos(w * t)
        s = np.sin(w * t)
        f += A[m] * c + B[m] * s
        df += w * (B[m] * c - A[m] * s)
    return f, df


@njit(cache=True)
def _mod1(x):
    y = x - np.floor(x)
    if y >= 1.0:
        y = 0.0
    return y


@njit(cache=True)
def _smooth_gamma(A, B, tmin, tmax, vmin, vmax, theta):
    v, _ = _trig(A, B, theta)
    # next to a critical point the partner is the mirror image to O(u^3)
    if abs(v - vmin) < FIXED_TOL:
        return _mod1(2.0 * tmin - theta), OK
    if abs(v - vmax) < FIXED_TOL:
        return _mod1(2.0 * tmax - theta), OK
    span = _mod1(tmax - tmin)
    u = _mod1(theta - tmin)
    # ell increases on [tmin, tmax] and decreases on [tmax, tmin + 1]
    if u < span:
        a, b = span, 1.0
        ga, gb = vmax - v, vmin - v
    else:
        a, b = 0.0, span
        ga, gb = vmin - v, vmax - v
    if ga * gb > 0.0:
        return theta, NO_ROOT
    s = a + (b - a) * ga / (ga - gb)
    for _ in range(200):
        g, dg = _trig(A, B, tmin + s)
        g -= v
        if g == 0.0:
            break
        if (g < 0.0) == (ga < 0.0):
            a = s
        else:
            b = s
        step = g / dg if dg != 0.0 else 1.0e300
        s_new = s - step
        if not (a < s_new < b):
            s_new = 0.5 * (a + b)
        if abs(s_new - s) < 1e-16 or b - a < 1e-16:
            s = s_new
            break
        s = s_new
    return _mod1(tmin + s), OK


@njit(cache=True)
def _poly_gamma(Lv, breaks, theta):
    # Lv: ell at the vertices, breaks: parameter of each vertex (len nv + 1)
    nv = Lv.shape[0]
    t = _mod1(theta)
    e = np.searchsorted(breaks, t, side="right") - 1
    if e >= nv:
        e = nv - 1
    s = (t - breaks[e]) / (breaks[e + 1] - breaks[e])
    l0 = Lv[e]
    l1 = Lv[(e + 1) % nv]
    v = l0 + s * (l1 - l0)
    scale = 1.0
    for i in range(nv):
        scale = max(scale, abs(Lv[i]))
        if abs(v - Lv[i]) < CORNER_TOL * scale:
            return theta, CORNER
    found = -1
    out = theta
    for j in range(nv):
        if j == e:
            continue
        a = Lv[j]
        b = Lv[(j + 1) % nv]
        if (a - v) * (b - v) < 0.0:
            if found >= 0:
                return theta, NO_ROOT
            found = j
            r = (v - a) / (b - a)
            out = breaks[j] + r * (breaks[j + 1] - breaks[j])
    if found < 0:
        return theta, NO_ROOT
    return _mod1(out), OK


@njit(cache=True)
def _smooth_map(Ap, Bp, cp, Am, Bm, cm, theta):
    t1, st = _smooth_gamma(Am, Bm, cm[0], cm[1], cm[2], cm[3], theta)
    if st != OK:
        return theta, st
    return _smooth_gamma(Ap, Bp, cp[0], cp[1], cp[2], cp[3], t1)


@njit(cache=True)
def _poly_map(Lp, Lm, breaks, theta):
    t1, st = _poly_gamma(Lm, breaks, theta)
    if st != OK:
        return theta, st
    return _poly_gamma(Lp, breaks, t1)


@njit(cache=True)
def _orbit_smooth(Ap, Bp, cp, Am, Bm, cm, theta0, wraps0, n, out):
    # fills out[0..n] with lift values; returns (steps completed, status)
    t = _mod1(theta0)
    w = wraps0
    out[0] = w + t
    for k in range(n):
        t2, st = _smooth_map(Ap, Bp, cp, Am, Bm, cm, t)
        if st != OK:
            return k, st
        if t2 < t:
            w += 1.0
        t = t2
        out[k + 1] = w + t
    return n, OK


@njit(cache=True)
def _orbit_poly(Lp, Lm, breaks, theta0, wraps0, n, out):
    t = _mod1(theta0)
    w = wraps0
    out[0] = w + t
    for k in range(n):
        t2, st = _poly_map(Lp, Lm, breaks, t)
        if st != OK:
            return k, st
        if t2 < t:
            w += 1.0
        t = t2
        out[k + 1] = w + t
    return n, OK


@njit(cache=True)
def _vec_smooth_gamma(A, B, c, theta, out, status):
    for i in range(theta.shape[0]):
        out[i], status[i] = _smooth_gamma(A, B, c[0], c[1], c[2], c[3], theta[i])


@njit(cache=True)
def _vec_poly_gamma(Lv, breaks, theta, out, status):
    for i in range(theta.shape[0]):
        out[i], status[i] = _poly_gamma(Lv, breaks, theta[i])


# -------------------------------------------------------------- interface --

def _cos_sin(L):
    """Real cos/sin coefficients of the real trigonometric polynomial with Laurent coefficients L."""
    M = (len(L) - 1) // 2
    A = np.zeros(M + 1)
    B = np.zeros(M + 1)
    A[0] = L[M].real
    for m in range(1, M + 1):
        A[m] = 2.0 * L[M + m].real
        B[m] = -2.0 * L[M + m].imag
    return A, B


class ChessBilliard:
    """The chess billiard of a domain at a real spectral parameter ``lam``.

    Parameters
    ----------
    curve : FourierCurve or Polygon
    lam : float
        Spectral parameter in (0, 1).

    Raises
    ------
    NotLambdaSimple
        For a smooth curve which is not ``lam``-simple.
    """

    def __init__(self, curve, lam: float):
        if not 0.0 < lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        self.curve = curve
        self.lam = float(lam)
        self.lift_anchor = 0.0
        if isinstance(curve, FourierCurve):
            self.report = check_lambda_simple(curve, lam)
            if not self.report.is_simple:
                raise NotLambdaSimple(self.report.reason)
            self._data = {}
            for sign in (1, -1):
                a, b = ell_coefficients(lam, sign)
                A, B = _cos_sin(curve.laurent(a, b))
                tmin, vmin, tmax, vmax = self.report.extremes(sign)
                self._data[sign] = (A, B, np.array([tmin, tmax, vmin, vmax]))
            self.smooth = True
        elif isinstance(curve, Polygon):
            self.report = None
            self.edge_table = {s: ell(curve.vertices, lam, s) for s in (1, -1)}
            self._breaks = np.ascontiguousarray(curve.breaks)
            self.smooth = False
        else:
            raise GeometryError("unsupported curve type")

    def gamma(self, sign: int, theta):
        """The involution fixing the level sets of ``ell^sign`` on the boundary.

        Accepts scalars or arrays. Raises :class:`CornerHit` if a polygon
        level line meets a vertex.
        """
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.empty_like(th)
        status = np.empty(th.shape, dtype=np.int64)
        flat = np.ascontiguousarray(th.ravel())
        o, s = out.ravel(), status.ravel()
        if self.smooth:
            A, B, c = self._data[sign]
            _vec_smooth_gamma(A, B, c, flat, o, s)
        else:
            _vec_poly_gamma(self.edge_table[sign], self._breaks, flat, o, s)
        out, status = o.reshape(th.shape), s.reshape(th.shape)
        _raise_status(status)
        return out if np.ndim(theta) else float(out[0])

    def map(self, theta):
        """``b(theta) = gamma+(gamma-(theta))`` on the circle."""
        return self.gamma(1, self.gamma(-1, theta))

    def lift(self, theta):
        """Lift ``B`` with ``B(theta) - theta`` in ``[0, 1)``; ``B(x + 1) = B(x) + 1``."""
        theta = np.asarray(theta, dtype=float)
        fl = np.floor(theta)
        t = theta - fl
        bt = self.map(t)
        return fl + t + np.mod(bt - t, 1.0)

    def _orbit_kernel(self, theta0, wraps0, n, out):
        if self.smooth:
            Ap, Bp, cp = self._data[1]
            Am, Bm, cm = self._data[-1]
            return _orbit_smooth(Ap, Bp, cp, Am, Bm, cm, theta0, wraps0, n, out)
        return _orbit_poly(self.edge_table[1], self.edge_table[-1], self._breaks, theta0, wraps0, n, out)

    def lift_orbit(self, theta0: float, n: int) -> np.ndarray:
        """Lift values ``B^k(theta0)`` for ``k = 0..n``.

        Corner hits are resolved by perturbing the current point by
        ``+-1e-12`` (alternating, growing in multiples); more than 100 retries
        along one orbit raise :class:`PeriodicCornerOrbit`.
        """
        if n < 0:
            raise ValueError("n must be non-negative")
        out = np.empty(n + 1)
        theta0 = float(theta0)
        fl = np.floor(theta0)
        t, w = theta0 - fl, fl
        done, retries = 0, 0
        while True:
            k, st = self._orbit_kernel(t, w, n - done, out[done:])
            done += k
            if st == OK:
                break
            if st == NO_ROOT:
                raise GeometryError("level line has no unique second intersection")
            retries += 1
            if retries > MAX_RETRIES:
                raise PeriodicCornerOrbit(f"more than {MAX_RETRIES} corner hits along the orbit")
            mult = (retries + 1) // 2
            delta = PERTURB * mult * (1 if retries % 2 else -1)
            cur = out[done] + delta
            out[done] = cur
            w = np.floor(cur)
            t = cur - w
        out[0] = theta0
        return out


def _raise_status(status):
    if np.any(status == CORNER):
        raise CornerHit("level line passes through a polygon vertex")
    if np.any(status == NO_ROOT):
        raise GeometryError("level line has no unique second intersection")


def gamma(cb: ChessBilliard, sign: int, theta):
    return cb.gamma(sign, theta)


def chess_billiard(cb: ChessBilliard, theta):
    return cb.map(theta)


def lift_orbit(cb: ChessBilliard, theta0: float, n: int):
    return cb.lift_orbit(theta0, n)
