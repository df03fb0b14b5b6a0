"""Boundary curves and the characteristic linear functionals.

A boundary is parametrized by ``theta`` in ``[0, 1)`` (the circle R/Z), always
positively oriented. Two kinds are supported:

* :class:`FourierCurve`, ``x_j(theta) = Re sum_n c_{j,n} exp(2 pi i n theta)``
* :class:`Polygon`, affine on each edge with parameter proportional to arclength.

The characteristic functionals are

.. math::

    \\ell^\\pm(x, \\omega) = \\pm x_1 / \\omega + x_2 / \\sqrt{1 - \\omega^2},

with the principal square root on ``C \\ (-inf, 0]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.optimize import brentq
from shapely.geometry import LineString, Polygon as _ShapelyPolygon

from .errors import GeometryError, GridTooCoarse

TWO_PI = 2.0 * np.pi
DISK_RADIUS = 1.0 / TWO_PI


@dataclass(frozen=True)
class SpectralParameter:
    """Spectral parameter ``omega = lam + sign * 1j * h``."""

    lam: float
    h: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must lie in (0, 1), got {self.lam}")
        if self.h < 0.0:
            raise ValueError(f"h must be non-negative, got {self.h}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def omega(self) -> complex:
        return complex(self.lam, self.sign * self.h)

    @property
    def is_real(self) -> bool:
        return self.h == 0.0

    @classmethod
    def from_complex(cls, omega: complex) -> "SpectralParameter":
        omega = complex(omega)
        return cls(omega.real, abs(omega.imag), -1 if omega.imag < 0 else 1)


def _as_omega(omega):
    if isinstance(omega, SpectralParameter):
        return omega.omega if omega.h else omega.lam
    return omega


def ell_coefficients(omega, sign: int):
    """Coefficients ``(a, b)`` with ``ell^sign(x, omega) = a x_1 + b x_2``."""
    w = _as_omega(omega)
    if np.iscomplexobj(w) or isinstance(w, complex):
        w = complex(w)
        return sign / w, 1.0 / np.sqrt(1.0 - w * w + 0j)
    w = float(w)
    return sign / w, 1.0 / math.sqrt(1.0 - w * w)


def ell(x, omega, sign: int):
    """Evaluate ``ell^sign(x, omega)``; ``x`` has trailing dimension 2.

    Real-valued for real ``omega`` in (0, 1).
    """
    a, b = ell_coefficients(omega, sign)
    x = np.asarray(x)
    out = a * x[..., 0] + b * x[..., 1]
    return out if out.ndim else out[()]


def quadratic_form(x, omega):
    """``A(x, omega) = -x_1^2/omega^2 + x_2^2/(1 - omega^2) = ell^+ ell^-``."""
    w = complex(_as_omega(omega))
    x = np.asarray(x)
    return -x[..., 0] ** 2 / w**2 + x[..., 1] ** 2 / (1.0 - w * w)


class BoundaryCurve:
    """Positively oriented closed curve parametrized on ``[0, 1)``."""

    kind = "abstract"
    orientation = True

    def point(self, theta):
        raise NotImplementedError

    def tangent(self, theta):
        raise NotImplementedError

    def speed(self, theta):
        return np.linalg.norm(self.tangent(theta), axis=-1)

    @property
    def perimeter(self) -> float:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError


class FourierCurve(BoundaryCurve):
    """Curve ``x_j(theta) = Re sum_n c_{j,n} e^{2 pi i n theta}``.

    Parameters
    ----------
    modes : sequence of int
        Fourier indices ``n``.
    cx, cy : sequence of complex
        Coefficients of the two coordinates.
    check_grid : int
        Number of samples used for the immersion and simplicity checks.
    """

    kind = "fourier"

    def __init__(self, modes, cx, cy, check_grid: int = 2048, _spec=None):
        modes = np.asarray(modes, dtype=np.int64)
        cx = np.asarray(cx, dtype=complex)
        cy = np.asarray(cy, dtype=complex)
        if not (modes.shape == cx.shape == cy.shape) or modes.ndim != 1:
            raise GeometryError("modes, cx, cy must be 1-d arrays of equal length")
        if np.any(modes == 0):
            # constant terms only translate the curve
            pass
        self._spec = _spec
        self.modes, self.cx, self.cy = modes, cx, cy
        th = np.arange(check_grid) / check_grid
        if self._signed_area(th) < 0:
            self.modes = -modes
        for arr in (self.modes, self.cx, self.cy):
            arr.setflags(write=False)
        if np.min(self.speed(th)) <= 1e-12:
            raise GeometryError("curve is not immersed (vanishing tangent)")
        pts = self.point(th)
        if not LineString(np.vstack([pts, pts[:1]])).is_simple:
            raise GeometryError("curve self-intersects")
        self._perimeter = float(np.mean(self.speed(th)))

    # analytic continuation: Re z -> (z + conj-coefficient term) / 2
    def _eval(self, theta, order: int = 0):
        theta = np.asarray(theta)
        e = np.exp(2j * np.pi * theta[..., None] * self.modes)
        einv = np.exp(-2j * np.pi * theta[..., None] * self.modes)
        k = (2j * np.pi * self.modes) ** order
        kc = (-2j * np.pi * self.modes) ** order
        x = 0.5 * ((self.cx * k) * e + (np.conj(self.cx) * kc) * einv).sum(-1)
        y = 0.5 * ((self.cy * k) * e + (np.conj(self.cy) * kc) * einv).sum(-1)
        out = np.stack([x, y], axis=-1)
        if not np.iscomplexobj(theta):
            out = out.real
        return out

    def point(self, theta):
        return self._eval(theta, 0)

    def tangent(self, theta):
        return self._eval(theta, 1)

    def second_derivative(self, theta):
        return self._eval(theta, 2)

    def _signed_area(self, th):
        p = self._eval(th, 0)
        d = self._eval(th, 1)
        return 0.5 * np.mean(p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0])

    @property
    def perimeter(self) -> float:
        return self._perimeter

    @property
    def degree(self) -> int:
        return int(np.max(np.abs(self.modes)))

    def laurent(self, a, b):
        """Laurent coefficients of ``a x_1(theta) + b x_2(theta)``.

        Returns an array ``L`` of length ``2M + 1`` with
        ``a x_1 + b x_2 = sum_m L[m + M] exp(2 pi i m theta)``, valid for complex
        ``theta`` as well.
        """
        M = self.degree
        L = np.zeros(2 * M + 1, dtype=complex)
        for n, cx, cy in zip(self.modes, self.cx, self.cy):
            L[n + M] += 0.5 * (a * cx + b * cy)
            L[-n + M] += 0.5 * (a * np.conj(cx) + b * np.conj(cy))
        return L

    def to_spec(self) -> dict:
        if self._spec is not None:
            return dict(self._spec)
        return {
            "type": "fourier",
            "coeffs": [
                [int(n), c.real, c.imag, d.real, d.imag]
                for n, c, d in zip(self.modes, self.cx, self.cy)
            ],
        }

    def is_convex(self, grid: int = 4096) -> bool:
        th = np.arange(grid) / grid
        d1 = self.tangent(th)
        d2 = self.second_derivative(th)
        return bool(np.all(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] > 0))


class Polygon(BoundaryCurve):
    """Polygon with vertices stored exactly, parameter proportional to arclength.

    Vertex 0 sits at ``theta = 0``. Clockwise input is reversed.
    """

    kind = "polygon"

    def __init__(self, vertices, _spec=None):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("polygon needs at least three 2-d vertices")
        self._spec = _spec
        poly = _ShapelyPolygon(v)
        if not poly.is_valid:
            raise GeometryError("polygon self-intersects")
        if _signed_area_poly(v) < 0:
            v = np.vstack([v[:1], v[:0:-1]])
        nxt = np.roll(v, -1, axis=0)
        prv = np.roll(v, 1, axis=0)
        cross = (v[:, 0] - prv[:, 0]) * (nxt[:, 1] - v[:, 1]) - (v[:, 1] - prv[:, 1]) * (
            nxt[:, 0] - v[:, 0]
        )
        scale = np.max(np.abs(v)) ** 2 + 1.0
        if np.any(np.abs(cross) <= 1e-14 * scale):
            raise GeometryError("three consecutive vertices are collinear")
        lengths = np.linalg.norm(nxt - v, axis=1)
        self.vertices = v
        self.breaks = np.concatenate([[0.0], np.cumsum(lengths) / lengths.sum()])
        self.breaks[-1] = 1.0
        self._perimeter = float(lengths.sum())
        self.vertices.setflags(write=False)
        self.breaks.setflags(write=False)

    def _locate(self, theta):
        t = np.mod(np.asarray(theta, dtype=float), 1.0)
        e = np.searchsorted(self.breaks, t, side="right") - 1
        e = np.clip(e, 0, len(self.vertices) - 1)
        s = (t - self.breaks[e]) / (self.breaks[e + 1] - self.breaks[e])
        return e, s

    def point(self, theta):
        e, s = self._locate(theta)
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return v[e] + s[..., None] * (w[e] - v[e])

    def tangent(self, theta):
        e, _ = self._locate(theta)
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return (w[e] - v[e]) / (self.breaks[e + 1] - self.breaks[e])[..., None]

    @property
    def perimeter(self) -> float:
        return self._perimeter

    def is_convex(self) -> bool:
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        prv = np.roll(v, 1, axis=0)
        cross = (v[:, 0] - prv[:, 0]) * (nxt[:, 1] - v[:, 1]) - (v[:, 1] - prv[:, 1]) * (
            nxt[:, 0] - v[:, 0]
        )
        return bool(np.all(cross > 0))

    def to_spec(self) -> dict:
        if self._spec is not None:
            return dict(self._spec)
        return {"type": "polygon", "vertices": self.vertices.tolist()}


def _signed_area_poly(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def disk(radius: float = DISK_RADIUS) -> FourierCurve:
    """Circle of the given radius (default ``1/(2 pi)``, unit perimeter), starting at ``(r, 0)``."""
    spec = {"type": "disk"} if radius == DISK_RADIUS else None
    return FourierCurve([1], [radius], [-1j * radius], _spec=spec)


def ellipse(a: float, b: float) -> FourierCurve:
    """Ellipse ``(a cos 2 pi theta, b sin 2 pi theta)``."""
    return FourierCurve([1], [a], [-1j * b])


def unit_square() -> Polygon:
    return Polygon([(0, 0), (1, 0), (1, 1), (0, 1)], _spec={"type": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]})


def tilted_square(eta: float) -> Polygon:
    """Unit square rotated by ``eta`` about the origin."""
    c, s = math.cos(eta), math.sin(eta)
    r = math.sqrt(2.0)
    verts = [(0.0, 0.0), (c, s), (r * math.cos(eta + math.pi / 4), r * math.sin(eta + math.pi / 4)), (-s, c)]
    return Polygon(verts, _spec={"type": "tilted_square", "eta": eta})


def curve_from_spec(spec) -> BoundaryCurve:
    """Build a curve from a domain JSON object (or string / shorthand name)."""
    if isinstance(spec, str):
        s = spec.strip()
        if s in ("disk", "square", "tilted_square"):
            spec = {"disk": {"type": "disk"}, "square": {"type": "square"},
                    "tilted_square": {"type": "tilted_square", "eta": math.pi / 20}}[s]
        else:
            spec = json.loads(s)
    kind = spec.get("type")
    if kind == "disk":
        return disk()
    if kind == "square":
        return unit_square()
    if kind == "polygon":
        return Polygon(spec["vertices"], _spec=dict(spec))
    if kind == "tilted_square":
        return tilted_square(float(spec["eta"]))
    if kind == "fourier":
        rows = np.asarray(spec["coeffs"], dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 5:
            raise GeometryError("fourier coeffs rows must be [n, re_x, im_x, re_y, im_y]")
        return FourierCurve(
            rows[:, 0].astype(int), rows[:, 1] + 1j * rows[:, 2], rows[:, 3] + 1j * rows[:, 4],
            _spec=dict(spec),
        )
    raise GeometryError(f"unknown domain type {kind!r}")


def boundary_ell(curve: BoundaryCurve, theta, omega, sign: int):
    """``ell^sign(x(theta), omega)``."""
    return ell(curve.point(theta), omega, sign)


@dataclass(frozen=True)
class CriticalPoint:
    theta: float
    value: float
    second_derivative: float
    kind: str  # "min", "max" or "degenerate"


@dataclass(frozen=True)
class SimplicityReport:
    is_simple: bool
    critical_points: dict = field(default_factory=dict)
    reason: str = ""

    def extremes(self, sign: int):
        """``(theta_min, value_min, theta_max, value_max)`` for the given sign."""
        pts = self.critical_points[sign]
        lo = next(p for p in pts if p.kind == "min")
        hi = next(p for p in pts if p.kind == "max")
        return lo.theta, lo.value, hi.theta, hi.value


def _trig_real(L, theta, order=0):
    """Evaluate ``d^order/dtheta^order sum_m L_m e^{2 pi i m theta}`` (real part)."""
    M = (len(L) - 1) // 2
    m = np.arange(-M, M + 1)
    e = np.exp(2j * np.pi * np.multiply.outer(np.asarray(theta, dtype=float), m))
    return ((2j * np.pi * m) ** order * L * e).sum(-1).real


def check_lambda_simple(curve: BoundaryCurve, lam: float, tol: float = 1e-8, grid: int = 4096):
    """Locate the critical points of ``theta -> ell^pm(x(theta), lam)``.

    Critical points are bracketed by sign changes of the derivative on a
    uniform grid, then polished with Brent's method followed by Newton steps.

    Raises
    ------
    GridTooCoarse
        If two sign changes are fewer than two grid cells apart.
    """
    if not isinstance(curve, FourierCurve):
        return SimplicityReport(False, {}, "polygons have corners and are never lambda-simple")
    th = np.arange(grid) / grid
    crit = {}
    simple = True
    reasons = []
    for sign in (1, -1):
        a, b = ell_coefficients(lam, sign)
        L = curve.laurent(a, b)
        d1 = _trig_real(L, th, 1)
        s = np.sign(d1)
        idx = np.nonzero(s != np.roll(s, -1))[0]
        # zero samples produce two flagged cells; keep the first of each pair
        idx = np.array([i for i in idx if not (s[i] == 0 and (i - 1) % grid in idx)], dtype=int)
        if len(idx) > 1:
            gaps = np.diff(np.concatenate([idx, [idx[0] + grid]]))
            if np.min(gaps) < 2:
                raise GridTooCoarse(f"critical points of ell^{sign:+d} closer than 2 grid cells")
        pts = []
        for i in idx:
            lo, hi = th[i], th[i] + 1.0 / grid
            f = lambda t: _trig_real(L, t, 1)
            if f(lo) == 0.0:
                t = lo
            else:
                t = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            for _ in range(3):
                d2 = _trig_real(L, t, 2)
                if d2 == 0:
                    break
                step = _trig_real(L, t, 1) / d2
                if abs(step) > 1.0 / grid:
                    break
                t -= step
            d2 = float(_trig_real(L, t, 2))
            kind = "degenerate" if abs(d2) < tol else ("min" if d2 > 0 else "max")
            pts.append(CriticalPoint(float(t % 1.0), float(_trig_real(L, t)), d2, kind))
        crit[sign] = pts
        kinds = sorted(p.kind for p in pts)
        if kinds != ["max", "min"]:
            simple = False
            reasons.append(f"ell^{sign:+d} has critical kinds {kinds}")
    return SimplicityReport(simple, crit, "; ".join(reasons))
