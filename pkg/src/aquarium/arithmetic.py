"""Continued fractions and finite-scale Diophantine profiles.

Every classification here holds only up to the scanned denominator ``q_max``;
the true Diophantine property of a floating point number is not decidable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients ``[a0; a1, a2, ...]`` with exact integer convergents."""

    quotients: tuple
    terminated: bool = False

    @property
    def depth(self) -> int:
        return len(self.quotients) - 1

    def convergents(self):
        """List of ``(p, q)`` as Python ints."""
        p0, q0, p1, q1 = 1, 0, self.quotients[0], 1
        out = [(p1, q1)]
        for a in self.quotients[1:]:
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            out.append((p1, q1))
        return out

    def value(self) -> float:
        p, q = self.convergents()[-1]
        return p / q

    def __str__(self):
        a = self.quotients
        return f"[{a[0]};" + ",".join(str(x) for x in a[1:]) + "]"


def continued_fraction(x: float, depth: int = 40, rtol: float = 1e-14) -> ContinuedFraction:
    """Euclidean expansion of ``x`` up to ``depth`` partial quotients after ``a0``.

    The expansion runs in exact rational arithmetic on the binary value of
    ``x`` and stops early once a convergent reproduces ``x`` to ``rtol``
    (rational detection).
    """
    if depth > 40:
        raise ValueError("depth beyond 40 exceeds double precision")
    exact = Fraction(x)
    a0 = math.floor(exact)
    quotients = [a0]
    rem = exact - a0
    p0, q0, p1, q1 = 1, 0, a0, 1
    tol = rtol * max(1.0, abs(x))
    terminated = rem == 0
    while not terminated and len(quotients) <= depth:
        rem = 1 / rem
        a = math.floor(rem)
        rem -= a
        quotients.append(a)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if rem == 0 or abs(float(exact - Fraction(p1, q1))) <= tol:
            terminated = True
    exact_hit = abs(float(exact - Fraction(p1, q1))) <= 8 * np.finfo(float).eps * max(1.0, abs(x))
    if exact_hit and len(quotients) > 2 and quotients[-1] == 1:
        # x is a rational up to rounding: canonical form [..., a, 1] -> [..., a + 1]
        quotients.pop()
        quotients[-1] += 1
    return ContinuedFraction(tuple(quotients), terminated)


@dataclass(frozen=True)
class DiophantineProfile:
    """Bound ``|x - p/q| >= c / q^(2 + beta)`` verified for all ``q <= q_max``.

    Attributes
    ----------
    convergents : list of (p, q, quality)
        Convergents with ``q <= q_max`` and ``quality = q * |q x - p|``.
    beta, c : float
        Fitted exponent and the largest constant valid for that exponent.
    resonance : (p, q) or None
        First rational within ``tol`` of ``x``.
    """

    x: float
    q_max: int
    convergents: list = field(default_factory=list)
    beta: float = 0.0
    c: float = 0.0
    resonance: tuple | None = None

    @property
    def is_resonant(self) -> bool:
        return self.resonance is not None

    def bound(self, q):
        return self.c / np.asarray(q, dtype=float) ** (2.0 + self.beta)

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "q_max": self.q_max,
            "scale_note": f"classification holds only for denominators q <= {self.q_max}",
            "beta": self.beta,
            "c": self.c,
            "is_resonant": self.is_resonant,
            "resonance": list(self.resonance) if self.resonance else None,
            "convergents": [[int(p), int(q), float(m)] for p, q, m in self.convergents],
        }


def _distances(x, q_max):
    q = np.arange(1, q_max + 1, dtype=float)
    qx = q * x
    p = np.rint(qx)
    return q, p, np.abs(qx - p)


def diophantine_profile(x: float, q_max: int = 10_000, tol: float = 1e-12) -> DiophantineProfile:
    """Finite-scale Diophantine profile of ``x``.

    ``beta`` is the decay rate of the approximation quality ``q |q x - p|``
    along the convergents, taken as ``max(0, -slope)`` of a least-squares fit
    of ``log(q |q x - p|)`` against ``log q`` (constant type gives ``beta = 0``).
    ``c`` is then the minimum of ``q^(1 + beta) |q x - p|`` over every
    ``q <= q_max``, so the bound holds by construction and is re-checked
    before returning.
    """
    if q_max < 2:
        raise ValueError("q_max must be at least 2")
    q, p, dist = _distances(x, q_max)
    hit = np.nonzero(dist < tol * q)[0]
    resonance = (int(p[hit[0]]), int(q[hit[0]])) if len(hit) else None

    conv = []
    for pk, qk in continued_fraction(x).convergents():
        if qk > q_max:
            break
        conv.append((pk, qk, qk * abs(qk * x - pk)))

    beta = 0.0
    pts = [(math.log(qk), math.log(m)) for _, qk, m in conv if qk >= 2 and m > 0]
    if resonance is None and len(pts) >= 2:
        lq, lm = np.array(pts).T
        slope = np.polyfit(lq, lm, 1)[0]
        beta = max(0.0, -float(slope))
    c = float(np.min(q ** (1.0 + beta) * dist))
    if resonance is not None:
        c = 0.0
    # self-verification of |x - p/q| >= c / q^(2 + beta) for every q <= q_max
    lhs = dist / q
    rhs = c / q ** (2.0 + beta)
    if np.any(lhs < rhs * (1.0 - 1e-12)):
        raise AssertionError("Diophantine bound failed self-verification")
    return DiophantineProfile(float(x), int(q_max), conv, beta, c, resonance)
