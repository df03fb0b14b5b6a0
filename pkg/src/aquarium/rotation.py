"""Rotation numbers of chess billiard maps.

Estimates are rigorous at finite orbit length: for any lift of an orientation
preserving circle homeomorphism, ``|B^n(x) - x - n r| < 1``, so the true
rotation number lies in ``[(B^n - x - 1)/n, (B^n - x + 1)/n]``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .billiard import ChessBilliard
from .errors import AquariumError


@dataclass(frozen=True)
class RotationEstimate:
    """Rotation number estimate ``value`` with enclosing ``interval``.

    ``value`` is the lift average ``(B^n - theta0)/n``; for chess billiards it
    already lies in ``[0, 1]`` because every lift increment lies in ``[0, 1)``.
    """

    value: float
    interval: tuple
    n: int
    theta0: float

    @property
    def lo(self):
        return self.interval[0]

    @property
    def hi(self):
        return self.interval[1]

    def contains(self, x, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def overlaps(self, other: "RotationEstimate") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def rotation_number(cb: ChessBilliard, theta0: float = 0.0, n: int = 100_000) -> RotationEstimate:
    """Orbit estimate of the rotation number with its classical interval."""
    if n < 10:
        raise ValueError("n must be at least 10")
    orbit = cb.lift_orbit(theta0, n)
    disp = orbit[-1] - orbit[0]
    return RotationEstimate(disp / n, ((disp - 1.0) / n, (disp + 1.0) / n), n, float(theta0))


def square_rotation_closed_form(lam):
    """Rotation number of the unit square, ``lam / (sqrt(1 - lam^2) + lam)``."""
    lam = np.asarray(lam, dtype=float)
    return lam / (np.sqrt(1.0 - lam**2) + lam)


def disk_rotation_closed_form(lam):
    """Rotation number of the disk, ``1 - (2/pi) arctan(sqrt(1 - lam^2)/lam)``."""
    lam = np.asarray(lam, dtype=float)
    return 1.0 - (2.0 / np.pi) * np.arctan(np.sqrt(1.0 - lam**2) / lam)


def inverse_square_closed_form(r):
    """``lam`` with square rotation number ``r``: ``lam / sqrt(1 - lam^2) = r / (1 - r)``."""
    t = r / (1.0 - r)
    return t / math.sqrt(1.0 + t * t)


def inverse_disk_closed_form(r):
    """``lam`` with disk rotation number ``r``."""
    t = math.tan(0.5 * math.pi * (1.0 - r))
    return 1.0 / math.sqrt(1.0 + t * t)


@dataclass
class ScanRow:
    lam: float
    estimate: RotationEstimate | None
    error: str = ""
    plateau: str = ""

    @property
    def ok(self):
        return self.estimate is not None


@dataclass
class ScanTable:
    rows: list = field(default_factory=list)
    plateaus: list = field(default_factory=list)

    @property
    def lams(self):
        return np.array([r.lam for r in self.rows])

    @property
    def values(self):
        return np.array([r.estimate.value if r.ok else np.nan for r in self.rows])

    def valid_rows(self):
        return [r for r in self.rows if r.ok]


def _one_row(curve, lam, n, theta0):
    try:
        cb = ChessBilliard(curve, lam)
        return ScanRow(lam, rotation_number(cb, theta0, n))
    except (AquariumError, ValueError) as exc:
        return ScanRow(lam, None, f"{type(exc).__name__}: {exc}")


def scan(curve, lambda_grid, n: int = 100_000, theta0: float = 0.0, threads: int = 1,
         q_max: int = 20, tol: float | None = None) -> ScanTable:
    """Rotation numbers over a strictly increasing grid of ``lam``.

    Rows where the billiard cannot be built (for instance a smooth curve that
    is not ``lam``-simple) carry an error string instead of an estimate.
    Plateaus are annotated with :func:`detect_plateaus`.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("lambda_grid must be strictly increasing")
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(lambda l: _one_row(curve, l, n, theta0), grid))
    else:
        rows = [_one_row(curve, l, n, theta0) for l in grid]
    table = ScanTable(rows)
    table.plateaus = detect_plateaus(table, q_max, 2.0 / n if tol is None else tol)
    for p, (lo, hi) in table.plateaus:
        for r in table.rows:
            if lo <= r.lam <= hi:
                r.plateau = f"{p.numerator}/{p.denominator}"
    return table


def detect_plateaus(table: ScanTable, q_max: int = 20, tol: float = 2e-5):
    """Maximal runs of consecutive rows locked to one rational ``p/q``.

    A row is locked to ``p/q`` (``q <= q_max``) when ``|value - p/q| <= tol``
    and ``p/q`` lies inside its interval. Runs of fewer than two rows have zero
    width and are not reported.

    Returns
    -------
    list of (Fraction, (lam_lo, lam_hi))
    """
    def locked(row):
        if not row.ok:
            return None
        est = row.estimate
        f = Fraction(est.value).limit_denominator(q_max)
        if abs(est.value - float(f)) <= tol and est.contains(float(f)):
            return f
        return None

    out = []
    run_val, run_start = None, None
    rows = table.rows
    for i, row in enumerate(rows + [None]):
        f = locked(row) if row is not None else None
        if f != run_val:
            if run_val is not None and i - 1 > run_start:
                out.append((run_val, (rows[run_start].lam, rows[i - 1].lam)))
            run_val, run_start = f, i
    return out
