"""Smooth compactly supported forcing profiles.

Two profiles are available, both ``C^infinity`` with support in the closed
disk of radius ``radius`` about ``center``:

* ``"bump"``: ``amp * exp(1 - 1 / (1 - s^2))`` with ``s = |x - c| / radius``;
* ``"gauss"``: ``amp * exp(-|x - c|^2 / (2 sigma^2)) * chi(s)`` where ``chi``
  is a smooth cutoff equal to 1 for ``s <= 0.6``. Its sine coefficients decay
  like a Gaussian until the (tiny) cutoff contribution takes over.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


def _smooth_step(s):
    # C^infinity step: 0 for s <= 0, 1 for s >= 1
    s = np.clip(s, 0.0, 1.0)
    a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class Bump:
    center: tuple = (0.43, 0.41)
    radius: float = 0.3
    amp: float = 1.0
    kind: str = "bump"
    sigma: float = 0.05

    def __post_init__(self):
        if self.kind not in ("bump", "gauss"):
            raise ValueError(f"unknown bump kind {self.kind!r}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        r2 = (x1 - self.center[0]) ** 2 + (x2 - self.center[1]) ** 2
        s2 = r2 / self.radius**2
        if self.kind == "bump":
            inside = s2 < 1.0
            safe = np.where(inside, 1.0 - s2, 1.0)
            return self.amp * np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)
        cut = 1.0 - _smooth_step((np.sqrt(s2) - 0.6) / 0.4)
        return self.amp * np.exp(-r2 / (2.0 * self.sigma**2)) * cut

    @property
    def support_disk(self):
        """``(center, radius)`` of the closed disk containing the support."""
        return np.asarray(self.center, dtype=float), float(self.radius)

    @property
    def box(self):
        """Axis-aligned bounding box ``(x1_lo, x1_hi, x2_lo, x2_hi)`` of the support."""
        c, r = self.center, self.radius
        return (c[0] - r, c[0] + r, c[1] - r, c[1] + r)

    def inside_square(self) -> bool:
        lo1, hi1, lo2, hi2 = self.box
        return lo1 > 0 and lo2 > 0 and hi1 < 1 and hi2 < 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["center"] = list(self.center)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Bump":
        d = dict(d)
        if "center" in d:
            d["center"] = tuple(float(v) for v in d["center"])
        return cls(**d)
