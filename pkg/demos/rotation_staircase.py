"""Rotation number of the billiard map over lambda for three domains.

Prints lambda, rotation number and detected rational plateaus.  Run with
``python demos/rotation_staircase.py``.
"""
import math

import numpy as np

from aquarium import geometry as geo, rotation as rot


def main():
    lam = np.linspace(0.2, 0.9, 200)
    for name, curve in [("disk", geo.disk()), ("square", geo.unit_square()),
                        ("tilted_square", geo.tilted_square(math.pi / 20))]:
        table = rot.scan(curve, lam, 20_000)
        print(f"{name}: r in [{table.values.min():.4f}, {table.values.max():.4f}]")
        for p, (lo, hi) in table.plateaus:
            print(f"  plateau {p} on [{lo:.4f}, {hi:.4f}]")


if __name__ == "__main__":
    main()
