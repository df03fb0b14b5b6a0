"""Limiting absorption in the disk: bounded versus growing boundary densities."""
import math

import numpy as np

from aquarium import geometry as geo, layerpot as lp, rotation as rot
from aquarium.forcing import Bump


def main():
    disk = geo.disk()
    f = Bump(center=(0.03, 0.02), radius=0.08)
    hs = np.geomspace(1e-1, 1e-4, 7)
    golden = (math.sqrt(5) - 1) / 2
    for lam in (rot.inverse_disk_closed_form(1 - golden), 1 / math.sqrt(2)):
        res = lp.lap_sweep(disk, lam, 2, hs, f, with_eps=False)
        print(f"lam0={lam:.5f}  slope of log|v| vs log h = {res.slope():+.3f}")
        for e in res.series("vertical"):
            print(f"  h={e.h:.1e}  |v|={e.v_l2:.4e}  cond={e.cond:.1e}")


if __name__ == "__main__":
    main()
