"""Energy growth in the square for a resonant and a Diophantine frequency."""
import math

import numpy as np

from aquarium import rotation as rot, square as sq
from aquarium.forcing import Bump


def main():
    f = Bump(center=(0.5, 0.375), radius=0.35, kind="gauss", sigma=0.04)
    data = sq.sine_coeffs(f, K=128)
    t = np.arange(0.0, 1e4, 0.5)
    golden = (math.sqrt(5) - 1) / 2
    for label, lam in [("rational r, lam0=0.8", 0.8),
                       ("golden r", rot.inverse_square_closed_form(golden))]:
        E = sq.evolve_energy(data, t, lam).energy
        beta = sq.growth_exponent(t, E, 1e2, t[-1])
        print(f"{label:22s} lam0={lam:.6f}  E(T)={E[-1]:.3e}  fitted exponent={beta:.3f}")


if __name__ == "__main__":
    main()
