"""Where does the cold qubit pass through a finite-time temperature minimum?

Scans the hot and cold bath couplings around the slow-coupling machine
(p_R = 1e-3, g = 1e-4) and reports, per point, the number of interior minima of
the cold excited population, the optimal time t*, the minimum T*, and the
steady temperature. Then fits the scaling of t* with p_R in the regime where
the minimum exists.

    python3 scripts/finite_time_minimum_scan.py
"""

import argparse
import math

import numpy as np

from qfridge.analysis import Evolver, cold_excited, find_min_temperature, local_minima
from qfridge.hilbert import MachineSpec
from qfridge.observables import temperature_from_populations

BASE = dict(E_C=1.0, E_H=100.0, T_C=1.0, T_R=1.0, T_H=100.0, p_C=1e-5, p_R=1e-3, p_H=1e-5, g=1e-4)


def probe(spec):
    ev = Evolver(spec)
    t_max = 30 / ev.classification.decay_rate
    grid = np.linspace(0.0, t_max, 20001)
    n_min = len(local_minima(cold_excited(ev.states(grid)), atol=1e-15))
    t_star, T_star = find_min_temperature(spec, t_max, evolver=ev)
    exc = float(cold_excited(ev.v_inf))
    T_inf = temperature_from_populations(1 - exc, exc, spec.E_C).value
    return n_min, t_star, T_star.value, T_inf


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=7, help="grid points per decade axis")
    args = parser.parse_args()

    base = MachineSpec(**BASE)
    ratios = np.logspace(-1, 1, args.points)
    print(f"{'p_H/p_C':>9} {'minima':>6} {'t*':>12} {'T*':>10} {'T_inf':>10} {'depth':>10}")
    for ratio in ratios:
        spec = base.replace(p_H=base.p_C * ratio)
        n_min, t_star, T_star, T_inf = probe(spec)
        print(f"{ratio:9.3g} {n_min:6d} {t_star:12.5g} {T_star:10.6f} {T_inf:10.6f} {T_inf - T_star:10.3g}")

    print("\nscaling of t* with p_R at p_H = p_C / 10")
    p_R = np.array([1e-3, 2e-3, 5e-3, 1e-2])
    t_stars = []
    for value in p_R:
        _, t_star, T_star, T_inf = probe(base.replace(p_R=value, p_H=base.p_C / 10))
        t_stars.append(t_star)
        print(f"  p_R={value:8.2g}  t*={t_star:12.5g}  T*={T_star:.6f}  T_inf={T_inf:.6f}")
    slope = np.polyfit(np.log(p_R), np.log(t_stars), 1)[0]
    print(f"  log-log slope d ln t* / d ln p_R = {slope:.3f}")
    print(f"  pi/2g = {math.pi / (2 * base.g):.5g}")


if __name__ == "__main__":
    main()
