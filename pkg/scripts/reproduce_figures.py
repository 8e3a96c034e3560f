"""Write plot-ready CSV/JSON for every figure preset.

    python3 scripts/reproduce_figures.py --out results [--solver auto]
"""

import argparse
import time

from qfridge.config import PRESETS, run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("--solver", default="auto", choices=("auto", "spectral", "integrator"))
    parser.add_argument("names", nargs="*", help="presets to run (default: all)")
    args = parser.parse_args()

    for name in args.names or sorted(PRESETS):
        for cfg in PRESETS[name]:
            start = time.perf_counter()
            paths = run(cfg.replace(out_dir=args.out, solver=args.solver))
            print(f"{cfg.label:16s} {time.perf_counter() - start:6.2f}s  " + " ".join(p.name for p in paths))


if __name__ == "__main__":
    main()
