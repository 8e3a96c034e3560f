"""Command-line entry point.

    qfridge list-presets
    qfridge preset NAME [--out DIR] [--solver auto|spectral|integrator]
    qfridge run --config FILE [--out DIR]
    qfridge summary --config FILE

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .analysis import SOLVERS
from .config import (
    PRESET_DESCRIPTIONS,
    PRESETS,
    dumps_json,
    load_config,
    preset,
    render,
    summary,
    write_files,
)
from .errors import ConfigError, DivergenceError, IntegratorConfigError, SpecError, SpectralError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfridge",
        description="Transient dynamics of the three-qubit absorption refrigerator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-presets", help="list the figure presets")

    p = sub.add_parser("preset", help="run a figure preset")
    p.add_argument("name")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--solver", choices=SOLVERS, default=None)

    r = sub.add_parser("run", help="run a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="override out_dir")

    s = sub.add_parser("summary", help="print the JSON summary of a config file")
    s.add_argument("--config", required=True)
    return parser


def _execute(configs, out=None, solver=None) -> list[str]:
    rendered = []
    for config in configs:
        if solver is not None:
            config = config.replace(solver=solver)
        if out is not None:
            config = config.replace(out_dir=out)
        rendered.append((config.out_dir, render(config)))
    # all rendering succeeds before the first file is written
    paths = []
    for out_dir, files in rendered:
        paths += [str(p) for p in write_files(out_dir, files)]
    return paths


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name in sorted(PRESETS):
                print(f"{name}\t{PRESET_DESCRIPTIONS.get(name, '')}")
            return EXIT_OK
        if args.command == "preset":
            paths = _execute(preset(args.name), out=args.out, solver=args.solver)
        elif args.command == "run":
            paths = _execute([load_config(args.config)], out=args.out)
        else:
            sys.stdout.write(dumps_json(summary(load_config(args.config))))
            return EXIT_OK
    except (ConfigError, SpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpectralError as exc:
        print(f"solver failure at stage {exc.stage}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DivergenceError, IntegratorConfigError) as exc:
        print(f"solver failure at stage integrate: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
