"""``raman-langevin`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import runner
from .errors import ConfigError, ConvergenceError, InstabilityError
from .params import defaults_document

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_NO_CONVERGENCE = 4
EXIT_IO = 5

COMMANDS = (
    "simulate",
    "sweep-temperature",
    "sweep-location",
    "steady-state",
    "stability-report",
    "print-defaults",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _pairs(text: str) -> tuple[str, ...]:
    return tuple(p for p in text.replace(" ", "").split(",") if p)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="raman-langevin", description="Linearised Langevin simulator for Raman modes driven by entangled photons.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="TOML configuration (defaults when omitted)")
    p.add_argument("--out", type=Path, help="output file (stdout when omitted)")
    p.add_argument("--t-start", type=float, default=runner.TimeGrid.start)
    p.add_argument("--t-stop", type=float, default=runner.TimeGrid.stop)
    p.add_argument("--t-points", type=int, default=runner.TimeGrid.points)
    p.add_argument("--t-spacing", choices=("log", "linear"), default=runner.TimeGrid.spacing)
    p.add_argument("--temps", type=_floats, help="temperatures in K, e.g. 0.1,0.8,10")
    p.add_argument("--locations", type=_floats, help="molecule positions in m, e.g. 16e-9,24e-9")
    p.add_argument(
        "--pairs", type=_pairs, default=None,
        help="mode pairs, e.g. signal:idler,stoke:antistoke",
    )
    p.add_argument("--include-mean", action="store_true", help="count the coherent mean in g2")
    return p


def spec_from_args(args) -> runner.RunSpec:
    return runner.RunSpec(
        command=args.command,
        config=args.config,
        grid=runner.TimeGrid(args.t_start, args.t_stop, args.t_points, args.t_spacing),
        temps=args.temps,
        locations=args.locations,
        pairs=args.pairs if args.pairs is not None else runner.DEFAULT_PAIRS,
        out=args.out,
        include_mean=args.include_mean,
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = spec_from_args(args)
    if spec.command == "print-defaults":
        _emit(defaults_document(), spec.out)
        return EXIT_OK
    params = spec.load_params()
    if spec.command == "stability-report":
        text, data, stable = runner.stability_report(params)
        sys.stdout.write(text)
        if spec.out is not None:
            _emit(json.dumps(data, indent=2, sort_keys=True) + "\n", spec.out)
        return EXIT_OK if stable else EXIT_UNSTABLE
    if spec.command == "steady-state":
        _emit(json.dumps(runner.steady_state_report(params), indent=2, sort_keys=True) + "\n", spec.out)
        return EXIT_OK
    fn = {
        "simulate": runner.simulate,
        "sweep-temperature": runner.sweep_temperature,
        "sweep-location": runner.sweep_location,
    }[spec.command]
    table = fn(spec, params)
    text = runner.write_outputs(table, spec, params)
    if spec.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ConvergenceError as exc:
        print(f"steady state did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
