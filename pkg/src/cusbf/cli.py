"""Command-line entry point: ``cusbf {run,sweep,complexity,check}``.

Configuration precedence (lowest to highest): built-in defaults, the file
given by ``--config`` (or ``$CUSBF_CONFIG``), then per-field flags such as
``--M 128 --p_dBm 20``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .config import CONFIG_ENV_VAR, ScenarioConfig, load_config
from .errors import CusbfError
from .experiments import SWEEP_FIELDS, SweepSpec, complexity_report, run_sweep
from .metrics import monte_carlo
from .scheduling import Scheme


def _parse_values(text: str) -> list[float]:
    """``0.1,0.2,0.5`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        n = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_schemes(text: str) -> list[Scheme]:
    try:
        return [Scheme(s.strip().upper()) for s in text.split(",") if s.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help=f"key = value config file (default: ${CONFIG_ENV_VAR})")
    group = parser.add_argument_group("scenario overrides")
    for f in fields(ScenarioConfig):
        group.add_argument(f"--{f.name}", dest=f"cfg_{f.name}", metavar="VALUE")


def _config_from_args(args) -> ScenarioConfig:
    overrides = {k[4:]: v for k, v in vars(args).items()
                 if k.startswith("cfg_") and v is not None}
    return load_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cusbf",
        description="Correlation-based user scheduling and beamforming simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo average for one scenario")
    _add_config_args(run)
    run.add_argument("--schemes", type=_parse_schemes, default=list(Scheme),
                     help="comma-separated subset of CUSBF,GWC,JSDM")

    sweep = sub.add_parser("sweep", help="sweep one parameter and emit CSV")
    _add_config_args(sweep)
    sweep.add_argument("--variable", required=True, choices=sorted(SWEEP_FIELDS))
    sweep.add_argument("--values", required=True, type=_parse_values,
                       help="comma list or start:stop:step")
    sweep.add_argument("--schemes", type=_parse_schemes, default=[Scheme.CUSBF])
    sweep.add_argument("--out", help="write CSV here instead of stdout")

    comp = sub.add_parser("complexity", help="operation-count table with timings")
    _add_config_args(comp)
    comp.add_argument("--no-fit", action="store_true",
                      help="skip the scaling-exponent fits")

    sub.add_parser("check", help="run the acceptance criteria")
    return parser


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    print("scheme,sum_rate_mean,sum_rate_stderr,per_user_rate_mean,n_selected_mean,drops,seed")
    for scheme in args.schemes:
        res = monte_carlo(config, scheme)
        print(f"{scheme},{res.sum_rate_mean:.6g},{res.sum_rate_stderr:.6g},"
              f"{res.per_user_rate_mean:.6g},{res.n_selected_mean:.6g},"
              f"{config.drops},{config.seed}")
    return 0


def _cmd_sweep(args) -> int:
    spec = SweepSpec(args.variable, tuple(args.values), tuple(args.schemes),
                     _config_from_args(args))
    spec.configs()  # validate every point before any computation
    table = run_sweep(spec)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return 0


def _cmd_complexity(args) -> int:
    sys.stdout.write(complexity_report(_config_from_args(args), fit=not args.no_fit))
    return 0


def _cmd_check(args) -> int:
    from .acceptance import run_all

    results = run_all()
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failing: {failed}" if failed else ""))
    return 1 if failed else 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep,
            "complexity": _cmd_complexity, "check": _cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CusbfError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
