"""Command-line front end.

Subcommands::

    moutard catalog list
    moutard catalog eval      --family eq9 --what potential --output u.csv
    moutard transform single  [--family planewave]
    moutard transform twofold --family seeds-bessel --p 0
    moutard verify            --family eq15 --c 2
    moutard converge          --family eq10 --levels 4

Every run flag mirrors a :class:`~moutard.verify.RunConfig` field in kebab
case; ``--config FILE`` loads a JSON object with the same keys, and explicit
flags override it.  Runs print (or write, with ``--report``) a JSON report
and exit 0 only when every verdict passes.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Optional, Sequence

from . import catalog
from .errors import MoutardError
from .verify import RunConfig, emit_fields, evaluate, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_TYPES = {"k": float, "c": float, "p": int, "r_min": float, "r_max": float,
          "theta_min": float, "theta_max": float, "n_r": int, "n_theta": int,
          "levels": int, "exactness_tol": float, "residual_tol": float,
          "comparison_tol": float, "order_min": float, "perturb": float,
          "accuracy": int, "seed_floor": float, "roundoff_floor": float}
_CHOICES = {"format": ("csv", "json"), "accuracy": (4, 6),
            "quadrature": ("quintic", "simpson", "trapezoid")}
_SKIP = {"command"}
_HELP = {
    "family": "catalog family id or alias (see `moutard catalog list`)",
    "k": "wave number; the seeds solve the free equation at energy -k^2",
    "c": "additive constant C in F (family default if omitted)",
    "p": "Legendre degree for eq13, eq14 and seeds-bessel",
    "n_r": "radial points on the coarsest grid",
    "n_theta": "polar points on the coarsest grid",
    "levels": "number of grids in the halving ladder (>= 3)",
    "output": "write the field named by --what here ('-' for stdout)",
    "format": "field file format",
    "report": "write the JSON report here instead of stdout",
    "what": "field to emit: potential, solution, F, sol1, sol2, trivial",
    "exactness_tol": "largest allowed path-independence defect",
    "residual_tol": "bound on relative residuals at the finest grid",
    "comparison_tol": "bound on relative errors against closed forms",
    "order_min": "smallest acceptable fitted convergence order",
    "perturb": "add this constant to the potential (negative control)",
    "accuracy": "order of the finite-difference stencils",
    "quadrature": "rule used to integrate one-forms along grid lines",
    "seed_floor": "single transform: mask points where |Y0| is below this fraction of its max",
    "roundoff_floor": "skip the order verdict when errors are already below this",
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    for f in dataclasses.fields(RunConfig):
        if f.name in _SKIP:
            continue
        flag = "--" + f.name.replace("_", "-")
        # default=SUPPRESS keeps unset flags out of the namespace so that a
        # config file can supply them
        p.add_argument(flag, dest=f.name, type=_TYPES.get(f.name, str),
                       choices=_CHOICES.get(f.name), default=argparse.SUPPRESS,
                       help=_HELP.get(f.name))
    p.add_argument("--config", help="JSON file with RunConfig keys", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moutard", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)

    cat = sub.add_parser("catalog", help="list or sample closed-form families")
    cat_sub = cat.add_subparsers(dest="action", required=True)
    cat_sub.add_parser("list", help="print the family table as JSON")
    _add_run_flags(cat_sub.add_parser("eval", help="sample a closed form on a grid"))

    tr = sub.add_parser("transform", help="run a numeric transformation pipeline")
    tr_sub = tr.add_subparsers(dest="action", required=True)
    for name in ("single", "twofold"):
        _add_run_flags(tr_sub.add_parser(name))

    for name in ("verify", "converge"):
        _add_run_flags(sub.add_parser(name))
    return parser


def _command(ns: argparse.Namespace) -> str:
    if ns.group in ("catalog", "transform"):
        return f"{ns.group}-{ns.action}"
    return ns.group


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(ns, "config", None):
        with open(ns.config) as fh:
            values.update(json.load(fh))
    names = {f.name for f in dataclasses.fields(RunConfig)}
    values.update({k: v for k, v in vars(ns).items() if k in names})
    values["command"] = _command(ns)
    if "what" not in values and values["command"].startswith("transform"):
        values["what"] = "potential"
    return RunConfig.from_dict(values)


def _write_report(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    command = _command(ns)

    if command == "catalog-list":
        print(json.dumps(catalog.describe(), indent=2))
        return EXIT_OK

    try:
        cfg = config_from_args(ns)
    except (ValueError, KeyError, OSError, TypeError) as exc:
        print(f"moutard: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if command == "catalog-eval":
        try:
            f = evaluate(cfg)
        except (MoutardError, ValueError) as exc:
            print(f"moutard: {exc}", file=sys.stderr)
            return EXIT_FAIL
        emit_fields(f, cfg.format, cfg.output or "-")
        return EXIT_OK

    report, fields = run(cfg)
    if cfg.output and fields:
        key = cfg.what if cfg.what in fields else None
        if key is None:
            report.notes.append(f"no output field named {cfg.what!r}; choose from {sorted(fields)}")
            report.verdicts["output"] = False
        else:
            emit_fields(fields[key], cfg.format, cfg.output)
    _write_report(report.to_json(), cfg.report)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
