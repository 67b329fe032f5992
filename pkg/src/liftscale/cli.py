"""Command-line front end.

Subcommands::

    liftscale lift            --data FILE --target Y --features A,B
    liftscale select-global   --data FILE --target Y [restrictions]
    liftscale select-window   --data FILE --target Y [restrictions]
    liftscale select-profile  --data FILE --target Y --target-value V [restrictions]

Exit statuses: 0 success, 1 data error, 2 usage error, 3 no feasible profile.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import math
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .dataio import (
    DatasetSchema,
    ResultDocument,
    builtin_schema,
    level_label,
    lift_table_dict,
    load_csv,
    load_schema,
    read_header,
    render_lift_table,
    write_results,
)
from .discretize import TERTILES, QuantileSpec
from .errors import LiftScaleError, NoFeasibleProfile
from .metrics import eta_global, mutual_information
from .search import Problem, SearchConfig, search

__all__ = ["RunSpec", "main", "parse_args", "run"]

EXIT_OK, EXIT_DATA, EXIT_USAGE, EXIT_NO_PROFILE = 0, 1, 2, 3

SUBCOMMANDS = {
    "lift": None,
    "select-global": "global",
    "select-window": "window",
    "select-profile": "profile",
}


@dataclass
class RunSpec:
    command: str
    data: str
    target: str | None = None
    schema: str | None = None
    names: list | None = None
    header: bool = True
    delimiter: str = ","
    missing: str = "?"
    features: list | None = None
    continuous: list | None = None
    groups: list = field(default_factory=list)
    ignore: list = field(default_factory=list)
    quantiles: tuple = TERTILES.probs
    min_support: float = 0.0
    max_k: int | None = None
    max_window_cells: int | None = None
    target_value: str | None = None
    top_n: int = 10
    workers: int = 1
    output: str | None = None
    bits: bool = False

    @property
    def resolution(self):
        return SUBCOMMANDS[self.command]

    @property
    def joint(self) -> bool:
        return bool(self.continuous)


def _csv_list(text):
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _quantiles(text):
    try:
        return QuantileSpec(tuple(float(p) for p in _csv_list(text))).probs
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _support(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (0.0 <= v < 1.0) or math.isnan(v):
        raise argparse.ArgumentTypeError("must lie in [0, 1)")
    return v


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftscale",
        description="Local lift dependence scale and multi-resolution feature selection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("data")
    g.add_argument("--data", required=True, help="delimited data file (.gz accepted)")
    g.add_argument("--schema", help="built-in schema name (voting, covtype) or JSON schema file")
    g.add_argument("--names", type=_csv_list, help="column names for a file without header")
    g.add_argument("--no-header", dest="header", action="store_false",
                   help="the file has no header row (requires --names or --schema)")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--missing", default="?", help="missing-value marker (default '?')")
    g.add_argument("--target", help="target column (default: schema target, else last column)")
    g.add_argument("--features", type=_csv_list, help="candidate categorical features")
    g.add_argument("--continuous", type=_csv_list,
                   help="continuous features; enables joint Mahalanobis-quantile discretization")
    g.add_argument("--group", dest="groups", type=_csv_list, default=[],
                   help="columns whose value combinations define discretization groups")
    g.add_argument("--ignore", type=_csv_list, default=[])
    g.add_argument("--quantiles", type=_quantiles, default=TERTILES.probs,
                   help="cut probabilities, e.g. 0.2,0.4,0.6,0.8 (default tertiles)")

    s = common.add_argument_group("search")
    s.add_argument("--min-support", type=_support, default=0.0,
                   help="profiles/windows need relative frequency strictly above this")
    s.add_argument("--max-k", type=_positive_int, help="maximum subset size (default: all)")
    s.add_argument("--max-window-cells", type=_positive_int, help="maximum window size")
    s.add_argument("--target-value", help="target value whose lift is maximized")
    s.add_argument("--top-n", type=_positive_int, default=10)
    s.add_argument("--workers", type=_positive_int, default=None,
                   help="worker processes (default: available CPUs)")

    o = common.add_argument_group("output")
    o.add_argument("--output", "-o", help="write the JSON result document here")
    o.add_argument("--bits", action="store_true", help="also report mutual information in bits")
    o.add_argument("-v", "--verbose", action="count", default=0)

    helps = {
        "lift": "lift table and eta of one feature subset",
        "select-global": "rank subsets by global eta",
        "select-window": "rank (subset, window) pairs by windowed eta",
        "select-profile": "rank (subset, profile) pairs by lift of --target-value",
    }
    parser.subcommands = {
        name: sub.add_parser(name, parents=[common], help=text, description=text)
        for name, text in helps.items()
    }
    return parser


def parse_args(argv=None) -> RunSpec:
    """Parse and validate ``argv``; usage errors exit with status 2."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    sub = parser.subcommands[ns.command]

    if ns.command == "select-profile" and ns.target_value is None:
        sub.error("select-profile requires --target-value")
    if ns.command == "lift" and not (ns.features or ns.continuous):
        sub.error("lift requires --features or --continuous naming the subset")
    if ns.features and ns.continuous:
        sub.error("--features and --continuous are mutually exclusive")
    if not ns.header and not (ns.names or ns.schema):
        sub.error("--no-header requires --names or --schema")
    if len(ns.delimiter) != 1:
        sub.error("--delimiter must be a single character")
    if ns.groups and not ns.continuous:
        sub.error("--group only applies with --continuous")
    if ns.verbose:
        logging.basicConfig(level=logging.INFO if ns.verbose == 1 else logging.DEBUG,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    return RunSpec(
        command=ns.command, data=ns.data, target=ns.target, schema=ns.schema, names=ns.names,
        header=ns.header, delimiter=ns.delimiter, missing=ns.missing, features=ns.features,
        continuous=ns.continuous, groups=ns.groups, ignore=ns.ignore, quantiles=ns.quantiles,
        min_support=ns.min_support, max_k=ns.max_k, max_window_cells=ns.max_window_cells,
        target_value=ns.target_value, top_n=ns.top_n,
        workers=ns.workers if ns.workers is not None else default_workers(),
        output=ns.output, bits=ns.bits,
    )


# pristine UCI file names recognised without --schema
_KNOWN_FILES = {"house-votes-84": "voting", "covtype": "covtype"}


def _guess_schema(path):
    base = os.path.basename(path).split(".")[0]
    return _KNOWN_FILES.get(base)


def _resolve_schema(spec: RunSpec) -> DatasetSchema:
    name = spec.schema
    if name is None and spec.names is None:
        name = _guess_schema(spec.data)
        if name:
            logging.getLogger(__name__).info("using built-in %s schema for %s", name, spec.data)
    if name:
        if os.path.exists(name):
            schema = load_schema(name)
        else:
            schema = builtin_schema(name)
        if spec.target and spec.target != schema.target:
            schema = schema.with_kinds(**{schema.target: "categorical", spec.target: "target"})
        rekind = {c: "continuous" for c in spec.continuous or ()}
        rekind.update({c: "group" for c in spec.groups})
        rekind.update({c: "ignore" for c in spec.ignore})
        return schema.with_kinds(**rekind) if rekind else schema
    names = spec.names if spec.names else read_header(spec.data, spec.delimiter)
    return DatasetSchema.build(names, spec.target or names[-1], continuous=spec.continuous or (),
                               groups=spec.groups, ignore=spec.ignore, missing=spec.missing,
                               header=spec.header, delimiter=spec.delimiter)


def _features(spec: RunSpec, schema: DatasetSchema) -> tuple:
    """Candidate features and whether they are binned jointly."""
    if spec.continuous:
        return list(spec.continuous), True
    if spec.features:
        features = list(spec.features)
    else:
        features = list(schema.categorical) or list(schema.continuous)
    continuous = [f for f in features if f in schema.continuous]
    if continuous and len(continuous) < len(features):
        raise LiftScaleError("cannot mix categorical and continuous features in one run: "
                             + ",".join(continuous) + " are continuous")
    return features, bool(continuous)


def _config_echo(spec: RunSpec, schema: DatasetSchema, features, joint) -> dict:
    # worker count is deliberately absent: it must not change the payload
    return {
        "command": spec.command,
        "data": os.path.basename(spec.data),
        "target": schema.target,
        "features": list(features),
        "mode": "joint-discretized" if joint else "categorical",
        "groups": list(schema.groups) if joint else [],
        "quantiles": list(spec.quantiles) if joint else None,
        "min_support": spec.min_support,
        "max_k": spec.max_k,
        "max_window_cells": spec.max_window_cells,
        "target_value": spec.target_value,
        "top_n": spec.top_n,
        "schema": schema.to_dict(),
    }


def _fmt_locus(c, n_joint):
    if c.kind == "profile":
        return level_label(c.locus, n_joint)
    if c.kind == "window":
        return " & ".join(level_label(m, n_joint) for m in c.locus)
    return "whole range"


def run(spec: RunSpec, out=None, err=None) -> int:
    """Execute a parsed run; returns the process exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        schema = _resolve_schema(spec)
        if spec.target and spec.target != schema.target:
            raise LiftScaleError(f"target {spec.target!r} is not the schema target")
        data = load_csv(spec.data, schema)
        features, joint = _features(spec, schema)
        quantiles = QuantileSpec(spec.quantiles) if joint else None
        config = SearchConfig(
            max_k=None if spec.max_k is None else min(spec.max_k, len(features)),
            min_support=spec.min_support,
            max_window_cells=spec.max_window_cells,
            quantiles=quantiles,
            group_columns=tuple(schema.groups) if joint else (),
            target_value=spec.target_value,
            top_n=spec.top_n,
            workers=spec.workers,
        )
        problem = Problem(data, features, schema.target, config)
        n_joint = quantiles.n_levels if quantiles else None
        doc = ResultDocument(__version__, _config_echo(spec, schema, features, joint))
        doc.meta = {
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "workers": spec.workers,
        }

        if spec.command == "lift":
            t, model = problem.table(tuple(features))
            table = lift_table_dict(t, features)
            doc.results["lift"] = {"table": table,
                                   "model": model.to_dict() if model else None}
            name = "(" + ",".join(features) + ")"
            out.write(render_lift_table(t, name, schema.target, n_joint_levels=n_joint))
            mi = mutual_information(t)
            out.write(f"eta = {eta_global(t):.4f}   MI = {mi:.6f} nats")
            if spec.bits:
                out.write(f" = {mi / math.log(2):.6f} bits")
            out.write(f"   n = {t.total:,}\n")
        else:
            result = search(problem, features, schema.target, config, spec.resolution,
                            y=spec.target_value)
            top_table = None
            if result.best is not None:
                t, _ = problem.table(result.best.subset)
                top_table = lift_table_dict(t, result.best.subset)
            doc.add_search(result, top_table)
            doc.diagnostics = [f"{'(' + ','.join(s.subset) + ')'}: {s.reason}"
                               for s in result.skipped]
            _report(result, problem, schema, n_joint, out)
        if spec.output:
            write_results(doc, spec.output)
            err.write(f"wrote {spec.output}\n")
        return EXIT_OK
    except NoFeasibleProfile as exc:
        err.write(f"liftscale: {exc}\n")
        return EXIT_NO_PROFILE
    except (LiftScaleError, OSError, ValueError) as exc:
        err.write(f"liftscale: {exc}\n")
        return EXIT_DATA


def _report(result, problem, schema, n_joint, out):
    label = {"global": "eta", "window": "eta(W)", "profile": "lift"}[result.resolution]
    out.write(f"{result.resolution} search over {result.n_subsets:,} subsets"
              f" ({len(result.skipped)} skipped)\n")
    out.write(f"{'rank':>4}  {label:>8}  {'n':>8}  features  locus\n")
    for i, c in enumerate(result.candidates, start=1):
        out.write(f"{i:>4}  {c.score:>8.3g}  {c.table_total:>8,}  "
                  f"({','.join(c.subset)})  {_fmt_locus(c, n_joint)}\n")
    best = result.best
    if best is None:
        out.write("no candidates\n")
        return
    out.write(f"\ntop {label} = {best.score:.3g} for ({','.join(best.subset)})"
              f" at {_fmt_locus(best, n_joint)}, n = {best.table_total:,}\n\n")
    t, _ = problem.table(best.subset)
    out.write(render_lift_table(t, "(" + ",".join(best.subset) + ")", schema.target,
                                n_joint_levels=n_joint))


def main(argv=None) -> int:
    spec = parse_args(argv)
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
