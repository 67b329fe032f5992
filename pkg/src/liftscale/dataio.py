"""Dataset ingestion, lift-table rendering and result documents."""

from __future__ import annotations

import csv
import gzip
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from .distribution import JointTable, marginal_x, marginal_y
from .errors import MalformedData, SchemaMismatch
from .metrics import LiftTable, eta_global, lift, mutual_information

__all__ = [
    "COVTYPE_SCHEMA",
    "KINDS",
    "DatasetSchema",
    "ResultDocument",
    "VOTING_SCHEMA",
    "builtin_schema",
    "lift_table_dict",
    "load_csv",
    "load_schema",
    "read_results",
    "render_lift_table",
    "serialize",
    "write_results",
]

log = logging.getLogger(__name__)

KINDS = ("categorical", "continuous", "group", "target", "ignore")


@dataclass(frozen=True)
class DatasetSchema:
    """Column names and kinds of a delimited dataset.

    Kinds are ``categorical``, ``continuous``, ``group``, ``target`` and
    ``ignore``; exactly one column is the target.
    """

    columns: tuple
    kinds: tuple
    missing: str = "?"
    header: bool = True
    delimiter: str = ","

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if len(self.columns) != len(self.kinds):
            raise SchemaMismatch("one kind per column is required")
        if len(set(self.columns)) != len(self.columns):
            raise SchemaMismatch("duplicate column names")
        bad = [k for k in self.kinds if k not in KINDS]
        if bad:
            raise SchemaMismatch(f"unknown column kinds {bad}; expected one of {KINDS}")
        if self.kinds.count("target") != 1:
            raise SchemaMismatch("exactly one target column is required")
        if len(self.delimiter) != 1:
            raise SchemaMismatch("delimiter must be a single character")

    def _of(self, kind):
        return [c for c, k in zip(self.columns, self.kinds) if k == kind]

    @property
    def target(self) -> str:
        return self._of("target")[0]

    @property
    def categorical(self) -> list:
        return self._of("categorical")

    @property
    def continuous(self) -> list:
        return self._of("continuous")

    @property
    def groups(self) -> list:
        return self._of("group")

    @property
    def features(self) -> list:
        return [c for c, k in zip(self.columns, self.kinds) if k in ("categorical", "continuous")]

    @property
    def used(self) -> list:
        return [c for c, k in zip(self.columns, self.kinds) if k != "ignore"]

    def with_kinds(self, **kinds) -> "DatasetSchema":
        """Copy with some columns re-kinded, e.g. ``with_kinds(A="ignore")``."""
        unknown = set(kinds) - set(self.columns)
        if unknown:
            raise SchemaMismatch(f"unknown columns {sorted(unknown)}")
        new = tuple(kinds.get(c, k) for c, k in zip(self.columns, self.kinds))
        return DatasetSchema(self.columns, new, self.missing, self.header, self.delimiter)

    @classmethod
    def build(cls, columns: Sequence[str], target: str, continuous=(), groups=(), ignore=(),
              missing="?", header=True, delimiter=",") -> "DatasetSchema":
        """Schema where every column not named otherwise is categorical."""
        columns = list(columns)
        for name in [target, *continuous, *groups, *ignore]:
            if name not in columns:
                raise SchemaMismatch(f"column {name!r} not in {columns}")
        kinds = []
        for c in columns:
            if c == target:
                kinds.append("target")
            elif c in continuous:
                kinds.append("continuous")
            elif c in groups:
                kinds.append("group")
            elif c in ignore:
                kinds.append("ignore")
            else:
                kinds.append("categorical")
        return cls(tuple(columns), tuple(kinds), missing, header, delimiter)

    def to_dict(self) -> dict:
        return {
            "columns": [{"name": c, "kind": k} for c, k in zip(self.columns, self.kinds)],
            "missing": self.missing,
            "header": self.header,
            "delimiter": self.delimiter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSchema":
        try:
            cols = d["columns"]
            return cls(
                tuple(c["name"] for c in cols),
                tuple(c.get("kind", "categorical") for c in cols),
                d.get("missing", "?"),
                bool(d.get("header", True)),
                d.get("delimiter", ","),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaMismatch(f"invalid schema document: {exc}") from None


# UCI Congressional Voting Records (house-votes-84.data): party first, 16 y/n votes.
VOTING_FEATURES = ("HI", "WP", "AB", "PF", "SA", "RG", "ST", "AN",
                   "MM", "IM", "SC", "ES", "SR", "CR", "DF", "EA")
VOTING_SCHEMA = DatasetSchema(
    ("party",) + VOTING_FEATURES,
    ("target",) + ("categorical",) * 16,
    missing="?", header=False,
)

# UCI Covertype (covtype.data): 10 continuous, 4 wilderness + 40 soil indicators, cover type.
COVTYPE_CONTINUOUS = ("E", "A", "S", "HH", "VH", "HR", "H9", "HN", "H3", "HF")
COVTYPE_SCHEMA = DatasetSchema(
    COVTYPE_CONTINUOUS
    + tuple(f"WA{i}" for i in range(1, 5))
    + tuple(f"ST{i}" for i in range(1, 41))
    + ("cover",),
    ("continuous",) * 10 + ("ignore",) * 44 + ("target",),
    missing="?", header=False,
)

_BUILTIN = {"voting": VOTING_SCHEMA, "covtype": COVTYPE_SCHEMA}


def builtin_schema(name: str) -> DatasetSchema:
    try:
        return _BUILTIN[name]
    except KeyError:
        raise SchemaMismatch(f"no built-in schema {name!r}; known: {sorted(_BUILTIN)}") from None


def load_schema(path) -> DatasetSchema:
    """Read a JSON schema file (see :meth:`DatasetSchema.to_dict`)."""
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"{path}: {exc}") from None
    return DatasetSchema.from_dict(d)


def _open_text(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def _check_shape(path, schema: DatasetSchema) -> int:
    """Validate field counts line by line; return the number of data rows."""
    n_rows = 0
    width = len(schema.columns)
    with _open_text(path) as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        for lineno, fields in enumerate(reader, start=1):
            if not fields or fields == [""]:
                continue
            if lineno == 1 and schema.header:
                names = [f.strip() for f in fields]
                if names != list(schema.columns):
                    raise SchemaMismatch(
                        f"{path}: header {names} does not match schema columns {list(schema.columns)}"
                    )
                continue
            if len(fields) != width:
                raise MalformedData(f"{path}: expected {width} fields, found {len(fields)}", lineno)
            n_rows += 1
    if n_rows == 0:
        raise MalformedData(f"{path}: no data rows", 1)
    return n_rows


def _require_file(path):
    if not os.path.exists(path):
        raise FileNotFoundError(f"{path}: no such file")


def read_header(path, delimiter=",") -> list:
    _require_file(path)
    with _open_text(path) as fh:
        first = next(csv.reader(fh, delimiter=delimiter), None)
    if not first:
        raise MalformedData(f"{path}: empty file", 1)
    return [f.strip() for f in first]


def load_csv(path, schema: DatasetSchema) -> pd.DataFrame:
    """Load a delimited file into a frame with the schema's used columns.

    Categorical, group and target columns are read as strings, continuous
    ones as floats.  The missing marker becomes NaN.  Rows whose target is
    missing are dropped.

    Raises
    ------
    MalformedData
        Wrong field count, unparsable continuous value or empty file; the
        message carries the line number.
    SchemaMismatch
        Header row disagrees with the schema.
    """
    _require_file(path)
    if os.path.getsize(path) == 0:
        raise MalformedData(f"{path}: empty file", 1)
    _check_shape(path, schema)

    used = schema.used
    continuous = set(schema.continuous)
    dtypes = {c: (float if c in continuous else str) for c in used}
    kwargs = dict(
        sep=schema.delimiter,
        header=0 if schema.header else None,
        names=list(schema.columns),
        usecols=used,
        na_values=[schema.missing],
        keep_default_na=False,
        skipinitialspace=True,
        skip_blank_lines=True,
        engine="c",
    )
    try:
        frame = pd.read_csv(path, dtype=dtypes, **kwargs)
    except ValueError:
        frame = pd.read_csv(path, dtype={c: str for c in used}, **kwargs)
        offset = 2 if schema.header else 1
        for c in schema.continuous:
            parsed = pd.to_numeric(frame[c], errors="coerce")
            bad = parsed.isna() & frame[c].notna()
            if bad.any():
                i = int(np.flatnonzero(bad.to_numpy())[0])
                raise MalformedData(
                    f"{path}: column {c!r}: cannot parse {frame[c].iloc[i]!r} as a number",
                    i + offset,
                ) from None
            frame[c] = parsed
    for c in used:
        if c not in continuous:
            frame[c] = frame[c].str.strip()

    target = schema.target
    missing_target = frame[target].isna()
    if missing_target.any():
        log.warning("%s: dropped %d rows with a missing target", path, int(missing_target.sum()))
        frame = frame.loc[~missing_target].reset_index(drop=True)
    return frame


def load_voting(path) -> pd.DataFrame:
    return load_csv(path, VOTING_SCHEMA)


def load_covtype(path) -> pd.DataFrame:
    return load_csv(path, COVTYPE_SCHEMA)


# --------------------------------------------------------------------------
# rendering


def _sig3(v: float) -> str:
    if v == 0:
        return "0"
    s = f"{v:#.3g}"
    return s[:-1] if s.endswith(".") else s


def level_label(level, n_joint_levels=None) -> str:
    """Display text for a feature level tuple."""
    if n_joint_levels is not None and len(level) == 1:
        name = {3: "Tertile", 4: "Quartile", 5: "Quintile", 10: "Decile"}.get(n_joint_levels, "Level")
        return f"{name} {level[0]}"
    if len(level) == 1:
        return str(level[0])
    return "(" + ",".join(str(v) for v in level) + ")"


def render_lift_table(lt, x_name: str = "X", y_name: str = "Y", style: str = "text",
                      n_joint_levels=None) -> str:
    """Lift grid with counts in parentheses and marginal relative frequencies.

    ``lt`` is a :class:`LiftTable` or a :class:`JointTable`.  Lifts get three
    significant digits, frequencies three decimals, counts thousands
    separators.
    """
    if isinstance(lt, JointTable):
        lt = lift(lt)
    t = lt.base
    g, h = marginal_x(t), marginal_y(t)
    header = [x_name] + [str(y) for y in t.y_levels] + ["Relative Frequency"]
    body = []
    for i, x in enumerate(t.x_levels):
        cells = [f"{_sig3(lt.lift[i, j])} ({t.counts[i, j]:,})" for j in range(len(t.y_levels))]
        body.append([level_label(x, n_joint_levels)] + cells + [f"{g[i]:.3f}"])
    body.append(["Relative Frequency"] + [f"{v:.3f}" for v in h] + ["1"])

    if style == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in body]
        return "\n".join(lines) + "\n"
    if style != "text":
        raise ValueError(f"unknown style {style!r}")
    widths = [max(len(r[j]) for r in [header] + body) for j in range(len(header))]
    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))

    def fmt(row):
        return "  ".join(c.rjust(w) if j else c.ljust(w) for j, (c, w) in enumerate(zip(row, widths)))

    lines = [f"{y_name} by {x_name}", rule, fmt(header), rule]
    lines += [fmt(r) for r in body[:-1]]
    lines += [rule, fmt(body[-1]), rule]
    return "\n".join(lines) + "\n"


def lift_table_dict(t: JointTable, subset=()) -> dict:
    lt = lift(t)
    return {
        "subset": list(subset),
        "x_levels": [list(x) for x in t.x_levels],
        "y_levels": list(t.y_levels),
        "counts": t.counts.tolist(),
        "lift": lt.lift.tolist(),
        "eta_global": eta_global(t),
        "mutual_information_nats": mutual_information(t),
        "total": t.total,
    }


# --------------------------------------------------------------------------
# result documents


@dataclass
class ResultDocument:
    """One run's output.

    Everything except ``meta`` is the payload, which is a pure function of
    the data and the echoed configuration.  ``meta`` holds run-environment
    details (timestamp, worker count) that may differ between reruns.
    """

    version: str
    config: dict
    results: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def payload(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "results": self.results,
            "diagnostics": self.diagnostics,
        }

    def to_dict(self) -> dict:
        d = self.payload()
        d["meta"] = self.meta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResultDocument":
        return cls(d["version"], d["config"], d.get("results", {}),
                   d.get("diagnostics", []), d.get("meta", {}))

    def add_search(self, result, top_table: dict | None = None):
        """Record a :class:`~liftscale.search.SearchResult`."""
        self.results[result.resolution] = {
            "n_subsets": result.n_subsets,
            "candidates": [c.to_dict() for c in result.candidates],
            "skipped": [{"subset": list(s.subset), "reason": s.reason} for s in result.skipped],
            "models": [m.to_dict() for m in result.models.values()],
            "top_lift_table": top_table,
        }
        return self


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float):
        return float(obj)
    return obj


def serialize(obj) -> str:
    """Canonical JSON: sorted keys, 2-space indent, shortest round-trip floats, final newline."""
    if isinstance(obj, ResultDocument):
        obj = obj.to_dict()
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False) + "\n"


def write_results(doc: ResultDocument, path) -> None:
    text = serialize(doc)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def read_results(path) -> ResultDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            return ResultDocument.from_dict(json.load(fh))
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc.strerror or exc}") from exc
