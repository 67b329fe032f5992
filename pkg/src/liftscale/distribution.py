"""Empirical joint distributions of a feature tuple against a target.

A :class:`JointTable` holds exact integer counts over the *observed* levels
of a feature tuple ``X`` and a target ``Y``.  Every probability used
elsewhere in the package (``f(x, y)``, ``g(x)``, ``h(y)``, ``f(y | x)``) is
derived from it on demand as a plug-in relative frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import EmptySupport, SchemaMismatch, ZeroConditioningEvent

__all__ = [
    "CodedData",
    "JointTable",
    "build_table",
    "conditional_y_given_x",
    "joint",
    "marginal_x",
    "marginal_y",
    "table_from_codes",
]

# Products of level cardinalities up to this bound are packed into one int64 key.
_MAX_RADIX = 2**62


@dataclass(frozen=True, eq=False)
class JointTable:
    """Counts over ``x_levels`` x ``y_levels``.

    Levels are observed levels only, sorted and duplicate free; feature
    levels are tuples (one entry per feature of the subset).
    """

    x_levels: tuple
    y_levels: tuple
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape != (len(self.x_levels), len(self.y_levels)):
            raise ValueError(
                f"counts shape {counts.shape} does not match "
                f"{len(self.x_levels)} x {len(self.y_levels)} levels"
            )
        if (counts < 0).any():
            raise ValueError("counts must be nonnegative")
        if counts.size and ((counts.sum(axis=1) == 0).any() or (counts.sum(axis=0) == 0).any()):
            raise ValueError("all-zero rows or columns are not observed levels")
        for name, levels in (("x_levels", self.x_levels), ("y_levels", self.y_levels)):
            if len(set(levels)) != len(levels):
                raise ValueError(f"{name} contains duplicates")
            if list(levels) != sorted(levels):
                raise ValueError(f"{name} must be sorted")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "x_levels", tuple(self.x_levels))
        object.__setattr__(self, "y_levels", tuple(self.y_levels))

    @classmethod
    def from_counts(cls, counts, x_levels=None, y_levels=None) -> "JointTable":
        """Build a table from a count matrix, e.g. a published contingency table.

        Scalar ``x_levels`` entries are wrapped into 1-tuples; missing labels
        default to ``1, 2, ...``.
        """
        counts = np.asarray(counts)
        if x_levels is None:
            x_levels = range(1, counts.shape[0] + 1)
        if y_levels is None:
            y_levels = range(1, counts.shape[1] + 1)
        x_levels = tuple(x if isinstance(x, tuple) else (x,) for x in x_levels)
        return cls(x_levels, tuple(y_levels), counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self):
        return self.counts.shape

    def x_index(self, level) -> int:
        if not isinstance(level, tuple):
            level = (level,)
        return self.x_levels.index(level)

    def y_index(self, level) -> int:
        return self.y_levels.index(level)

    def __eq__(self, other):
        if not isinstance(other, JointTable):
            return NotImplemented
        return (
            self.x_levels == other.x_levels
            and self.y_levels == other.y_levels
            and np.array_equal(self.counts, other.counts)
        )

    def __repr__(self):
        return f"JointTable({len(self.x_levels)}x{len(self.y_levels)}, total={self.total})"


class CodedData:
    """Integer-coded, read-only view of a row set.

    Each column is stored as codes into its sorted level array, with ``-1``
    marking a missing value.  Coding once up front keeps repeated table
    construction during a lattice search cheap.
    """

    def __init__(self, frame: pd.DataFrame, columns: Sequence[str] | None = None):
        columns = list(frame.columns if columns is None else columns)
        self.n_rows = len(frame)
        self.codes: dict[str, np.ndarray] = {}
        self.levels: dict[str, np.ndarray] = {}
        for name in columns:
            if name not in frame.columns:
                raise SchemaMismatch(f"unknown column {name!r}")
            codes, uniques = pd.factorize(frame[name], sort=True, use_na_sentinel=True)
            codes = codes.astype(np.int64)
            codes.setflags(write=False)
            self.codes[name] = codes
            self.levels[name] = _plain_values(uniques)

    @classmethod
    def from_arrays(cls, codes: dict, levels: dict) -> "CodedData":
        self = cls.__new__(cls)
        self.codes = dict(codes)
        self.levels = dict(levels)
        self.n_rows = len(next(iter(codes.values()))) if codes else 0
        return self

    def with_column(self, name, codes, levels) -> "CodedData":
        """Return a shallow copy with one column added or replaced."""
        out = CodedData.from_arrays(self.codes, self.levels)
        out.codes[name] = np.asarray(codes, dtype=np.int64)
        out.levels[name] = np.asarray(levels, dtype=object)
        return out

    def __contains__(self, name):
        return name in self.codes


def _plain_values(uniques) -> np.ndarray:
    """Convert numpy scalars to builtins so level tuples print and serialize cleanly."""
    values = [v.item() if isinstance(v, np.generic) else v for v in np.asarray(uniques, dtype=object)]
    out = np.empty(len(values), dtype=object)
    out[:] = values
    return out


def table_from_codes(x_codes: Sequence[np.ndarray], x_level_values: Sequence[np.ndarray],
                     y_codes: np.ndarray, y_level_values: np.ndarray) -> JointTable:
    """Tally a joint table from coded columns, keeping complete cases only."""
    mask = y_codes >= 0
    for c in x_codes:
        mask &= c >= 0
    if not mask.any():
        raise EmptySupport("no complete case for this feature subset")
    cols = [c[mask] for c in x_codes]
    y = y_codes[mask]

    radices = [len(v) for v in x_level_values]
    if np.prod([float(r) for r in radices]) < _MAX_RADIX:
        key = np.zeros(len(y), dtype=np.int64)
        for c, r in zip(cols, radices):
            key = key * r + c
        ukeys, x_inv = np.unique(key, return_inverse=True)
        x_rows = np.empty((len(ukeys), len(cols)), dtype=np.int64)
        rest = ukeys.copy()
        for j in range(len(cols) - 1, -1, -1):
            x_rows[:, j] = rest % radices[j]
            rest //= radices[j]
    else:
        x_rows, x_inv = np.unique(np.column_stack(cols), axis=0, return_inverse=True)
    x_inv = x_inv.ravel()
    uy, y_inv = np.unique(y, return_inverse=True)

    n_x, n_y = len(x_rows), len(uy)
    counts = np.bincount(x_inv * n_y + y_inv, minlength=n_x * n_y).reshape(n_x, n_y)
    x_levels = tuple(
        tuple(x_level_values[j][row[j]] for j in range(len(cols))) for row in x_rows
    )
    y_levels = tuple(y_level_values[i] for i in uy)
    return JointTable(x_levels, y_levels, counts)


def build_table(samples, subset: Sequence[str], target: str) -> JointTable:
    """Joint table of ``subset`` against ``target`` over complete cases.

    Rows with a missing value in any column of ``subset`` (or in the target)
    are dropped, so the table total is the number of complete cases for
    this particular subset.

    Parameters
    ----------
    samples : pandas.DataFrame or CodedData
        Row set; missing values are NaN/None in a frame, ``-1`` once coded.
    subset : sequence of str
        Nonempty list of feature columns.
    target : str
        Target column.
    """
    if len(subset) == 0:
        raise ValueError("feature subset must be nonempty")
    if not isinstance(samples, CodedData):
        samples = CodedData(samples, list(subset) + [target])
    for name in list(subset) + [target]:
        if name not in samples:
            raise SchemaMismatch(f"unknown column {name!r}")
    return table_from_codes(
        [samples.codes[c] for c in subset],
        [samples.levels[c] for c in subset],
        samples.codes[target],
        samples.levels[target],
    )


def _check_total(t: JointTable) -> int:
    total = t.total
    if total <= 0:
        raise EmptySupport("table has zero total count")
    return total


def joint(t: JointTable) -> np.ndarray:
    """Matrix of f(x, y)."""
    return t.counts / _check_total(t)


def marginal_x(t: JointTable) -> np.ndarray:
    """g(x) over ``t.x_levels``."""
    return t.counts.sum(axis=1) / _check_total(t)


def marginal_y(t: JointTable) -> np.ndarray:
    """h(y) over ``t.y_levels``."""
    return t.counts.sum(axis=0) / _check_total(t)


def conditional_y_given_x(t: JointTable, x: int) -> np.ndarray:
    """f(y | x) for the feature level with index ``x``."""
    row = t.counts[x]
    n = int(row.sum())
    if n == 0:
        raise ZeroConditioningEvent(f"feature level {x} has no observations")
    return row / n
