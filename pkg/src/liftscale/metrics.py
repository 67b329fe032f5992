"""Dependence measures of the local lift dependence scale.

All logarithms are natural; the eta coefficients are ratios of two
quantities in the same unit, so they do not depend on the log base.

The three resolutions are

* :func:`eta_global` -- mutual information normalized by the entropy of Y,
* :func:`eta_window` -- expected KL divergence of f(.|x) from h over a window
  of feature levels, normalized by the matching expected cross entropy,
* :func:`lift` -- the pointwise ratio f(y|x) / h(y).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .distribution import JointTable, _check_total
from .errors import InvalidDistribution, ZeroProbabilityWindow

__all__ = [
    "LiftTable",
    "Window",
    "conditional_entropy",
    "entropy",
    "eta_global",
    "eta_window",
    "lift",
    "lift_cell",
    "mutual_information",
]


@dataclass(frozen=True)
class Window:
    """A nonempty set of feature levels of one subset's observed range."""

    subset: tuple
    members: frozenset

    def __post_init__(self):
        members = frozenset(m if isinstance(m, tuple) else (m,) for m in self.members)
        if not members:
            raise ValueError("a window must contain at least one level")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "subset", tuple(self.subset))

    @classmethod
    def of(cls, t: JointTable, members: Iterable, subset=()) -> "Window":
        w = cls(subset, frozenset(members))
        missing = w.members.difference(t.x_levels)
        if missing:
            raise ValueError(f"levels {sorted(missing)} are not observed in the table")
        return w

    def indices(self, t: JointTable) -> np.ndarray:
        return np.array(sorted(t.x_levels.index(m) for m in self.members), dtype=np.int64)

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True, eq=False)
class LiftTable:
    base: JointTable
    lift: np.ndarray


def _xlogy_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Elementwise num * log(num / den) with 0 log 0 = 0."""
    out = np.zeros(np.broadcast(num, den).shape)
    pos = num > 0
    num_b, den_b = np.broadcast_to(num, out.shape), np.broadcast_to(den, out.shape)
    out[pos] = num_b[pos] * np.log(num_b[pos] / den_b[pos])
    return out


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistribution("probabilities must be nonnegative and sum to 1")
    nz = p[p > 0]
    return float(max(-np.sum(nz * np.log(nz)), 0.0))


def conditional_entropy(t: JointTable) -> float:
    """H(Y | X) = -sum f(x, y) log f(y | x)."""
    total = _check_total(t)
    c = t.counts.astype(float)
    row = c.sum(axis=1, keepdims=True)
    return float(max(-_xlogy_ratio(c, row).sum() / total, 0.0))


def mutual_information(t: JointTable) -> float:
    """I(X, Y) in nats, summed over cells with f(x, y) > 0."""
    total = _check_total(t)
    c = t.counts.astype(float)
    expected = np.outer(c.sum(axis=1), c.sum(axis=0)) / total
    return float(max(_xlogy_ratio(c, expected).sum() / total, 0.0))


def eta_global(t: JointTable) -> float:
    """Mutual information normalized by H(Y); 1 when Y is degenerate."""
    total = _check_total(t)
    h_y = entropy(t.counts.sum(axis=0) / total)
    if h_y == 0.0:
        return 1.0
    return min(mutual_information(t) / h_y, 1.0)


def lift(t: JointTable) -> LiftTable:
    """Lift L(x, y) = f(x, y) / (g(x) h(y)) on every observed cell.

    Computed as ``n_xy * N / (n_x * n_y)`` from the integer counts, so equal
    count ratios give bit-identical lifts.
    """
    total = _check_total(t)
    c = t.counts
    denom = np.outer(c.sum(axis=1), c.sum(axis=0))
    # observed levels only, so denom > 0; guard anyway
    num = c * total
    out = np.zeros(c.shape)
    ok = denom > 0
    out[ok] = num[ok] / denom[ok]
    out.setflags(write=False)
    return LiftTable(t, out)


def lift_cell(t: JointTable, x: int, y: int) -> float:
    return float(lift(t).lift[x, y])


def eta_window(t: JointTable, w) -> float:
    """Local eta of the window ``w`` (a :class:`Window` or iterable of row indices).

    Ratio of sum_{x in w} sum_y f(x, y) log(f(y|x) / h(y)) to
    -sum_{x in w} sum_y f(x, y) log h(y).  Returns 1 when the denominator
    vanishes (all mass of the window on a value y with h(y) = 1).
    """
    total = _check_total(t)
    if isinstance(w, Window):
        idx = w.indices(t)
    else:
        idx = np.unique(np.asarray(list(w), dtype=np.int64))
    if idx.size == 0:
        raise ZeroProbabilityWindow("empty window")
    c = t.counts.astype(float)
    col = c.sum(axis=0)
    rows = c[idx]
    if rows.sum() == 0:
        raise ZeroProbabilityWindow("window has zero probability")
    h = col / total
    row = rows.sum(axis=1, keepdims=True)
    numerator = _xlogy_ratio(rows, row * h).sum()
    mass = rows.sum(axis=0)
    pos = mass > 0
    denominator = -np.sum(mass[pos] * np.log(h[pos]))
    if denominator <= 0.0:
        return 1.0
    return float(min(max(numerator / denominator, 0.0), 1.0))
