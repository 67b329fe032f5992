"""Quantile discretization of continuous features, alone or jointly.

A single feature is cut at its own empirical quantiles.  A subset of
features is collapsed to one ordinal column by cutting the Mahalanobis
distance of each score vector to the origin at its empirical quantiles.
Both are done separately inside each group (e.g. course x year), so every
group gets its own cut points and, for joint binning, its own ellipses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InsufficientData

__all__ = [
    "MISSING_LEVEL",
    "QuantileSpec",
    "DiscretizationModel",
    "GroupModel",
    "TERTILES",
    "QUINTILES",
    "assign_levels",
    "covariance",
    "discretize_joint",
    "mahalanobis_to_zero",
    "pseudo_inverse",
    "quantile_cuts",
]

MISSING_LEVEL = 0

# relative eigenvalue cutoff for the covariance pseudo-inverse
PINV_RTOL = 1e-10


@dataclass(frozen=True)
class QuantileSpec:
    """Strictly increasing cut probabilities in (0, 1)."""

    probs: tuple

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise ValueError("at least one cut probability is required")
        if any(not 0.0 < p < 1.0 for p in probs):
            raise ValueError(f"cut probabilities must lie in (0, 1): {probs}")
        if any(b <= a for a, b in zip(probs, probs[1:])):
            raise ValueError(f"cut probabilities must be strictly increasing: {probs}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n_levels: int) -> "QuantileSpec":
        """Equal-mass cuts: 3 gives tertiles, 5 gives quintiles."""
        if n_levels < 2:
            raise ValueError("need at least two levels")
        return cls(tuple(j / n_levels for j in range(1, n_levels)))

    @property
    def n_levels(self) -> int:
        return len(self.probs) + 1


TERTILES = QuantileSpec.uniform(3)
QUINTILES = QuantileSpec((0.2, 0.4, 0.6, 0.8))


def quantile_cuts(values, spec: QuantileSpec) -> np.ndarray:
    """Cut values at the empirical quantiles of ``values``.

    Cut ``j`` is the smallest observed value whose empirical CDF reaches
    ``spec.probs[j]``.  Pair with :func:`assign_levels`, which puts ``v`` in
    level ``j`` when ``cut[j-1] < v <= cut[j]``.

    >>> quantile_cuts(range(1, 10), TERTILES)
    array([3., 6.])
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    n = v.size
    if n == 0:
        raise EmptyInput("cannot take quantiles of an empty sample")
    if np.isnan(v).any():
        raise ValueError("values contain NaN")
    probs = np.asarray(spec.probs)
    # smallest i with (i + 1) / n >= p; slack absorbs p * n rounding (1/3 * 9)
    idx = np.ceil(probs * n - 1e-9 * n).astype(np.int64) - 1
    return v[np.clip(idx, 0, n - 1)]


def assign_levels(values, cuts) -> np.ndarray:
    """Ordinal levels ``1 .. len(cuts) + 1`` for ``values`` given sorted ``cuts``."""
    return np.searchsorted(np.asarray(cuts, dtype=float), np.asarray(values, dtype=float), side="left") + 1


def covariance(rows) -> np.ndarray:
    """Centered sample covariance (divisor n - 1) of the rows of a matrix."""
    x = np.asarray(rows, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise InsufficientData(f"covariance needs at least 2 rows, got {x.shape[0]}")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / (x.shape[0] - 1)
    return (cov + cov.T) / 2


def pseudo_inverse(cov) -> np.ndarray:
    """Symmetric eigendecomposition pseudo-inverse with a relative rank cutoff."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    w, v = np.linalg.eigh((cov + cov.T) / 2)
    top = w.max(initial=0.0)
    keep = w > PINV_RTOL * top if top > 0 else np.zeros_like(w, dtype=bool)
    inv = (v[:, keep] / w[keep]) @ v[:, keep].T
    return (inv + inv.T) / 2


def mahalanobis_to_zero(x, cov) -> np.ndarray | float:
    """Mahalanobis length ``sqrt(x' S+ x)`` of ``x`` (vector or row matrix)."""
    x = np.asarray(x, dtype=float)
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    single = x.ndim <= 1
    rows = x.reshape(1, -1) if single else x
    if rows.ndim != 2 or rows.shape[1] != cov.shape[0] or cov.shape[0] != cov.shape[1]:
        raise DimensionMismatch(f"vector dimension {rows.shape[1]} vs covariance {cov.shape}")
    pinv = pseudo_inverse(cov)
    d2 = np.einsum("ij,jk,ik->i", rows, pinv, rows)
    d = np.sqrt(np.maximum(d2, 0.0))
    return float(d[0]) if single else d


@dataclass
class GroupModel:
    """Covariance estimate and ordered cuts of one group."""

    n_rows: int
    cuts: np.ndarray
    covariance: np.ndarray | None = None


@dataclass
class DiscretizationModel:
    """Per-group binning parameters of one feature subset.

    ``per_group`` maps a group key tuple (empty tuple for a single global
    group) to its :class:`GroupModel`.  For a one-feature subset the cuts
    are on the raw value scale and no covariance is stored.
    """

    subset: tuple
    spec: QuantileSpec
    per_group: dict = field(default_factory=dict)

    @property
    def scale(self) -> str:
        return "value" if len(self.subset) == 1 else "mahalanobis"

    def to_dict(self) -> dict:
        groups = []
        for key in sorted(self.per_group, key=repr):
            g = self.per_group[key]
            groups.append({
                "group": list(key),
                "n_rows": int(g.n_rows),
                "cuts": [float(c) for c in g.cuts],
                "covariance": None if g.covariance is None else g.covariance.tolist(),
            })
        return {
            "subset": list(self.subset),
            "probs": list(self.spec.probs),
            "scale": self.scale,
            "groups": groups,
        }


def _group_index(groups, n):
    if groups is None:
        return [()], np.zeros(n, dtype=np.int64)
    groups = list(groups)
    if len(groups) != n:
        raise DimensionMismatch(f"{len(groups)} group keys for {n} rows")
    keys = [g if isinstance(g, tuple) else (g,) for g in groups]
    uniq = sorted(set(keys), key=repr)
    pos = {k: i for i, k in enumerate(uniq)}
    return uniq, np.fromiter((pos[k] for k in keys), dtype=np.int64, count=n)


def discretize_joint(rows, groups=None, spec: QuantileSpec = TERTILES, subset: Sequence = ()):
    """Collapse the columns of ``rows`` into one ordinal column.

    Parameters
    ----------
    rows : array_like, shape (n, k)
        Continuous scores; NaN marks a missing value.
    groups : sequence, optional
        One hashable group key per row.  ``None`` means a single group.
    spec : QuantileSpec
        Cut probabilities applied inside every group.
    subset : sequence of str, optional
        Feature names, recorded in the returned model.

    Returns
    -------
    levels : ndarray of int, shape (n,)
        ``1 .. spec.n_levels``; rows with any missing value get
        ``MISSING_LEVEL`` (0).
    model : DiscretizationModel
    """
    x = np.asarray(rows, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise EmptyInput("no rows to discretize")
    keys, gidx = _group_index(groups, x.shape[0])
    return _discretize_coded(x, gidx, keys, spec, tuple(subset))


def _discretize_coded(x, gidx, keys, spec, subset):
    n, k = x.shape
    complete = ~np.isnan(x).any(axis=1)
    levels = np.full(n, MISSING_LEVEL, dtype=np.int64)
    model = DiscretizationModel(subset or tuple(range(k)), spec)
    single = len(keys) == 1

    for gi, key in enumerate(keys):
        sel = np.flatnonzero(complete if single else (gidx == gi) & complete)
        if sel.size < 2:
            raise InsufficientData(f"group {key!r} has {sel.size} complete rows; need at least 2")
        xs = x[sel]
        if k == 1:
            score, cov = xs[:, 0], None
        else:
            cov = covariance(xs)
            score = mahalanobis_to_zero(xs, cov)
        cuts = quantile_cuts(score, spec)
        levels[sel] = assign_levels(score, cuts)
        model.per_group[key] = GroupModel(int(sel.size), cuts, cov)
    return levels, model
