"""Exhaustive multi-resolution feature selection.

The outer search space is the Boolean lattice of feature subsets.  Inside
each subset node the search walks either nothing (global eta), the lattice
of windows over the subset's observed range (windowed eta), or the points of
that range (lift for a fixed target value).  Overfitting is controlled by
caps: ``max_k``, ``min_support`` and ``max_window_cells``.

Rankings use a total order -- quantized score descending, then subset size,
then subset position in the feature list, then the locus -- so the result is
the same for any number of workers.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import pandas as pd

from .discretize import MISSING_LEVEL, QuantileSpec, _discretize_coded, _group_index
from .distribution import CodedData, JointTable, table_from_codes
from .errors import LiftScaleError, NoFeasibleProfile, OracleTooLarge
from .metrics import Window, eta_global, lift

__all__ = [
    "Candidate",
    "Problem",
    "SearchConfig",
    "SearchResult",
    "Skipped",
    "brute_force_oracle",
    "count_subsets",
    "enumerate_subsets",
    "enumerate_windows",
    "prepare",
    "select_global",
    "select_profile",
    "select_window",
]

log = logging.getLogger(__name__)

RESOLUTIONS = ("global", "window", "profile")

# scores equal to this many decimals are ties
SCORE_DECIMALS = 12


@dataclass(frozen=True)
class SearchConfig:
    """Search restrictions and mode.

    ``quantiles=None`` selects categorical mode, where a subset's range is
    the observed Cartesian range of its columns.  With a
    :class:`~liftscale.discretize.QuantileSpec` each subset is collapsed to
    one ordinal column by joint Mahalanobis binning inside the groups
    defined by ``group_columns``.
    """

    max_k: int | None = None
    min_support: float = 0.0
    max_window_cells: int | None = None
    quantiles: QuantileSpec | None = None
    group_columns: tuple = ()
    target_value: object = None
    top_n: int = 10
    workers: int = 1
    # per-subset guard against astronomically large window lattices
    window_budget: int = 2**20

    def __post_init__(self):
        if self.max_k is not None and self.max_k < 1:
            raise ValueError("max_k must be >= 1")
        if not 0.0 <= self.min_support < 1.0:
            raise ValueError("min_support must lie in [0, 1)")
        if self.max_window_cells is not None and self.max_window_cells < 1:
            raise ValueError("max_window_cells must be >= 1")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "group_columns", tuple(self.group_columns))

    @property
    def mode(self) -> str:
        return "categorical" if self.quantiles is None else "joint-discretized"


@dataclass(frozen=True)
class Candidate:
    """A scored point of the search space.

    ``kind`` is ``"range"`` (whole range, ``locus`` is None), ``"window"``
    (``locus`` is a sorted tuple of level tuples) or ``"profile"`` (``locus``
    is one level tuple).
    """

    subset: tuple
    kind: str
    locus: tuple | None
    score: float
    support_count: int
    table_total: int

    def to_dict(self) -> dict:
        if self.kind == "window":
            locus = [list(m) for m in self.locus]
        elif self.kind == "profile":
            locus = list(self.locus)
        else:
            locus = None
        return {
            "subset": list(self.subset),
            "kind": self.kind,
            "locus": locus,
            "score": float(self.score),
            "support_count": int(self.support_count),
            "table_total": int(self.table_total),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        if d["kind"] == "window":
            locus = tuple(tuple(m) for m in d["locus"])
        elif d["kind"] == "profile":
            locus = tuple(d["locus"])
        else:
            locus = None
        return cls(tuple(d["subset"]), d["kind"], locus, d["score"],
                   d["support_count"], d["table_total"])


@dataclass(frozen=True)
class Skipped:
    subset: tuple
    reason: str


@dataclass
class SearchResult:
    """Ranked candidates plus diagnostics of one search run."""

    resolution: str
    candidates: list
    skipped: list = field(default_factory=list)
    models: dict = field(default_factory=dict)
    n_subsets: int = 0

    @property
    def best(self) -> Candidate | None:
        return self.candidates[0] if self.candidates else None

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]


# --------------------------------------------------------------------------
# enumeration


def count_subsets(m: int, max_k: int) -> int:
    return sum(math.comb(m, j) for j in range(1, max_k + 1))


def enumerate_subsets(features: Sequence, max_k: int | None = None) -> Iterator[tuple]:
    """Nonempty subsets of ``features`` with at most ``max_k`` members.

    Ordered by size, then lexicographically by position in ``features``;
    each subset keeps the feature order of the input.
    """
    features = list(features)
    max_k = len(features) if max_k is None else max_k
    if max_k > len(features):
        raise ValueError(f"max_k={max_k} exceeds the number of features ({len(features)})")
    for k in range(1, max_k + 1):
        yield from itertools.combinations(features, k)


def _window_sizes(n_levels: int, config: SearchConfig):
    cap = n_levels if config.max_window_cells is None else min(n_levels, config.max_window_cells)
    return range(1, cap + 1)


def _count_windows(n_levels: int, config: SearchConfig) -> int:
    return sum(math.comb(n_levels, s) for s in _window_sizes(n_levels, config))


def _support_ok(count: int, total: int, min_support: float) -> bool:
    # strict: relative frequency must exceed min_support
    return count > min_support * total


def _window_index_sets(t: JointTable, config: SearchConfig) -> Iterator[tuple]:
    rows = t.counts.sum(axis=1)
    total = int(rows.sum())
    for s in _window_sizes(len(t.x_levels), config):
        for combo in itertools.combinations(range(len(t.x_levels)), s):
            if _support_ok(int(rows[list(combo)].sum()), total, config.min_support):
                yield combo


def enumerate_windows(t: JointTable, config: SearchConfig, subset=()) -> Iterator[Window]:
    """Windows of ``t`` passing the size cap and the support restriction.

    Ordered by window size, then lexicographically by level order.
    """
    for combo in _window_index_sets(t, config):
        yield Window(subset, frozenset(t.x_levels[i] for i in combo))


# --------------------------------------------------------------------------
# problem preparation


class Problem:
    """Coded data plus everything needed to build a subset's joint table."""

    def __init__(self, data: pd.DataFrame, features: Sequence[str], target: str,
                 config: SearchConfig):
        features = list(features)
        if not features:
            raise ValueError("no candidate features")
        if len(set(features)) != len(features):
            raise ValueError("duplicate feature names")
        if target in features:
            raise ValueError(f"target {target!r} is also listed as a feature")
        missing = [c for c in features + [target, *config.group_columns] if c not in data.columns]
        if missing:
            raise LiftScaleError(f"unknown columns: {missing}")
        self.features = tuple(features)
        self.target = target
        self.position = {f: i for i, f in enumerate(features)}
        self.config = config
        self.target_value = None
        self.n_rows = len(data)
        y = CodedData(data, [target])
        self.y_codes = y.codes[target]
        self.y_levels = y.levels[target]
        if config.quantiles is None:
            self.coded = CodedData(data, features)
            self.continuous = None
        else:
            self.coded = None
            try:
                self.continuous = data[features].astype(float).to_numpy()
            except (TypeError, ValueError) as exc:
                raise LiftScaleError(f"joint discretization needs numeric features: {exc}") from None
            if config.group_columns:
                keys = list(data[list(config.group_columns)].itertuples(index=False, name=None))
                # rows with a missing group key cannot be binned
                bad = [i for i, k in enumerate(keys) if any(pd.isna(v) for v in k)]
                if bad:
                    raise LiftScaleError(f"{len(bad)} rows have a missing group value")
            else:
                keys = None
            self.group_keys, self.group_index = _group_index(keys, self.n_rows)

    def key(self, subset) -> tuple:
        return tuple(self.position[f] for f in subset)

    def table(self, subset):
        """Joint table of ``subset`` and its discretization model (or None)."""
        if self.config.quantiles is None:
            t = table_from_codes(
                [self.coded.codes[f] for f in subset],
                [self.coded.levels[f] for f in subset],
                self.y_codes, self.y_levels,
            )
            return t, None
        cols = [self.position[f] for f in subset]
        spec = self.config.quantiles
        levels, model = _discretize_coded(self.continuous[:, cols], self.group_index,
                                          self.group_keys, spec, tuple(subset))
        x_codes = np.where(levels == MISSING_LEVEL, -1, levels - 1)
        level_values = np.arange(1, spec.n_levels + 1).astype(object)
        t = table_from_codes([x_codes], [level_values], self.y_codes, self.y_levels)
        return t, model

    def resolve_target_value(self, y):
        levels = list(self.y_levels)
        if y in levels:
            return y
        by_str = {str(v): v for v in levels}
        if str(y) in by_str:
            return by_str[str(y)]
        raise LiftScaleError(f"target value {y!r} is not observed in column {self.target!r}")


def prepare(data, features, target, config: SearchConfig) -> Problem:
    if isinstance(data, Problem):
        return data
    return Problem(data, features, target, config)


# --------------------------------------------------------------------------
# ranking


def _quantize(score: float) -> float:
    return round(float(score), SCORE_DECIMALS)


def _locus_key(c: Candidate):
    if c.kind == "window":
        return (len(c.locus), c.locus)
    if c.kind == "profile":
        return (1, c.locus)
    return (0, ())


def _rank_key(c: Candidate, position: dict):
    return (-_quantize(c.score), len(c.subset), tuple(position[f] for f in c.subset), _locus_key(c))


def _truncate(cands: list, n: int, position: dict, ties_with_top: bool) -> list:
    """Sort and keep the top ``n`` plus the tie set that must survive.

    Intermediate merges keep ties with the n-th score (a superset of the
    global top tie set); the final cut keeps ties with the top score.
    """
    cands = sorted(cands, key=lambda c: _rank_key(c, position))
    if len(cands) <= n:
        return cands
    anchor = _quantize(cands[0 if ties_with_top else n - 1].score)
    end = n
    while end < len(cands) and _quantize(cands[end].score) == anchor:
        end += 1
    return cands[:end]


# --------------------------------------------------------------------------
# per-subset evaluation


def _eval_global(problem, subset, t):
    total = t.total
    return [Candidate(tuple(subset), "range", None, eta_global(t), total, total)]


def _eval_window(problem, subset, t):
    config = problem.config
    n_levels = len(t.x_levels)
    n_windows = _count_windows(n_levels, config)
    if n_windows > config.window_budget:
        raise _Skip(f"{n_windows} windows exceed the window budget of {config.window_budget}; "
                    f"lower max_window_cells")
    c = t.counts.astype(float)
    total = c.sum()
    h = c.sum(axis=0) / total
    rows = c.sum(axis=1)
    # per-level KL and cross-entropy contributions; window eta is a ratio of sums
    with np.errstate(divide="ignore", invalid="ignore"):
        kl = np.where(c > 0, c * np.log(c / (rows[:, None] * h[None, :])), 0.0).sum(axis=1)
        ce = -np.where(c > 0, c * np.log(h)[None, :], 0.0).sum(axis=1)
    out = []
    for combo in _window_index_sets(t, config):
        idx = list(combo)
        den = ce[idx].sum()
        score = 1.0 if den <= 0.0 else min(max(kl[idx].sum() / den, 0.0), 1.0)
        support = int(rows[idx].sum())
        locus = tuple(t.x_levels[i] for i in combo)
        out.append(Candidate(tuple(subset), "window", locus, float(score), support, int(total)))
    return out


def _eval_profile(problem, subset, t):
    config = problem.config
    y = problem.target_value
    if y not in t.y_levels:
        raise _Skip(f"target value {y!r} absent from the complete cases of this subset")
    yi = t.y_index(y)
    lifts = lift(t).lift[:, yi]
    rows = t.counts.sum(axis=1)
    total = t.total
    out = []
    for i, level in enumerate(t.x_levels):
        if _support_ok(int(rows[i]), total, config.min_support):
            out.append(Candidate(tuple(subset), "profile", level, float(lifts[i]),
                                 int(rows[i]), total))
    return out


_EVALUATORS = {"global": _eval_global, "window": _eval_window, "profile": _eval_profile}


class _Skip(Exception):
    pass


def _evaluate_chunk(problem: Problem, resolution: str, subsets: list, keep: int):
    evaluate = _EVALUATORS[resolution]
    cands, skipped, models = [], [], {}
    for subset in subsets:
        try:
            t, model = problem.table(subset)
            found = evaluate(problem, subset, t)
        except _Skip as exc:
            skipped.append(Skipped(tuple(subset), str(exc)))
            continue
        except LiftScaleError as exc:
            skipped.append(Skipped(tuple(subset), f"{type(exc).__name__}: {exc}"))
            continue
        if model is not None:
            models[tuple(subset)] = model
        cands.extend(found)
        if len(cands) > 4 * keep:
            cands = _truncate(cands, keep, problem.position, ties_with_top=False)
    cands = _truncate(cands, keep, problem.position, ties_with_top=False)
    kept = {c.subset for c in cands}
    models = {s: m for s, m in models.items() if s in kept}
    return cands, skipped, models


_WORKER_PROBLEM: Problem | None = None


def _init_worker(problem):
    global _WORKER_PROBLEM
    _WORKER_PROBLEM = problem


def _worker_chunk(resolution, subsets, keep):
    return _evaluate_chunk(_WORKER_PROBLEM, resolution, subsets, keep)


def _chunks(seq: list, size: int):
    for i in range(0, len(seq), size):
        yield seq[i:i + size]


def _run(problem: Problem, resolution: str) -> SearchResult:
    config = problem.config
    max_k = len(problem.features) if config.max_k is None else min(config.max_k, len(problem.features))
    subsets = list(enumerate_subsets(problem.features, max_k))
    keep = config.top_n
    workers = min(config.workers, max(1, len(subsets)))
    if workers == 1:
        parts = [_evaluate_chunk(problem, resolution, subsets, keep)]
    else:
        size = max(1, math.ceil(len(subsets) / (workers * 8)))
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(problem,)) as pool:
            futures = [pool.submit(_worker_chunk, resolution, chunk, keep)
                       for chunk in _chunks(subsets, size)]
            parts = [f.result() for f in futures]

    cands, skipped, models = [], [], {}
    for c, s, m in parts:
        cands.extend(c)
        skipped.extend(s)
        models.update(m)
    ranked = _truncate(cands, keep, problem.position, ties_with_top=True)
    skipped.sort(key=lambda s: (len(s.subset), problem.key(s.subset)))
    for s in skipped:
        log.info("skipped %s: %s", s.subset, s.reason)
    kept = {c.subset for c in ranked}
    models = {s: models[s] for s in sorted(models, key=problem.key) if s in kept}
    return SearchResult(resolution, ranked, skipped, models, len(subsets))


def select_global(data, features, target, config: SearchConfig) -> SearchResult:
    """Rank feature subsets by global eta (cost 1/eta over the subset lattice)."""
    problem = prepare(data, features, target, config)
    return _run(problem, "global")


def select_window(data, features, target, config: SearchConfig) -> SearchResult:
    """Rank (subset, window) pairs by windowed eta."""
    problem = prepare(data, features, target, config)
    return _run(problem, "window")


def select_profile(data, features, target, y, config: SearchConfig) -> SearchResult:
    """Rank (subset, profile) pairs by the lift of target value ``y``.

    Only profiles whose relative frequency among the subset's complete
    cases exceeds ``config.min_support`` are eligible.

    Raises
    ------
    NoFeasibleProfile
        If the support restriction leaves no candidate.
    """
    problem = prepare(data, features, target, config)
    problem.target_value = problem.resolve_target_value(y)
    result = _run(problem, "profile")
    if not result.candidates:
        raise NoFeasibleProfile(
            f"no profile with relative frequency above {config.min_support} "
            f"for {target}={y!r}"
        )
    return result


def search(data, features, target, config: SearchConfig, resolution: str, y=None) -> SearchResult:
    """Dispatch to one of the three selectors by resolution name."""
    if resolution == "global":
        return select_global(data, features, target, config)
    if resolution == "window":
        return select_window(data, features, target, config)
    if resolution == "profile":
        return select_profile(data, features, target, config.target_value if y is None else y, config)
    raise ValueError(f"unknown resolution {resolution!r}")


# --------------------------------------------------------------------------
# brute-force oracle


def brute_force_oracle(data: pd.DataFrame, features, target, config: SearchConfig,
                       resolution: str, y=None) -> list:
    """Naive full enumeration with plain Python counters; a test oracle.

    Categorical mode only, at most 4 features with at most 3 levels each.
    Returns the ranked candidate list under the same contract as the
    ``select_*`` functions.
    """
    if resolution not in RESOLUTIONS:
        raise ValueError(f"unknown resolution {resolution!r}")
    if config.quantiles is not None:
        raise ValueError("the oracle covers categorical mode only")
    features = list(features)
    if len(features) > 4:
        raise OracleTooLarge(f"{len(features)} features; the oracle handles at most 4")

    def present(v):
        return v is not None and not (isinstance(v, float) and math.isnan(v))

    records = [dict(zip(data.columns, r)) for r in data.itertuples(index=False, name=None)]
    for f in features:
        if len({r[f] for r in records if present(r[f])}) > 3:
            raise OracleTooLarge(f"feature {f!r} has more than 3 levels")
    if resolution == "profile":
        y = config.target_value if y is None else y
        ys = {r[target] for r in records if present(r[target])}
        if y not in ys:
            y = {str(v): v for v in ys}.get(str(y), y)

    max_k = len(features) if config.max_k is None else min(config.max_k, len(features))
    found = []
    for k in range(1, max_k + 1):
        for subset in itertools.combinations(features, k):
            rows = [r for r in records if present(r[target]) and all(present(r[f]) for f in subset)]
            n = len(rows)
            if n == 0:
                continue
            joint = Counter((tuple(r[f] for f in subset), r[target]) for r in rows)
            gx = Counter(tuple(r[f] for f in subset) for r in rows)
            hy = Counter(r[target] for r in rows)

            if resolution == "global":
                hyv = -sum(c / n * math.log(c / n) for c in hy.values())
                mi = sum(c / n * math.log((c / n) / ((gx[x] / n) * (hy[yy] / n)))
                         for (x, yy), c in joint.items())
                score = 1.0 if hyv == 0 else min(mi / hyv, 1.0)
                found.append(Candidate(subset, "range", None, score, n, n))

            elif resolution == "window":
                xs = sorted(gx)
                cap = len(xs) if config.max_window_cells is None else min(len(xs), config.max_window_cells)
                for s in range(1, cap + 1):
                    for w in itertools.combinations(xs, s):
                        mass = sum(gx[x] for x in w)
                        if not mass > config.min_support * n:
                            continue
                        num = den = 0.0
                        for x in w:
                            g = gx[x] / n
                            for yy, hc in hy.items():
                                f_cond = joint.get((x, yy), 0) / gx[x]
                                if f_cond > 0:
                                    num += g * f_cond * math.log(f_cond / (hc / n))
                                    den -= g * f_cond * math.log(hc / n)
                        score = 1.0 if den <= 0 else min(max(num / den, 0.0), 1.0)
                        found.append(Candidate(subset, "window", tuple(w), score, mass, n))

            else:
                if y not in hy:
                    continue
                for x in sorted(gx):
                    if gx[x] > config.min_support * n:
                        score = joint.get((x, y), 0) * n / (gx[x] * hy[y])
                        found.append(Candidate(subset, "profile", x, score, gx[x], n))

    pos = {f: i for i, f in enumerate(features)}

    def order(c):
        locus = (0, ()) if c.kind == "range" else ((len(c.locus), c.locus) if c.kind == "window" else (1, c.locus))
        return (-round(c.score, SCORE_DECIMALS), len(c.subset), [pos[f] for f in c.subset], locus)

    found.sort(key=order)
    n_top = config.top_n
    if len(found) > n_top:
        top = round(found[0].score, SCORE_DECIMALS)
        end = n_top
        while end < len(found) and round(found[end].score, SCORE_DECIMALS) == top:
            end += 1
        found = found[:end]
    return found
