"""End-to-end runs on the two UCI datasets.

    python demos/05_uci_runs.py path/to/house-votes-84.data path/to/covtype.data

Either path may be omitted.  The voting run looks for the profiles most
prone to each party among profiles held by more than 15% of the complete
cases; the covertype run bins the ten continuous terrain features jointly
by quintiles of their Mahalanobis length.
"""

import sys
import time

from liftscale import QUINTILES, SearchConfig, select_global, select_profile, select_window
from liftscale.dataio import COVTYPE_CONTINUOUS, VOTING_SCHEMA, load_covtype, load_voting, render_lift_table
from liftscale.search import Problem


def voting(path):
    df = load_voting(path)
    print(f"voting: {len(df)} rows")
    for party, max_k in [("republican", 5), ("democrat", 10)]:
        start = time.perf_counter()
        res = select_profile(df, list(VOTING_SCHEMA.features), "party", party,
                             SearchConfig(min_support=0.15, max_k=max_k, top_n=5))
        print(f"  {party} (max_k {max_k}, {time.perf_counter() - start:.0f}s)")
        for c in res:
            print(f"    {c.score:.2f}  {c.subset} = {c.locus}  n={c.table_total}")


def covtype(path, workers=4):
    df = load_covtype(path)
    print(f"covertype: {len(df):,} rows")
    cfg = SearchConfig(max_k=4, quantiles=QUINTILES, workers=workers, top_n=10)
    problem = Problem(df, list(COVTYPE_CONTINUOUS), "cover", cfg)
    best = select_global(problem, None, "cover", cfg).best
    print(f"  global: {best.subset} eta {best.score:.3f}")
    t, _ = problem.table(best.subset)
    print(render_lift_table(t, "(" + ",".join(best.subset) + ")", "cover", n_joint_levels=5))
    for c in select_window(problem, None, "cover", cfg):
        print(f"  window {c.subset} {[m[0] for m in c.locus]}: {c.score:.3f}")
    for y in map(str, range(1, 8)):
        c = select_profile(problem, None, "cover", y, cfg).best
        print(f"  type {y}: {c.subset} quintile {c.locus[0]} lift {c.score:.2f}")


if __name__ == "__main__":
    args = sys.argv[1:]
    if not args:
        sys.exit(__doc__)
    if len(args) >= 1 and args[0] != "-":
        voting(args[0])
    if len(args) >= 2:
        covtype(args[1])
