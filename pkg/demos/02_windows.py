"""Windowed eta: how much a part of X's range tells about Y.

The same grade data, now by Mathematics tertile alone.  The top tertile
carries most of the dependence, so its window scores above the global eta.
"""

from itertools import combinations

from liftscale import JointTable, Window, eta_global, eta_window

TERTILES = ("Tertile 1", "Tertile 2", "Tertile 3")
t = JointTable.from_counts([[1398, 1111, 667],
                            [843, 972, 847],
                            [587, 661, 1267]], TERTILES, TERTILES)

print(f"global eta: {eta_global(t):.4f}")
for size in (1, 2, 3):
    for members in combinations(t.x_levels, size):
        w = Window.of(t, members, subset=("M",))
        names = " & ".join(m[0] for m in sorted(members))
        print(f"  eta(Y | {names:<33}) = {eta_window(t, w):.4f}")

# the full range reproduces the global coefficient
assert abs(eta_window(t, range(3)) - eta_global(t)) < 1e-12

# a sparse table: cover type by a quintile profile of three terrain features
cover = JointTable.from_counts([[3244, 54473, 35344, 2747, 3385, 17010, 0],
                                [18816, 90872, 410, 0, 5663, 357, 84],
                                [40195, 75562, 0, 0, 445, 0, 0],
                                [70427, 45314, 0, 0, 0, 0, 461],
                                [79158, 17080, 0, 0, 0, 0, 19965]],
                               range(1, 6), range(1, 8))
print(f"\ncover: global eta {eta_global(cover):.3f}")
for members in [[(5,)], [(1,)], [(1,), (5,)], [(3,)]]:
    print(f"  window {[m[0] for m in members]}: {eta_window(cover, Window.of(cover, members)):.3f}")
