"""Global eta and the lift function on a small published contingency table.

Rows are joint (Mathematics, Physics) tertiles of first-year students,
columns are tertiles of their weighted mean grade.  Numbers in parentheses
are student counts.
"""

import math

from liftscale import JointTable, eta_global, lift, mutual_information
from liftscale.dataio import render_lift_table
from liftscale.metrics import conditional_entropy, entropy
from liftscale.distribution import marginal_y

TERTILES = ("Tertile 1", "Tertile 2", "Tertile 3")
counts = [[9, 13, 5],
          [9, 8, 9],
          [9, 5, 12]]
t = JointTable.from_counts(counts, TERTILES, TERTILES)

print(render_lift_table(t, "(M,P)", "Mean grade"))

# MI splits into H(Y) - H(Y|X); eta is the share of H(Y) that X explains
h_y = entropy(marginal_y(t))
mi = mutual_information(t)
print(f"H(Y)   = {h_y:.6f} nats")
print(f"H(Y|X) = {conditional_entropy(t):.6f} nats")
print(f"MI     = {mi:.6f} nats ({mi / math.log(2):.6f} bits)")
print(f"eta    = {eta_global(t):.4f}")

# eta is small, yet some cells lift well above 1: the dependence is local
lt = lift(t)
i, j = divmod(int(lt.lift.argmax()), lt.lift.shape[1])
print(f"largest lift {lt.lift[i, j]:.3f} at {t.x_levels[i][0]} -> grade {t.y_levels[j]}")

# MI is the expected log-lift
f = t.counts / t.total
print("E[log L] =", round(float((f * [[math.log(v) if v else 0 for v in r] for r in lt.lift]).sum()), 6))
