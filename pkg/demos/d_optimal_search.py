"""Locally D-optimal designs found inside the reduced class.

Domination shrinks the search space to designs with a known support
pattern: for the Michaelis-Menten model, two points with the right
endpoint included.  Optimizing over that class is a 2-dimensional
problem instead of a search over arbitrary probability measures, and
the answer matches the classical closed-form optimum.
"""

import numpy as np

from tcheb import (
    Design,
    Interval,
    criterion_value,
    information_matrix,
    make_model,
    optimize_in_class,
    reduce_design,
)

theta = [1.0, 1.0]
model = make_model("michaelis_menten", theta, (0.0, 10.0))

best = optimize_in_class(model, theta, criterion="d", direction="upper")
print("D-optimal design in the upper class:")
for p, w in zip(best.points, best.weights):
    print(f"  x = {p:10.7f}   w = {w:.7f}")
print()

# closed form for this model on [0, B]: interior point at
# B * theta2 / (2 theta2 + B), equal weights
t_star = 10.0 * 1.0 / (2.0 * 1.0 + 10.0)
print(f"closed-form interior point: {t_star:.7f}")
print(f"criterion value: {criterion_value(model, theta, best, 'd'):.9f}")
print()

print("the optimum cannot be improved by another reduction pass:")
rep = reduce_design(model, theta, best, "upper")
v0 = criterion_value(model, theta, best, "d")
v1 = criterion_value(model, theta, rep.output, "d")
print(f"  value before {v0:.12f}, after {v1:.12f}")
print()

print("a plausible hand-made competitor is strictly worse:")
naive = Design(points=(5.0, 10.0), weights=(0.5, 0.5), interval=Interval(0.0, 10.0))
vn = criterion_value(model, theta, naive, "d")
det_ratio = np.exp((vn - v0) / 2)
print(f"  {{5: 1/2, 10: 1/2}} has log det {vn:.6f} vs {v0:.6f}")
print(f"  efficiency (det ratio, per-parameter scale): {det_ratio:.4f}")

print()
print("A-criterion in the same class:")
best_a = optimize_in_class(model, theta, criterion="a", direction="upper", restarts=8)
for p, w in zip(best_a.points, best_a.weights):
    print(f"  x = {p:10.7f}   w = {w:.7f}")
M = information_matrix(model, theta, best_a)
print(f"  trace of the inverse information matrix: {np.trace(np.linalg.inv(M)):.6f}")
