#!/usr/bin/env python3
"""Tour of the free step-2 group: products, horizontal vectors, lifting.

A point of the rank-r free step-2 group has r horizontal coordinates and
one vertical coordinate per index pair i > j.  Horizontal curves are
exactly the lifts of curves in R^r: each vertical coordinate grows with
the signed area swept in the corresponding coordinate plane.
"""

import numpy as np

from carnot2 import (
    CircleLoopSegment,
    FreeGroupPoint,
    PlanarCurve,
    horizontal_field,
    horizontal_lift,
    is_horizontal,
    is_horizontal_curve,
    inverse,
    product,
    vertical_pairs,
)

# ---------------------------------------------------------------------------
# group arithmetic
# ---------------------------------------------------------------------------

print("== arithmetic in the rank-3 free group ==")
rng = np.random.default_rng(7)
p = FreeGroupPoint(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
q = FreeGroupPoint(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
pq = product(p, q)
print("p * q horizontal:", np.round(pq.x, 4))
print("p * q vertical:  ", np.round(pq.y, 4), "pairs", vertical_pairs(3))

back = product(pq, inverse(q))
print("(p q) q^-1 == p up to", np.max(np.abs(back.flat - p.flat)))

# the group is noncommutative: the commutator of two horizontal moves is
# a purely vertical displacement
a = FreeGroupPoint([1.0, 0.0, 0.0], np.zeros(3))
b = FreeGroupPoint([0.0, 1.0, 0.0], np.zeros(3))
comm = product(product(a, b), inverse(product(b, a)))
print("commutator of e1, e2 moves:", comm.x, comm.y)

# frame fields evaluate to horizontal vectors wherever you stand
v = horizontal_field(2, p)
print("X_2(p) is horizontal:", is_horizontal(v, p).ok)

# ---------------------------------------------------------------------------
# lifting a circle: vertical displacement = swept area
# ---------------------------------------------------------------------------

print("\n== lifting a unit circle ==")
seg = CircleLoopSegment.build(np.zeros(2), i=2, radius=1.0, end_slope=1.0,
                              duration=2 * np.pi)
curve = horizontal_lift(PlanarCurve((seg,)), FreeGroupPoint.identity(2))
end = curve.end_point
print("planar endpoint returns to start:", np.round(end.x, 12))
print("vertical coordinate after one loop:", end.y[0], "(pi =", np.pi, ")")

check = is_horizontal_curve(curve, intervals=512)
print("independent quadrature residual:", check.vertical_residual)

# ---------------------------------------------------------------------------
# plot the lift as a spiral over the plane
# ---------------------------------------------------------------------------

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    ts = np.linspace(0, 2 * np.pi, 400)
    pts = curve.value(ts)
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot(pts.x[:, 0], pts.x[:, 1], pts.y[:, 0], lw=2)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_zlabel("vertical (2,1)")
    ax.set_title("Horizontal lift of a circle: height = swept area")
    out = Path(__file__).parent / "output"
    out.mkdir(exist_ok=True)
    fig.savefig(out / "circle_lift.png", dpi=120, bbox_inches="tight")
    print("\nwrote", out / "circle_lift.png")
except ImportError:
    print("\n(matplotlib not available; skipping the plot)")
