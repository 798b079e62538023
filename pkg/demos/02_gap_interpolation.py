#!/usr/bin/env python3
"""Interpolating across a gap with a C1 horizontal curve.

Take the lift of a planar path with a corner, cut out the piece around
the corner, and bridge the hole: the interpolant matches position and
velocity at both ends, stays horizontal, and its velocity never strays
from the entry velocity by more than a bounded multiple of the measured
boundary slack eps.
"""

import numpy as np

from carnot2 import (
    CubicSegment,
    FreeGroupPoint,
    LinearSegment,
    PlanarCurve,
    horizontal_lift,
)
from carnot2.frame import normalize_gap
from carnot2.interpolate import interpolate_gap

# a planar path: straight, a short turn, straight again, lifted from 0
first = LinearSegment(np.zeros(2), np.array([1.0, 0.0]), 0.45)
turn = CubicSegment.hermite(first.end_position(), first.end_position() + [0.09, 0.045],
                            [1.0, 0.0], [0.6, 0.8], 0.1)
last = LinearSegment(turn.end_position(), np.array([0.6, 0.8]), 0.45)
gamma = horizontal_lift(PlanarCurve((first, turn, last)), FreeGroupPoint.identity(2))

a, b = 0.35, 0.65
print("gap to bridge: [", a, ",", b, "]")

# what the normal frame sees: the anchor velocity becomes (L, 0, ...)
gap = normalize_gap(gamma, a, b)
bd = gap.data
print("anchor speed L =", round(bd.speed, 6), " measured slack eps =", round(bd.eps, 6))
print("normalized endpoint q:", np.round(bd.q.flat, 6))

result = interpolate_gap(gamma, a, b)
psi = result.psi
print("\nboundary residual:      ", result.boundary_residual)
print("horizontality residual: ", result.horizontality_residual)
print("junction velocity jumps:", result.junction_jump)
print("sup |psi' - v|:         ", result.measured_dev)
print("deviation / eps:        ", result.c_ratio)

# endpoint agreement in the original frame
for t in (a, b):
    dv = np.max(np.abs(psi.value(t).flat - gamma.value(t).flat))
    dd = np.max(np.abs(psi.derivative(t).flat - gamma.derivative(t).flat))
    print(f"t = {t}: value mismatch {dv:.2e}, derivative mismatch {dd:.2e}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    ts_full = np.linspace(0.0, 1.0, 600)
    ts_gap = np.linspace(a, b, 300)
    orig = gamma.value(ts_full)
    bridge = psi.value(ts_gap)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    ax1.plot(orig.x[:, 0], orig.x[:, 1], color="0.7", lw=4, label="original path")
    ax1.plot(bridge.x[:, 0], bridge.x[:, 1], "C3", lw=1.5, label="interpolant")
    for t in (a, b):
        pt = gamma.value(t)
        ax1.plot(pt.x[0], pt.x[1], "ko", ms=5)
    ax1.set_title("planar trace (loops sweep the vertical targets)")
    ax1.legend()
    ax1.set_aspect("equal")

    der = psi.derivative(ts_gap)
    v0 = gamma.derivative(a)
    ax2.plot(ts_gap, np.max(np.abs(der.flat - v0.flat), axis=-1), "C3")
    ax2.axhline(result.eps, color="k", ls="--", lw=0.8, label="eps")
    ax2.set_title("|psi' - gamma'(a)| along the bridge")
    ax2.set_xlabel("t")
    ax2.legend()

    out = Path(__file__).parent / "output"
    out.mkdir(exist_ok=True)
    fig.savefig(out / "gap_interpolation.png", dpi=120, bbox_inches="tight")
    print("\nwrote", out / "gap_interpolation.png")
except ImportError:
    print("\n(matplotlib not available; skipping the plot)")
