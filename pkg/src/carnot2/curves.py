"""Curves in R^r and their horizontal lifts into the free step-2 group.

A ``PlanarCurve`` is an ordered run of symbolic segments; a
``HorizontalCurve`` pairs it with a start point of the group and the
exact vertical coordinates at every segment boundary, computed from the
segments' closed-form signed areas.  ``SampledCurve`` is the discrete
stand-in used by the smoothing pipeline for curves that are only known
at sample times.

The lift rule is the one characterizing horizontal curves: for i > j

    gamma_ij(t) = gamma_ij(t0) + (1/2) * integral (gamma_i gamma_j' - gamma_j gamma_i').
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group import (
    FreeGroupPoint,
    TangentVector,
    horizontality_residual,
    pair_antisym,
    pairs_from_matrix,
    vertical_dim,
)
from .quadrature import adaptive_simpson, composite_simpson_cumulative
from .segments import Segment

__all__ = [
    "PlanarCurve",
    "HorizontalCurve",
    "SampledCurve",
    "CurveCheck",
    "horizontal_lift",
    "signed_area",
    "is_horizontal_curve",
    "estimate_derivatives",
    "max_tangent_jump",
    "sample_horizontal_curve",
]

POSITION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """Time-ordered segments forming a continuous curve in R^r.

    Segments carry absolute positions; the constructor enforces C0
    continuity at junctions.  ``t0`` places the curve on a global time
    axis (segments use local time).
    """

    segments: tuple[Segment, ...]
    t0: float = 0.0

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("a planar curve needs at least one segment")
        r = segs[0].r
        if any(s.r != r for s in segs):
            raise ValueError("all segments must share the same ambient dimension")
        gap = self.position_gap_of(segs)
        if gap > POSITION_TOL:
            raise ValueError(f"segments are discontinuous: max junction gap {gap:.3e}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "t0", float(self.t0))

    @staticmethod
    def position_gap_of(segs) -> float:
        gap = 0.0
        for prev, nxt in zip(segs[:-1], segs[1:]):
            gap = max(gap, float(np.max(np.abs(prev.end_position() - nxt.start_position()))))
        return gap

    @property
    def r(self) -> int:
        return self.segments[0].r

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def end_time(self) -> float:
        return self.t0 + self.duration

    @property
    def knot_times(self) -> np.ndarray:
        """Global times of segment boundaries, length n_segments + 1."""
        cached = self.__dict__.get("_knot_times")
        if cached is None:
            cached = self.t0 + np.concatenate(
                [[0.0], np.cumsum([s.duration for s in self.segments])]
            )
            object.__setattr__(self, "_knot_times", cached)
        return cached

    @property
    def start(self) -> np.ndarray:
        return self.segments[0].start_position()

    @property
    def end(self) -> np.ndarray:
        return self.segments[-1].end_position()

    def _locate(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Segment indices and local times for global times t."""
        t = np.asarray(t, dtype=float)
        knots = self.knot_times
        lo, hi = knots[0], knots[-1]
        if np.any(t < lo - 1e-9) or np.any(t > hi + 1e-9):
            raise ValueError(f"time outside curve domain [{lo}, {hi}]")
        durations = self.__dict__.get("_durations")
        if durations is None:
            durations = np.array([s.duration for s in self.segments])
            object.__setattr__(self, "_durations", durations)
        idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(self.segments) - 1)
        local = np.clip(t - knots[idx], 0.0, None)
        local = np.minimum(local, durations[idx])
        return idx, local

    def _eval(self, t, attr: str) -> np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        idx, local = self._locate(t_arr)
        if t_arr.ndim == 0:
            return getattr(self.segments[int(idx)], attr)(float(local))
        out = np.empty(t_arr.shape + (self.r,))
        for k in np.unique(idx):
            mask = idx == k
            out[mask] = getattr(self.segments[int(k)], attr)(local[mask])
        return out

    def point(self, t) -> np.ndarray:
        return self._eval(t, "point")

    def velocity(self, t) -> np.ndarray:
        return self._eval(t, "velocity")

    def max_velocity_jump(self) -> float:
        """Largest velocity discontinuity across interior junctions."""
        jump = 0.0
        for prev, nxt in zip(self.segments[:-1], self.segments[1:]):
            jump = max(
                jump,
                float(np.max(np.abs(prev.velocity(prev.duration) - nxt.velocity(0.0)))),
            )
        return jump

    def transformed(self, matrix: np.ndarray, shift: np.ndarray) -> "PlanarCurve":
        segs = tuple(s.transformed(matrix, shift) for s in self.segments)
        return PlanarCurve(segs, self.t0)

    def shifted_to(self, t0: float) -> "PlanarCurve":
        return PlanarCurve(self.segments, t0)


@dataclass(frozen=True, eq=False)
class HorizontalCurve:
    """Horizontal curve: planar base plus exact vertical knot values.

    ``vertical_knots[s]`` holds the vertical coordinates at the start of
    segment s (the last row is the endpoint).  They satisfy the lift
    recursion against the segments' closed-form areas by construction;
    ``is_horizontal_curve`` re-checks them with independent quadrature.
    """

    base: PlanarCurve
    start: FreeGroupPoint
    vertical_knots: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.vertical_knots, dtype=float)
        n_seg = len(self.base.segments)
        m = vertical_dim(self.base.r)
        if knots.shape != (n_seg + 1, m):
            raise ValueError(
                f"vertical knots must have shape ({n_seg + 1}, {m}), got {knots.shape}"
            )
        if self.start.r != self.base.r:
            raise ValueError("start point rank does not match the base curve")
        if float(np.max(np.abs(self.start.x - self.base.start))) > 1e-9:
            raise ValueError("start point horizontal part must match the base curve start")
        if not np.array_equal(knots[0], self.start.y):
            raise ValueError("first vertical knot must equal the start point verticals")
        object.__setattr__(self, "vertical_knots", knots)

    @property
    def r(self) -> int:
        return self.base.r

    @property
    def t0(self) -> float:
        return self.base.t0

    @property
    def end_time(self) -> float:
        return self.base.end_time

    @property
    def end_point(self) -> FreeGroupPoint:
        return FreeGroupPoint(self.base.end, self.vertical_knots[-1])

    def value(self, t) -> FreeGroupPoint:
        t_arr = np.asarray(t, dtype=float)
        idx, local = self.base._locate(t_arr)
        x = self.base.point(t_arr)
        if t_arr.ndim == 0:
            seg = self.base.segments[int(idx)]
            y = self.vertical_knots[int(idx)] + pairs_from_matrix(seg.partial_area(float(local)))
            return FreeGroupPoint(x, y)
        y = np.empty(t_arr.shape + (vertical_dim(self.r),))
        for k in np.unique(idx):
            mask = idx == k
            seg = self.base.segments[int(k)]
            y[mask] = self.vertical_knots[int(k)] + pairs_from_matrix(
                seg.partial_area(local[mask])
            )
        return FreeGroupPoint(x, y)

    def derivative(self, t) -> TangentVector:
        """Tangent vector; vertical components follow the horizontality
        equation, so the result is horizontal at value(t) by construction."""
        x = self.base.point(t)
        vx = self.base.velocity(t)
        return TangentVector(vx, 0.5 * pair_antisym(x, vx))

    def translated(self, g: FreeGroupPoint) -> "HorizontalCurve":
        """Left translation by g of the whole curve."""
        if g.r != self.r:
            raise ValueError("rank mismatch in curve translation")
        base = self.base.transformed(np.eye(self.r), g.x)
        x_knots = np.array(
            [self.base.segments[0].start_position()]
            + [s.end_position() for s in self.base.segments]
        )
        knots = g.y + self.vertical_knots + 0.5 * pair_antisym(g.x, x_knots)
        start = FreeGroupPoint(g.x + self.start.x, knots[0])
        return HorizontalCurve(base, start, knots)

    def transformed(self, a_matrix: np.ndarray, b_matrix: np.ndarray) -> "HorizontalCurve":
        """Image under the graded map (x, y) -> (A x, B y), with B the
        second-layer action induced by A (caller supplies both)."""
        base = self.base.transformed(a_matrix, np.zeros(a_matrix.shape[0]))
        knots = self.vertical_knots @ b_matrix.T
        start = FreeGroupPoint(a_matrix @ self.start.x, knots[0])
        return HorizontalCurve(base, start, knots)

    def shifted_to(self, t0: float) -> "HorizontalCurve":
        return HorizontalCurve(self.base.shifted_to(t0), self.start, self.vertical_knots)


def horizontal_lift(base: PlanarCurve, start: FreeGroupPoint) -> HorizontalCurve:
    """Horizontal lift of ``base`` starting at ``start``.

    The horizontal coordinates of ``start`` must match the curve's start
    position (tolerance 1e-12); vertical knots accumulate the segments'
    closed-form signed areas.
    """
    if start.r != base.r:
        raise ValueError("rank mismatch between start point and base curve")
    if float(np.max(np.abs(start.x - base.start))) > 1e-12:
        raise ValueError("start point does not sit over the base curve start")
    m = vertical_dim(base.r)
    knots = np.empty((len(base.segments) + 1, m))
    knots[0] = start.y
    for s, seg in enumerate(base.segments):
        knots[s + 1] = knots[s] + pairs_from_matrix(seg.area_matrix())
    return HorizontalCurve(base, start, knots)


def signed_area(phi_i, phi_j, dphi_i, dphi_j, t0: float, t1: float,
                tol: float = 1e-10) -> float:
    """Signed area (1/2) integral (phi_i phi_j' - phi_j phi_i') over [t0, t1].

    The components and their derivatives are scalar callables.  For a
    closed loop starting at the origin this is the enclosed signed area.
    """
    return adaptive_simpson(
        lambda t: 0.5 * (phi_i(t) * dphi_j(t) - phi_j(t) * dphi_i(t)), t0, t1, tol
    )


@dataclass(frozen=True)
class CurveCheck:
    """Verification report for a horizontal curve.

    vertical_residual: max gap between stored vertical values and lift
    integrals recomputed with composite Simpson on a dense grid.
    tangent_residual: max horizontality residual of reported derivatives.
    velocity_jump / position_gap: worst junction discontinuities.
    """

    vertical_residual: float
    tangent_residual: float
    velocity_jump: float
    position_gap: float

    def ok(self, tol: float) -> bool:
        return self.vertical_residual <= tol and self.tangent_residual <= tol


def is_horizontal_curve(curve: HorizontalCurve, tol: float = 1e-8,
                        intervals: int = 128) -> CurveCheck:
    """Re-verify the lift property of ``curve`` by independent quadrature.

    Each segment is re-integrated with composite Simpson on ``intervals``
    panels and compared against the curve's stored vertical values on
    the same grid (segment endpoints included, which checks the knots).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    worst_v = 0.0
    worst_t = 0.0
    knot_times = curve.base.knot_times
    for s, seg in enumerate(curve.base.segments):
        d = seg.duration
        if d == 0.0:
            continue
        ts = np.linspace(0.0, d, 2 * intervals + 1)
        x = seg.point(ts)
        vx = seg.velocity(ts)
        integrand = 0.5 * pair_antisym(x, vx)
        recomputed = curve.vertical_knots[s] + composite_simpson_cumulative(
            integrand, d / (2 * intervals)
        )
        stored = curve.vertical_knots[s] + pairs_from_matrix(seg.partial_area(ts[::2]))
        worst_v = max(worst_v, float(np.max(np.abs(recomputed - stored))))
        worst_v = max(
            worst_v, float(np.max(np.abs(recomputed[-1] - curve.vertical_knots[s + 1])))
        )
    # the derivative accessor satisfies the horizontality equation by
    # construction; exercise it through the public API at the curve ends
    for t_end in (knot_times[0], knot_times[-1]):
        worst_t = max(
            worst_t,
            float(horizontality_residual(curve.derivative(t_end), curve.value(t_end))),
        )
    return CurveCheck(
        vertical_residual=worst_v,
        tangent_residual=worst_t,
        velocity_jump=curve.base.max_velocity_jump(),
        position_gap=PlanarCurve.position_gap_of(curve.base.segments),
    )


def max_tangent_jump(curve: HorizontalCurve) -> float:
    """Largest full-tangent discontinuity at interior segment junctions,
    with vertical components read through the horizontality equation."""
    jump = 0.0
    segs = curve.base.segments
    for prev, nxt in zip(segs[:-1], segs[1:]):
        x = prev.end_position()
        vl = prev.velocity(prev.duration)
        vr = nxt.velocity(0.0)
        left = np.concatenate([vl, 0.5 * pair_antisym(x, vl)])
        right = np.concatenate([vr, 0.5 * pair_antisym(nxt.start_position(), vr)])
        jump = max(jump, float(np.max(np.abs(left - right))))
    return jump


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Curve in the free group known at finitely many times.

    Arrays are row-per-sample: xs (n, r), ys (n, m); derivative arrays
    are optional and filled by ``estimate_derivatives`` when absent.
    """

    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    dxs: np.ndarray | None = None
    dys: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if t.ndim != 1 or len(t) < 2:
            raise ValueError("need at least two samples")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        n = len(t)
        r = xs.shape[-1]
        if xs.shape != (n, r) or ys.shape != (n, vertical_dim(r)):
            raise ValueError("sample arrays have inconsistent shapes")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        for name in ("dxs", "dys"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                want = xs.shape if name == "dxs" else ys.shape
                if arr.shape != want:
                    raise ValueError(f"{name} must have shape {want}")
                object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def r(self) -> int:
        return self.xs.shape[1]

    @property
    def has_derivatives(self) -> bool:
        return self.dxs is not None and self.dys is not None

    def point(self, i: int) -> FreeGroupPoint:
        return FreeGroupPoint(self.xs[i], self.ys[i])

    def tangent(self, i: int) -> TangentVector:
        if not self.has_derivatives:
            raise ValueError("curve has no derivative data; run estimate_derivatives")
        return TangentVector(self.dxs[i], self.dys[i])

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        """Index of the sample at time t (t must be a sample time)."""
        i = int(np.searchsorted(self.times, t))
        for k in (i - 1, i, i + 1):
            if 0 <= k < self.n and abs(self.times[k] - t) <= tol:
                return k
        raise KeyError(f"{t} is not a sample time of this curve")


def estimate_derivatives(s: SampledCurve) -> SampledCurve:
    """Fill derivative arrays by finite differences.

    Central differences in the interior (second order on uniform grids),
    one-sided at the ends.  Vertical components are then forced through
    the horizontality equation dy = (x wedge dx) / 2, so every estimated
    derivative is horizontal at its sample point.
    """
    if s.n < 3:
        raise ValueError("derivative estimation needs at least 3 samples")
    t, xs = s.times, s.xs
    dxs = np.empty_like(xs)
    dxs[1:-1] = (xs[2:] - xs[:-2]) / (t[2:] - t[:-2])[:, None]
    dxs[0] = (xs[1] - xs[0]) / (t[1] - t[0])
    dxs[-1] = (xs[-1] - xs[-2]) / (t[-1] - t[-2])
    dys = 0.5 * pair_antisym(xs, dxs)
    return SampledCurve(t, xs, s.ys, dxs, dys)


def sample_horizontal_curve(curve: HorizontalCurve, times: np.ndarray) -> SampledCurve:
    """Evaluate a symbolic horizontal curve into a SampledCurve (with exact
    derivatives)."""
    times = np.asarray(times, dtype=float)
    pts = curve.value(times)
    der = curve.derivative(times)
    return SampledCurve(times, pts.x, pts.y, der.x, der.y)
