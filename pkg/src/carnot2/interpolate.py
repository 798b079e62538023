"""C1 horizontal interpolation across a normalized gap.

Given boundary data (h, q, v, w, L, eps) in the normal frame, this
module builds a C1 horizontal curve psi on [0, 2h] with

    psi(0) = 0,  psi(2h) = q,  psi'(0) = v,  psi'(2h) = w,

whose velocity stays within a bounded multiple of eps from v.  The
construction runs in two stages:

* the closing stage on [h, 2h] is the horizontal lift of a vector cubic
  run backwards, which lands the horizontal endpoint and the end
  velocity while perturbing vertical coordinates only at scale eps;
* the steering stage on [0, h] splits into one subinterval per vertical
  coordinate and sweeps each required signed area with a loop move that
  leaves every other vertical coordinate untouched (exact closed-form
  cancellations): a cosine arch when drifting fast enough, a small
  variable-speed circle plus a smooth catch-up drift when the drift is
  slower than eps, and a two-lobed petal loop for planes not containing
  the drift axis.

``interpolate_gap`` wires the stages to a concrete curve: normalize the
gap, build psi in the normal frame, and map it back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import HorizontalCurve, PlanarCurve, horizontal_lift, is_horizontal_curve
from .frame import (
    BoundaryData,
    NormalizedGap,
    denormalize_curve,
    endpoint_data,
    normalize_gap,
)
from .group import FreeGroupPoint, TangentVector, pair_index, vertical_pairs
from .segments import (
    CircleLoopSegment,
    ConstantSegment,
    CosineBumpSegment,
    CubicSegment,
    LinearSegment,
    PetalLoopSegment,
    Segment,
)

__all__ = [
    "InfeasibleBoundaryError",
    "AlphaPlan",
    "InterpolationConfig",
    "InterpolationResult",
    "beta_curve",
    "bump_segments",
    "circle_segments",
    "petal_segments",
    "segments_for_target",
    "alpha_curve",
    "interpolate_gap",
]

LINE_SNAP_REL = 1e-13


class InfeasibleBoundaryError(ValueError):
    """Raised when boundary data demand a vertical displacement that the
    construction cannot produce (eps = 0 with a nonzero target)."""


@dataclass(frozen=True)
class InterpolationConfig:
    """Tunables for gap interpolation.

    grid: velocity samples per segment for the measured deviation.
    check_intervals: Simpson panels per segment in the verification pass
    (0 disables the pass).
    horizontal_tol: allowed horizontality residual of input derivatives.
    """

    grid: int = 256
    check_intervals: int = 128
    horizontal_tol: float = 1e-8


@dataclass(frozen=True)
class AlphaPlan:
    """Assignment of one vertical coordinate to each steering subinterval.

    ``order`` is a permutation of all pairs (i, j), i > j.  The default
    fixes drift-plane coordinates (i, 1) first, then the remaining pairs,
    each in lexicographic order; any order produces the same endpoint.
    """

    order: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set(self.order)
        if len(seen) != len(self.order):
            raise ValueError("plan repeats a vertical coordinate")

    @classmethod
    def default(cls, r: int) -> "AlphaPlan":
        first = [(i, 1) for i in range(2, r + 1)]
        rest = sorted((i, j) for i, j in vertical_pairs(r) if j > 1)
        return cls(tuple(first + rest))

    def validate_for_rank(self, r: int):
        if set(self.order) != set(vertical_pairs(r)):
            raise ValueError(f"plan must cover every vertical pair of rank {r} exactly once")


def _closing_cubic(bd: BoundaryData) -> np.ndarray:
    """Coefficients (4, r) of the backwards closing cubic on [0, h]:

        c(t) = Q + t W + (t^2/h^2)(-4hV - 2hW - 3Q) + (t^3/h^3)(3hV + hW + 2Q)

    with Q = q_horizontal, V = -v_horizontal, W = -w_horizontal, so that
    c(0) = Q, c(h) = (Lh, 0, ..., 0), c'(0) = -w, c'(h) = -v.
    """
    h = bd.h
    q_row = bd.q.x
    v_row = -bd.v.x
    w_row = -bd.w.x
    c2 = (-4.0 * h * v_row - 2.0 * h * w_row - 3.0 * q_row) / h**2
    c3 = (3.0 * h * v_row + h * w_row + 2.0 * q_row) / h**3
    return np.stack([q_row, w_row, c2, c3])


def _reverse_cubic(coeffs: np.ndarray, h: float) -> np.ndarray:
    """Coefficients of t -> c(h - t), by binomial expansion of (h - t)^k."""
    c0, c1, c2, c3 = coeffs
    return np.stack(
        [
            c0 + h * c1 + h**2 * c2 + h**3 * c3,
            -c1 - 2.0 * h * c2 - 3.0 * h**2 * c3,
            c2 + 3.0 * h * c3,
            -c3,
        ]
    )


def _is_straight(coeffs: np.ndarray, h: float) -> bool:
    scale = max(
        1e-300,
        float(np.max(np.abs(coeffs[0]))),
        h * float(np.max(np.abs(coeffs[1]))),
    )
    bend = max(h**2 * float(np.max(np.abs(coeffs[2]))), h**3 * float(np.max(np.abs(coeffs[3]))))
    return bend <= LINE_SNAP_REL * scale


def _closing_segments(bd: BoundaryData) -> tuple[Segment, FreeGroupPoint]:
    """The backwards closing segment on [h, 2h] and its start point q_tilde.

    Builds the forward cubic from q, reads off its endpoint (that is
    q_tilde) from the closed-form areas, and reverses it.  Degenerate
    data (w = v, straight q) collapse both runs to lines.
    """
    from .group import pairs_from_matrix

    h = bd.h
    coeffs = _closing_cubic(bd)
    if _is_straight(coeffs, h):
        forward: Segment = LinearSegment(coeffs[0], coeffs[1], h)
        backward: Segment = LinearSegment(coeffs[0] + h * coeffs[1], -coeffs[1], h)
    else:
        forward = CubicSegment(coeffs, h)
        backward = CubicSegment(_reverse_cubic(coeffs, h), h)
    q_tilde = FreeGroupPoint(
        forward.end_position(), bd.q.y + pairs_from_matrix(forward.area_matrix())
    )
    return backward, q_tilde


def beta_curve(bd: BoundaryData) -> tuple[HorizontalCurve, FreeGroupPoint]:
    """Closing curve on [h, 2h] and its start point q_tilde.

    The backwards cubic is lifted from q; its endpoint is q_tilde, which
    has horizontal part (Lh, 0, ..., 0) and vertical coordinates of size
    O(eps (L + eps) h^2).  Running it in reverse gives beta with
    beta(h) = q_tilde, beta(2h) = q, beta'(h) = v, beta'(2h) = w.
    """
    backward, q_tilde = _closing_segments(bd)
    beta = horizontal_lift(PlanarCurve((backward,), t0=bd.h), q_tilde)
    return beta, q_tilde


def bump_segments(origin: np.ndarray, i: int, target: float, speed: float,
                  duration: float) -> tuple[Segment, ...]:
    """Fast-drift fix of the (i, 1) coordinate: full-speed drift plus a
    cosine arch of amplitude target / (speed * duration) in coordinate i."""
    if target == 0.0:
        if speed == 0.0:
            return (ConstantSegment(origin, duration),)
        vel = np.zeros_like(origin)
        vel[0] = speed
        return (LinearSegment(origin, vel, duration),)
    if speed == 0.0:
        raise InfeasibleBoundaryError(
            "cannot sweep a drift-plane area with zero speed and zero slack"
        )
    amplitude = target / (speed * duration)
    return (CosineBumpSegment(origin, speed, i, amplitude, duration),)


def circle_segments(origin: np.ndarray, i: int, target: float, speed: float,
                    duration: float) -> tuple[Segment, ...]:
    """Slow-drift fix of the (i, 1) coordinate: a circle of area |target|
    traversed with endpoint speed matching the drift, then a smooth
    catch-up drift covering speed * duration in half the time."""
    half = 0.5 * duration
    segs: list[Segment] = []
    if target == 0.0:
        segs.append(ConstantSegment(origin, half))
        mid = origin
    else:
        radius = float(np.sqrt(abs(target) / np.pi))
        orientation = 1 if target > 0 else -1
        segs.append(
            CircleLoopSegment.build(origin, i, radius, end_slope=speed / radius,
                                    duration=half, orientation=orientation)
        )
        mid = origin
    if speed == 0.0:
        segs.append(ConstantSegment(mid, half))
        return tuple(segs)
    # C1 catch-up: cubic in the drift coordinate with endpoint speeds equal
    # to the drift, covering the whole subinterval's progress in half time
    end = mid.copy()
    end[0] += speed * duration
    vel = np.zeros_like(origin)
    vel[0] = speed
    segs.append(CubicSegment.hermite(mid, end, vel, vel, half))
    return tuple(segs)


def petal_segments(origin: np.ndarray, i: int, j: int, target: float, speed: float,
                   eps: float, duration: float) -> tuple[Segment, ...]:
    """Fix of an off-drift coordinate (i, j), i > j > 1, by a petal loop of
    swept area target riding the drift; the loop's full-period symmetry
    leaves (i, 1) and (j, 1) untouched."""
    if target == 0.0:
        return bump_segments(origin, i, 0.0, speed, duration)
    if eps == 0.0:
        raise InfeasibleBoundaryError(
            "cannot sweep an off-drift area with zero slack"
        )
    amplitude = float(np.sqrt(abs(target) / (1.5 * np.pi)))
    return (
        PetalLoopSegment(origin, i, j, speed, amplitude, swapped=target < 0.0,
                         duration=duration),
    )


def segments_for_target(origin: np.ndarray, pair: tuple[int, int], target: float,
                        speed: float, eps: float, duration: float) -> tuple[Segment, ...]:
    """Steering move for one subinterval: dispatch on the coordinate type
    and on whether the drift dominates the slack."""
    i, j = pair
    if eps == 0.0 and target != 0.0:
        raise InfeasibleBoundaryError(
            f"vertical target {target:.3e} for pair {pair} with eps = 0"
        )
    if j == 1:
        if speed >= eps:
            return bump_segments(origin, i, target, speed, duration)
        return circle_segments(origin, i, target, speed, duration)
    return petal_segments(origin, i, j, target, speed, eps, duration)


def _steering_segments(bd: BoundaryData, q_tilde: FreeGroupPoint,
                       plan: AlphaPlan) -> tuple[tuple[Segment, ...], list[int]]:
    r = bd.r
    d = bd.h / len(plan.order)
    segments: list[Segment] = []
    sub_ends: list[int] = []
    origin = np.zeros(r)
    for pair in plan.order:
        target = float(q_tilde.y[pair_index(*pair)])
        moves = segments_for_target(origin, pair, target, bd.speed, bd.eps, d)
        segments.extend(moves)
        sub_ends.append(len(segments))
        origin = moves[-1].end_position()
    return tuple(segments), sub_ends


def alpha_curve(bd: BoundaryData, q_tilde: FreeGroupPoint,
                plan: AlphaPlan | None = None) -> HorizontalCurve:
    """Steering curve on [0, h]: from the identity to q_tilde with
    derivative v at both ends and at every subinterval boundary.

    [0, h] is divided into one subinterval per vertical coordinate; the
    move on each subinterval reaches that coordinate's target exactly
    (closed form) and leaves all others unchanged.
    """
    r = bd.r
    plan = AlphaPlan.default(r) if plan is None else plan
    plan.validate_for_rank(r)
    segments, sub_ends = _steering_segments(bd, q_tilde, plan)
    curve = horizontal_lift(PlanarCurve(segments), FreeGroupPoint.identity(r))
    _check_steering_invariants(curve, bd, q_tilde, plan, sub_ends)
    return curve


def _check_steering_invariants(curve: HorizontalCurve, bd: BoundaryData,
                               q_tilde: FreeGroupPoint, plan: AlphaPlan,
                               sub_ends: list[int]):
    """Inductive guarantees of the steering stage, checked on the knots:
    drift-only horizontal progress, fixed coordinates at their targets,
    untouched coordinates at zero, drift velocity at boundaries."""
    r = bd.r
    n_sub = len(plan.order)
    d = bd.h / n_sub
    scale = 1e-9 * max(1.0, float(np.max(np.abs(q_tilde.flat))))
    for k, seg_end in enumerate(sub_ends):
        x = curve.base.segments[seg_end - 1].end_position()
        expect = np.zeros(r)
        expect[0] = bd.speed * (k + 1) * d
        if float(np.max(np.abs(x - expect))) > scale:
            raise RuntimeError("steering stage drifted off the axis")
        y = curve.vertical_knots[seg_end]
        for done, pair in enumerate(plan.order):
            idx = pair_index(*pair)
            want = float(q_tilde.y[idx]) if done <= k else 0.0
            if abs(float(y[idx]) - want) > scale:
                raise RuntimeError(
                    f"steering stage misplaced coordinate {pair} after move {k}"
                )


@dataclass(frozen=True)
class InterpolationResult:
    """Interpolant for one gap plus its measured quality.

    psi: the interpolant on [a, b] (original frame).
    normalized: the same curve in the normal frame on [0, 2h].
    gap: frame, anchor and boundary data used.
    measured_dev: sup over a dense grid of |psi' - v| in the normal frame.
    c_ratio: measured_dev / eps (inf for eps = 0 with nonzero deviation).
    boundary_residual: worst endpoint value/derivative mismatch on [a, b].
    horizontality_residual: independent quadrature residual of the
    returned psi (nan when the verification pass is disabled).
    junction_jump: largest velocity discontinuity at interior junctions.
    """

    psi: HorizontalCurve
    normalized: HorizontalCurve
    gap: NormalizedGap
    measured_dev: float
    c_ratio: float
    boundary_residual: float
    horizontality_residual: float
    junction_jump: float

    @property
    def eps(self) -> float:
        return self.gap.data.eps


def _measured_deviation(curve: HorizontalCurve, v: TangentVector, grid: int) -> float:
    from .group import pair_antisym

    dev = 0.0
    vx, vy = v.x, v.y
    for seg in curve.base.segments:
        if seg.duration == 0.0:
            continue
        ts = np.linspace(0.0, seg.duration, grid)
        x = seg.point(ts)
        dx = seg.velocity(ts)
        dy = 0.5 * pair_antisym(x, dx)
        dev = max(dev, float(np.max(np.abs(dx - vx))), float(np.max(np.abs(dy - vy))))
    return dev


def assemble_normalized(bd: BoundaryData, plan: AlphaPlan | None = None) -> HorizontalCurve:
    """The full normalized interpolant psi on [0, 2h] (steering stage then
    closing stage, lifted once from the identity)."""
    plan = AlphaPlan.default(bd.r) if plan is None else plan
    plan.validate_for_rank(bd.r)
    backward, q_tilde = _closing_segments(bd)
    alpha_segs, sub_ends = _steering_segments(bd, q_tilde, plan)
    curve = horizontal_lift(
        PlanarCurve(alpha_segs + (backward,)), FreeGroupPoint.identity(bd.r)
    )
    _check_steering_invariants(curve, bd, q_tilde, plan, sub_ends)
    return curve


def interpolate_gap(gamma, a: float, b: float,
                    config: InterpolationConfig | None = None,
                    plan: AlphaPlan | None = None) -> InterpolationResult:
    """Interpolate the gap [a, b] of a horizontal or sampled curve by a C1
    horizontal curve matching values and derivatives at both ends."""
    config = config or InterpolationConfig()
    if not a < b:
        raise ValueError("need a < b")
    gap = normalize_gap(gamma, a, b, horizontal_tol=config.horizontal_tol)
    return interpolate_normalized(gap, gamma, config, plan)


def interpolate_normalized(gap: NormalizedGap, gamma=None,
                           config: InterpolationConfig | None = None,
                           plan: AlphaPlan | None = None) -> InterpolationResult:
    """Interpolation driven by already-normalized gap data.  When gamma is
    given, boundary residuals are measured against it in the original
    frame; otherwise against the denormalized boundary data."""
    config = config or InterpolationConfig()
    bd = gap.data
    psi_norm = assemble_normalized(bd, plan)
    psi = denormalize_curve(psi_norm, gap)

    residual = 0.0
    if gamma is not None:
        for t in (gap.a, gap.b):
            pt, der = endpoint_data(gamma, t)
            residual = max(residual, float(np.max(np.abs(psi.value(t).flat - pt.flat))))
            residual = max(
                residual, float(np.max(np.abs(psi.derivative(t).flat - der.flat)))
            )
    else:
        end = psi_norm.value(2.0 * bd.h)
        end_d = psi_norm.derivative(2.0 * bd.h)
        residual = max(
            float(np.max(np.abs(end.flat - bd.q.flat))),
            float(np.max(np.abs(end_d.flat - bd.w.flat))),
            float(np.max(np.abs(psi_norm.value(0.0).flat))),
            float(np.max(np.abs(psi_norm.derivative(0.0).flat - bd.v.flat))),
        )

    dev = _measured_deviation(psi_norm, bd.v, config.grid)
    if dev == 0.0:
        ratio = 0.0
    elif bd.eps == 0.0:
        ratio = float("inf")
    else:
        ratio = dev / bd.eps

    if config.check_intervals > 0:
        check = is_horizontal_curve(psi, intervals=config.check_intervals)
        horiz = check.vertical_residual
    else:
        horiz = float("nan")

    return InterpolationResult(
        psi=psi,
        normalized=psi_norm,
        gap=gap,
        measured_dev=dev,
        c_ratio=ratio,
        boundary_residual=residual,
        horizontality_residual=horiz,
        junction_jump=psi_norm.base.max_velocity_jump(),
    )
