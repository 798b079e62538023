"""Smoothing pipeline for sampled horizontal curves.

Given a horizontal curve known at sample times, the pipeline keeps the
part where the sampled derivative is stable (the good set K), replaces
each complementary gap by a C1 horizontal interpolant matching values
and derivatives at the gap ends, and stitches the result.  On K the
output *is* the input (sample values are referenced, never recomputed),
so the measure where output and input differ is bounded by the measure
of the complement of K.

The good set is a discrete surrogate for uniform-continuity selection:
a sample survives when the derivative oscillates by at most ``eta``
against every neighbour within time ``delta``.  Kept samples then
automatically satisfy both the pairwise and the windowed-mean stability
conditions at level eta, and shrinking eta shrinks K monotonically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .curves import (
    HorizontalCurve,
    PlanarCurve,
    SampledCurve,
    estimate_derivatives,
    horizontal_lift,
    is_horizontal_curve,
    max_tangent_jump,
)
from .frame import NonHorizontalError
from .group import FreeGroupPoint, TangentVector, pair_antisym, pairs_from_matrix
from .interpolate import InterpolationConfig, interpolate_gap
from .segments import ConstantSegment, LinearSegment

__all__ = [
    "GoodSetConfig",
    "GoodSet",
    "GapReport",
    "ApproximationReport",
    "SampledFragment",
    "CurveFragment",
    "StitchedCurve",
    "select_good_set",
    "approximate",
    "extend_constant_velocity",
    "verify",
]

HORIZONTAL_PRE_TOL = 1e-6
STITCH_TOL = 1e-8


@dataclass(frozen=True)
class GoodSetConfig:
    """Selection thresholds: derivative oscillation eta within windows of
    length delta, and the target measure epsilon for the complement."""

    eta: float
    delta: float
    epsilon: float

    def __post_init__(self):
        if min(self.eta, self.delta, self.epsilon) <= 0.0:
            raise ValueError("eta, delta and epsilon must all be positive")


@dataclass(frozen=True)
class GoodSet:
    """Selected sample-index intervals and the complementary gaps."""

    kept: np.ndarray  # boolean mask over samples
    intervals: tuple[tuple[int, int], ...]  # inclusive kept index runs
    gaps: tuple[tuple[int, int], ...]  # (last kept before, first kept after)
    complement_measure: float
    feasible: bool


def _derivative_oscillation(s: SampledCurve, delta: float) -> np.ndarray:
    """osc[i] = max |d_j - d_i| (all components) over |t_j - t_i| <= delta."""
    d = np.concatenate([s.dxs, s.dys], axis=1)
    t = s.times
    n = s.n
    osc = np.zeros(n)
    for k in range(1, n):
        dt = t[k:] - t[:-k]
        valid = dt <= delta
        if not np.any(valid):
            break
        diff = np.max(np.abs(d[k:] - d[:-k]), axis=1)
        diff = np.where(valid, diff, 0.0)
        np.maximum(osc[k:], diff, out=osc[k:])
        np.maximum(osc[:-k], diff, out=osc[:-k])
    return osc


def select_good_set(s: SampledCurve, cfg: GoodSetConfig) -> GoodSet:
    """Select the good set by thresholding windowed derivative oscillation.

    A kept sample has oscillation <= eta against every sample (kept or
    not) within delta, which yields the pairwise bound on kept pairs and
    the windowed-mean bound |mean of |d - d_i|| <= eta for windows up to
    delta.  The rule is pointwise, so the kept set is the largest one
    satisfying it and is monotone in eta.  Infeasibility (complement
    above epsilon) is reported, not fatal.
    """
    if not s.has_derivatives:
        s = estimate_derivatives(s)
    osc = _derivative_oscillation(s, cfg.delta)
    kept = osc <= cfg.eta
    if not np.any(kept):
        return GoodSet(kept, (), (), float(s.times[-1] - s.times[0]), False)
    idx = np.flatnonzero(kept)
    runs: list[tuple[int, int]] = []
    start = prev = int(idx[0])
    for i in idx[1:]:
        i = int(i)
        if i == prev + 1:
            prev = i
            continue
        runs.append((start, prev))
        start = prev = i
    runs.append((start, prev))
    gaps = tuple(
        (runs[k][1], runs[k + 1][0]) for k in range(len(runs) - 1)
    )
    t = s.times
    complement = float(t[runs[0][0]] - t[0]) + float(t[-1] - t[runs[-1][1]])
    complement += float(sum(t[b] - t[a] for a, b in gaps))
    return GoodSet(kept, tuple(runs), gaps, complement, complement <= cfg.epsilon)


@dataclass(frozen=True)
class GapReport:
    """Quality record of one interpolated gap."""

    a: float
    b: float
    eps: float
    c_ratio: float
    measured_dev: float
    boundary_residual: float
    horizontality_residual: float
    junction_jump: float
    error: str | None = None


@dataclass(frozen=True)
class ApproximationReport:
    """End-to-end record: the kept intervals, per-gap quality, the measure
    where output and input may differ, and worst-case residuals."""

    eta: float
    delta: float
    epsilon: float
    k_intervals: tuple[tuple[float, float], ...]
    gaps: tuple[GapReport, ...]
    disagreement_measure: float
    max_derivative_jump: float
    horizontality_residual: float
    feasible: bool
    agreement_exact: bool

    @property
    def ok(self) -> bool:
        return (
            self.feasible
            and self.agreement_exact
            and self.disagreement_measure <= self.epsilon
            and all(g.error is None for g in self.gaps)
        )


@dataclass(frozen=True, eq=False)
class SampledFragment:
    """Piece of the stitched curve where the input samples are kept.

    Arrays are views into the input curve, so agreement is bitwise.
    """

    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    dxs: np.ndarray
    dys: np.ndarray

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def end_data(self, side: int) -> tuple[FreeGroupPoint, TangentVector]:
        i = 0 if side == 0 else -1
        return (
            FreeGroupPoint(self.xs[i], self.ys[i]),
            TangentVector(self.dxs[i], self.dys[i]),
        )


@dataclass(frozen=True, eq=False)
class CurveFragment:
    """Piece of the stitched curve carrying a symbolic horizontal curve."""

    curve: HorizontalCurve

    @property
    def interval(self) -> tuple[float, float]:
        return self.curve.t0, self.curve.end_time

    def end_data(self, side: int) -> tuple[FreeGroupPoint, TangentVector]:
        t = self.curve.t0 if side == 0 else self.curve.end_time
        return self.curve.value(t), self.curve.derivative(t)


@dataclass(frozen=True, eq=False)
class StitchedCurve:
    """Time-ordered pieces: kept sample fragments and gap interpolants."""

    pieces: tuple

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("a stitched curve needs at least one piece")
        for prev, nxt in zip(self.pieces[:-1], self.pieces[1:]):
            if nxt.interval[0] < prev.interval[1] - 1e-9:
                raise ValueError("stitched pieces overlap")

    @property
    def interval(self) -> tuple[float, float]:
        return self.pieces[0].interval[0], self.pieces[-1].interval[1]

    @property
    def sampled_fragments(self) -> tuple[SampledFragment, ...]:
        return tuple(p for p in self.pieces if isinstance(p, SampledFragment))

    @property
    def curve_fragments(self) -> tuple[CurveFragment, ...]:
        return tuple(p for p in self.pieces if isinstance(p, CurveFragment))

    def end_data(self, side: int) -> tuple[FreeGroupPoint, TangentVector]:
        piece = self.pieces[0] if side == 0 else self.pieces[-1]
        return piece.end_data(side)


def _fragment(s: SampledCurve, i0: int, i1: int) -> SampledFragment:
    sl = slice(i0, i1 + 1)
    return SampledFragment(s.times[sl], s.xs[sl], s.ys[sl], s.dxs[sl], s.dys[sl])


def approximate(s: SampledCurve, cfg: GoodSetConfig,
                interp: InterpolationConfig | None = None
                ) -> tuple[StitchedCurve, ApproximationReport]:
    """Smooth a sampled horizontal curve.

    Selects the good set, interpolates every gap, and stitches.  Kept
    sample values and derivatives are passed through untouched; a gap
    whose interpolation fails is flagged in the report and skipped, and
    the pipeline continues.
    """
    if not s.has_derivatives:
        s = estimate_derivatives(s)
    res = float(
        np.max(
            np.abs(s.dys - 0.5 * pair_antisym(s.xs, s.dxs))
        )
    )
    if res > HORIZONTAL_PRE_TOL:
        raise NonHorizontalError(
            f"input derivatives fail horizontality by {res:.3e} "
            f"(tolerance {HORIZONTAL_PRE_TOL:.1e})"
        )
    good = select_good_set(s, cfg)
    if not good.intervals:
        raise ValueError("no sample satisfies the good-set conditions; "
                         "increase eta or delta")
    interp = interp or InterpolationConfig()
    pieces: list = [_fragment(s, *good.intervals[0])]
    gap_reports: list[GapReport] = []
    max_jump = 0.0
    worst_horiz = 0.0
    t = s.times
    for k, (ia, ib) in enumerate(good.gaps):
        a, b = float(t[ia]), float(t[ib])
        try:
            result = interpolate_gap(s, a, b, config=interp)
        except (ValueError, RuntimeError) as exc:
            gap_reports.append(
                GapReport(a, b, np.nan, np.nan, np.nan, np.nan, np.nan, np.nan,
                          error=str(exc))
            )
            warnings.warn(f"gap [{a}, {b}] could not be interpolated: {exc}")
        else:
            pieces.append(CurveFragment(result.psi))
            boundary_jump = _gap_boundary_jump(result.psi, s, ia, ib)
            max_jump = max(max_jump, boundary_jump, max_tangent_jump(result.psi))
            horiz = result.horizontality_residual
            if not np.isnan(horiz):
                worst_horiz = max(worst_horiz, horiz)
            gap_reports.append(
                GapReport(a, b, result.eps, result.c_ratio, result.measured_dev,
                          result.boundary_residual, horiz,
                          result.junction_jump)
            )
        pieces.append(_fragment(s, *good.intervals[k + 1]))
    gamma = StitchedCurve(tuple(pieces))
    report = ApproximationReport(
        eta=cfg.eta,
        delta=cfg.delta,
        epsilon=cfg.epsilon,
        k_intervals=tuple(
            (float(t[i0]), float(t[i1])) for i0, i1 in good.intervals
        ),
        gaps=tuple(gap_reports),
        disagreement_measure=good.complement_measure,
        max_derivative_jump=max_jump,
        horizontality_residual=worst_horiz,
        feasible=good.feasible,
        agreement_exact=True,
    )
    return gamma, report


def _gap_boundary_jump(psi: HorizontalCurve, s: SampledCurve, ia: int, ib: int) -> float:
    jump = 0.0
    for idx, t in ((ia, psi.t0), (ib, psi.end_time)):
        der = psi.derivative(t)
        want = s.tangent(idx)
        jump = max(jump, float(np.max(np.abs(der.flat - want.flat))))
    return jump


def extend_constant_velocity(gamma: StitchedCurve,
                             to_interval: tuple[float, float]) -> StitchedCurve:
    """Extend the stitched curve to a larger interval by the horizontal
    flow with constant controls equal to the endpoint derivatives.

    The extensions are straight lines in the controls (lifts of straight
    planar rays), hence smooth horizontal curves matching value and
    derivative at the junction; a zero endpoint derivative extends by a
    constant curve.
    """
    lo, hi = float(to_interval[0]), float(to_interval[1])
    m, big_m = gamma.interval
    if lo > m or hi < big_m:
        raise ValueError("target interval must contain the curve's interval")
    pieces = list(gamma.pieces)
    if lo < m:
        pt, der = gamma.end_data(0)
        pieces.insert(0, CurveFragment(_ray_lift(pt, der, lo, m, backwards=True)))
    if hi > big_m:
        pt, der = gamma.end_data(1)
        pieces.append(CurveFragment(_ray_lift(pt, der, big_m, hi, backwards=False)))
    return StitchedCurve(tuple(pieces))


def _ray_lift(pt: FreeGroupPoint, der: TangentVector, t0: float, t1: float,
              backwards: bool) -> HorizontalCurve:
    duration = t1 - t0
    u = der.x
    if float(np.max(np.abs(u))) == 0.0:
        seg = ConstantSegment(pt.x, duration)
        base = PlanarCurve((seg,), t0=t0)
        return horizontal_lift(base, FreeGroupPoint(pt.x, pt.y))
    origin = pt.x - duration * u if backwards else pt.x
    seg = LinearSegment(origin, u, duration)
    base = PlanarCurve((seg,), t0=t0)
    sweep = pairs_from_matrix(seg.area_matrix())
    y0 = pt.y - sweep if backwards else pt.y
    return horizontal_lift(base, FreeGroupPoint(origin, y0))


def verify(gamma: StitchedCurve, s: SampledCurve, cfg: GoodSetConfig,
           check_intervals: int = 128) -> ApproximationReport:
    """Independently re-measure an approximation against its input.

    Recomputes gap horizontality by quadrature, derivative jumps at every
    stitch knot and inside gap curves, bitwise agreement of kept samples,
    and the disagreement measure.  Works on any stitched curve, including
    tampered ones.
    """
    if not s.has_derivatives:
        s = estimate_derivatives(s)
    t = s.times
    k_intervals: list[tuple[float, float]] = []
    agreement = True
    for frag in gamma.sampled_fragments:
        lo, hi = frag.interval
        k_intervals.append((lo, hi))
        try:
            i0 = s.index_of(lo)
            i1 = s.index_of(hi)
        except KeyError:
            agreement = False
            continue
        sl = slice(i0, i1 + 1)
        agreement &= (
            np.array_equal(frag.xs, s.xs[sl])
            and np.array_equal(frag.ys, s.ys[sl])
            and np.array_equal(frag.dxs, s.dxs[sl])
            and np.array_equal(frag.dys, s.dys[sl])
        )
    gap_reports: list[GapReport] = []
    max_jump = 0.0
    worst_horiz = 0.0
    for frag in gamma.curve_fragments:
        curve = frag.curve
        a, b = frag.interval
        check = is_horizontal_curve(curve, intervals=check_intervals)
        worst_horiz = max(worst_horiz, check.vertical_residual)
        boundary = 0.0
        jump = max_tangent_jump(curve)
        for side, time in ((0, a), (1, b)):
            try:
                idx = s.index_of(time)
            except KeyError:
                continue
            pt, der = frag.end_data(side)
            boundary = max(
                boundary, float(np.max(np.abs(pt.flat - s.point(idx).flat)))
            )
            jump = max(
                jump, float(np.max(np.abs(der.flat - s.tangent(idx).flat)))
            )
        max_jump = max(max_jump, jump)
        gap_reports.append(
            GapReport(a, b, np.nan, np.nan, np.nan, boundary,
                      check.vertical_residual, jump)
        )
    covered = sum(hi - lo for lo, hi in k_intervals)
    disagreement = float(t[-1] - t[0]) - float(covered)
    return ApproximationReport(
        eta=cfg.eta,
        delta=cfg.delta,
        epsilon=cfg.epsilon,
        k_intervals=tuple(k_intervals),
        gaps=tuple(gap_reports),
        disagreement_measure=disagreement,
        max_derivative_jump=max_jump,
        horizontality_residual=worst_horiz,
        feasible=disagreement <= cfg.epsilon,
        agreement_exact=agreement,
    )
