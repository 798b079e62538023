"""Graded homomorphisms from the free group onto general step-2 groups.

A homomorphism is determined by a horizontal matrix H (where the free
generators go); its vertical block T is forced by the target brackets:
the image of a vertical generator (i, j) is the target bracket of the
images of the generators i and j.  In exponential coordinates the whole
map is linear, (x, y) -> (H x, T y), and commutes with lifting: pushing
a horizontal curve forward equals lifting the pushed controls in the
target group.

``approximate_in_target`` runs the smoothing pipeline on a sampled
curve living in an arbitrary step-2 group: extract its controls, lift
them through a right inverse of H to a sampled free-group curve, smooth
there, and push the result back down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import PlanarCurve, SampledCurve, estimate_derivatives
from .frame import NonHorizontalError
from .group import (
    FreeGroupPoint,
    GeneralGroupPoint,
    Step2Structure,
    TangentVector,
    pair_antisym,
    pairs_from_matrix,
    vertical_dim,
    vertical_pairs,
)
from .interpolate import InterpolationConfig
from .lusin import (
    ApproximationReport,
    CurveFragment,
    GoodSetConfig,
    SampledFragment,
    StitchedCurve,
    approximate,
)
from .quadrature import composite_simpson_cumulative
from .curves import HorizontalCurve

__all__ = [
    "Step2Homomorphism",
    "GeneralHorizontalCurve",
    "TargetSampledCurve",
    "TargetApproximation",
    "build_homomorphism",
    "pushforward_point",
    "pushforward_tangent",
    "pushforward_curve",
    "general_horizontal_lift",
    "check_general_curve",
    "approximate_in_target",
]


@dataclass(frozen=True, eq=False)
class Step2Homomorphism:
    """Graded group homomorphism free group -> target structure.

    h_matrix has shape (target.r, source_r); t_matrix, of shape
    (target.m, source_m), is determined by h_matrix and the target
    brackets and is computed by ``build_homomorphism``.
    """

    source_r: int
    target: Step2Structure
    h_matrix: np.ndarray
    t_matrix: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h_matrix, float)
        t = np.asarray(self.t_matrix, float)
        if h.shape != (self.target.r, self.source_r):
            raise ValueError(
                f"H must have shape ({self.target.r}, {self.source_r}), got {h.shape}"
            )
        if t.shape != (self.target.m, vertical_dim(self.source_r)):
            raise ValueError(
                f"T must have shape ({self.target.m}, {vertical_dim(self.source_r)})"
            )
        object.__setattr__(self, "h_matrix", h)
        object.__setattr__(self, "t_matrix", t)

    @property
    def is_identity(self) -> bool:
        return (
            self.target.is_free()
            and self.target.r == self.source_r
            and np.array_equal(self.h_matrix, np.eye(self.source_r))
        )


def build_homomorphism(r: int, target: Step2Structure,
                       h_matrix: np.ndarray | None = None) -> Step2Homomorphism:
    """Extend the generator map given by H to the whole group.

    With H omitted the generators map to the target generators
    (requires r == target.r).  The vertical block is forced:
    column (i, j) of T expands the target bracket [H e_i, H e_j].
    """
    if h_matrix is None:
        if r != target.r:
            raise ValueError("default generator map needs source and target rank equal")
        h = np.eye(r)
    else:
        h = np.asarray(h_matrix, float)
        if h.shape != (target.r, r):
            raise ValueError(f"H must have shape ({target.r}, {r}), got {h.shape}")
    ii = np.array([i - 1 for i, _ in vertical_pairs(r)])
    jj = np.array([j - 1 for _, j in vertical_pairs(r)])
    full = np.einsum("ckl,ki,lj->cij", target.bracket, h, h)
    t = full[:, ii, jj]
    return Step2Homomorphism(r, target, h, t)


def pushforward_point(f: Step2Homomorphism, p: FreeGroupPoint) -> GeneralGroupPoint:
    if p.r != f.source_r:
        raise ValueError("rank mismatch in pushforward")
    return GeneralGroupPoint(f.target, p.x @ f.h_matrix.T, p.y @ f.t_matrix.T)


def pushforward_tangent(f: Step2Homomorphism, v: TangentVector) -> tuple[np.ndarray, np.ndarray]:
    """Pushed tangent components (da, db); the map is linear in exponential
    coordinates, so the differential is the map itself."""
    if v.r != f.source_r:
        raise ValueError("rank mismatch in pushforward")
    return v.x @ f.h_matrix.T, v.y @ f.t_matrix.T


# ---------------------------------------------------------------------------
# horizontal curves in a general target group
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeneralHorizontalCurve:
    """Horizontal curve in a general step-2 group: planar base, start point
    and exact vertical knots (same layout as the free-group curve)."""

    structure: Step2Structure
    base: PlanarCurve
    start: GeneralGroupPoint
    vertical_knots: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.vertical_knots, float)
        if knots.shape != (len(self.base.segments) + 1, self.structure.m):
            raise ValueError("vertical knots shape mismatch")
        if self.base.r != self.structure.r:
            raise ValueError("base curve dimension must match the structure rank")
        if float(np.max(np.abs(self.start.a - self.base.start))) > 1e-9:
            raise ValueError("start point must sit over the base curve start")
        object.__setattr__(self, "vertical_knots", knots)

    @property
    def t0(self) -> float:
        return self.base.t0

    @property
    def end_time(self) -> float:
        return self.base.end_time

    @property
    def end_point(self) -> GeneralGroupPoint:
        return GeneralGroupPoint(self.structure, self.base.end, self.vertical_knots[-1])

    def value(self, t) -> GeneralGroupPoint:
        t_arr = np.asarray(t, dtype=float)
        idx, local = self.base._locate(t_arr)
        a = self.base.point(t_arr)
        c_pairs = self.structure.pair_matrix()
        if t_arr.ndim == 0:
            seg = self.base.segments[int(idx)]
            sweep = pairs_from_matrix(seg.partial_area(float(local)))
            b = self.vertical_knots[int(idx)] + c_pairs @ sweep
            return GeneralGroupPoint(self.structure, a, b)
        b = np.empty(t_arr.shape + (self.structure.m,))
        for k in np.unique(idx):
            mask = idx == k
            seg = self.base.segments[int(k)]
            sweep = pairs_from_matrix(seg.partial_area(local[mask]))
            b[mask] = self.vertical_knots[int(k)] + sweep @ c_pairs.T
        return GeneralGroupPoint(self.structure, a, b)

    def derivative(self, t) -> tuple[np.ndarray, np.ndarray]:
        """(da, db) with db from the horizontality equation."""
        a = self.base.point(t)
        da = self.base.velocity(t)
        db = 0.5 * np.einsum(
            "kij,...i,...j->...k", self.structure.bracket, a, da
        )
        return da, db

    def translated(self, g: GeneralGroupPoint) -> "GeneralHorizontalCurve":
        base = self.base.transformed(np.eye(self.structure.r), g.a)
        x_knots = np.array(
            [self.base.segments[0].start_position()]
            + [s.end_position() for s in self.base.segments]
        )
        corr = 0.5 * np.einsum("kij,i,...j->...k", self.structure.bracket, g.a, x_knots)
        knots = g.b + self.vertical_knots + corr
        start = GeneralGroupPoint(self.structure, g.a + self.start.a, knots[0])
        return GeneralHorizontalCurve(self.structure, base, start, knots)


def general_horizontal_lift(structure: Step2Structure, base: PlanarCurve,
                            start: GeneralGroupPoint) -> GeneralHorizontalCurve:
    """Horizontal lift in a general step-2 group: vertical increments are
    the bracket contraction of the segments' signed-area matrices."""
    if float(np.max(np.abs(start.a - base.start))) > 1e-12:
        raise ValueError("start point does not sit over the base curve start")
    c_pairs = structure.pair_matrix()
    knots = np.empty((len(base.segments) + 1, structure.m))
    knots[0] = start.b
    for s, seg in enumerate(base.segments):
        knots[s + 1] = knots[s] + c_pairs @ pairs_from_matrix(seg.area_matrix())
    return GeneralHorizontalCurve(structure, base, start, knots)


def pushforward_curve(f: Step2Homomorphism, curve: HorizontalCurve) -> GeneralHorizontalCurve:
    """Image of a free-group horizontal curve; C1 inputs give C1 outputs.

    Coincides with the target lift of the pushed controls from the
    pushed start point (the two are computed along different routes and
    compared in the tests)."""
    base = curve.base.transformed(f.h_matrix, np.zeros(f.target.r))
    knots = curve.vertical_knots @ f.t_matrix.T
    start = pushforward_point(f, curve.start)
    return GeneralHorizontalCurve(f.target, base, start, knots)


def check_general_curve(curve: GeneralHorizontalCurve, intervals: int = 128) -> float:
    """Max residual between stored vertical values and lift integrals
    recomputed with composite Simpson (the general-group analogue of
    ``is_horizontal_curve``)."""
    worst = 0.0
    c = curve.structure.bracket
    for s, seg in enumerate(curve.base.segments):
        d = seg.duration
        if d == 0.0:
            continue
        ts = np.linspace(0.0, d, 2 * intervals + 1)
        a = seg.point(ts)
        da = seg.velocity(ts)
        integrand = 0.5 * np.einsum("kij,ti,tj->tk", c, a, da)
        recomputed = curve.vertical_knots[s] + composite_simpson_cumulative(
            integrand, d / (2 * intervals)
        )
        stored = curve.value(curve.base.knot_times[s] + ts[::2])
        worst = max(worst, float(np.max(np.abs(recomputed - stored.b))))
        worst = max(
            worst, float(np.max(np.abs(recomputed[-1] - curve.vertical_knots[s + 1])))
        )
    return worst


# ---------------------------------------------------------------------------
# the smoothing pipeline in a target group
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TargetSampledCurve:
    """Sampled horizontal curve in a general step-2 group."""

    structure: Step2Structure
    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    da: np.ndarray | None = None
    db: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, float)
        a = np.asarray(self.a, float)
        b = np.asarray(self.b, float)
        n = len(t)
        if a.shape != (n, self.structure.r) or b.shape != (n, self.structure.m):
            raise ValueError("sample arrays have inconsistent shapes")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        for name in ("da", "db"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, float)
                object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def has_derivatives(self) -> bool:
        return self.da is not None and self.db is not None

    def with_estimated_derivatives(self) -> "TargetSampledCurve":
        if self.has_derivatives:
            return self
        t, a = self.times, self.a
        da = np.empty_like(a)
        da[1:-1] = (a[2:] - a[:-2]) / (t[2:] - t[:-2])[:, None]
        da[0] = (a[1] - a[0]) / (t[1] - t[0])
        da[-1] = (a[-1] - a[-2]) / (t[-1] - t[-2])
        db = 0.5 * np.einsum("kij,ti,tj->tk", self.structure.bracket, a, da)
        return TargetSampledCurve(self.structure, t, a, self.b, da, db)


@dataclass(frozen=True, eq=False)
class TargetApproximation:
    """Smoothed target-group curve: pushed sample fragments and pushed gap
    interpolants, plus the free-group report and target-side residuals."""

    pieces: tuple
    report: ApproximationReport
    homomorphism: Step2Homomorphism
    k_agreement: float
    target_horizontality: float

    @property
    def curve_fragments(self) -> tuple[GeneralHorizontalCurve, ...]:
        return tuple(p for p in self.pieces if isinstance(p, GeneralHorizontalCurve))


def approximate_in_target(s: TargetSampledCurve, f: Step2Homomorphism,
                          cfg: GoodSetConfig,
                          interp: InterpolationConfig | None = None,
                          control_tol: float = 1e-6
                          ) -> TargetApproximation:
    """Smooth a sampled curve of the target group through the free group.

    The input is translated to start at the identity, its controls (the
    horizontal derivative components) are lifted through the minimal-norm
    right inverse of H, verticals are reproduced exactly on the pinned
    directions (so pushed kept samples match the input bitwise up to
    roundoff) and by trapezoidal lift integrals on the kernel directions.
    The free-group pipeline runs unchanged and the result is pushed back
    down and translated to the original frame.
    """
    structure = f.target
    if np.linalg.matrix_rank(f.h_matrix) < structure.r:
        raise ValueError("H must be surjective onto the target horizontal layer")
    s = s.with_estimated_derivatives()
    res = float(
        np.max(
            np.abs(
                s.db - 0.5 * np.einsum("kij,ti,tj->tk", structure.bracket, s.a, s.da)
            )
        )
    )
    if res > control_tol:
        raise NonHorizontalError(
            f"target curve is not horizontal at the samples (residual {res:.3e}); "
            "controls are not extractable"
        )
    # translate so the curve starts at the identity
    a0 = s.a[0].copy()
    b0 = s.b[0].copy()
    a_rel = s.a - a0
    corr = 0.5 * np.einsum("kij,i,tj->tk", structure.bracket, -a0, s.a)
    b_rel = s.b - b0 + corr
    da_rel = s.da
    db_rel = s.db + 0.5 * np.einsum("kij,i,tj->tk", structure.bracket, -a0, s.da)

    h_pinv = np.linalg.pinv(f.h_matrix)
    xs = a_rel @ h_pinv.T
    dxs = da_rel @ h_pinv.T
    dys = 0.5 * pair_antisym(xs, dxs)
    # free verticals: trapezoidal lift integral, then pin the directions
    # seen by T so that pushed verticals reproduce the input exactly
    dt = np.diff(s.times)
    ys_trapz = np.zeros((s.n, vertical_dim(f.source_r)))
    ys_trapz[1:] = np.cumsum(0.5 * (dys[1:] + dys[:-1]) * dt[:, None], axis=0)
    t_pinv = np.linalg.pinv(f.t_matrix)
    ys = b_rel @ t_pinv.T + ys_trapz - (ys_trapz @ f.t_matrix.T) @ t_pinv.T

    free_curve = SampledCurve(s.times, xs, ys, dxs, dys)
    gamma, report = approximate(free_curve, cfg, interp)

    start_shift = GeneralGroupPoint(structure, a0, b0)
    pieces = []
    k_agreement = 0.0
    target_horiz = 0.0
    for piece in gamma.pieces:
        if isinstance(piece, SampledFragment):
            pa = piece.xs @ f.h_matrix.T
            pb = piece.ys @ f.t_matrix.T
            pda = piece.dxs @ f.h_matrix.T
            pdb = piece.dys @ f.t_matrix.T
            # translate back to the original frame
            back = 0.5 * np.einsum("kij,i,tj->tk", structure.bracket, a0, pa)
            frag = TargetSampledCurve(
                structure,
                piece.times,
                a0 + pa,
                b0 + pb + back,
                pda,
                pdb + 0.5 * np.einsum("kij,i,tj->tk", structure.bracket, a0, pda),
            )
            pieces.append(frag)
            i0 = int(np.searchsorted(s.times, piece.times[0]))
            sl = slice(i0, i0 + len(piece.times))
            k_agreement = max(
                k_agreement,
                float(np.max(np.abs(frag.a - s.a[sl]))),
                float(np.max(np.abs(frag.b - s.b[sl]))),
                float(np.max(np.abs(frag.da - s.da[sl]))),
                float(np.max(np.abs(frag.db - s.db[sl]))),
            )
        else:
            pushed = pushforward_curve(f, piece.curve).translated(start_shift)
            target_horiz = max(target_horiz, check_general_curve(pushed))
            pieces.append(pushed)
    return TargetApproximation(
        pieces=tuple(pieces),
        report=report,
        homomorphism=f,
        k_agreement=k_agreement,
        target_horizontality=target_horiz,
    )
