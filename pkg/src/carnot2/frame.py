"""Frame normalization for gap interpolation.

Given a curve with a marked interval [a, b], the gap is brought into a
normal form: translate gamma(a) to the identity and rotate so that the
start velocity points along the first coordinate axis with speed L >= 0.
The rotation acts on vertical coordinates through its second exterior
power, which is the unique extension to a group automorphism fixing the
grading.

The result is summarized as ``BoundaryData``: the half gap length h, the
normalized endpoint q, the start and end velocities v = (L, 0, ..., 0)
and w, and the smallest slack eps for which the normalized quantities
obey the gap bounds

    |w_i - v_i| <= eps,
    |q_1 - 2 L h| <= 2 eps h,     |q_i| <= 2 eps h          (i > 1),
    |q_i1| <= 4 eps (eps + L) h^2,  |q_ij| <= 4 eps^2 h^2   (i > j > 1).

A straight gap collapses every bound, so it reports eps = 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .curves import HorizontalCurve, SampledCurve
from .group import (
    FreeGroupPoint,
    TangentVector,
    dL,
    horizontality_residual,
    inverse,
    pair_antisym,
    pair_index,
    product,
    vertical_dim,
    vertical_pairs,
)

__all__ = [
    "FrameAutomorphism",
    "BoundaryData",
    "NormalizedGap",
    "NonHorizontalError",
    "endpoint_data",
    "rotation_to_e1",
    "second_layer_action",
    "apply_automorphism",
    "apply_automorphism_tangent",
    "boundary_eps",
    "make_boundary_data",
    "normalize_endpoints",
    "normalize_gap",
    "denormalize_curve",
]


class NonHorizontalError(ValueError):
    """An input derivative fails the horizontality equation beyond tolerance."""


def rotation_to_e1(v: np.ndarray) -> tuple[np.ndarray, float]:
    """Orthogonal A with A v = (L, 0, ..., 0), L = |v|.

    Uses the numerically stable Householder reflection onto the first
    axis, composed with a first-axis flip when needed so the image is
    +L e_1.  Returns the identity for v = 0 and for v already along
    +e_1.  Deterministic; orientation is not normalized.
    """
    v = np.asarray(v, dtype=float)
    r = v.shape[0]
    length = float(np.linalg.norm(v))
    if length == 0.0:
        return np.eye(r), 0.0
    unit = v / length
    sign = 1.0 if unit[0] >= 0.0 else -1.0
    w = unit.copy()
    w[0] += sign  # stable: |w| is bounded away from 0
    h = np.eye(r) - 2.0 * np.outer(w, w) / float(w @ w)
    # h maps unit -> -sign * e_1; flip the first row when that is -e_1
    if sign > 0.0:
        h[0] = -h[0]
    return h, length


def second_layer_action(a_matrix: np.ndarray, warn_tol: float = 1e-10) -> np.ndarray:
    """Second exterior power of A on the ordered vertical pairs:

        B[(i,j), (k,l)] = A[i,k] A[j,l] - A[i,l] A[j,k].

    This is the vertical block of the unique graded automorphism whose
    horizontal block is A.  A non-orthogonal A still produces a valid
    homomorphism block but breaks the isometric normal form, so it only
    warns.
    """
    a = np.asarray(a_matrix, dtype=float)
    r = a.shape[0]
    if a.shape != (r, r):
        raise ValueError("A must be square")
    if float(np.max(np.abs(a.T @ a - np.eye(r)))) > warn_tol:
        warnings.warn("second_layer_action: A is not orthogonal within tolerance")
    ii = np.array([i - 1 for i, _ in vertical_pairs(r)])
    jj = np.array([j - 1 for _, j in vertical_pairs(r)])
    return a[np.ix_(ii, ii)] * a[np.ix_(jj, jj)] - a[np.ix_(ii, jj)] * a[np.ix_(jj, ii)]


@dataclass(frozen=True, eq=False)
class FrameAutomorphism:
    """Graded automorphism (x, y) -> (A x, B y) with B the pair action of A."""

    a_matrix: np.ndarray
    b_matrix: np.ndarray
    speed: float  # |gamma'(a)| at the anchor; 0 allowed

    def __post_init__(self):
        a = np.asarray(self.a_matrix, float)
        b = np.asarray(self.b_matrix, float)
        r = a.shape[0]
        if a.shape != (r, r) or b.shape != (vertical_dim(r), vertical_dim(r)):
            raise ValueError("frame matrices have inconsistent shapes")
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "b_matrix", b)

    @property
    def r(self) -> int:
        return self.a_matrix.shape[0]

    @classmethod
    def from_velocity(cls, v: np.ndarray) -> "FrameAutomorphism":
        a, speed = rotation_to_e1(v)
        return cls(a, second_layer_action(a), speed)

    def inverse(self) -> "FrameAutomorphism":
        a_inv = self.a_matrix.T
        return FrameAutomorphism(a_inv, second_layer_action(a_inv), self.speed)


def apply_automorphism(f: FrameAutomorphism, p: FreeGroupPoint) -> FreeGroupPoint:
    if p.r != f.r:
        raise ValueError("rank mismatch in automorphism application")
    return FreeGroupPoint(p.x @ f.a_matrix.T, p.y @ f.b_matrix.T)


def apply_automorphism_tangent(f: FrameAutomorphism, v: TangentVector) -> TangentVector:
    if v.r != f.r:
        raise ValueError("rank mismatch in automorphism application")
    return TangentVector(v.x @ f.a_matrix.T, v.y @ f.b_matrix.T)


def boundary_eps(h: float, q: FreeGroupPoint, v: TangentVector, w: TangentVector,
                 speed: float) -> float:
    """Smallest eps >= 0 satisfying the normalized gap bounds for (q, v, w)."""
    r = q.r
    eps = float(np.max(np.abs(w.x - v.x)))
    eps = max(eps, abs(float(q.x[0]) - 2.0 * speed * h) / (2.0 * h))
    if r > 1:
        eps = max(eps, float(np.max(np.abs(q.x[1:]))) / (2.0 * h))
    for i, j in vertical_pairs(r):
        mag = abs(float(q.y[pair_index(i, j)]))
        if j == 1:
            # solve 4 e (e + L) h^2 = |q_i1| for the positive root
            eps = max(eps, 0.5 * (-speed + np.sqrt(speed**2 + mag / h**2)))
        else:
            eps = max(eps, np.sqrt(mag) / (2.0 * h))
    return eps


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Normalized data of one gap: (h, q, v, w, L, eps).

    v = (L, 0, ..., 0) is the start velocity, w the end velocity
    (horizontal at q exactly, enforced at construction), and eps the
    smallest slack making the gap bounds hold.  Build through
    ``make_boundary_data``.
    """

    h: float
    q: FreeGroupPoint
    v: TangentVector
    w: TangentVector
    speed: float
    eps: float

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("gap half-length h must be positive")
        if self.speed < 0.0:
            raise ValueError("anchor speed must be nonnegative")

    @property
    def r(self) -> int:
        return self.q.r

    def bound_residual(self) -> float:
        """How far the stored eps is below the minimal feasible value
        (0 when the invariants hold)."""
        return max(0.0, boundary_eps(self.h, self.q, self.v, self.w, self.speed) - self.eps)


def make_boundary_data(h: float, q: FreeGroupPoint, w: TangentVector, speed: float,
                       eps: float | None = None,
                       horizontal_tol: float = 1e-8) -> BoundaryData:
    """Assemble and validate boundary data in the normalized frame.

    w is projected onto exact horizontality at q (its vertical part is
    recomputed from the horizontality equation); the projection distance
    must stay below ``horizontal_tol``.  When ``eps`` is omitted the
    minimal feasible slack is used; a supplied eps below that value is
    enlarged with a warning instead of rejected.
    """
    r = q.r
    res = horizontality_residual(w, q)
    if res > horizontal_tol:
        raise NonHorizontalError(
            f"end velocity fails horizontality at q by {res:.3e} (tol {horizontal_tol:.1e})"
        )
    w = TangentVector(w.x, 0.5 * pair_antisym(q.x, w.x))
    vx = np.zeros(r)
    vx[0] = speed
    v = TangentVector(vx, np.zeros(vertical_dim(r)))
    minimal = boundary_eps(h, q, v, w, speed)
    if eps is None:
        eps = minimal
    elif eps < minimal:
        warnings.warn(
            f"supplied eps {eps:.3e} violates the gap bounds; enlarged to {minimal:.3e}"
        )
        eps = minimal
    return BoundaryData(h=h, q=q, v=v, w=w, speed=speed, eps=float(eps))


@dataclass(frozen=True, eq=False)
class NormalizedGap:
    """Frame automorphism, anchor point and boundary data of one gap."""

    frame: FrameAutomorphism
    anchor: FreeGroupPoint
    data: BoundaryData
    a: float
    b: float


def endpoint_data(gamma, t: float) -> tuple[FreeGroupPoint, TangentVector]:
    """Value and derivative of a horizontal or sampled curve at time t
    (for sampled curves, t must be a sample time)."""
    if isinstance(gamma, HorizontalCurve):
        return gamma.value(t), gamma.derivative(t)
    if isinstance(gamma, SampledCurve):
        i = gamma.index_of(t)
        return gamma.point(i), gamma.tangent(i)
    raise TypeError(f"cannot read gap endpoints from {type(gamma).__name__}")


def normalize_endpoints(pa: FreeGroupPoint, va: TangentVector,
                        pb: FreeGroupPoint, vb: TangentVector,
                        a: float, b: float,
                        horizontal_tol: float = 1e-8) -> NormalizedGap:
    """Normalize explicit gap endpoint data.

    Checks that va, vb are horizontal at their points, translates pa to
    the identity, rotates va onto the first axis, and packages the
    transformed endpoint quantities.
    """
    if not a < b:
        raise ValueError("need a < b")
    res_a = horizontality_residual(va, pa)
    if res_a > horizontal_tol:
        raise NonHorizontalError(f"start velocity residual {res_a:.3e} exceeds tolerance")
    frame = FrameAutomorphism.from_velocity(va.x)
    pa_inv = inverse(pa)
    q = apply_automorphism(frame, product(pa_inv, pb))
    w = apply_automorphism_tangent(frame, dL(pa_inv, pb, vb))
    h = 0.5 * (b - a)
    data = make_boundary_data(h, q, w, frame.speed, horizontal_tol=horizontal_tol)
    return NormalizedGap(frame=frame, anchor=pa, data=data, a=a, b=b)


def normalize_gap(gamma, a: float, b: float,
                  horizontal_tol: float = 1e-8) -> NormalizedGap:
    """Normalize the gap [a, b] of a horizontal or sampled curve."""
    pa, va = endpoint_data(gamma, a)
    pb, vb = endpoint_data(gamma, b)
    return normalize_endpoints(pa, va, pb, vb, a, b, horizontal_tol)


def denormalize_curve(curve: HorizontalCurve, gap: NormalizedGap) -> HorizontalCurve:
    """Map a normalized-frame curve on [0, b-a] back onto [a, b]:
    apply the inverse frame, left-translate by the anchor, shift time."""
    inv = gap.frame.inverse()
    out = curve.transformed(inv.a_matrix, inv.b_matrix).translated(gap.anchor)
    return out.shifted_to(gap.a)
