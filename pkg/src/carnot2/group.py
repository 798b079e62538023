"""Exact arithmetic in free and general step-2 Carnot groups.

A free step-2 group of rank r is modelled on R^n with n = r + r*(r-1)/2,
in exponential coordinates.  A point carries r horizontal coordinates
x_1, ..., x_r and one vertical coordinate x_ij for every index pair
i > j >= 1.  Vertical coordinates are stored in the fixed lexicographic
pair order (2,1), (3,1), (3,2), (4,1), ...; see ``vertical_pairs``.

The group product is

    (p * q)_k  = p_k + q_k
    (p * q)_ij = p_ij + q_ij + (p_i q_j - q_i p_j) / 2

which is the Baker-Campbell-Hausdorff formula truncated after the
bracket term (exact for step 2).  All operations here are pure functions
on immutable values and accept leading batch dimensions on the
coordinate arrays.

General step-2 groups are described by an antisymmetric structure
tensor c[k][i][j] encoding [Y_i, Y_j] = sum_k c[k][i][j] Z_k; the free
structure is the special case where the (i, j) bracket hits exactly the
(i, j) vertical generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

__all__ = [
    "FreeGroupPoint",
    "TangentVector",
    "Step2Structure",
    "GeneralGroupPoint",
    "HorizontalityCheck",
    "vertical_pairs",
    "vertical_dim",
    "pair_index",
    "pair_antisym",
    "pairs_from_matrix",
    "product",
    "inverse",
    "left_translate",
    "dL",
    "horizontal_field",
    "horizontality_residual",
    "is_horizontal",
    "general_product",
    "general_inverse",
    "general_identity",
    "general_horizontality_residual",
]


def vertical_dim(r: int) -> int:
    """Number of vertical coordinates, r*(r-1)/2."""
    return r * (r - 1) // 2


@lru_cache(maxsize=None)
def vertical_pairs(r: int) -> tuple[tuple[int, int], ...]:
    """Ordered index pairs (i, j), i > j, 1-based: (2,1), (3,1), (3,2), ..."""
    return tuple((i, j) for i in range(2, r + 1) for j in range(1, i))


def pair_index(i: int, j: int) -> int:
    """Position of the vertical coordinate (i, j), i > j >= 1, in the pair order."""
    if not (i > j >= 1):
        raise ValueError(f"need i > j >= 1, got ({i}, {j})")
    return (i - 1) * (i - 2) // 2 + (j - 1)


@lru_cache(maxsize=None)
def _pair_arrays(r: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based index arrays (I, J) with I[p] = i-1, J[p] = j-1 for pair p."""
    pairs = vertical_pairs(r)
    ii = np.array([i - 1 for i, _ in pairs], dtype=np.intp)
    jj = np.array([j - 1 for _, j in pairs], dtype=np.intp)
    return ii, jj


def pair_antisym(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Componentwise wedge u_i v_j - u_j v_i over the ordered pairs i > j.

    Accepts arrays of shape (..., r); returns shape (..., r*(r-1)/2).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ii, jj = _pair_arrays(u.shape[-1])
    return u[..., ii] * v[..., jj] - u[..., jj] * v[..., ii]


def pairs_from_matrix(s: np.ndarray) -> np.ndarray:
    """Extract the ordered pair entries s[..., i-1, j-1], i > j, from an
    antisymmetric matrix of shape (..., r, r)."""
    s = np.asarray(s, dtype=float)
    ii, jj = _pair_arrays(s.shape[-1])
    return s[..., ii, jj]


def _check_coords(x: np.ndarray, y: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = x.shape[-1]
    if r < 2:
        raise ValueError(f"{what}: rank must be >= 2, got {r}")
    if y.shape[-1] != vertical_dim(r):
        raise ValueError(
            f"{what}: expected {vertical_dim(r)} vertical coordinates for rank {r}, "
            f"got {y.shape[-1]}"
        )
    if x.shape[:-1] != y.shape[:-1]:
        raise ValueError(f"{what}: batch shapes differ, {x.shape} vs {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError(f"{what}: coordinates must be finite")
    return x, y


@dataclass(frozen=True, eq=False)
class FreeGroupPoint:
    """Point of the free step-2 group in exponential coordinates.

    x holds the r horizontal coordinates, y the r*(r-1)/2 vertical ones
    in the order of ``vertical_pairs``.  Leading batch dimensions are
    allowed and shared between x and y.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x, y = _check_coords(self.x, self.y, "FreeGroupPoint")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def r(self) -> int:
        return self.x.shape[-1]

    @property
    def flat(self) -> np.ndarray:
        """All coordinates concatenated, horizontal first."""
        return np.concatenate([self.x, self.y], axis=-1)

    @classmethod
    def identity(cls, r: int) -> "FreeGroupPoint":
        return cls(np.zeros(r), np.zeros(vertical_dim(r)))


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Tangent vector in coordinates, same shape conventions as FreeGroupPoint."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x, y = _check_coords(self.x, self.y, "TangentVector")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def r(self) -> int:
        return self.x.shape[-1]

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.y], axis=-1)

    @classmethod
    def zero(cls, r: int) -> "TangentVector":
        return cls(np.zeros(r), np.zeros(vertical_dim(r)))


def _same_rank(p: FreeGroupPoint | TangentVector, q: FreeGroupPoint | TangentVector):
    if p.r != q.r:
        raise ValueError(f"rank mismatch: {p.r} vs {q.r}")


def product(p: FreeGroupPoint, q: FreeGroupPoint) -> FreeGroupPoint:
    """Group product p * q."""
    _same_rank(p, q)
    return FreeGroupPoint(p.x + q.x, p.y + q.y + 0.5 * pair_antisym(p.x, q.x))


def inverse(p: FreeGroupPoint) -> FreeGroupPoint:
    """Group inverse; coordinatewise negation in exponential coordinates."""
    return FreeGroupPoint(-p.x, -p.y)


def left_translate(g: FreeGroupPoint, p: FreeGroupPoint) -> FreeGroupPoint:
    """Left translation L_g(p) = g * p."""
    return product(g, p)


def dL(g: FreeGroupPoint, p: FreeGroupPoint, v: TangentVector) -> TangentVector:
    """Differential of the left translation L_g at p applied to v.

    Horizontal components pass through; vertical components pick up the
    wedge with g: w_ij = v_ij + (g_i v_j - g_j v_i) / 2.  (In these
    coordinates the differential does not depend on the base point p,
    which is kept in the signature for clarity.)
    """
    _same_rank(g, v)
    _same_rank(p, v)
    return TangentVector(v.x, v.y + 0.5 * pair_antisym(g.x, v.x))


def horizontal_field(k: int, p: FreeGroupPoint) -> TangentVector:
    """Value of the k-th left-invariant horizontal frame field at p, 1 <= k <= r.

    The field is e_k plus vertical corrections x_j/2 on the pair (j, k)
    for j > k and -x_j/2 on the pair (k, j) for j < k.
    """
    r = p.r
    if not (1 <= k <= r):
        raise ValueError(f"field index k must satisfy 1 <= k <= {r}, got {k}")
    batch = p.x.shape[:-1]
    vx = np.zeros(batch + (r,))
    vx[..., k - 1] = 1.0
    vy = np.zeros(batch + (vertical_dim(r),))
    for j in range(k + 1, r + 1):
        vy[..., pair_index(j, k)] = 0.5 * p.x[..., j - 1]
    for j in range(1, k):
        vy[..., pair_index(k, j)] = -0.5 * p.x[..., j - 1]
    return TangentVector(vx, vy)


def horizontality_residual(v: TangentVector, p: FreeGroupPoint) -> float | np.ndarray:
    """Max deviation of v from the horizontality equation at p,

        residual = max_{i>j} | v_ij - (p_i v_j - p_j v_i) / 2 |.
    """
    _same_rank(v, p)
    res = np.max(np.abs(v.y - 0.5 * pair_antisym(p.x, v.x)), axis=-1)
    return float(res) if res.ndim == 0 else res


class HorizontalityCheck(NamedTuple):
    ok: bool | np.ndarray
    residual: float | np.ndarray


def is_horizontal(v: TangentVector, p: FreeGroupPoint, tol: float = 1e-10) -> HorizontalityCheck:
    """Whether v is horizontal at p within tol, together with the residual."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    res = horizontality_residual(v, p)
    return HorizontalityCheck(res <= tol, res)


# ---------------------------------------------------------------------------
# general step-2 groups given by structure constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Step2Structure:
    """Bracket tensor of a step-2 group: c[k][i][j] with [Y_i, Y_j] = sum_k c[k][i][j] Z_k.

    Stored 0-based with shape (m, r, r); antisymmetry in (i, j) is exact.
    """

    bracket: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.bracket, dtype=float)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError(f"bracket tensor must have shape (m, r, r), got {c.shape}")
        if not np.array_equal(c, -np.swapaxes(c, 1, 2)):
            raise ValueError("bracket tensor must be exactly antisymmetric in (i, j)")
        if not np.all(np.isfinite(c)):
            raise ValueError("bracket tensor must be finite")
        object.__setattr__(self, "bracket", c)

    @property
    def r(self) -> int:
        return self.bracket.shape[1]

    @property
    def m(self) -> int:
        return self.bracket.shape[0]

    @classmethod
    def free(cls, r: int) -> "Step2Structure":
        """The free structure: [Y_i, Y_j] = Z_(i,j) for i > j."""
        m = vertical_dim(r)
        c = np.zeros((m, r, r))
        for idx, (i, j) in enumerate(vertical_pairs(r)):
            c[idx, i - 1, j - 1] = 1.0
            c[idx, j - 1, i - 1] = -1.0
        return cls(c)

    @classmethod
    def from_brackets(cls, r: int, m: int, entries) -> "Step2Structure":
        """Build from sparse entries (i, j, k, value), all 1-based, meaning
        [Y_i, Y_j] gets coefficient value on Z_k.  The (j, i) entry is implied."""
        c = np.zeros((m, r, r))
        for i, j, k, val in entries:
            if not (1 <= i <= r and 1 <= j <= r and 1 <= k <= m):
                raise ValueError(f"bracket entry out of range: {(i, j, k, val)}")
            if i == j:
                raise ValueError(f"diagonal bracket entry not allowed: {(i, j)}")
            c[k - 1, i - 1, j - 1] += float(val)
            c[k - 1, j - 1, i - 1] -= float(val)
        return cls(c)

    def pair_matrix(self) -> np.ndarray:
        """Matrix (m, r*(r-1)/2) contracting ordered-pair wedges into the
        vertical layer: column (i, j) holds c[:, i-1, j-1]."""
        ii, jj = _pair_arrays(self.r)
        return self.bracket[:, ii, jj]

    def is_free(self) -> bool:
        return self.m == vertical_dim(self.r) and np.array_equal(
            self.bracket, Step2Structure.free(self.r).bracket
        )


def _same_structure(p: "GeneralGroupPoint", q: "GeneralGroupPoint"):
    if p.structure is not q.structure and not np.array_equal(
        p.structure.bracket, q.structure.bracket
    ):
        raise ValueError("structure mismatch between group points")


@dataclass(frozen=True, eq=False)
class GeneralGroupPoint:
    """Point of a step-2 group with given structure, exponential coordinates.

    a holds the r horizontal coordinates, b the m vertical ones.
    """

    structure: Step2Structure
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape[-1] != self.structure.r or b.shape[-1] != self.structure.m:
            raise ValueError(
                f"coordinate lengths {a.shape[-1]}/{b.shape[-1]} do not match "
                f"structure ({self.structure.r}, {self.structure.m})"
            )
        if a.shape[:-1] != b.shape[:-1]:
            raise ValueError("batch shapes of a and b differ")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.a, self.b], axis=-1)


def general_identity(structure: Step2Structure) -> GeneralGroupPoint:
    return GeneralGroupPoint(structure, np.zeros(structure.r), np.zeros(structure.m))


def general_product(p: GeneralGroupPoint, q: GeneralGroupPoint) -> GeneralGroupPoint:
    """Product in the general step-2 group:

        a'' = a + a',   b''_k = b_k + b'_k + (1/2) sum_ij c[k][i][j] a_i a'_j.

    With the free structure this coincides with ``product``.
    """
    _same_structure(p, q)
    c = p.structure.bracket
    corr = 0.5 * np.einsum("kij,...i,...j->...k", c, p.a, q.a)
    return GeneralGroupPoint(p.structure, p.a + q.a, p.b + q.b + corr)


def general_inverse(p: GeneralGroupPoint) -> GeneralGroupPoint:
    return GeneralGroupPoint(p.structure, -p.a, -p.b)


def general_horizontality_residual(
    structure: Step2Structure, pa: np.ndarray, va: np.ndarray, vb: np.ndarray
) -> float | np.ndarray:
    """Residual of the horizontality equation v_b = (1/2) c(p_a, v_a) in a
    general step-2 group, max over vertical components."""
    pa = np.asarray(pa, dtype=float)
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=float)
    expect = 0.5 * np.einsum("kij,...i,...j->...k", structure.bracket, pa, va)
    res = np.max(np.abs(vb - expect), axis=-1)
    return float(res) if res.ndim == 0 else res
