"""Planar curve segments with closed-form signed areas.

Every horizontal curve in this package is built from a handful of
symbolic segment kinds in R^r.  Each kind evaluates position and
velocity at any parameter and, crucially, knows the closed form of its
running signed-area matrix

    S(t)[i, j] = (1/2) * integral_0^t (phi_i phi_j' - phi_j phi_i'),

the quantity that drives vertical coordinates of horizontal lifts.  The
loop kinds realize exact cancellations (full-period trigonometric
orthogonality), so areas they are not meant to touch come out as exact
zeros rather than small quadrature noise.

Matrices are indexed 0-based; loop kinds name their active coordinates
with the 1-based math indices used by the vertical pair order.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "Segment",
    "ConstantSegment",
    "LinearSegment",
    "CubicSegment",
    "CosineBumpSegment",
    "CircleLoopSegment",
    "PetalLoopSegment",
    "TransformedSegment",
    "wedge_matrix",
    "segment_from_dict",
]

TWO_PI = 2.0 * np.pi


def wedge_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Antisymmetric matrix with entries a_i b_j - a_j b_i, shape (..., r, r)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., :, None] * b[..., None, :] - a[..., None, :] * b[..., :, None]


def _horner(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Evaluate polynomials with coefficient rows (k, ...) at t (...,); the
    result has shape t.shape + coeffs.shape[1:]."""
    t = np.asarray(t, dtype=float)
    if coeffs.ndim > 1:
        te = t[..., None]
        out = np.broadcast_to(coeffs[-1], t.shape + coeffs.shape[1:]).copy()
    else:
        te = t
        out = np.full(t.shape, coeffs[-1])
    for row in coeffs[-2::-1]:
        out *= te
        out += row
    return out


def _positive_duration(d: float, kind: str) -> float:
    d = float(d)
    if not np.isfinite(d) or d <= 0.0:
        raise ValueError(f"{kind}: duration must be positive, got {d}")
    return d


class Segment(abc.ABC):
    """One symbolic piece of a planar curve in R^r."""

    duration: float

    @property
    @abc.abstractmethod
    def r(self) -> int:
        """Ambient dimension."""

    @abc.abstractmethod
    def point(self, t):
        """Position at local time t in [0, duration]; t may be an array."""

    @abc.abstractmethod
    def velocity(self, t):
        """Velocity at local time t; t may be an array."""

    @abc.abstractmethod
    def partial_area(self, t):
        """Running signed-area matrix S(t), shape (..., r, r)."""

    def area_matrix(self) -> np.ndarray:
        """Signed-area matrix over the whole segment (closed form)."""
        return self.partial_area(self.duration)

    def start_position(self) -> np.ndarray:
        return self.point(0.0)

    def end_position(self) -> np.ndarray:
        return self.point(self.duration)

    def transformed(self, matrix: np.ndarray, shift: np.ndarray) -> "Segment":
        """The segment mapped through phi -> shift + matrix @ phi."""
        return TransformedSegment(self, np.asarray(matrix, float), np.asarray(shift, float))

    @abc.abstractmethod
    def to_dict(self) -> dict:
        """JSON-serializable description (kind + parameters)."""


def _as_times(t) -> np.ndarray:
    return np.asarray(t, dtype=float)


@dataclass(frozen=True, eq=False)
class ConstantSegment(Segment):
    """Stationary segment; duration may be zero."""

    position: np.ndarray
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, float))
        d = float(self.duration)
        if not np.isfinite(d) or d < 0.0:
            raise ValueError(f"constant segment duration must be >= 0, got {d}")
        object.__setattr__(self, "duration", d)

    @property
    def r(self) -> int:
        return self.position.shape[0]

    def point(self, t):
        t = _as_times(t)
        return np.broadcast_to(self.position, t.shape + (self.r,)).copy()

    def velocity(self, t):
        t = _as_times(t)
        return np.zeros(t.shape + (self.r,))

    def partial_area(self, t):
        t = _as_times(t)
        return np.zeros(t.shape + (self.r, self.r))

    def transformed(self, matrix, shift):
        return ConstantSegment(shift + matrix @ self.position, self.duration)

    def to_dict(self) -> dict:
        return {
            "kind": "constant",
            "position": self.position.tolist(),
            "duration": self.duration,
        }


@dataclass(frozen=True, eq=False)
class LinearSegment(Segment):
    """Straight drift: phi(t) = origin + t * velocity_vector."""

    origin: np.ndarray
    velocity_vector: np.ndarray
    duration: float

    def __post_init__(self):
        o = np.asarray(self.origin, float)
        v = np.asarray(self.velocity_vector, float)
        if o.shape != v.shape or o.ndim != 1:
            raise ValueError("origin and velocity must be 1-d arrays of equal length")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "velocity_vector", v)
        object.__setattr__(self, "duration", _positive_duration(self.duration, "line"))

    @property
    def r(self) -> int:
        return self.origin.shape[0]

    def point(self, t):
        t = _as_times(t)
        return self.origin + t[..., None] * self.velocity_vector

    def velocity(self, t):
        t = _as_times(t)
        return np.broadcast_to(self.velocity_vector, t.shape + (self.r,)).copy()

    def partial_area(self, t):
        t = _as_times(t)
        return 0.5 * t[..., None, None] * wedge_matrix(self.origin, self.velocity_vector)

    def transformed(self, matrix, shift):
        return LinearSegment(
            shift + matrix @ self.origin, matrix @ self.velocity_vector, self.duration
        )

    def to_dict(self) -> dict:
        return {
            "kind": "line",
            "origin": self.origin.tolist(),
            "velocity": self.velocity_vector.tolist(),
            "duration": self.duration,
        }


@dataclass(frozen=True, eq=False)
class CubicSegment(Segment):
    """Vector cubic polynomial: phi(t) = c0 + c1 t + c2 t^2 + c3 t^3.

    coeffs has shape (4, r), increasing powers.  Signed areas are exact
    polynomial integrals.
    """

    coeffs: np.ndarray
    duration: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, float)
        if c.ndim != 2 or c.shape[0] != 4:
            raise ValueError(f"cubic coefficients must have shape (4, r), got {c.shape}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "duration", _positive_duration(self.duration, "cubic"))

    @classmethod
    def hermite(cls, p0, p1, v0, v1, duration: float) -> "CubicSegment":
        """The cubic with phi(0) = p0, phi(d) = p1, phi'(0) = v0, phi'(d) = v1."""
        p0 = np.asarray(p0, float)
        p1 = np.asarray(p1, float)
        v0 = np.asarray(v0, float)
        v1 = np.asarray(v1, float)
        d = float(duration)
        c2 = (3.0 * (p1 - p0) - d * (2.0 * v0 + v1)) / d**2
        c3 = (2.0 * (p0 - p1) + d * (v0 + v1)) / d**3
        return cls(np.stack([p0, v0, c2, c3]), d)

    @property
    def r(self) -> int:
        return self.coeffs.shape[1]

    def point(self, t):
        return _horner(self.coeffs, _as_times(t))

    def velocity(self, t):
        c = self.coeffs
        dc = c[1:] * np.array([1.0, 2.0, 3.0])[:, None]
        return _horner(dc, _as_times(t))

    def _area_polys(self) -> np.ndarray:
        """Antiderivative coefficients of (phi_a phi_b' - phi_b phi_a') / 2 per (a, b),
        computed once per segment."""
        cached = self.__dict__.get("_area_polys_cache")
        if cached is not None:
            return cached
        r = self.r
        dc = P.polyder(self.coeffs)
        polys = np.zeros((r, r, 7))
        for a in range(r):
            for b in range(a):
                prod = P.polymul(self.coeffs[:, a], dc[:, b]) - P.polymul(
                    self.coeffs[:, b], dc[:, a]
                )
                anti = 0.5 * P.polyint(prod)
                polys[a, b, : anti.shape[0]] = anti
                polys[b, a, : anti.shape[0]] = -anti
        object.__setattr__(self, "_area_polys_cache", polys)
        return polys

    def partial_area(self, t):
        t = _as_times(t)
        polys = np.moveaxis(self._area_polys(), 2, 0)  # (7, r, r)
        te = t[..., None, None]
        out = np.broadcast_to(polys[-1], te.shape[:-2] + polys.shape[1:]).copy()
        for row in polys[-2::-1]:
            out *= te
            out += row
        return out

    def transformed(self, matrix, shift):
        new = np.einsum("ab,kb->ka", np.asarray(matrix, float), self.coeffs)
        new[0] = new[0] + np.asarray(shift, float)
        return CubicSegment(new, self.duration)

    def to_dict(self) -> dict:
        return {
            "kind": "cubic",
            "coeffs": self.coeffs.tolist(),
            "duration": self.duration,
        }


def _loop_origin(origin, kind: str) -> np.ndarray:
    o = np.asarray(origin, float)
    if o.ndim != 1:
        raise ValueError(f"{kind}: origin must be a 1-d array")
    return o


@dataclass(frozen=True, eq=False)
class CosineBumpSegment(Segment):
    """Drift along axis 1 plus a full-period cosine arch in coordinate i.

        phi_1(t) = origin_1 + speed * t
        phi_i(t) = origin_i + amplitude * (1 - cos(2 pi t / duration))

    Over the whole segment the arch closes, coordinate i returns to its
    start with zero velocity at both ends, and the only intrinsic area
    swept is amplitude * speed * duration in the (i, 1) plane.
    """

    origin: np.ndarray
    speed: float
    i: int  # 1-based target coordinate, 2 <= i <= r
    amplitude: float
    duration: float

    def __post_init__(self):
        o = _loop_origin(self.origin, "cosine bump")
        if not (2 <= self.i <= o.shape[0]):
            raise ValueError(f"bump coordinate i must satisfy 2 <= i <= {o.shape[0]}")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "duration", _positive_duration(self.duration, "cosine bump"))

    @property
    def r(self) -> int:
        return self.origin.shape[0]

    @property
    def _omega(self) -> float:
        return TWO_PI / self.duration

    def _shape(self, t: np.ndarray) -> np.ndarray:
        u = np.zeros(t.shape + (self.r,))
        u[..., 0] = self.speed * t
        u[..., self.i - 1] = self.amplitude * (1.0 - np.cos(self._omega * t))
        return u

    def point(self, t):
        t = _as_times(t)
        return self.origin + self._shape(t)

    def velocity(self, t):
        t = _as_times(t)
        v = np.zeros(t.shape + (self.r,))
        v[..., 0] = self.speed
        v[..., self.i - 1] = self.amplitude * self._omega * np.sin(self._omega * t)
        return v

    def partial_area(self, t):
        t = _as_times(t)
        w = self._omega
        # intrinsic (i,1) area: (speed*amp/2) * (t (1 + cos wt) - 2 sin(wt)/w)
        a_i1 = 0.5 * self.speed * self.amplitude * (
            t * (1.0 + np.cos(w * t)) - 2.0 * np.sin(w * t) / w
        )
        out = 0.5 * wedge_matrix(self.origin, self._shape(t))
        out[..., self.i - 1, 0] += a_i1
        out[..., 0, self.i - 1] -= a_i1
        return out

    def area_matrix(self) -> np.ndarray:
        # the arch closes: shape displacement is purely along axis 1
        disp = np.zeros(self.r)
        disp[0] = self.speed * self.duration
        out = 0.5 * wedge_matrix(self.origin, disp)
        a_i1 = self.amplitude * self.speed * self.duration
        out[self.i - 1, 0] += a_i1
        out[0, self.i - 1] -= a_i1
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "cosine_bump",
            "origin": self.origin.tolist(),
            "speed": self.speed,
            "i": self.i,
            "amplitude": self.amplitude,
            "duration": self.duration,
        }


@dataclass(frozen=True, eq=False)
class CircleLoopSegment(Segment):
    """Circle of given radius in the (1, i) plane traversed at variable speed.

        phi_1(t) = origin_1 + radius * sin(theta(t))
        phi_i(t) = origin_i + radius * (cos(theta(t)) - 1)

    theta is a cubic polynomial with theta(0) = 0 and
    theta(duration) = theta_end = +-2 pi, so the loop closes after one
    (signed) turn and sweeps exactly theta_end * radius^2 / 2 in the
    (i, 1) plane regardless of the speed profile.
    """

    origin: np.ndarray
    i: int  # 1-based partner coordinate, 2 <= i <= r
    radius: float
    theta_coeffs: np.ndarray  # cubic, increasing powers, theta(0) = 0
    theta_end: float
    duration: float

    def __post_init__(self):
        o = _loop_origin(self.origin, "circle loop")
        if not (2 <= self.i <= o.shape[0]):
            raise ValueError(f"circle coordinate i must satisfy 2 <= i <= {o.shape[0]}")
        if self.radius <= 0.0:
            raise ValueError("circle radius must be positive")
        c = np.asarray(self.theta_coeffs, float)
        if c.shape != (4,) or c[0] != 0.0:
            raise ValueError("theta must be cubic coefficients (4,) with theta(0) = 0")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "theta_coeffs", c)
        object.__setattr__(self, "duration", _positive_duration(self.duration, "circle loop"))

    @classmethod
    def build(cls, origin, i: int, radius: float, end_slope: float, duration: float,
              orientation: int = 1) -> "CircleLoopSegment":
        """Loop with angle running 0 -> orientation * 2 pi and endpoint angular
        speed ``end_slope`` at both ends (cubic Hermite in the angle)."""
        if orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")
        d = float(duration)
        theta_end = orientation * TWO_PI
        c2 = (3.0 * theta_end - d * (2.0 * end_slope + end_slope)) / d**2
        c3 = (-2.0 * theta_end + d * (end_slope + end_slope)) / d**3
        coeffs = np.array([0.0, end_slope, c2, c3])
        return cls(origin, i, radius, coeffs, theta_end, d)

    @property
    def r(self) -> int:
        return self.origin.shape[0]

    def _theta(self, t):
        return _horner(self.theta_coeffs, t)

    def _dtheta(self, t):
        dc = self.theta_coeffs[1:] * np.array([1.0, 2.0, 3.0])
        return _horner(dc, t)

    def _shape(self, t: np.ndarray) -> np.ndarray:
        th = self._theta(t)
        u = np.zeros(t.shape + (self.r,))
        u[..., 0] = self.radius * np.sin(th)
        u[..., self.i - 1] = self.radius * (np.cos(th) - 1.0)
        return u

    def point(self, t):
        t = _as_times(t)
        return self.origin + self._shape(t)

    def velocity(self, t):
        t = _as_times(t)
        th = self._theta(t)
        dth = self._dtheta(t)
        v = np.zeros(t.shape + (self.r,))
        v[..., 0] = self.radius * np.cos(th) * dth
        v[..., self.i - 1] = -self.radius * np.sin(th) * dth
        return v

    def partial_area(self, t):
        t = _as_times(t)
        th = self._theta(t)
        a_i1 = 0.5 * self.radius**2 * (th - np.sin(th))
        out = 0.5 * wedge_matrix(self.origin, self._shape(t))
        out[..., self.i - 1, 0] += a_i1
        out[..., 0, self.i - 1] -= a_i1
        return out

    def area_matrix(self) -> np.ndarray:
        # closed loop: no displacement, so only the enclosed-circle term
        out = np.zeros((self.r, self.r))
        a_i1 = 0.5 * self.radius**2 * self.theta_end
        out[self.i - 1, 0] = a_i1
        out[0, self.i - 1] = -a_i1
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "circle_loop",
            "origin": self.origin.tolist(),
            "i": self.i,
            "radius": self.radius,
            "theta_coeffs": self.theta_coeffs.tolist(),
            "theta_end": self.theta_end,
            "duration": self.duration,
        }


@dataclass(frozen=True, eq=False)
class PetalLoopSegment(Segment):
    """Two-lobed loop in the (i, j) plane riding a drift along axis 1.

        phi_1(t) = origin_1 + speed * t
        phi_i(t) = zeta(t) cos(w t),  phi_j(t) = zeta(t) sin(w t)
        zeta(t)  = amplitude * (1 - cos(2 w t)),  w = 2 pi / duration

    (i and j formulas exchanged when ``swapped`` is set, which flips the
    sign of the swept (i, j) area.)  Both oscillating coordinates and
    their velocities vanish at the endpoints; over the full segment the
    trigonometric cross terms integrate to exactly zero, so the drift
    areas (i, 1) and (j, 1) are untouched while the (i, j) plane sweeps
    +- (3 pi / 2) * amplitude^2.
    """

    origin: np.ndarray
    i: int  # 1-based, i > j >= 2
    j: int
    speed: float
    amplitude: float
    swapped: bool
    duration: float

    def __post_init__(self):
        o = _loop_origin(self.origin, "petal loop")
        if not (2 <= self.j < self.i <= o.shape[0]):
            raise ValueError(
                f"petal coordinates must satisfy 2 <= j < i <= {o.shape[0]}, "
                f"got ({self.i}, {self.j})"
            )
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "duration", _positive_duration(self.duration, "petal loop"))

    @property
    def r(self) -> int:
        return self.origin.shape[0]

    @property
    def _omega(self) -> float:
        return TWO_PI / self.duration

    def _cos_sin_axes(self) -> tuple[int, int]:
        """0-based axes carrying the cosine and sine factors respectively."""
        if self.swapped:
            return self.j - 1, self.i - 1
        return self.i - 1, self.j - 1

    def _shape(self, t: np.ndarray) -> np.ndarray:
        w = self._omega
        zeta = self.amplitude * (1.0 - np.cos(2.0 * w * t))
        ax_cos, ax_sin = self._cos_sin_axes()
        u = np.zeros(t.shape + (self.r,))
        u[..., 0] = self.speed * t
        u[..., ax_cos] = zeta * np.cos(w * t)
        u[..., ax_sin] = zeta * np.sin(w * t)
        return u

    def point(self, t):
        t = _as_times(t)
        return self.origin + self._shape(t)

    def velocity(self, t):
        t = _as_times(t)
        w = self._omega
        zeta = self.amplitude * (1.0 - np.cos(2.0 * w * t))
        dzeta = self.amplitude * 2.0 * w * np.sin(2.0 * w * t)
        ax_cos, ax_sin = self._cos_sin_axes()
        v = np.zeros(t.shape + (self.r,))
        v[..., 0] = self.speed
        v[..., ax_cos] = dzeta * np.cos(w * t) - zeta * w * np.sin(w * t)
        v[..., ax_sin] = dzeta * np.sin(w * t) + zeta * w * np.cos(w * t)
        return v

    def partial_area(self, t):
        t = _as_times(t)
        w = self._omega
        amp = self.amplitude
        u = self._shape(t)
        ax_cos, ax_sin = self._cos_sin_axes()
        # integral of zeta * cos(ws) resp. zeta * sin(ws) from 0 to t
        p_cos = amp * (np.sin(w * t) / (2.0 * w) - np.sin(3.0 * w * t) / (6.0 * w))
        p_sin = amp * (
            1.5 * (1.0 - np.cos(w * t)) / w - (1.0 - np.cos(3.0 * w * t)) / (6.0 * w)
        )
        # drift areas: speed * integral(u_ax) - speed * t * u_ax(t) / 2
        a_cos1 = self.speed * p_cos - 0.5 * self.speed * t * u[..., ax_cos]
        a_sin1 = self.speed * p_sin - 0.5 * self.speed * t * u[..., ax_sin]
        # swept (cos-axis, sin-axis) area: (w/2) integral zeta^2
        x = 2.0 * w * t
        f = 1.5 * x - 2.0 * np.sin(x) + 0.25 * np.sin(2.0 * x)
        a_cs = 0.25 * amp**2 * f
        out = 0.5 * wedge_matrix(self.origin, u)
        out[..., ax_cos, 0] += a_cos1
        out[..., 0, ax_cos] -= a_cos1
        out[..., ax_sin, 0] += a_sin1
        out[..., 0, ax_sin] -= a_sin1
        out[..., ax_cos, ax_sin] += a_cs
        out[..., ax_sin, ax_cos] -= a_cs
        return out

    def area_matrix(self) -> np.ndarray:
        # loop closes in (i, j); full-period orthogonality kills the drift terms
        disp = np.zeros(self.r)
        disp[0] = self.speed * self.duration
        out = 0.5 * wedge_matrix(self.origin, disp)
        a_cs = 1.5 * np.pi * self.amplitude**2
        ax_cos, ax_sin = self._cos_sin_axes()
        out[ax_cos, ax_sin] += a_cs
        out[ax_sin, ax_cos] -= a_cs
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "petal_loop",
            "origin": self.origin.tolist(),
            "i": self.i,
            "j": self.j,
            "speed": self.speed,
            "amplitude": self.amplitude,
            "swapped": self.swapped,
            "duration": self.duration,
        }


@dataclass(frozen=True, eq=False)
class TransformedSegment(Segment):
    """A segment pushed through the affine map phi -> shift + matrix @ phi.

    The matrix may be rectangular (used when pushing curves into another
    group); areas transform as S -> M S M^T plus the wedge of the shift
    with the displacement.
    """

    inner: Segment
    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, float)
        s = np.asarray(self.shift, float)
        if m.ndim != 2 or m.shape[1] != self.inner.r or s.shape != (m.shape[0],):
            raise ValueError(
                f"affine data {m.shape}/{s.shape} incompatible with inner rank {self.inner.r}"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "shift", s)

    @property
    def duration(self) -> float:  # type: ignore[override]
        return self.inner.duration

    @property
    def r(self) -> int:
        return self.shift.shape[0]

    def point(self, t):
        return self.shift + np.einsum("ab,...b->...a", self.matrix, self.inner.point(t))

    def velocity(self, t):
        return np.einsum("ab,...b->...a", self.matrix, self.inner.velocity(t))

    def partial_area(self, t):
        disp = self.inner.point(t) - self.inner.start_position()
        pushed = np.einsum("ab,...b->...a", self.matrix, disp)
        inner_area = self.inner.partial_area(t)
        conj = np.einsum("ab,...bc,dc->...ad", self.matrix, inner_area, self.matrix)
        return 0.5 * wedge_matrix(self.shift, pushed) + conj

    def area_matrix(self) -> np.ndarray:
        disp = self.inner.end_position() - self.inner.start_position()
        pushed = self.matrix @ disp
        conj = self.matrix @ self.inner.area_matrix() @ self.matrix.T
        return 0.5 * wedge_matrix(self.shift, pushed) + conj

    def transformed(self, matrix, shift):
        matrix = np.asarray(matrix, float)
        shift = np.asarray(shift, float)
        return TransformedSegment(
            self.inner, matrix @ self.matrix, shift + matrix @ self.shift
        )

    def to_dict(self) -> dict:
        return {
            "kind": "affine",
            "inner": self.inner.to_dict(),
            "matrix": self.matrix.tolist(),
            "shift": self.shift.tolist(),
        }


def segment_from_dict(data: dict) -> Segment:
    """Rebuild a segment from its ``to_dict`` form."""
    try:
        kind = data["kind"]
    except (TypeError, KeyError) as exc:
        raise ValueError("segment record must be a mapping with a 'kind' field") from exc
    try:
        if kind == "constant":
            return ConstantSegment(np.array(data["position"], float), data["duration"])
        if kind == "line":
            return LinearSegment(
                np.array(data["origin"], float),
                np.array(data["velocity"], float),
                data["duration"],
            )
        if kind == "cubic":
            return CubicSegment(np.array(data["coeffs"], float), data["duration"])
        if kind == "cosine_bump":
            return CosineBumpSegment(
                np.array(data["origin"], float),
                float(data["speed"]),
                int(data["i"]),
                float(data["amplitude"]),
                data["duration"],
            )
        if kind == "circle_loop":
            return CircleLoopSegment(
                np.array(data["origin"], float),
                int(data["i"]),
                float(data["radius"]),
                np.array(data["theta_coeffs"], float),
                float(data["theta_end"]),
                data["duration"],
            )
        if kind == "petal_loop":
            return PetalLoopSegment(
                np.array(data["origin"], float),
                int(data["i"]),
                int(data["j"]),
                float(data["speed"]),
                float(data["amplitude"]),
                bool(data["swapped"]),
                data["duration"],
            )
        if kind == "affine":
            return TransformedSegment(
                segment_from_dict(data["inner"]),
                np.array(data["matrix"], float),
                np.array(data["shift"], float),
            )
    except KeyError as exc:
        raise ValueError(f"segment record of kind '{kind}' is missing field {exc}") from exc
    raise ValueError(f"unknown segment kind '{kind}'")
