"""Strictly convex closed plane curves.

Curves are given analytically (circle, axis-aligned ellipse, or a radial
Fourier series around a center) so that positions, outward normals and
curvature are exact at every parameter value.  ``sample_uniform_arclength``
turns a curve into a :class:`SampledSurface`, the discrete support used by
the transport solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect

TWO_PI = 2.0 * np.pi

#: Minimum curvature accepted as numerically strictly convex.
KAPPA_MIN = 1e-6
#: Intersection roots closer than this (in curve parameter) are one tangency.
TOL_MERGE = 1e-8
#: Minimum number of samples on a discretized curve.
MIN_SAMPLES = 4

CURVE_KINDS = ("circle", "ellipse", "radial_fourier")


class GeometryError(ValueError):
    pass


class SingularParametrizationError(GeometryError):
    def __init__(self, t):
        super().__init__(f"singular parametrization at t={t!r}")
        self.t = t


class ConvexityError(GeometryError):
    def __init__(self, t, curvature):
        super().__init__(
            f"strict convexity violated: curvature {curvature:.3e} at t={t:.6f}"
            f" (minimum allowed {KAPPA_MIN:g})"
        )
        self.t = t
        self.curvature = curvature


@dataclass(frozen=True)
class ConvexCurveSpec:
    """Analytic description of a closed convex curve in the plane.

    Parameters
    ----------
    kind : {"circle", "ellipse", "radial_fourier"}
    center : tuple of float
        Center of the curve; also used as its interior reference point.
    params : dict
        ``radius`` for circles, ``a`` and ``b`` (semi-axes along x and y) for
        ellipses, ``r0`` and ``coeffs`` (tuple of ``(k, a_k, b_k)``) for the
        radial function ``r0 + sum a_k cos(kt) + b_k sin(kt)``.

    Use the :meth:`circle`, :meth:`ellipse` and :meth:`radial_fourier`
    constructors rather than filling ``params`` by hand.
    """

    kind: str
    center: tuple = (0.0, 0.0)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise GeometryError(f"unknown curve kind {self.kind!r}")
        center = tuple(float(c) for c in self.center)
        if len(center) != 2:
            raise NotImplementedError("only planar curves (dimension 2) are implemented")
        object.__setattr__(self, "center", center)
        p = dict(self.params)
        if self.kind == "circle":
            p = {"radius": float(p["radius"])}
            if not p["radius"] > 0:
                raise GeometryError("circle radius must be positive")
        elif self.kind == "ellipse":
            p = {"a": float(p["a"]), "b": float(p["b"])}
            if not (p["a"] > 0 and p["b"] > 0):
                raise GeometryError("ellipse semi-axes must be positive")
        else:
            coeffs = tuple(
                (int(k), float(a), float(b)) for k, a, b in p.get("coeffs", ())
            )
            if any(k < 1 for k, _, _ in coeffs):
                raise GeometryError("Fourier modes must have k >= 1")
            p = {"r0": float(p["r0"]), "coeffs": coeffs}
            if not p["r0"] > 0:
                raise GeometryError("base radius r0 must be positive")
        object.__setattr__(self, "params", p)

    @classmethod
    def circle(cls, radius=1.0, center=(0.0, 0.0)):
        return cls("circle", center, {"radius": radius})

    @classmethod
    def ellipse(cls, a, b, center=(0.0, 0.0)):
        return cls("ellipse", center, {"a": a, "b": b})

    @classmethod
    def radial_fourier(cls, r0, coeffs=(), center=(0.0, 0.0)):
        return cls("radial_fourier", center, {"r0": r0, "coeffs": tuple(coeffs)})

    @property
    def dim(self):
        return len(self.center)

    @property
    def interior_point(self):
        return np.asarray(self.center)

    def max_radius(self):
        """Upper bound on the distance from the center to any curve point."""
        if self.kind == "circle":
            return self.params["radius"]
        if self.kind == "ellipse":
            return max(self.params["a"], self.params["b"])
        return self.params["r0"] + sum(abs(a) + abs(b) for _, a, b in self.params["coeffs"])


class Line(NamedTuple):
    """Affine line ``base + s * direction`` with unit direction."""

    base: np.ndarray
    direction: np.ndarray

    @classmethod
    def through(cls, base, direction):
        base = np.asarray(base, dtype=float)
        direction = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise GeometryError("line direction must be nonzero")
        return cls(base, direction / norm)

    def distance_to(self, point):
        diff = np.asarray(point, dtype=float) - self.base
        return float(np.linalg.norm(diff - (diff @ self.direction) * self.direction))


def _radial_terms(spec, t):
    r0 = spec.params["r0"]
    rho = np.full_like(t, r0)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    for k, a, b in spec.params["coeffs"]:
        c, s = np.cos(k * t), np.sin(k * t)
        rho += a * c + b * s
        d1 += k * (-a * s + b * c)
        d2 -= k * k * (a * c + b * s)
    return rho, d1, d2


def _derivatives(spec, t):
    """Return position offset from the center and its first two derivatives."""
    t = np.asarray(t, dtype=float)
    c, s = np.cos(t), np.sin(t)
    if spec.kind in ("circle", "ellipse"):
        if spec.kind == "circle":
            a = b = spec.params["radius"]
        else:
            a, b = spec.params["a"], spec.params["b"]
        x = np.stack([a * c, b * s], axis=-1)
        dx = np.stack([-a * s, b * c], axis=-1)
        ddx = -x
        return x, dx, ddx
    rho, d1, d2 = _radial_terms(spec, t)
    u = np.stack([c, s], axis=-1)
    w = np.stack([-s, c], axis=-1)
    x = rho[..., None] * u
    dx = d1[..., None] * u + rho[..., None] * w
    ddx = d2[..., None] * u + 2 * d1[..., None] * w - rho[..., None] * u
    return x, dx, ddx


def point_at(spec, t):
    """Curve point(s) at parameter ``t`` (scalar or array); 2*pi periodic."""
    x, _, _ = _derivatives(spec, t)
    return x + np.asarray(spec.center)


def speed_at(spec, t):
    _, dx, _ = _derivatives(spec, t)
    return np.linalg.norm(dx, axis=-1)


def tangent_at(spec, t):
    """Unit tangent in the direction of increasing parameter."""
    _, dx, _ = _derivatives(spec, t)
    speed = np.linalg.norm(dx, axis=-1)
    _check_speed(speed, t)
    return dx / speed[..., None]


def normal_at(spec, t):
    """Outward unit normal at parameter ``t``.

    For the counterclockwise parametrizations used here the outward normal is
    the unit tangent rotated by -90 degrees.
    """
    tau = tangent_at(spec, t)
    return np.stack([tau[..., 1], -tau[..., 0]], axis=-1)


def curvature_at(spec, t):
    """Signed curvature; positive on counterclockwise convex arcs."""
    _, dx, ddx = _derivatives(spec, t)
    speed = np.linalg.norm(dx, axis=-1)
    _check_speed(speed, t)
    cross = dx[..., 0] * ddx[..., 1] - dx[..., 1] * ddx[..., 0]
    return cross / speed**3


def _check_speed(speed, t):
    bad = np.asarray(speed) < 1e-14
    if np.any(bad):
        t_bad = np.asarray(t, dtype=float)
        t_bad = float(t_bad[bad].flat[0]) if t_bad.ndim else float(t_bad)
        raise SingularParametrizationError(t_bad)


def parameter_of(spec, point):
    """Curve parameter of a point lying on the curve."""
    rel = np.asarray(point, dtype=float) - np.asarray(spec.center)
    if spec.kind == "ellipse":
        rel = rel / np.array([spec.params["a"], spec.params["b"]])
    return np.mod(np.arctan2(rel[..., 1], rel[..., 0]), TWO_PI)


def tangent_projection(normal, v):
    """Project ``v`` onto the tangent space with unit normal ``normal``."""
    normal = np.asarray(normal, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - np.sum(v * normal, axis=-1, keepdims=True) * normal


class ConvexityCheck(NamedTuple):
    passed: bool
    min_curvature: float
    t_min: float


def validate_strict_convexity(spec, grid=1024):
    """Evaluate curvature on a uniform parameter grid.

    Returns a :class:`ConvexityCheck`; ``passed`` is False when the smallest
    curvature found is below :data:`KAPPA_MIN` (or the radial function is not
    positive), in which case ``t_min`` is the offending parameter.
    """
    if grid < 256:
        raise ValueError("convexity grid must have at least 256 points")
    t = np.arange(grid) * (TWO_PI / grid)
    if spec.kind == "radial_fourier":
        rho, _, _ = _radial_terms(spec, t)
        if rho.min() <= 0:
            i = int(np.argmin(rho))
            return ConvexityCheck(False, float("-inf"), float(t[i]))
    kappa = curvature_at(spec, t)
    i = int(np.argmin(kappa))
    return ConvexityCheck(bool(kappa[i] >= KAPPA_MIN), float(kappa[i]), float(t[i]))


def require_strict_convexity(spec, grid=1024):
    check = validate_strict_convexity(spec, grid)
    if not check.passed:
        raise ConvexityError(check.t_min, check.min_curvature)
    return check


def line_intersection(line, spec, tol=1e-9):
    """Intersection points of a line with a strictly convex curve.

    Returns an array of shape ``(k, 2)`` with ``k`` in {0, 1, 2}, ordered
    along the line direction.  Circles and ellipses are solved in closed
    form; radial Fourier curves by sign-change bracketing on a 1024-point
    grid followed by bisection.
    """
    base = np.asarray(line.base, dtype=float)
    d = np.asarray(line.direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise GeometryError("line direction must be a unit vector")
    rel = base - np.asarray(spec.center)
    if spec.kind == "radial_fourier":
        roots = _radial_roots(spec, rel, d)
    else:
        if spec.kind == "circle":
            a = b = spec.params["radius"]
        else:
            a, b = spec.params["a"], spec.params["b"]
        qa = (d[0] / a) ** 2 + (d[1] / b) ** 2
        qb = 2.0 * (rel[0] * d[0] / a**2 + rel[1] * d[1] / b**2)
        qc = (rel[0] / a) ** 2 + (rel[1] / b) ** 2 - 1.0
        disc = qb * qb - 4.0 * qa * qc
        scale = qb * qb + abs(4.0 * qa * qc) + 1e-300
        if disc < -tol * scale:
            roots = []
        elif disc <= 0:
            roots = [-qb / (2 * qa)]
        else:
            sq = np.sqrt(disc)
            # stable quadratic formula
            q = -0.5 * (qb + np.copysign(sq, qb))
            r1, r2 = q / qa, (qc / q if q != 0 else -q / qa)
            roots = sorted([r1, r2])
    pts = [base + s * d for s in sorted(roots)]
    if len(pts) == 2:
        t0, t1 = parameter_of(spec, pts[0]), parameter_of(spec, pts[1])
        gap = abs(t0 - t1)
        if min(gap, TWO_PI - gap) < TOL_MERGE:
            pts = [0.5 * (pts[0] + pts[1])]
    out = np.array(pts, dtype=float).reshape(-1, 2)
    for p in out:
        on_curve = np.linalg.norm(point_at(spec, parameter_of(spec, p)) - p)
        if on_curve > max(tol, 1e-6 * spec.max_radius()):
            raise GeometryError(f"intersection residual {on_curve:.2e} exceeds tolerance")
    return out


def _radial_roots(spec, rel, d):
    reach = spec.max_radius() * 1.05 + 1e-9
    s_mid = -float(rel @ d)

    def signed_distance(p):
        ang = np.arctan2(p[..., 1], p[..., 0])
        rho, _, _ = _radial_terms(spec, np.asarray(ang, dtype=float))
        return np.linalg.norm(p, axis=-1) - rho

    s = np.linspace(s_mid - reach, s_mid + reach, 1024)
    f = signed_distance(rel + s[:, None] * d)
    roots = []
    for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0):
        roots.append(bisect(lambda u: signed_distance(rel + u * d), s[i], s[i + 1], xtol=1e-12))
    roots.extend(s[np.flatnonzero(f == 0)])
    return sorted(roots)


@dataclass(frozen=True, eq=False)
class SampledSurface:
    """Finite sample of a convex curve with arclength quadrature weights.

    Attributes
    ----------
    curve : ConvexCurveSpec
    params : ndarray, shape (K,)
        Strictly increasing parameters in [0, 2*pi).
    points, normals : ndarray, shape (K, 2)
    weights : ndarray, shape (K,)
        Composite trapezoid weights in arclength.
    arclength : ndarray, shape (K,)
        Arclength coordinate of each sample measured from ``t = 0``.
    perimeter : float
    """

    curve: ConvexCurveSpec
    params: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    arclength: np.ndarray
    perimeter: float

    def __post_init__(self):
        k = len(self.params)
        if k < MIN_SAMPLES:
            raise GeometryError(f"a sampled surface needs at least {MIN_SAMPLES} samples")
        for name in ("points", "normals", "weights", "arclength"):
            if len(getattr(self, name)) != k:
                raise GeometryError(f"{name} has length {len(getattr(self, name))}, expected {k}")
        if np.any(np.diff(self.params) <= 0):
            raise GeometryError("sample parameters must be strictly increasing")
        if np.any(np.abs(np.linalg.norm(self.normals, axis=1) - 1) > 1e-10):
            raise GeometryError("normals must be unit vectors")
        outward = np.sum(self.normals * (self.points - self.curve.interior_point), axis=1)
        if np.any(outward <= 0):
            raise GeometryError("normals must point outward")
        if np.any(self.weights <= 0):
            raise GeometryError("quadrature weights must be positive")
        for name in ("params", "points", "normals", "weights", "arclength"):
            getattr(self, name).setflags(write=False)

    def __len__(self):
        return len(self.params)

    @property
    def step(self):
        """Mean arclength grid step."""
        return self.perimeter / len(self)

    @property
    def tangents(self):
        return tangent_at(self.curve, self.params)

    @property
    def max_norm(self):
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def arc_distance(self, i, j):
        """Cyclic arclength distance between samples ``i`` and ``j``."""
        gap = np.abs(self.arclength[i] - self.arclength[j])
        return np.minimum(gap, self.perimeter - gap)

    def arc_diameter(self, indices):
        """Length of the shortest arc containing every listed sample."""
        s = np.sort(self.arclength[np.asarray(indices, dtype=int)])
        if len(s) < 2:
            return 0.0
        gaps = np.diff(np.append(s, s[0] + self.perimeter))
        return float(self.perimeter - gaps.max())


def sample_uniform_arclength(spec, K, oversample=None):
    """Sample ``K`` points approximately equispaced in arclength.

    The cumulative arclength is tabulated on an oversampled parameter grid
    (at least 16384 points) and inverted with monotone cubic interpolation.
    Circles are sampled at exactly equispaced parameters.
    """
    if K < MIN_SAMPLES:
        raise GeometryError(f"K must be at least {MIN_SAMPLES}")
    require_strict_convexity(spec)
    if spec.kind == "circle":
        t = np.arange(K) * (TWO_PI / K)
        perimeter = TWO_PI * spec.params["radius"]
        s = t * spec.params["radius"]
    else:
        n_fine = oversample or max(16384, 16 * K)
        tf = np.arange(n_fine + 1) * (TWO_PI / n_fine)
        speed = speed_at(spec, tf)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * (TWO_PI / n_fine))])
        perimeter = float(cum[-1])
        t = PchipInterpolator(cum, tf)(np.arange(K) * (perimeter / K))
        s = PchipInterpolator(tf, cum)(t)
        t[0], s[0] = 0.0, 0.0
    nxt = np.append(s[1:], perimeter)
    prv = np.insert(s[:-1], 0, s[-1] - perimeter)
    weights = 0.5 * (nxt - prv)
    return _make_surface(spec, t, weights, s, perimeter)


def _make_surface(spec, t, weights, s, perimeter):
    return SampledSurface(
        curve=spec,
        params=np.asarray(t, dtype=float),
        points=point_at(spec, t),
        normals=normal_at(spec, t),
        weights=np.asarray(weights, dtype=float),
        arclength=np.asarray(s, dtype=float),
        perimeter=float(perimeter),
    )
