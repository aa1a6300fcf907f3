"""Densities on curves and their discretization into weighted atoms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import SampledSurface

DENSITY_KINDS = ("uniform", "cosine_bump", "gaussian_bump", "custom_fourier")


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class DensitySpec:
    """Nonnegative continuous density as a function of the curve parameter.

    ``cosine_bump`` is ``1 + A cos(t - t0)`` with ``0 <= A <= 1``.
    ``gaussian_bump`` is the periodic bump ``1 + A exp((cos(t - t0) - 1) / sigma**2)``,
    which behaves like a Gaussian of width ``sigma`` near ``t0``.
    ``custom_fourier`` is ``c0 + sum a_k cos(kt) + b_k sin(kt)`` and must be
    nonnegative.
    """

    kind: str = "uniform"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise MeasureError(f"unknown density kind {self.kind!r}")
        p = dict(self.params)
        if self.kind == "uniform":
            p = {}
        elif self.kind == "cosine_bump":
            p = {"amplitude": float(p.get("amplitude", 0.0)), "t0": float(p.get("t0", 0.0))}
            if not 0.0 <= p["amplitude"] <= 1.0:
                raise MeasureError("cosine_bump amplitude must lie in [0, 1]")
        elif self.kind == "gaussian_bump":
            p = {
                "amplitude": float(p.get("amplitude", 0.0)),
                "t0": float(p.get("t0", 0.0)),
                "sigma": float(p.get("sigma", 0.5)),
            }
            if p["amplitude"] < 0 or p["sigma"] <= 0:
                raise MeasureError("gaussian_bump needs amplitude >= 0 and sigma > 0")
        else:
            coeffs = tuple((int(k), float(a), float(b)) for k, a, b in p.get("coeffs", ()))
            p = {"c0": float(p.get("c0", 1.0)), "coeffs": coeffs}
            probe = density_value(DensitySpec._unchecked(p), np.linspace(0, 2 * np.pi, 4096, endpoint=False))
            if probe.min() < 0 or probe.max() <= 0:
                raise MeasureError("custom_fourier density must be nonnegative and nonzero")
        object.__setattr__(self, "params", p)

    @staticmethod
    def _unchecked(params):
        spec = object.__new__(DensitySpec)
        object.__setattr__(spec, "kind", "custom_fourier")
        object.__setattr__(spec, "params", params)
        return spec


def density_value(spec, t):
    t = np.asarray(t, dtype=float)
    p = spec.params
    if spec.kind == "uniform":
        return np.ones_like(t)
    if spec.kind == "cosine_bump":
        return 1.0 + p["amplitude"] * np.cos(t - p["t0"])
    if spec.kind == "gaussian_bump":
        return 1.0 + p["amplitude"] * np.exp((np.cos(t - p["t0"]) - 1.0) / p["sigma"] ** 2)
    out = np.full_like(t, p["c0"])
    for k, a, b in p["coeffs"]:
        out += a * np.cos(k * t) + b * np.sin(k * t)
    return out


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability masses attached to the samples of a :class:`SampledSurface`.

    Zero-mass atoms are kept so that indices stay aligned with the surface.
    """

    surface: SampledSurface
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.shape != (len(self.surface),):
            raise MeasureError("one mass per surface sample is required")
        if np.any(m < 0):
            raise MeasureError("masses must be nonnegative")
        if abs(m.sum() - 1.0) > 1e-12:
            raise MeasureError(f"masses sum to {m.sum()!r}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    def __len__(self):
        return len(self.masses)

    @property
    def support(self):
        return np.flatnonzero(self.masses > 0)


def discretize_measure(spec, surface):
    """Masses proportional to density times quadrature weight, summing to one."""
    raw = density_value(spec, surface.params) * surface.weights
    total = raw.sum()
    if not total > 0:
        raise MeasureError("measure vanishes on grid")
    masses = raw / total
    # absorb the last rounding ulp so the sum is 1 to machine precision
    k = int(np.argmax(masses))
    masses[k] += 1.0 - masses.sum()
    return DiscreteMeasure(surface, masses)
