"""Experiment configuration files and built-in presets.

The format is flat ``key = value`` text, one entry per line, with dotted
section prefixes; ``#`` starts a comment.  Example::

    name = concentric-circles
    resolution = 128
    refinement = 2

    curveM.kind = circle
    curveM.radius = 1
    curveN.kind = ellipse
    curveN.a = 2
    curveN.b = 1
    curveN.center = 0.5, 0

    densityM.kind = cosine_bump
    densityM.amplitude = 0.5
    densityM.t0 = 0

    tolerance.arg = 1e-9
    outputs.plots = true

Curve keys: ``kind`` (circle, ellipse, radial_fourier), ``center`` (``x, y``),
``radius``, ``a``, ``b``, ``r0`` and ``coeffs`` (``k a_k b_k`` triples
separated by ``;``).  Density keys: ``kind`` (uniform, cosine_bump,
gaussian_bump, custom_fourier), ``amplitude``, ``t0``, ``sigma``, ``c0`` and
``coeffs``.  Tolerance keys: ``arg``, ``far_steps``, ``graph_steps``.
Output flags: ``report``, ``plots``, ``profiles``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import ConvexCurveSpec, ConvexityError, require_strict_convexity
from .measures import DensitySpec

MIN_RESOLUTION = 16
REFINEMENT_FACTORS = (2, 4)

CURVE_KEYS = {"kind", "center", "radius", "a", "b", "r0", "coeffs"}
DENSITY_KEYS = {"kind", "amplitude", "t0", "sigma", "c0", "coeffs"}
TOLERANCE_KEYS = {"arg", "far_steps", "graph_steps"}
OUTPUT_KEYS = {"report", "plots", "profiles"}
TOP_KEYS = {"name", "resolution", "refinement"}

DEFAULT_TOLERANCES = {"arg": 1e-9, "far_steps": 3.0, "graph_steps": 2.0}
DEFAULT_OUTPUTS = {"report": True, "plots": False, "profiles": False}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    curve_m: ConvexCurveSpec
    curve_n: ConvexCurveSpec
    density_m: DensitySpec = field(default_factory=DensitySpec)
    density_n: DensitySpec = field(default_factory=DensitySpec)
    resolution: int = 64
    refinement: int = 2
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    outputs: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUTS))
    name: str = "custom"

    def __post_init__(self):
        if self.resolution < MIN_RESOLUTION:
            raise ConfigError(f"K below minimum: resolution {self.resolution} < {MIN_RESOLUTION}")
        if self.refinement not in REFINEMENT_FACTORS:
            raise ConfigError(f"refinement must be one of {REFINEMENT_FACTORS}")
        object.__setattr__(self, "tolerances", {**DEFAULT_TOLERANCES, **self.tolerances})
        object.__setattr__(self, "outputs", {**DEFAULT_OUTPUTS, **self.outputs})
        for curve in (self.curve_m, self.curve_n):
            try:
                require_strict_convexity(curve)
            except ConvexityError as exc:
                raise ConfigError(str(exc)) from exc

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return {
            "name": self.name,
            "resolution": self.resolution,
            "refinement": self.refinement,
            "curveM": _curve_dict(self.curve_m),
            "curveN": _curve_dict(self.curve_n),
            "densityM": _density_dict(self.density_m),
            "densityN": _density_dict(self.density_n),
            "tolerance": dict(self.tolerances),
            "outputs": dict(self.outputs),
        }

    @classmethod
    def from_dict(cls, d):
        flat = {}
        for key, value in d.items():
            if isinstance(value, dict):
                for sub, v in value.items():
                    flat[f"{key}.{sub}"] = v
            else:
                flat[key] = value
        return _build(flat)

    def to_text(self):
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, dict):
                lines.append("")
                lines.extend(f"{key}.{sub} = {_format_value(v)}" for sub, v in value.items())
            else:
                lines.append(f"{key} = {_format_value(value)}")
        return "\n".join(lines).lstrip() + "\n"


def _curve_dict(curve):
    out = {"kind": curve.kind, "center": list(curve.center)}
    params = dict(curve.params)
    if "coeffs" in params:
        params["coeffs"] = [list(c) for c in params["coeffs"]]
    out.update(params)
    return out


def _density_dict(density):
    out = {"kind": density.kind}
    params = dict(density.params)
    if "coeffs" in params:
        params["coeffs"] = [list(c) for c in params["coeffs"]]
    out.update(params)
    return out


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        if v and isinstance(v[0], (list, tuple)):
            return "; ".join(" ".join(repr(x) for x in row) for row in v)
        return ", ".join(repr(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_triples(value):
    if isinstance(value, (list, tuple)):
        return tuple(tuple(row) for row in value)
    rows = [r.split() for r in str(value).split(";") if r.strip()]
    if any(len(r) != 3 for r in rows):
        raise ConfigError(f"coeffs must be 'k a b' triples separated by ';', got {value!r}")
    return tuple((int(r[0]), float(r[1]), float(r[2])) for r in rows)


def _parse_center(value):
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).replace(",", " ").split())


def _curve_from(section):
    kind = section.get("kind", "circle")
    center = _parse_center(section.get("center", "0 0"))
    if kind == "circle":
        return ConvexCurveSpec.circle(float(section.get("radius", 1.0)), center)
    if kind == "ellipse":
        return ConvexCurveSpec.ellipse(float(section["a"]), float(section["b"]), center)
    if kind == "radial_fourier":
        return ConvexCurveSpec.radial_fourier(
            float(section.get("r0", 1.0)), _parse_triples(section.get("coeffs", "")), center
        )
    raise ConfigError(f"unknown curve kind {kind!r}")


def _density_from(section):
    kind = section.get("kind", "uniform")
    params = {k: v for k, v in section.items() if k != "kind"}
    if "coeffs" in params:
        params["coeffs"] = _parse_triples(params["coeffs"])
    for k in ("amplitude", "t0", "sigma", "c0"):
        if k in params:
            params[k] = float(params[k])
    try:
        return DensitySpec(kind, params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build(flat):
    sections = {"curveM": {}, "curveN": {}, "densityM": {}, "densityN": {}, "tolerance": {}, "outputs": {}}
    allowed = {
        "curveM": CURVE_KEYS,
        "curveN": CURVE_KEYS,
        "densityM": DENSITY_KEYS,
        "densityN": DENSITY_KEYS,
        "tolerance": TOLERANCE_KEYS,
        "outputs": OUTPUT_KEYS,
    }
    top = {}
    unknown = []
    for key, value in flat.items():
        head, _, sub = key.partition(".")
        if not sub and key in TOP_KEYS:
            top[key] = value
        elif head in allowed and sub in allowed[head]:
            sections[head][sub] = value
        else:
            unknown.append(key)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        curve_m = _curve_from(sections["curveM"])
        curve_n = _curve_from(sections["curveN"])
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConvexityError):
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"invalid curve: {exc}") from exc
    return ExperimentConfig(
        curve_m=curve_m,
        curve_n=curve_n,
        density_m=_density_from(sections["densityM"]),
        density_n=_density_from(sections["densityN"]),
        resolution=int(top.get("resolution", 64)),
        refinement=int(top.get("refinement", 2)),
        tolerances={k: float(v) for k, v in sections["tolerance"].items()},
        outputs={k: _parse_bool(v) for k, v in sections["outputs"].items()},
        name=str(top.get("name", "custom")),
    )


def parse_config_text(text):
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key in flat:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        flat[key] = value.strip()
    return _build(flat)


def parse_config(path):
    """Read and validate an experiment config file."""
    return parse_config_text(Path(path).read_text())


_U = DensitySpec()

PRESETS = {
    "identity-circles": ExperimentConfig(
        ConvexCurveSpec.circle(1.0), ConvexCurveSpec.circle(1.0), _U, _U, 64, name="identity-circles"
    ),
    "concentric-circles": ExperimentConfig(
        ConvexCurveSpec.circle(1.0), ConvexCurveSpec.circle(2.0), _U, _U, 128, name="concentric-circles"
    ),
    "ellipse-pair": ExperimentConfig(
        ConvexCurveSpec.ellipse(1.5, 1.0),
        ConvexCurveSpec.ellipse(1.0, 1.3, center=(0.3, 0.2)),
        _U,
        _U,
        128,
        name="ellipse-pair",
    ),
    "s1-nonuniform-exploratory": ExperimentConfig(
        ConvexCurveSpec.circle(1.0),
        ConvexCurveSpec.circle(1.0),
        DensitySpec("cosine_bump", {"amplitude": 0.6, "t0": 0.3}),
        DensitySpec("gaussian_bump", {"amplitude": 2.0, "t0": 2.5, "sigma": 0.6}),
        256,
        name="s1-nonuniform-exploratory",
    ),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
