import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convex_monge.geometry import ConvexCurveSpec, sample_uniform_arclength
from convex_monge.measures import (
    DensitySpec,
    DiscreteMeasure,
    MeasureError,
    density_value,
    discretize_measure,
)

CIRCLE = sample_uniform_arclength(ConvexCurveSpec.circle(1.0), 64)
ELLIPSE = sample_uniform_arclength(ConvexCurveSpec.ellipse(1.5, 1.0), 64)


def test_uniform_on_circle_is_exactly_equal():
    mu = discretize_measure(DensitySpec(), CIRCLE)
    np.testing.assert_allclose(mu.masses, 1 / 64, rtol=1e-14)
    assert mu.masses.sum() == pytest.approx(1.0, abs=1e-15)


def test_masses_follow_density_times_weight():
    spec = DensitySpec("cosine_bump", {"amplitude": 0.7, "t0": 1.0})
    mu = discretize_measure(spec, ELLIPSE)
    raw = np.array([(1 + 0.7 * np.cos(t - 1.0)) * w for t, w in zip(ELLIPSE.params, ELLIPSE.weights)])
    np.testing.assert_allclose(mu.masses, raw / raw.sum(), rtol=1e-13)


def test_gaussian_bump_peak():
    spec = DensitySpec("gaussian_bump", {"amplitude": 2.0, "t0": 2.5, "sigma": 0.6})
    assert density_value(spec, 2.5) == pytest.approx(3.0)
    assert density_value(spec, 2.5 + np.pi) == pytest.approx(1.0 + 2.0 * np.exp(-2 / 0.36))


def test_full_amplitude_cosine_has_a_zero_atom():
    spec = DensitySpec("cosine_bump", {"amplitude": 1.0, "t0": np.pi})
    mu = discretize_measure(spec, CIRCLE)
    assert mu.masses[0] == 0.0
    assert len(mu.support) == 63


def test_vanishing_measure():
    surf = sample_uniform_arclength(ConvexCurveSpec.circle(1.0), 4)
    spec = DensitySpec("custom_fourier", {"c0": 1.0, "coeffs": [(4, -1.0, 0.0)]})
    with pytest.raises(MeasureError, match="vanishes on grid"):
        discretize_measure(spec, surf)


@pytest.mark.parametrize(
    "kind, params",
    [
        ("cosine_bump", {"amplitude": 1.5}),
        ("gaussian_bump", {"amplitude": 1.0, "sigma": 0.0}),
        ("custom_fourier", {"c0": 0.5, "coeffs": [(1, 1.0, 0.0)]}),
        ("triangle", {}),
    ],
)
def test_invalid_densities(kind, params):
    with pytest.raises(MeasureError):
        DensitySpec(kind, params)


def test_discrete_measure_validation():
    with pytest.raises(MeasureError):
        DiscreteMeasure(CIRCLE, np.full(64, 1 / 32))
    with pytest.raises(MeasureError):
        DiscreteMeasure(CIRCLE, np.full(10, 0.1))


@settings(max_examples=50, deadline=None)
@given(
    amplitude=st.floats(0, 1),
    t0=st.floats(-np.pi, np.pi),
    K=st.integers(8, 200),
)
def test_masses_are_probability_vectors(amplitude, t0, K):
    surf = sample_uniform_arclength(ConvexCurveSpec.ellipse(1.2, 0.8), K)
    mu = discretize_measure(DensitySpec("cosine_bump", {"amplitude": amplitude, "t0": t0}), surf)
    assert np.all(mu.masses >= 0)
    assert abs(mu.masses.sum() - 1.0) <= 1e-12
