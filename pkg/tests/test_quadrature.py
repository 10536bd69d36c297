import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundexciton import potentials as pt
from boundexciton.quadrature import (
    QuadratureConfig,
    QuadratureError,
    radial_integral,
    radial_moment,
    radial_moment_levels,
    tensor_oracle,
)
from boundexciton.specialfun import EULER_GAMMA

ONE = pt.CallableProfile(lambda r: np.ones_like(r))


def keldysh_fourier(c, r0):
    """rho_2(c) = int_0^inf exp(-k^2/4c) / (1 + r0 k) dk, from the 2D Fourier transform."""
    mp.mp.dps = 30
    s = mp.sqrt(c)
    f = lambda k: mp.exp(-k * k / (4 * c)) / (1 + r0 * k)
    return float(mp.quad(f, [0, s / r0, s, 10 * s, mp.inf]))


@pytest.mark.parametrize("d", [1, 2])
def test_constant_profile_is_normalized(d):
    c = np.geomspace(1e-8, 1e8, 33)
    assert np.allclose(radial_moment(ONE, c, d), 1.0, rtol=1e-13, atol=0)


def test_log_profile_euler_integral():
    W = pt.CallableProfile(lambda r: np.log(r), log_origin=True)
    val = 2.0 * radial_integral(W, 1.0, 1)[0]
    assert val == pytest.approx(-EULER_GAMMA / 2, rel=1e-12)


def test_gaussian_profile_closed_forms():
    W = pt.GaussianWell(1.0, 1.0)
    assert radial_moment(W, 3.0, 2) == pytest.approx(0.75, rel=1e-13)
    for c in [1e-3, 0.2, 5.0, 1e4]:
        assert radial_moment(W, c, 1) == pytest.approx(math.sqrt(c / (c + 1)), rel=1e-12)
        assert radial_moment(W, c, 2) == pytest.approx(c / (c + 1), rel=1e-12)


def test_flat_well_closed_forms():
    W = pt.FlatWellPotential(3.0)
    for c in [1e-4, 0.3, 7.0, 1e3]:
        assert radial_moment(W, c, 1) == pytest.approx(3 * math.erf(math.sqrt(c)), rel=1e-12)
        assert radial_moment(W, c, 2) == pytest.approx(3 * -math.expm1(-c), rel=1e-12)


@pytest.mark.parametrize("r0", [1.0, 20.0])
@pytest.mark.parametrize("c", [1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e8])
def test_keldysh_against_fourier_oracle(r0, c):
    assert radial_moment(pt.KeldyshPotential(r0), c, 2) == pytest.approx(keldysh_fourier(c, r0), rel=1e-10)


def test_keldysh_one_dimensional_against_mpmath():
    V = pt.KeldyshPotential(1.0)
    mp.mp.dps = 30
    for c in [1e-3, 1.0, 50.0]:
        f = lambda r: mp.pi / 2 * (mp.struveh(0, r) - mp.bessely(0, r)) * mp.exp(-c * r * r)
        ref = 2 * mp.sqrt(c / mp.pi) * mp.quad(f, [0, min(1, 1 / math.sqrt(c)), 1 / math.sqrt(c), mp.inf])
        assert radial_moment(V, c, 1) == pytest.approx(float(ref), rel=1e-10)


@pytest.mark.parametrize("c", [1e-4, 1.0, 1e2])
def test_refinement_differences_decrease_past_level_three(c):
    est = radial_moment_levels(pt.KeldyshPotential(20.0), c, 2, levels=7)
    diffs = np.abs(np.diff(est))[3:]
    floor = 1e-15 * abs(est[-1])
    for a, b in zip(diffs[:-1], diffs[1:]):
        assert b <= a or b <= floor


def test_scale_covariance_of_nodes():
    V = pt.KeldyshPotential(20.0)
    c = np.geomspace(1e-5, 1e3, 40)
    for t in [0.3, 1.7, 10.0]:
        a = radial_moment(pt.ScaledPotential(V, t, 1.0), c / t**2, 2)
        assert np.allclose(a, radial_moment(V, c, 2), rtol=1e-13, atol=0)


def test_non_convergence_reports_last_estimates():
    W = pt.CallableProfile(lambda r: np.cos(1e4 * r), length=1.0, support_radius=1.0)
    with pytest.raises(QuadratureError) as info:
        radial_moment(W, 1e-3, 2, QuadratureConfig(rel_tol=1e-12, max_levels=4, min_levels=3))
    a, b = info.value.last_estimates
    assert math.isfinite(a) and math.isfinite(b)


def test_rejects_nonpositive_exponent():
    with pytest.raises(ValueError):
        radial_moment(ONE, 0.0, 2)
    with pytest.raises(ValueError):
        radial_moment(ONE, 1.0, 3)
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)


def test_vectorized_equals_scalar():
    V = pt.KeldyshPotential(20.0)
    c = np.geomspace(1e-3, 1e3, 9)
    vec = radial_moment(V, c, 2)
    assert all(vec[i] == radial_moment(V, float(ci), 2) for i, ci in enumerate(c))


def test_tensor_oracle_gaussian():
    f = lambda z: np.exp(-(z * z).sum(axis=1))
    assert tensor_oracle(f, [(-9, 9), (-9, 9)], 60) == pytest.approx(math.pi, abs=1e-10)


def test_tensor_oracle_log_singularity_offset_grid():
    V = pt.KeldyshPotential(1.0)
    c = 1.0
    f = lambda z: V.evaluate(np.hypot(z[:, 0], z[:, 1])) * np.exp(-c * (z * z).sum(axis=1))
    # an even panel count puts the origin on panel corners, never on a node
    val = tensor_oracle(f, [(-7, 7), (-7, 7)], 40, panels=14) * c / math.pi
    assert val == pytest.approx(radial_moment(V, c, 2), rel=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e6), st.floats(min_value=1.0001, max_value=10.0))
def test_moment_increases_with_exponent_for_decreasing_profile(c, ratio):
    # a sharper Gaussian samples a decreasing profile closer to its peak
    V = pt.KeldyshPotential(20.0)
    assert radial_moment(V, c * ratio, 2) > radial_moment(V, c, 2)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e6), st.sampled_from([1, 2]))
def test_flat_well_moment_bounded(c, d):
    m = radial_moment(pt.FlatWellPotential(2.5), c, d)
    assert 0 < m <= 2.5 * (1 + 1e-12)
