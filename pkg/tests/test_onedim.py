import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundexciton import gaussians as gs
from boundexciton import onedim as od
from boundexciton import potentials as pt
from boundexciton import threebody as tb


def mp_ground_energy(depth):
    """Root of beta tan(beta) = sqrt(depth - beta^2) at 40 digits."""
    mp.mp.dps = 40
    f = lambda b: b * mp.sin(b) - mp.sqrt(max(depth - b * b, 0)) * mp.cos(b)
    lo, hi = mp.mpf("1e-30"), min(mp.pi / 2, mp.sqrt(depth))
    b = mp.findroot(f, (lo, hi), solver="bisect")
    return float(-(depth - b * b))


def test_unit_depth_ground_energy():
    g = od.flat_well_ground(1.0, 1.0)
    assert g.e == pytest.approx(-0.4538, abs=1e-4)
    assert g.e == pytest.approx(mp_ground_energy(1), rel=1e-12)


@pytest.mark.parametrize("depth", [1e-3, 0.5, 10.0, 2000.0, 1e5])
def test_against_high_precision_root(depth):
    assert od.flat_well_ground(depth, 1.0).e == pytest.approx(mp_ground_energy(depth), rel=1e-11)


def test_deep_well_asymptote():
    g = od.flat_well_ground(1.0, 1e6)
    assert g.e + 1e6 == pytest.approx(math.pi**2 / 4, rel=0.01)


def test_normalization_by_independent_integration():
    g = od.flat_well_ground(1.3, 2.0)
    inside = mp.quad(lambda x: (g.C * mp.cos(g.beta * x)) ** 2, [0, 1])
    outside = g.D_edge**2 / (2 * g.omega_dec)
    assert float(2 * (inside + outside)) == pytest.approx(1.0, abs=1e-12)


def test_ground_state_solves_the_equation():
    g = od.flat_well_ground(2.0, 1.5)
    h = 1e-4
    for x in [0.3, 0.8, 1.5, 3.0]:
        lap = (g.phi(x + h) - 2 * g.phi(x) + g.phi(x - h)) / h**2
        pot = -2.0 * 1.5 if x <= 1 else 0.0
        assert -lap + pot * g.phi(x) == pytest.approx(g.e * g.phi(x), rel=1e-5, abs=1e-8)


def test_rejects_nonpositive_depth():
    with pytest.raises(ValueError):
        od.flat_well_ground(0.0, 1.0)
    with pytest.raises(ValueError):
        od.qw_certificate(1.0, 2000.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1e-2, max_value=1e3))
def test_flat_well_invariants(kappa, w0):
    g = od.flat_well_ground(kappa, w0)
    depth = kappa * w0
    assert 0 < g.beta < math.pi / 2
    assert g.beta**2 + g.omega_dec**2 == pytest.approx(depth, rel=1e-12)
    r1, r2 = g.matching_residuals()
    assert abs(r1) <= 1e-12 and abs(r2) <= 1e-12 * max(1.0, g.omega_dec)
    assert abs(g.normalization_residual()) <= 1e-12
    assert -depth < g.e < 0
    assert g.e <= od.flat_well_upper_bound(kappa, w0) * (1 - 1e-12)


@pytest.mark.parametrize("kappa", [1.0, 1.5, 3.0, 10.0])
@pytest.mark.parametrize("w0", [0.1, 1.0, 10.0, 100.0, 2000.0])
def test_upper_bound_and_normalization_floor(kappa, w0):
    g = od.flat_well_ground(kappa, w0)
    assert g.e <= od.flat_well_upper_bound(kappa, w0)
    assert g.C**2 >= 1.0 / (3.0 + 1.0 / (kappa * w0))


def test_ground_energy_decreases_with_coupling():
    es = [od.flat_well_ground(k, 3.0).e for k in np.linspace(0.1, 10.0, 50)]
    assert np.all(np.diff(es) < 0)


def test_closed_bound_examples():
    assert od.closed_bound(2000.0) == pytest.approx(-1.04, abs=0.01)
    assert od.closed_bound(1.0) > 0


def test_certificate_value_against_mpmath():
    rep = od.qw_certificate(1.1, 2000.0)
    g = od.flat_well_ground(1.1, 2000.0)
    mp.mp.dps = 30
    integral = mp.quad(lambda x: (g.C * mp.cos(g.beta * x)) ** 2 * x**3, [0, 1])
    assert rep.q_value == pytest.approx(float(2 - 2000.0 / 3 * integral), rel=1e-12)
    assert rep.certified and rep.q_value <= rep.closed_bound
    assert rep.e_w == g.e


@pytest.mark.parametrize("kappa", [1.1, 5.0])
def test_certified_coupling_has_three_body_state_below_threshold(kappa):
    w0 = 2000.0
    assert od.qw_certificate(kappa, w0).certified
    basis = gs.build_basis(n_alpha=8, n_beta=8, n_gamma=5, lo=0.1, hi=500.0, d=1)
    res = tb.discrete_spectrum(
        tb.ModelParams(kappa, pt.FlatWellPotential(w0), d=1), basis
    )
    e_w = od.flat_well_ground(kappa, w0).e
    assert res.eigenvalues[0] < e_w - 1e-4 * abs(e_w)


def test_harmonic_limit_levels():
    v = pt.SmoothBumpPotential(0.125)
    lv = od.harmonic_limit(v, 1e8)
    assert lv.omega == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    assert lv.shifted[0] / lv.omega == pytest.approx(1.0, rel=1e-3)
    assert lv.shifted[1] / lv.omega == pytest.approx(3.0, rel=1e-3)


def test_harmonic_limit_converges_from_below():
    v = pt.SmoothBumpPotential(0.25)
    ratios = [od.harmonic_limit(v, k, n_levels=1).shifted[0] / 1.0 for k in (1e4, 1e5, 1e6, 1e7, 1e8)]
    errs = np.abs(np.array(ratios) - 1.0)
    assert np.all(np.diff(ratios) > 0) and np.all(np.diff(errs) < 0)


def test_harmonic_limit_validation():
    v = pt.SmoothBumpPotential(1.0)
    with pytest.raises(ValueError):
        od.harmonic_limit(v, 0.5)
    with pytest.raises(ValueError):
        od.harmonic_limit(v, 10.0, n_levels=3)
