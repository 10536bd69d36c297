import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundexciton import gaussians as gs
from boundexciton import potentials as pt
from boundexciton.oracles import overlap_kinetic_by_quadrature
from boundexciton.quadrature import tensor_oracle

G = gs.CorrelatedGaussian
ONE = pt.CallableProfile(lambda r: np.ones_like(r))

exponent = st.floats(min_value=0.05, max_value=5.0)
gamma_st = st.one_of(st.just(0.0), exponent)


def gaussian_pair(d):
    return st.tuples(exponent, exponent, gamma_st, exponent, exponent, gamma_st).map(
        lambda t: (G(*t[:3], d=d), G(*t[3:], d=d))
    )


def brute_4d(a, b, weight, L=5.0, points=20, panels=2):
    """d=2 integral of g_a g_b weight on a 4D tensor grid."""
    def f(z):
        x, y = z[:, :2], z[:, 2:]
        return a(x, y) * b(x, y) * weight(x, y)
    return tensor_oracle(f, [(-L, L)] * 4, points, panels=panels)


def test_overlap_and_kinetic_examples():
    g = G(1.0, 1.0, 0.0, d=1)
    assert gs.overlap(g, g) == pytest.approx(math.pi / 2, rel=1e-15)
    assert gs.kinetic(g, g) == pytest.approx(math.pi, rel=1e-15)
    g2 = G(1.0, 1.0, 0.0, d=2)
    assert gs.overlap(g2, g2) == pytest.approx((math.pi / 2) ** 2, rel=1e-15)


def test_reduction_coefficient_uncorrelated():
    a = G(1.0, 2.0, 0.0, d=1)
    # product is exp(-2 x^2 - 4 y^2): marginals are the plain exponents
    assert gs.reduction_coefficient(a, a, "x") == pytest.approx(2.0)
    assert gs.reduction_coefficient(a, a, "y") == pytest.approx(4.0)
    # x - y has variance 1/(2*2) + 1/(2*4) per unit, exponent 1/(1/2 + 1/4)... in closed form 8/6
    assert gs.reduction_coefficient(a, a, gs.Coordinate.X_MINUS_Y) == pytest.approx(8.0 / 6.0)


def test_potential_me_constant_and_gaussian_profiles():
    a, b = G(0.7, 1.3, 0.4, d=1), G(0.2, 2.1, 0.0, d=1)
    s = gs.overlap(a, b)
    for which in gs.Coordinate:
        assert gs.potential_me(a, b, which, ONE) == pytest.approx(s, rel=1e-13)
        c = gs.reduction_coefficient(a, b, which)
        ref = s * math.sqrt(c / (c + 1))
        assert gs.potential_me(a, b, which, pt.GaussianWell(1.0, 1.0)) == pytest.approx(ref, rel=1e-12)


def test_matrix_elements_against_tensor_quadrature_d1():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = np.exp(rng.uniform(math.log(0.2), math.log(3.0), 6))
        a, b = G(*p[:3], d=1), G(*p[3:], d=1)
        s, t = overlap_kinetic_by_quadrature(a, b)
        assert gs.overlap(a, b) == pytest.approx(s, rel=1e-8)
        assert gs.kinetic(a, b) == pytest.approx(t, rel=1e-8)


def test_matrix_elements_against_tensor_quadrature_d2():
    a, b = G(1.0, 2.0, 0.5, d=2), G(0.3, 1.1, 0.2, d=2)
    one = lambda x, y: np.ones(x.shape[0])
    assert gs.overlap(a, b) == pytest.approx(brute_4d(a, b, one), rel=1e-8)
    Aa, Ab = a.A, b.A

    def grad(x, y):
        # grad g_a . grad g_b = 4 sum over components of (A_a z)_k (A_b z)_k
        tot = 0.0
        for k in range(2):
            z = np.stack([x[:, k], y[:, k]], axis=1)
            tot = tot + np.einsum("ni,ni->n", z @ Aa, z @ Ab)
        return 4.0 * tot

    assert gs.kinetic(a, b) == pytest.approx(brute_4d(a, b, grad), rel=1e-8)


def test_reduction_coefficient_against_marginal():
    a, b = G(0.8, 1.5, 0.6, d=1), G(0.4, 0.9, 1.2, d=1)
    x, w = np.polynomial.legendre.leggauss(120)
    x, w = 10 * x, 10 * w
    for which, proj in [("x", lambda u, v: (v, u)), ("y", lambda u, v: (u, v)), ("x_minus_y", lambda u, v: (u + v, u))]:
        # marginal m(t) = int g_a g_b over the complementary direction
        def m(t):
            xx, yy = proj(x, np.full_like(x, t))
            return float(np.dot(w, a(xx[:, None], yy[:, None]) * b(xx[:, None], yy[:, None])))

        slope = -(math.log(m(1.0)) - math.log(m(0.0)))
        assert gs.reduction_coefficient(a, b, which) == pytest.approx(slope, rel=1e-10)


def test_potential_me_keldysh_d2_polar_oracle():
    V = pt.KeldyshPotential(1.0)
    a = b = G(1.0, 1.0, 1.0, d=2)
    # u = x - y in polar form absorbs the logarithmic singularity, v = y Cartesian
    # rho = t^4 smooths the rho log(rho) endpoint behaviour
    def f(z):
        t, th, v1, v2 = z.T
        rho = t**4
        u1, u2 = rho * np.cos(th), rho * np.sin(th)
        x = np.stack([u1 + v1, u2 + v2], axis=1)
        y = np.stack([v1, v2], axis=1)
        return 4 * t**3 * rho * V.evaluate(rho) * a(x, y) * b(x, y)

    ref = tensor_oracle(f, [(0, 4.0**0.25), (0, 2 * math.pi), (-4, 4), (-4, 4)], 24, panels=2)
    assert gs.potential_me(a, b, "x_minus_y", V) == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("d", [1, 2])
def test_scaling_covariance(d):
    a, b = G(0.3, 1.7, 0.2, d=d), G(2.0, 0.5, 0.0, d=d)
    for s in [0.01, 3.0, 250.0]:
        sa, sb = G(*(s * np.array(a.triple)), d=d), G(*(s * np.array(b.triple)), d=d)
        assert gs.overlap(sa, sb) == pytest.approx(s**-d * gs.overlap(a, b), rel=1e-13)
        assert gs.kinetic(sa, sb) == pytest.approx(s ** (1 - d) * gs.kinetic(a, b), rel=1e-13)


def test_inadmissible_and_mismatch_errors():
    with pytest.raises(ValueError):
        G(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        G(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        gs.overlap(G(1, 1, 0, d=1), G(1, 1, 0, d=2))
    assert bool(gs.is_admissible(0.0, 1.0, 1.0))
    assert not bool(gs.is_admissible(0.0, 0.0, 1.0))


def test_build_basis_examples():
    one = gs.build_basis(n_alpha=1, n_beta=1, n_gamma=1, lo=1.0, hi=1.0, zero_channels=())
    assert len(one) == 1 and one[0].triple == (1.0, 1.0, 1.0)
    default = gs.build_basis()
    assert len(default) == 320
    assert all(bool(gs.is_admissible(*t)) for t in default.exponents)
    assert default.exponents.min() >= 0 and default.exponents.max() <= 7.0
    with pytest.raises(ValueError):
        gs.build_basis(lo=2.0, hi=1.0)
    with pytest.raises(ValueError):
        gs.build_basis(n_alpha=0)


def test_basis_text_round_trip(tmp_path):
    b = gs.build_basis(n_alpha=3, n_beta=2, n_gamma=2, d=1)
    again = gs.BasisSet.from_text(b.to_text())
    assert again.d == 1 and np.array_equal(again.exponents, b.exponents)
    path = tmp_path / "basis.txt"
    b.save(path)
    assert gs.BasisSet.load(path).key() == b.key()


def test_basis_rejects_duplicates():
    with pytest.raises(ValueError):
        gs.BasisSet(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]]), 2)


def test_scale_basis():
    b = gs.build_basis(n_alpha=2, n_beta=2, n_gamma=2)
    assert np.array_equal(gs.scale_basis(b, 1.0).exponents, b.exponents)
    assert np.allclose(gs.scale_basis(b, 3.0).exponents, 3.0 * b.exponents, rtol=0, atol=0)


def test_vectorized_matrices_match_scalar_functions():
    b = gs.build_basis(n_alpha=3, n_beta=3, n_gamma=2, lo=0.05, hi=4.0, d=2)
    S, T = gs.overlap_matrix(b), gs.kinetic_matrix(b)
    V = pt.KeldyshPotential(20.0)
    P = gs.potential_matrices(b, {gs.Coordinate.X_MINUS_Y: V, gs.Coordinate.Y: V})
    fs = b.functions
    for i in range(len(b)):
        for j in range(len(b)):
            assert S[i, j] == pytest.approx(gs.overlap(fs[i], fs[j]), rel=1e-14)
            assert T[i, j] == pytest.approx(gs.kinetic(fs[i], fs[j]), rel=1e-13)
    for i, j in [(0, 0), (1, 5), (4, 17)]:
        assert P[gs.Coordinate.Y][i, j] == pytest.approx(gs.potential_me(fs[i], fs[j], "y", V), rel=1e-12)
        assert P[gs.Coordinate.X_MINUS_Y][i, j] == pytest.approx(
            gs.potential_me(fs[i], fs[j], "x_minus_y", V), rel=1e-12
        )


def test_overlap_matrix_positive_semidefinite():
    b = gs.build_basis()
    S = gs.overlap_matrix(b)
    assert np.array_equal(S, S.T)
    ev = np.linalg.eigvalsh(S)
    assert ev.min() >= -1e-12 * ev.max()


@settings(max_examples=100, deadline=None)
@given(gaussian_pair(1))
def test_symmetry_is_exact(pair):
    a, b = pair
    assert gs.overlap(a, b) == gs.overlap(b, a)
    assert gs.kinetic(a, b) == gs.kinetic(b, a)
    for which in gs.Coordinate:
        assert gs.reduction_coefficient(a, b, which) == gs.reduction_coefficient(b, a, which)


@settings(max_examples=100, deadline=None)
@given(gaussian_pair(2))
def test_cauchy_schwarz_and_positivity(pair):
    a, b = pair
    s = gs.overlap(a, b)
    assert s > 0 and gs.kinetic(a, b) > 0
    assert s**2 <= gs.overlap(a, a) * gs.overlap(b, b) * (1 + 1e-12)
    for which in gs.Coordinate:
        assert gs.reduction_coefficient(a, b, which) > 0
