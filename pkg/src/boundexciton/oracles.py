"""Independent cross-checks runnable outside the test suite (``oracle-check``)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gaussians, geigen, specialfun
from .quadrature import QuadratureConfig, tanh_sinh, tensor_oracle


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    passed: bool


def struve_y0_integral(x) -> np.ndarray:
    """H0(x) - Y0(x) = (2/pi) int_0^inf exp(-x t) / sqrt(1 + t^2) dt."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cfg = QuadratureConfig(rel_tol=1e-13, max_levels=10)
    upper = np.log(60.0 / x)  # t = e^u, cut where x t = 60

    def f(k, u):
        t = np.exp(u)
        return np.exp(-x[k, None] * t) * t / np.sqrt(1.0 + t * t)

    # split at t = 1 so both pieces are smooth in u
    lower = np.full_like(x, -40.0)
    head = tanh_sinh(f, lower, np.minimum(0.0, upper), cfg)
    tail = np.zeros_like(x)
    pos = upper > 0
    if pos.any():
        idx = np.flatnonzero(pos)
        tail[idx] = tanh_sinh(lambda k, u: f(idx[k], u), np.zeros(idx.size), upper[idx], cfg)
    return (2.0 / math.pi) * (head + tail)


def check_special(n: int = 60, x_min: float = 1e-6, x_max: float = 30.0) -> CheckResult:
    x = np.geomspace(x_min, x_max, n)
    err = np.abs(specialfun.struve_minus_y0(x) - struve_y0_integral(x))
    return CheckResult("struve_minus_y0 vs integral representation", float(err.max()), 1e-10, bool(err.max() <= 1e-10))


def random_triples(rng: np.random.Generator, n: int, lo: float = 0.2, hi: float = 3.0) -> np.ndarray:
    ex = np.exp(rng.uniform(math.log(lo), math.log(hi), size=(n, 3)))
    ex[rng.random(n) < 0.2, 2] = 0.0  # some uncorrelated functions
    return ex


def overlap_kinetic_by_quadrature(a: gaussians.CorrelatedGaussian, b: gaussians.CorrelatedGaussian,
                                  points: int = 48) -> tuple[float, float]:
    """Brute-force d=1 overlap and kinetic on a 2D tensor grid."""
    B = a.A + b.A
    lam_min = np.linalg.eigvalsh(B)[0]
    L = math.sqrt(45.0 / lam_min)
    Aa, Ab = a.A, b.A

    def dens(z):
        qa = np.einsum("ni,ij,nj->n", z, Aa, z)
        qb = np.einsum("ni,ij,nj->n", z, Ab, z)
        return np.exp(-qa - qb)

    def grad(z):
        return 4.0 * np.einsum("ni,ni->n", z @ Aa, z @ Ab) * dens(z)

    box = [(-L, L), (-L, L)]
    return (tensor_oracle(dens, box, points, panels=4), tensor_oracle(grad, box, points, panels=4))


def check_matrix_elements(pairs: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    ta, tb = random_triples(rng, pairs), random_triples(rng, pairs)
    worst = 0.0
    for p, q in zip(ta, tb):
        a = gaussians.CorrelatedGaussian(*p, d=1)
        b = gaussians.CorrelatedGaussian(*q, d=1)
        s, t = overlap_kinetic_by_quadrature(a, b)
        worst = max(worst, abs(gaussians.overlap(a, b) / s - 1), abs(gaussians.kinetic(a, b) / t - 1))
    return CheckResult("overlap/kinetic vs tensor quadrature", worst, 1e-8, worst <= 1e-8)


def cholesky_oracle(H: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Eigenvalues of the pencil via S = L L^T and L^-1 H L^-T."""
    L = np.linalg.cholesky(S)
    Li = np.linalg.inv(L)
    M = Li @ H @ Li.T
    return np.sort(np.linalg.eigvalsh(0.5 * (M + M.T)))


def random_pencil(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    G = rng.standard_normal((n, n))
    H = 0.5 * (G + G.T)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    S = (Q * rng.uniform(0.5, 2.0, n)) @ Q.T
    return H, 0.5 * (S + S.T)


def check_gevp(instances: int, seed: int, n: int = 30) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        H, S = random_pencil(rng, n)
        e = geigen.solve_gevp(H, S).eigenvalues
        ref = cholesky_oracle(H, S)
        # normwise relative: eigenvalues near zero would otherwise dominate
        worst = max(worst, float(np.max(np.abs(e - ref)) / np.max(np.abs(ref))))
    return CheckResult("GEVP vs Cholesky reduction", worst, 1e-9, worst <= 1e-9)


def run_all(pairs: int = 20, seed: int = 12345) -> list[CheckResult]:
    return [check_special(), check_matrix_elements(pairs, seed), check_gevp(20, seed)]
