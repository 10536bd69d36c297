"""One-dimensional models: the flat well and the large-coupling oscillator limit.

Flat well: -u'' - kappa w0 1_{|x|<=1} u = e u. The even ground state is
C cos(beta x) inside and D exp(-omega |x|) outside, with beta^2 + omega^2 =
kappa w0 and beta tan(beta) = omega.

Oscillator limit: h = -d^2/dx^2 - sqrt(kappa) v(kappa^{-1/4} x) approaches
-d^2/dx^2 + omega^2 x^2 - sqrt(kappa) v(0) with omega^2 = -v''(0)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geigen import solve_gevp
from .potentials import RadialPotential, SmoothBumpPotential, omega_of
from .quadrature import gauss_legendre_panels, radial_integral


@dataclass(frozen=True)
class FlatWellGround:
    kappa: float
    w0: float
    e: float
    beta: float
    omega_dec: float
    C: float
    D: float  # inf when exp(omega) overflows; D_edge carries the value
    D_edge: float  # D exp(-omega), the value at |x| = 1

    def phi(self, x):
        """Normalized ground state on the whole line."""
        x = np.abs(np.asarray(x, dtype=float))
        inside = self.C * np.cos(self.beta * np.minimum(x, 1.0))
        outside = self.D_edge * np.exp(-self.omega_dec * (x - 1.0))
        return np.where(x <= 1.0, inside, outside)

    def matching_residuals(self) -> tuple[float, float]:
        b, w, C, De = self.beta, self.omega_dec, self.C, self.D_edge
        return (C * math.cos(b) - De, b * C * math.sin(b) - w * De)

    def normalization_residual(self) -> float:
        b, w = self.beta, self.omega_dec
        return self.C**2 * (1 + math.cos(b) * math.sin(b) * self.kappa * self.w0 / (b * w * w)) - 1.0


def _root_function(beta: float, depth: float) -> float:
    # beta tan(beta) - omega, multiplied by cos(beta) so it stays finite at pi/2
    return beta * math.sin(beta) - math.sqrt(depth - beta * beta) * math.cos(beta)


def flat_well_ground(kappa: float, w0: float) -> FlatWellGround:
    depth = kappa * w0
    if not depth > 0:
        raise ValueError("kappa * w0 must be positive")
    lo, hi = 0.0, min(0.5 * math.pi, math.sqrt(depth))
    # bisection to exhaustion: the function is increasing on the window
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _root_function(mid, depth) < 0:
            lo = mid
        else:
            hi = mid
    beta = lo if abs(_root_function(lo, depth)) <= abs(_root_function(hi, depth)) else hi
    omega = math.sqrt(depth - beta * beta)
    e = -omega * omega
    C = 1.0 / math.sqrt(1.0 + math.cos(beta) * math.sin(beta) * depth / (beta * omega * omega))
    D_edge = C * math.cos(beta)
    D = D_edge * math.exp(omega) if omega < 700 else math.inf
    return FlatWellGround(kappa, w0, e, beta, omega, C, D, D_edge)


def flat_well_upper_bound(kappa: float, w0: float) -> float:
    """-kappa w0 / (2 + 1/(kappa w0)), an upper bound on the ground energy."""
    t = kappa * w0
    return -t / (2.0 + 1.0 / t)


@dataclass(frozen=True)
class CertificateReport:
    kappa: float
    w0: float
    q_value: float
    closed_bound: float
    certified: bool
    e_w: float


def closed_bound(w0: float) -> float:
    return 2.0 - (4.0 / (9.0 * math.pi**4)) * w0 * w0 / (3.0 * w0 + 2.0)


def qw_certificate(kappa: float, w0: float, points: int = 40) -> CertificateReport:
    """Evaluate 2 - (w0/3) int_0^1 phi^2 x^3 dx with the exact ground state.

    A negative value certifies a discrete eigenvalue below e_w(kappa).
    """
    if not kappa > 1:
        raise ValueError("the certificate applies to kappa > 1")
    g = flat_well_ground(kappa, w0)
    x, w = gauss_legendre_panels(0.0, 1.0, points, panels=4)
    integral = float(np.dot(w, (g.C * np.cos(g.beta * x)) ** 2 * x**3))
    q = 2.0 - (w0 / 3.0) * integral
    return CertificateReport(kappa, w0, q, closed_bound(w0), q < 0, g.e)


# --- harmonic limit ---------------------------------------------------------


@dataclass(frozen=True)
class _ShiftedBump(RadialPotential):
    """sqrt(kappa) [v(0) - v(kappa^{-1/4} r)] >= 0."""

    v: SmoothBumpPotential
    kappa: float

    @property
    def scale(self) -> float:
        return self.kappa**0.25

    @property
    def support(self):
        return None

    def _profile(self, r):
        y = r * self.kappa**-0.25
        return math.sqrt(self.kappa) * (self.v.v0 - self.v._profile(y))

    def describe(self):
        return {"kind": "shifted_bump", "v0": self.v.v0, "kappa": self.kappa}


@dataclass(frozen=True)
class HarmonicLevels:
    kappa: float
    omega: float
    shifted: tuple[float, ...]


def _channel_energy(a: np.ndarray, U: RadialPotential, odd: bool) -> float:
    A = a[:, None] + a[None, :]
    b = np.outer(a, np.ones_like(a))
    bb = b.T
    I0 = np.sqrt(math.pi / A)
    I2 = I0 / (2 * A)
    I4 = 3 * I0 / (4 * A * A)
    iu = np.triu_indices(a.size)
    if odd:
        S = I2
        T = I0 - 2 * (b + bb) * I2 + 4 * b * bb * I4
        vals = 2.0 * radial_integral(U, A[iu], 2)
    else:
        S = I0
        T = 4 * b * bb * I2
        vals = 2.0 * radial_integral(U, A[iu], 0)
    P = np.empty_like(S)
    P[iu] = vals
    P.T[iu] = vals
    return float(solve_gevp(T + P, S, vectors=False).eigenvalues[0])


def harmonic_limit(v: SmoothBumpPotential, kappa: float, n_levels: int = 2, n_basis: int = 20) -> HarmonicLevels:
    """Lowest shifted energies E_j + sqrt(kappa) v(0) of h_kappa, j <= n_levels.

    Even (j = 1) and odd (j = 2) channels are diagonalized separately with
    exponents spanning [omega/10, 10 omega].
    """
    if not kappa >= 1:
        raise ValueError("kappa must be at least 1")
    if n_levels not in (1, 2):
        raise ValueError("n_levels must be 1 or 2")
    w = omega_of(v)
    a = np.geomspace(w / 10.0, 10.0 * w, n_basis)
    U = _ShiftedBump(v, float(kappa))
    levels = [_channel_energy(a, U, odd=False)]
    if n_levels == 2:
        levels.append(_channel_energy(a, U, odd=True))
    return HarmonicLevels(float(kappa), w, tuple(levels))
