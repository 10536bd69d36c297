"""Two-body thresholds and the bottom of the essential spectrum.

Lambda0(V), the bottom of the spectrum of -2 Delta - V, is the
electron-hole pair energy; Lambda1(kappa, V), the bottom of the spectrum of
-Delta - kappa V, is the electron-impurity energy. The essential spectrum of the three-body operator starts at their
minimum, and the coupling where the two cross is k_e.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geigen import DEFAULT_DROP_TOL, CanonicalOrthogonalizer
from .quadrature import radial_moment

KE_BRACKET = (0.5, 1.0)
KE_TOL = 1e-4


class BracketError(ValueError):
    """Root-finding bracket shows no sign change."""


class Branch(enum.Enum):
    PAIR = "pair_branch"
    IMPURITY = "impurity_branch"


@dataclass(frozen=True)
class RadialBasisSpec:
    """Geometric grid on [lo / scale^2, hi] with ``n`` exponents."""

    n: int = 40
    lo: float = 1e-5
    hi: float = 50.0

    def exponents(self, scale: float = 1.0) -> np.ndarray:
        lo = self.lo / scale**2
        if not lo < self.hi:
            raise ValueError("radial basis range is empty")
        return np.geomspace(lo, self.hi, self.n)


DEFAULT_RADIAL = RadialBasisSpec()


@dataclass(frozen=True, eq=False)
class TwoBodyProblem:
    """Ground state of -m Delta - g W(|r|) in R^d."""

    m: float
    g: float
    potential: object
    d: int = 2
    exponents: np.ndarray | None = None

    def __post_init__(self):
        if not (self.m > 0 and self.g > 0):
            raise ValueError("kinetic coefficient and coupling must be positive")
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        ex = self.exponents
        if ex is None:
            ex = DEFAULT_RADIAL.exponents(self.potential.scale)
        ex = np.asarray(ex, dtype=float)
        if np.any(ex <= 0) or np.any(np.diff(ex) <= 0):
            raise ValueError("radial exponents must be positive and strictly increasing")
        object.__setattr__(self, "exponents", ex)


@lru_cache(maxsize=64)
def _radial_matrices(potential, d: int, ex_bytes: bytes):
    ex = np.frombuffer(ex_bytes)
    A = ex[:, None] + ex[None, :]
    S = (math.pi / A) ** (d / 2)
    T = 2 * d * np.outer(ex, ex) / A * S
    iu = np.triu_indices(ex.size)
    rho = radial_moment(potential, A[iu], d)
    P = np.empty_like(S)
    P[iu] = rho
    P.T[iu] = rho
    P *= S
    return S, T, P, CanonicalOrthogonalizer(S, DEFAULT_DROP_TOL)


def radial_matrices(p: TwoBodyProblem):
    """Overlap, unit kinetic and unit potential matrices of the radial basis."""
    return _radial_matrices(p.potential, p.d, p.exponents.tobytes())


def two_body_bottom(p: TwoBodyProblem) -> float:
    S, T, P, orth = radial_matrices(p)
    return float(orth.solve(p.m * T - p.g * P).eigenvalues[0])


def lambda0(V, d: int = 2, exponents=None) -> float:
    return two_body_bottom(TwoBodyProblem(2.0, 1.0, V, d, exponents))


def lambda1(kappa: float, V, d: int = 2, exponents=None) -> float:
    return two_body_bottom(TwoBodyProblem(1.0, kappa, V, d, exponents))


@dataclass(frozen=True)
class ThresholdReport:
    kappa: float
    lambda0: float
    lambda1_of_kappa: float
    lambda_: float
    branch: Branch


def essential_bottom(kappa: float, V, d: int = 2, exponents=None) -> ThresholdReport:
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    l0 = lambda0(V, d, exponents)
    l1 = lambda1(kappa, V, d, exponents)
    branch = Branch.PAIR if l0 <= l1 else Branch.IMPURITY
    return ThresholdReport(kappa, l0, l1, min(l0, l1), branch)


def find_ke(V, d: int = 2, exponents=None, tol: float = KE_TOL) -> float:
    """Coupling where Lambda1(kappa) = Lambda0, by bisection on [1/2, 1]."""
    l0 = lambda0(V, d, exponents)

    def f(k):
        return lambda1(k, V, d, exponents) - l0

    lo, hi = KE_BRACKET
    flo, fhi = f(lo), f(hi)
    if not (flo > 0 > fhi):
        raise BracketError(
            f"no sign change of Lambda1 - Lambda0 on [{lo}, {hi}]: {flo!r}, {fhi!r}; the radial basis is inadequate"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
