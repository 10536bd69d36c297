"""Three-body operator -Delta - kappa V(x) + lambda V(y) - V(x - y).

Here x is the electron-impurity separation, y the hole-impurity separation,
and x - y the electron-hole separation. Since the overlap and the unit
kinetic/potential matrices do not depend on the couplings, they are
assembled once per (basis, potential) and every coupling reuses them, along
with the whitening map of the overlap matrix.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from collections import OrderedDict
import threading

import numpy as np

from .geigen import DEFAULT_DROP_TOL, CanonicalOrthogonalizer, GevpSolution
from .gaussians import (
    BasisSet,
    Coordinate,
    kinetic_matrix,
    overlap_matrix,
    pair_arrays,
    potential_matrices,
    scale_basis,
)
from .potentials import ScaledPotential
from .spectra import BracketError, ThresholdReport, essential_bottom

DEFAULT_MARGIN = 1e-4
KAPPA_C_TOL = 1e-3
SCALING_DROP_TOL = 1e-7


@dataclass(frozen=True)
class ModelParams:
    kappa: float
    V: object
    lam: float | None = None
    d: int = 2

    def __post_init__(self):
        if self.lam is None:
            object.__setattr__(self, "lam", self.kappa)
        if not (self.kappa > 0 and self.lam > 0):
            raise ValueError("couplings must be positive")
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")


@dataclass(frozen=True)
class UnitMatrices:
    S: np.ndarray
    T: np.ndarray
    Px: np.ndarray
    Py: np.ndarray
    Pxy: np.ndarray

    def hamiltonian(self, cx: float, cy: float, cxy: float) -> np.ndarray:
        return self.T - cx * self.Px + cy * self.Py - cxy * self.Pxy


_CACHE_SIZE = 16
_unit_cache: OrderedDict = OrderedDict()
_orth_cache: OrderedDict = OrderedDict()
_cache_lock = threading.Lock()


def _cached(cache: OrderedDict, key, build):
    with _cache_lock:
        if key in cache:
            cache.move_to_end(key)
            return cache[key]
    value = build()
    with _cache_lock:
        cache[key] = value
        while len(cache) > _CACHE_SIZE:
            cache.popitem(last=False)
    return value


def unit_matrices(basis: BasisSet, V, Vy=None, Vxy=None) -> UnitMatrices:
    """Coupling-free matrices S, T, Px, Py, Pxy (cached per basis and potentials)."""
    Vy = V if Vy is None else Vy
    Vxy = V if Vxy is None else Vxy

    def build():
        p = pair_arrays(basis)
        pots = potential_matrices(
            basis, {Coordinate.X: V, Coordinate.Y: Vy, Coordinate.X_MINUS_Y: Vxy}, p
        )
        return UnitMatrices(
            overlap_matrix(basis, p),
            kinetic_matrix(basis, p),
            pots[Coordinate.X],
            pots[Coordinate.Y],
            pots[Coordinate.X_MINUS_Y],
        )

    return _cached(_unit_cache, (basis.key(), V, Vy, Vxy), build)


def orthogonalizer(basis: BasisSet, S: np.ndarray, drop_tol: float = DEFAULT_DROP_TOL):
    return _cached(_orth_cache, (basis.key(), drop_tol), lambda: CanonicalOrthogonalizer(S, drop_tol))


@dataclass(frozen=True)
class OperatorMatrices:
    H: np.ndarray
    S: np.ndarray
    params: ModelParams
    provenance: dict = field(default_factory=dict)


def assemble(params: ModelParams, basis: BasisSet) -> OperatorMatrices:
    if basis.d != params.d:
        raise ValueError(f"basis dimension {basis.d} does not match model dimension {params.d}")
    u = unit_matrices(basis, params.V)
    H = u.hamiltonian(params.kappa, params.lam, 1.0)
    return OperatorMatrices(H, u.S, params, dict(basis.provenance))


def _solve(params: ModelParams, basis: BasisSet, drop_tol: float, vectors: bool = False) -> GevpSolution:
    if basis.d != params.d:
        raise ValueError(f"basis dimension {basis.d} does not match model dimension {params.d}")
    u = unit_matrices(basis, params.V)
    orth = orthogonalizer(basis, u.S, drop_tol)
    return orth.solve(u.hamiltonian(params.kappa, params.lam, 1.0), vectors=vectors)


@dataclass(frozen=True)
class SpectrumResult:
    threshold: ThresholdReport
    discrete: np.ndarray
    unresolved: np.ndarray
    gap: float | None
    eigenvalues: np.ndarray
    retained_dim: int
    dropped_dim: int
    s_condition: float

    @property
    def essential_bottom(self) -> float:
        return self.threshold.lambda_

    @property
    def n_discrete(self) -> int:
        return int(self.discrete.size)


def classify(eigenvalues: np.ndarray, lam: float, margin: float = DEFAULT_MARGIN):
    """Split eigenvalues into discrete (below lam - margin|lam|) and unresolved."""
    cut = lam - margin * abs(lam)
    discrete = eigenvalues[eigenvalues < cut]
    unresolved = eigenvalues[(eigenvalues >= cut) & (eigenvalues < lam)]
    return discrete, unresolved


def discrete_spectrum(
    params: ModelParams,
    basis: BasisSet,
    detection_margin: float = DEFAULT_MARGIN,
    drop_tol: float = DEFAULT_DROP_TOL,
    radial_exponents=None,
) -> SpectrumResult:
    sol = _solve(params, basis, drop_tol)
    # the electron-impurity branch carries kappa; lambda only enters the repulsive hole term
    thr = essential_bottom(params.kappa, params.V, params.d, radial_exponents)
    discrete, unresolved = classify(sol.eigenvalues, thr.lambda_, detection_margin)
    gap = float(thr.lambda_ - discrete[0]) if discrete.size else None
    return SpectrumResult(
        thr, discrete, unresolved, gap, sol.eigenvalues, sol.retained_dim, sol.dropped_dim, sol.s_condition
    )


@dataclass(frozen=True)
class SweepRecord:
    kappa: float
    lam: float
    lambda0: float | None
    lambda1: float | None
    lambda_: float | None
    branch: str | None
    discrete: tuple[float, ...]
    unresolved: tuple[float, ...]
    gap: float | None
    retained_dim: int | None = None
    dropped_dim: int | None = None
    error: str | None = None

    @property
    def n_discrete(self) -> int:
        return len(self.discrete)


def _record(kappa, lam, V, basis, margin, drop_tol, radial_exponents) -> SweepRecord:
    try:
        res = discrete_spectrum(ModelParams(kappa, V, lam, basis.d), basis, margin, drop_tol, radial_exponents)
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        return SweepRecord(kappa, lam, None, None, None, None, (), (), None, error=f"{type(exc).__name__}: {exc}")
    t = res.threshold
    return SweepRecord(
        kappa,
        lam,
        t.lambda0,
        t.lambda1_of_kappa,
        t.lambda_,
        t.branch.value,
        tuple(float(e) for e in res.discrete),
        tuple(float(e) for e in res.unresolved),
        res.gap,
        res.retained_dim,
        res.dropped_dim,
    )


def sweep_kappa(
    grid,
    V,
    basis: BasisSet,
    lambda_rule="equal_kappa",
    detection_margin: float = DEFAULT_MARGIN,
    drop_tol: float = DEFAULT_DROP_TOL,
    threads: int = 1,
    radial_exponents=None,
) -> list[SweepRecord]:
    """One record per kappa; ``lambda_rule`` is "equal_kappa" or a fixed lambda."""
    grid = [float(k) for k in grid]
    if not grid:
        raise ValueError("empty kappa grid")
    if lambda_rule == "equal_kappa":
        lams = grid
    else:
        lams = [float(lambda_rule)] * len(grid)
    # warm the shared caches before fanning out; failures surface per row
    try:
        unit_matrices(basis, V)
    except Exception:
        pass

    def row(args):
        k, lam = args
        return _record(k, lam, V, basis, detection_margin, drop_tol, radial_exponents)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(row, zip(grid, lams)))
    return [row(a) for a in zip(grid, lams)]


def has_discrete(kappa: float, V, basis: BasisSet, order: int = 1, margin: float = DEFAULT_MARGIN,
                 drop_tol: float = DEFAULT_DROP_TOL, radial_exponents=None) -> bool:
    res = discrete_spectrum(ModelParams(kappa, V, None, basis.d), basis, margin, drop_tol, radial_exponents)
    return res.n_discrete >= order


def find_kappa_c(
    V,
    basis: BasisSet,
    order: int = 1,
    bracket: tuple[float, float] = (0.9, 1.2),
    tol: float = KAPPA_C_TOL,
    margin: float = DEFAULT_MARGIN,
    drop_tol: float = DEFAULT_DROP_TOL,
    radial_exponents=None,
) -> float:
    """Coupling where the ``order``-th discrete eigenvalue appears or disappears."""
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ValueError("bracket must be an increasing interval")

    def exists(k):
        return has_discrete(k, V, basis, order, margin, drop_tol, radial_exponents)

    at_lo = exists(lo)
    if exists(hi) == at_lo:
        raise BracketError(f"existence of eigenvalue {order} does not change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exists(mid) == at_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ExpFit:
    A: float
    a: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


def fit_exponential(kappa, gap, window=None) -> ExpFit:
    """Least squares of ln(gap) against kappa^-2: gap = A exp(-a / kappa^2)."""
    k = np.asarray(kappa, dtype=float)
    g = np.asarray(gap, dtype=float)
    if k.size < 4:
        raise ValueError(f"need at least 4 points in the fit window, got {k.size}")
    if np.any(~(g > 0)):
        raise ValueError("nonpositive gap in the fit window: the shallow state is not resolved")
    u = k**-2
    slope, intercept = np.polyfit(u, np.log(g), 1)
    resid = np.log(g) - (intercept + slope * u)
    sst = ((np.log(g) - np.log(g).mean()) ** 2).sum()
    r2 = 1.0 - (resid**2).sum() / sst if sst > 0 else 1.0
    win = window if window is not None else (float(k.min()), float(k.max()))
    return ExpFit(float(math.exp(intercept)), float(-slope), float(r2), tuple(win), int(k.size))


def fit_small_kappa(records, window=(0.10, 0.25)) -> ExpFit:
    lo, hi = window
    rows = [r for r in records if lo <= r.kappa <= hi]
    if len(rows) < 4:
        raise ValueError(f"need at least 4 records in [{lo}, {hi}], got {len(rows)}")
    bad = [r.kappa for r in rows if r.gap is None or not r.gap > 0]
    if bad:
        raise ValueError(f"no resolved bound state at kappa = {bad}: the basis failed to resolve the shallow state")
    return fit_exponential([r.kappa for r in rows], [r.gap for r in rows], window)


@dataclass(frozen=True)
class ScalingCheck:
    kappa: float
    d: int
    factor: float
    raw: np.ndarray
    scaled: np.ndarray
    deviation: float


def scaling_factor(kappa: float, d: int) -> float:
    """Energy factor s of the unitary dilation: kappa in 2D, sqrt(kappa) in 1D."""
    return kappa if d == 2 else math.sqrt(kappa)


def scaling_check(params: ModelParams, basis: BasisSet, drop_tol: float = SCALING_DROP_TOL,
                  n_levels: int = 8) -> ScalingCheck:
    """Compare E(H) with s E(A), A the dilated operator on the dilated basis.

    With x = x'/sqrt(s), H = s [-Delta' - (kappa/s) V(x'/sqrt s) + (lambda/s)
    V(y'/sqrt s) - (1/s) V((x'-y')/sqrt s)], and the basis exponents map to
    their 1/s multiples. Both pencils are assembled independently, so the
    deviation measures only floating-point noise. It is taken over the
    lowest ``n_levels`` eigenvalues, relative to their magnitude.

    The identity holds for any retained subspace. The default drop tolerance
    is looser than the solver's because at 1e-10 a one-ulp perturbation of S
    already moves the low eigenvalues by ~1e-9.
    """
    s = scaling_factor(params.kappa, params.d)
    raw = _solve(params, basis, drop_tol).eigenvalues
    Vs = ScaledPotential(params.V, math.sqrt(s), 1.0)
    sb = scale_basis(basis, 1.0 / s)
    u = unit_matrices(sb, Vs)
    orth = CanonicalOrthogonalizer(u.S, drop_tol)
    scaled = s * orth.solve(u.hamiltonian(params.kappa / s, params.lam / s, 1.0 / s)).eigenvalues
    m = min(n_levels, raw.size, scaled.size)
    if raw.size != scaled.size:
        dev = math.inf
    else:
        dev = float(np.max(np.abs(raw[:m] - scaled[:m]) / np.abs(raw[:m])))
    return ScalingCheck(params.kappa, params.d, s, raw, scaled, dev)
