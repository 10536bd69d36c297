"""Generalized symmetric eigenproblems H c = E S c with near-singular S.

Canonical orthogonalization: diagonalize S, drop directions whose overlap
eigenvalue is at most ``drop_tol`` times the largest, whiten the rest with
X = U diag(s)^{-1/2}, then diagonalize X^T H X.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_DROP_TOL = 1e-10
SYMMETRY_TOL = 1e-12


class DegenerateBasisError(ValueError):
    """Every overlap direction fell below the drop tolerance."""


class SymmetryError(ValueError):
    """Input matrix is not symmetric within tolerance."""


def check_symmetric(M: np.ndarray, name: str = "matrix", tol: float = SYMMETRY_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SymmetryError(f"{name} must be square, got shape {M.shape}")
    scale = np.abs(M).max() if M.size else 0.0
    if np.abs(M - M.T).max(initial=0.0) > tol * max(scale, np.finfo(float).tiny):
        raise SymmetryError(f"{name} is not symmetric within {tol} relative")
    return M


def eigenvalue_symmetric(M, return_vectors: bool = False):
    """Ascending spectrum of a real symmetric matrix (LAPACK syevd)."""
    M = check_symmetric(M)
    if return_vectors:
        return np.linalg.eigh(M)
    return np.linalg.eigvalsh(M)


@dataclass(frozen=True)
class GevpSolution:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # columns in the original basis
    retained_dim: int
    dropped_dim: int
    s_condition: float


class CanonicalOrthogonalizer:
    """Whitening map for a fixed overlap matrix, reusable across many H."""

    def __init__(self, S, drop_tol: float = DEFAULT_DROP_TOL):
        S = check_symmetric(S, "S")
        if not drop_tol >= 0:
            raise ValueError("drop_tol must be nonnegative")
        s, U = np.linalg.eigh(S)
        top = s[-1]
        if not top > 0:
            raise DegenerateBasisError("overlap matrix has no positive eigenvalue")
        keep = s > drop_tol * top
        if not keep.any():
            raise DegenerateBasisError("all overlap directions dropped")
        self.n = S.shape[0]
        self.retained_dim = int(keep.sum())
        self.dropped_dim = self.n - self.retained_dim
        self.s_condition = float(top / s[keep].min())
        self.X = U[:, keep] / np.sqrt(s[keep])
        self.drop_tol = drop_tol

    def solve(self, H, vectors: bool = False) -> GevpSolution:
        H = check_symmetric(H, "H")
        if H.shape[0] != self.n:
            raise ValueError(f"H has size {H.shape[0]}, S has size {self.n}")
        Hp = self.X.T @ H @ self.X
        Hp = 0.5 * (Hp + Hp.T)
        if vectors:
            e, C = np.linalg.eigh(Hp)
            C = self.X @ C
        else:
            e, C = np.linalg.eigvalsh(Hp), np.empty((self.n, 0))
        return GevpSolution(e, C, self.retained_dim, self.dropped_dim, self.s_condition)


def solve_gevp(H, S, drop_tol: float = DEFAULT_DROP_TOL, vectors: bool = True) -> GevpSolution:
    S = check_symmetric(S, "S")
    H = check_symmetric(H, "H")
    if H.shape != S.shape:
        raise ValueError(f"shape mismatch: H {H.shape} vs S {S.shape}")
    return CanonicalOrthogonalizer(S, drop_tol).solve(H, vectors=vectors)


def residuals(H, S, sol: GevpSolution) -> np.ndarray:
    """Relative residual ||H c - E S c|| / (||H|| + |E| ||S||) per pair."""
    H = np.asarray(H)
    S = np.asarray(S)
    R = H @ sol.vectors - (S @ sol.vectors) * sol.eigenvalues
    nh = np.linalg.norm(H, 2)
    ns = np.linalg.norm(S, 2)
    cn = np.linalg.norm(sol.vectors, axis=0)
    return np.linalg.norm(R, axis=0) / ((nh + np.abs(sol.eigenvalues) * ns) * cn)
