"""Correlated Gaussian basis and its closed-form matrix elements.

A basis function is g(x, y) = exp(-alpha|x|^2 - beta|y|^2 - gamma|x-y|^2) on
R^d x R^d, i.e. exp(-z^T A z) with A = [[alpha+gamma, -gamma], [-gamma,
beta+gamma]] acting on the two particle coordinates. Products of two such
functions are governed by B = A_a + A_b; every matrix element below is a
function of B alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .quadrature import DEFAULT_CONFIG, QuadratureConfig, radial_moment


class Coordinate(enum.Enum):
    X = "x"
    Y = "y"
    X_MINUS_Y = "x_minus_y"


_WEIGHTS = {
    Coordinate.X: (1.0, 0.0),
    Coordinate.Y: (0.0, 1.0),
    Coordinate.X_MINUS_Y: (1.0, -1.0),
}


@dataclass(frozen=True)
class CorrelatedGaussian:
    alpha: float
    beta: float
    gamma: float
    d: int = 2

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("exponents must be nonnegative")
        if not is_admissible(self.alpha, self.beta, self.gamma):
            raise ValueError(f"quadratic form is not positive definite for {self.triple}")

    @property
    def triple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    @property
    def A(self) -> np.ndarray:
        g = self.gamma
        return np.array([[self.alpha + g, -g], [-g, self.beta + g]])

    def __call__(self, x, y):
        """Value at points x, y given as arrays of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x2 = (x * x).sum(-1)
        y2 = (y * y).sum(-1)
        r2 = ((x - y) ** 2).sum(-1)
        return np.exp(-self.alpha * x2 - self.beta * y2 - self.gamma * r2)


def is_admissible(alpha, beta, gamma):
    """alpha + gamma > 0 and alpha beta + alpha gamma + beta gamma > 0."""
    return (np.asarray(alpha) + gamma > 0) & (alpha * beta + alpha * gamma + beta * gamma > 0)


@dataclass(frozen=True)
class PairForm:
    B: np.ndarray
    detB: float
    Binv: np.ndarray

    @classmethod
    def of(cls, a: CorrelatedGaussian, b: CorrelatedGaussian) -> "PairForm":
        if a.d != b.d:
            raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
        B = a.A + b.A
        det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
        if not (B[0, 0] > 0 and det > 0):
            raise ValueError("combined quadratic form is not positive definite")
        Binv = np.array([[B[1, 1], -B[0, 1]], [-B[1, 0], B[0, 0]]]) / det
        return cls(B, float(det), Binv)


def overlap(a: CorrelatedGaussian, b: CorrelatedGaussian) -> float:
    pf = PairForm.of(a, b)
    return (math.pi**2 / pf.detB) ** (a.d / 2)


def kinetic(a: CorrelatedGaussian, b: CorrelatedGaussian) -> float:
    """<g_a| -Delta_x - Delta_y |g_b>."""
    pf = PairForm.of(a, b)
    # average both orderings so the result is symmetric bit for bit
    t_ab = np.trace(a.A @ pf.Binv @ b.A)
    t_ba = np.trace(b.A @ pf.Binv @ a.A)
    return 2 * a.d * 0.5 * (t_ab + t_ba) * overlap(a, b)


def reduction_coefficient(a: CorrelatedGaussian, b: CorrelatedGaussian, which) -> float:
    """Gaussian exponent of the product g_a g_b marginalized onto w^T z."""
    w = np.array(_WEIGHTS[Coordinate(which)])
    pf = PairForm.of(a, b)
    return float(1.0 / (w @ pf.Binv @ w))


def potential_me(a, b, which, W, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """<g_a| W(|w^T z|) |g_b> (unsigned)."""
    c = reduction_coefficient(a, b, which)
    return overlap(a, b) * radial_moment(W, c, a.d, config)


# --- basis sets -------------------------------------------------------------


@dataclass(frozen=True)
class BasisSpec:
    """Generation parameters for a product grid of exponents.

    Each channel gets a geometric grid on [lo, hi]; channels listed in
    ``zero_channels`` replace their lowest point with an explicit 0 (so the
    channel count is unchanged). ``total`` truncates the admissible product.
    """

    n_alpha: int = 8
    n_beta: int = 8
    n_gamma: int = 5
    lo: float = 1e-4
    hi: float = 7.0
    d: int = 2
    zero_channels: tuple[str, ...] = ("gamma",)
    total: int | None = None

    def __post_init__(self):
        if min(self.n_alpha, self.n_beta, self.n_gamma) < 1:
            raise ValueError("channel counts must be positive")
        if not (self.lo > 0 and self.hi > 0):
            raise ValueError("exponent bounds must be positive")
        if self.lo > self.hi:
            raise ValueError(f"lo={self.lo} exceeds hi={self.hi}")
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        bad = set(self.zero_channels) - {"alpha", "beta", "gamma"}
        if bad:
            raise ValueError(f"unknown channel(s) {sorted(bad)}")

    def grid(self, channel: str) -> np.ndarray:
        n = getattr(self, f"n_{channel}")
        zero = channel in self.zero_channels
        m = n - 1 if zero else n
        if m <= 0:
            pts = np.zeros(0)
        elif m == 1:
            pts = np.array([self.lo])
        else:
            pts = self.lo * (self.hi / self.lo) ** (np.arange(m) / (m - 1))
        return np.concatenate([[0.0], pts]) if zero else pts


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Ordered exponent triples (n, 3) sharing a dimension."""

    exponents: np.ndarray
    d: int = 2
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        ex = np.asarray(self.exponents, dtype=float).reshape(-1, 3)
        if ex.shape[0] == 0:
            raise ValueError("basis is empty")
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if np.any(ex < 0) or not np.all(is_admissible(*ex.T)):
            raise ValueError("basis contains an inadmissible exponent triple")
        if np.unique(ex, axis=0).shape[0] != ex.shape[0]:
            raise ValueError("basis contains duplicate exponent triples")
        ex.setflags(write=False)
        object.__setattr__(self, "exponents", ex)

    def __len__(self):
        return self.exponents.shape[0]

    def __getitem__(self, i) -> CorrelatedGaussian:
        a, b, g = self.exponents[i]
        return CorrelatedGaussian(float(a), float(b), float(g), self.d)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def functions(self) -> list[CorrelatedGaussian]:
        return list(self)

    def key(self) -> tuple:
        """Hashable identity used for caching assembled matrices."""
        return (self.d, self.exponents.tobytes())

    def subset(self, idx) -> "BasisSet":
        return BasisSet(self.exponents[np.asarray(idx)], self.d, {**self.provenance, "subset": True})

    def to_text(self) -> str:
        lines = [f"# d={self.d}", "# alpha beta gamma"]
        lines += [" ".join(repr(float(v)) for v in row) for row in self.exponents]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str, d: int | None = None) -> "BasisSet":
        rows, dim = [], d
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# d=") and dim is None:
                    dim = int(line[4:])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"expected three exponents per line, got {line!r}")
            rows.append([float(p) for p in parts])
        return cls(np.array(rows), dim or 2, {"source": "text"})

    @classmethod
    def load(cls, path, d: int | None = None) -> "BasisSet":
        return cls.from_text(Path(path).read_text(), d)


def build_basis(spec: BasisSpec | None = None, **kwargs) -> BasisSet:
    spec = spec or BasisSpec(**kwargs)
    ga, gb, gg = spec.grid("alpha"), spec.grid("beta"), spec.grid("gamma")
    triples = np.array(np.meshgrid(ga, gb, gg, indexing="ij")).reshape(3, -1).T
    ok = is_admissible(*triples.T)
    triples = triples[ok]
    if triples.shape[0] == 0:
        raise ValueError("no admissible exponent triples in the requested grid")
    if spec.total is not None:
        triples = triples[: spec.total]
    prov = {
        "n_alpha": spec.n_alpha,
        "n_beta": spec.n_beta,
        "n_gamma": spec.n_gamma,
        "lo": spec.lo,
        "hi": spec.hi,
        "zero_channels": list(spec.zero_channels),
        "dropped_inadmissible": int((~ok).sum()),
    }
    return BasisSet(triples, spec.d, prov)


def scale_basis(basis: BasisSet, factor: float) -> BasisSet:
    if not factor > 0:
        raise ValueError("scale factor must be positive")
    return BasisSet(basis.exponents * factor, basis.d, {**basis.provenance, "scaled_by": factor})


# --- vectorized assembly ----------------------------------------------------


@dataclass(frozen=True)
class PairArrays:
    """Upper-triangle pair data for a basis (i <= j)."""

    i: np.ndarray
    j: np.ndarray
    overlap: np.ndarray
    kinetic: np.ndarray
    c: dict  # Coordinate -> reduction coefficients


def pair_arrays(basis: BasisSet) -> PairArrays:
    ex = basis.exponents
    d = basis.d
    i, j = np.triu_indices(len(basis))
    a11 = ex[:, 0] + ex[:, 2]
    a22 = ex[:, 1] + ex[:, 2]
    a12 = -ex[:, 2]
    b11 = a11[i] + a11[j]
    b22 = a22[i] + a22[j]
    b12 = a12[i] + a12[j]
    det = b11 * b22 - b12 * b12
    s = (math.pi**2 / det) ** (d / 2)
    inv11, inv22, inv12 = b22 / det, b11 / det, -b12 / det

    def trace(p11, p12, p22, q11, q12, q22):
        # tr(P Binv Q) for symmetric 2x2 P, Q
        m11 = inv11 * q11 + inv12 * q12
        m12 = inv11 * q12 + inv12 * q22
        m21 = inv12 * q11 + inv22 * q12
        m22 = inv12 * q12 + inv22 * q22
        return p11 * m11 + p12 * m21 + p12 * m12 + p22 * m22

    t_ij = trace(a11[i], a12[i], a22[i], a11[j], a12[j], a22[j])
    t_ji = trace(a11[j], a12[j], a22[j], a11[i], a12[i], a22[i])
    kin = 2 * d * 0.5 * (t_ij + t_ji) * s
    c = {
        Coordinate.X: det / b22,
        Coordinate.Y: det / b11,
        Coordinate.X_MINUS_Y: det / (b11 + b22 + 2 * b12),
    }
    return PairArrays(i, j, s, kin, c)


def _symmetric(n: int, i, j, vals) -> np.ndarray:
    M = np.empty((n, n))
    M[i, j] = vals
    M[j, i] = vals
    return M


def overlap_matrix(basis: BasisSet, pairs: PairArrays | None = None) -> np.ndarray:
    p = pairs or pair_arrays(basis)
    return _symmetric(len(basis), p.i, p.j, p.overlap)


def kinetic_matrix(basis: BasisSet, pairs: PairArrays | None = None) -> np.ndarray:
    p = pairs or pair_arrays(basis)
    return _symmetric(len(basis), p.i, p.j, p.kinetic)


def potential_matrices(
    basis: BasisSet,
    potentials: dict,
    pairs: PairArrays | None = None,
    config: QuadratureConfig = DEFAULT_CONFIG,
) -> dict:
    """Unsigned potential matrices for each ``{coordinate: W}`` entry.

    Distinct reduction coefficients are integrated once per potential, so
    channels related by the alpha <-> beta symmetry share their quadratures.
    """
    p = pairs or pair_arrays(basis)
    n = len(basis)
    out = {}
    groups: dict[int, list] = {}
    for coord, W in potentials.items():
        groups.setdefault(id(W), [W, []])[1].append(Coordinate(coord))
    for W, coords in groups.values():
        allc = np.concatenate([p.c[k] for k in coords])
        uniq, inv = np.unique(allc, return_inverse=True)
        rho = radial_moment(W, uniq, basis.d, config)[inv.ravel()]
        for m, k in enumerate(coords):
            seg = rho[m * p.i.size : (m + 1) * p.i.size]
            out[k] = _symmetric(n, p.i, p.j, p.overlap * seg)
    return out
