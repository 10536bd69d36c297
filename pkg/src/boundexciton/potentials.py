"""Radial potential profiles W(r) >= 0.

The catalog stores the positive magnitude of each interaction; the
Hamiltonian assembly decides the sign of every term.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .specialfun import EULER_GAMMA, struve_minus_y0


class SingularityError(ValueError):
    """A log-divergent profile was evaluated at the origin."""


class OriginKind(enum.Enum):
    FINITE = "finite"
    LOG_DIVERGENT = "log_divergent"


@dataclass(frozen=True)
class Decay:
    kind: str  # "compact_support" | "power_tail" | "exponential"
    value: float | None = None


class RadialPotential:
    """Interface shared by every profile.

    Subclasses provide ``_profile(r)`` for r > 0 (vectorized) plus the
    metadata attributes used by the quadrature: ``origin_kind``, ``decay``
    and ``scale`` (the characteristic length).
    """

    origin_kind: OriginKind = OriginKind.FINITE
    decay: Decay = Decay("exponential")

    @property
    def scale(self) -> float:
        raise NotImplementedError

    @property
    def support(self) -> float | None:
        """Radius beyond which W vanishes identically, or None."""
        return self.decay.value if self.decay.kind == "compact_support" else None

    def _profile(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, r):
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0):
            raise ValueError("radial argument must be nonnegative")
        if self.origin_kind is OriginKind.LOG_DIVERGENT and np.any(arr == 0):
            raise SingularityError(f"{type(self).__name__} diverges at r = 0")
        out = self._profile(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out

    __call__ = evaluate

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class KeldyshPotential(RadialPotential):
    """(pi / 2 r0) [H0(r/r0) - Y0(r/r0)]; ~ 1/r at large r, log at the origin."""

    r0: float = 20.0

    origin_kind = OriginKind.LOG_DIVERGENT
    decay = Decay("power_tail", 1.0)

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")

    @property
    def scale(self) -> float:
        return self.r0

    def _profile(self, r):
        return (math.pi / (2.0 * self.r0)) * struve_minus_y0(r / self.r0)

    def describe(self):
        return {"kind": "keldysh", "r0": self.r0}


def keldysh_eval(p: KeldyshPotential, r: float) -> float:
    return p.evaluate(r)


@dataclass(frozen=True)
class VctrPotential(RadialPotential):
    """Positive profile (1/r0) log((r + r0)/r) + w(r).

    ``w0`` sets w(0); ``w_kind`` is "zero" or "exponential" (w0 e^{-r}).
    """

    r0: float = 1.0
    w0: float = 0.0
    w_kind: str = "zero"

    origin_kind = OriginKind.LOG_DIVERGENT
    decay = Decay("power_tail", 1.0)

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.w_kind not in ("zero", "exponential"):
            raise ValueError(f"unknown w profile {self.w_kind!r}")
        if self.w0 < 0:
            raise ValueError("w(0) must be nonnegative")

    @property
    def scale(self) -> float:
        return self.r0

    def w(self, r):
        if self.w_kind == "zero":
            return np.zeros_like(r)
        return self.w0 * np.exp(-r)

    def _profile(self, r):
        return np.log1p(self.r0 / r) / self.r0 + self.w(r)

    def describe(self):
        return {"kind": "vctr", "r0": self.r0, "w0": self.w0, "w_kind": self.w_kind}


@dataclass(frozen=True)
class FlatWellPotential(RadialPotential):
    """w0 on |x| <= 1, zero outside."""

    w0: float = 1.0

    decay = Decay("compact_support", 1.0)

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValueError(f"w0 must be positive, got {self.w0}")

    @property
    def scale(self) -> float:
        return 1.0

    def _profile(self, r):
        return np.where(r <= 1.0, self.w0, 0.0)

    def describe(self):
        return {"kind": "flatwell", "w0": self.w0}


@dataclass(frozen=True)
class SmoothBumpPotential(RadialPotential):
    """v0 (1 - r^2)^4 on r <= 1: C^3 at the edge, v''(0) = -8 v0."""

    v0: float = 1.0

    decay = Decay("compact_support", 1.0)

    def __post_init__(self):
        if not self.v0 > 0:
            raise ValueError(f"v0 must be positive, got {self.v0}")

    @property
    def scale(self) -> float:
        return 1.0

    def _profile(self, r):
        u = np.clip(1.0 - r * r, 0.0, None)
        return self.v0 * u**4

    def derivative(self, r, order: int = 1):
        """Analytic derivatives up to third order on r in [0, 1]."""
        r = np.asarray(r, dtype=float)
        u = 1.0 - r * r
        inside = np.abs(r) <= 1.0
        if order == 0:
            val = u**4
        elif order == 1:
            val = -8 * r * u**3
        elif order == 2:
            val = -8 * u**3 + 48 * r * r * u**2
        elif order == 3:
            val = 144 * r * u**2 - 192 * r**3 * u
        else:
            raise ValueError("only derivatives up to order 3 are provided")
        return self.v0 * np.where(inside, val, 0.0)

    def describe(self):
        return {"kind": "bump", "v0": self.v0}


def omega_of(v: SmoothBumpPotential) -> float:
    """Oscillator frequency sqrt(-v''(0)/2) of the potential maximum."""
    return math.sqrt(-float(v.derivative(0.0, 2)) / 2.0)


def check_bump_assumptions(v: SmoothBumpPotential, n: int = 2001) -> dict[str, bool]:
    r = np.linspace(-1.5, 1.5, n)
    vals = v.evaluate(np.abs(r))
    edge = np.array([1.0])
    return {
        "nonnegative": bool(np.all(vals >= 0)),
        "strict_max_at_origin": bool(np.all(vals[r != 0] < v.evaluate(0.0))),
        "negative_curvature": float(v.derivative(0.0, 2)) < 0,
        "support_contained": bool(np.all(vals[np.abs(r) > 1] == 0)),
        "c3_at_edge": all(abs(float(v.derivative(edge, k)[0])) < 1e-14 for k in (1, 2, 3)),
    }


@dataclass(frozen=True)
class GaussianWell(RadialPotential):
    """v0 exp(-(r/width)^2); a smooth surrogate with closed-form moments."""

    v0: float = 1.0
    width: float = 1.0

    @property
    def scale(self) -> float:
        return self.width

    def _profile(self, r):
        return self.v0 * np.exp(-((r / self.width) ** 2))

    def describe(self):
        return {"kind": "gaussian", "v0": self.v0, "width": self.width}


@dataclass(frozen=True)
class ScaledPotential(RadialPotential):
    """amplitude * base(r / stretch).

    Used for coordinate rescalings of the Hamiltonian; the length scale moves
    with ``stretch`` so quadrature nodes map exactly onto the base profile's.
    """

    base: RadialPotential = field(default_factory=KeldyshPotential)
    stretch: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.stretch > 0 and self.amplitude > 0):
            raise ValueError("stretch and amplitude must be positive")

    @property
    def origin_kind(self):
        return self.base.origin_kind

    @property
    def decay(self):
        d = self.base.decay
        if d.kind == "compact_support":
            return Decay(d.kind, d.value * self.stretch)
        return d

    @property
    def scale(self) -> float:
        return self.base.scale * self.stretch

    def _profile(self, r):
        return self.amplitude * self.base._profile(r / self.stretch)

    def describe(self):
        return {
            "kind": "scaled",
            "base": self.base.describe(),
            "stretch": self.stretch,
            "amplitude": self.amplitude,
        }


@dataclass(frozen=True)
class CallableProfile(RadialPotential):
    """Wrap an arbitrary vectorized callable (used by tests and oracles)."""

    func: Callable[[np.ndarray], np.ndarray] = lambda r: np.ones_like(r)
    length: float = 1.0
    support_radius: float | None = None
    log_origin: bool = False

    @property
    def origin_kind(self):
        return OriginKind.LOG_DIVERGENT if self.log_origin else OriginKind.FINITE

    @property
    def decay(self):
        if self.support_radius is not None:
            return Decay("compact_support", self.support_radius)
        return Decay("exponential")

    @property
    def scale(self) -> float:
        return self.length

    def _profile(self, r):
        return np.asarray(self.func(r), dtype=float) * np.ones_like(r)

    def describe(self):
        return {"kind": "callable", "length": self.length}


_KINDS = {
    "keldysh": KeldyshPotential,
    "vctr": VctrPotential,
    "flatwell": FlatWellPotential,
    "bump": SmoothBumpPotential,
    "gaussian": GaussianWell,
}


def from_config(spec: dict) -> RadialPotential:
    """Build a potential from a ``{"kind": ..., **params}`` mapping."""
    spec = dict(spec)
    kind = spec.pop("kind", "keldysh")
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown potential kind {kind!r}; expected one of {sorted(_KINDS)}")
    allowed = set(cls.__dataclass_fields__)
    extra = set(spec) - allowed
    if extra:
        raise ValueError(f"unknown parameter(s) {sorted(extra)} for potential {kind!r}")
    return cls(**spec)


def keldysh_small_r(r: float, r0: float) -> float:
    """Leading small-distance form (1/r0)(-ln(r/(2 r0)) - gamma)."""
    return (-math.log(r / (2.0 * r0)) - EULER_GAMMA) / r0
