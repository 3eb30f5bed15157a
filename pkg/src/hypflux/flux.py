"""Flux vectors on the torus T^{2g}, their characters, and the arithmetic
of q-rational averages.

For finite ``q`` the flux is uniform on the atoms ``m / q`` with
``m in {0, ..., q-1}^{2g}``; for ``q = INF`` it is Lebesgue measure.  The
orthogonality relation

    mean over atoms of e(n theta . h) = 1 if n h = 0 mod q else 0

is what turns flux averages of geodesic sums into finite arithmetic sums.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import InvalidFluxSpec


class QInf(enum.Enum):
    INFINITY = "inf"

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"


INF = QInf.INFINITY

REAL_TOL = 1e-12


def parse_q(text) -> int | QInf:
    if text is INF:
        return INF
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    q = int(text)
    if q < 1:
        raise InvalidFluxSpec(f"q must be a positive integer or inf, got {text!r}")
    return q


def is_finite(q) -> bool:
    return q is not INF


@dataclass(frozen=True)
class FluxSpec:
    q: int | QInf
    genus: int

    def __post_init__(self):
        if self.q is not INF and (not isinstance(self.q, (int, np.integer)) or self.q < 1):
            raise InvalidFluxSpec(f"q must be a positive integer or INF, got {self.q!r}")
        if self.genus < 1:
            raise InvalidFluxSpec("genus must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.genus

    def require_dirac_compatible(self):
        if self.q is not INF and self.q % 2:
            raise InvalidFluxSpec(
                f"Dirac experiments need even q or inf (the -1 element has character -1); got q={self.q}")


@dataclass(frozen=True, eq=False)
class FluxVector:
    theta: np.ndarray
    q: int | QInf = INF
    numerators: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", t)
        if np.any(t < 0) or np.any(t >= 1):
            raise ValueError("flux entries must lie in [0, 1)")

    @classmethod
    def from_numerators(cls, m, q: int) -> "FluxVector":
        m = np.asarray(m, dtype=np.int64) % q
        return cls(m / q, q, m)

    def as_fractions(self) -> list:
        if self.numerators is None:
            return [float(x) for x in self.theta]
        return [Fraction(int(m), self.q) for m in self.numerators]

    def __str__(self):
        return "(" + ", ".join(str(x) for x in self.as_fractions()) + ")"


# ---------------------------------------------------------------------------
# sampling


def flux_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox stream keyed by a 64-bit seed and a stream index."""
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) | (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_numerators(spec: FluxSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, spec.q, size=(count, spec.dim), dtype=np.int64)


def sample_thetas(spec: FluxSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. draws from the flux measure as a (count, 2g) array."""
    if spec.q is INF:
        return rng.random((count, spec.dim))
    return sample_numerators(spec, count, rng) / spec.q


def sample_flux(spec: FluxSpec, rng_seed, stream: int = 0) -> FluxVector:
    """One draw; ``rng_seed`` is an int seed or a ``numpy`` Generator."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else flux_rng(rng_seed, stream)
    if spec.q is INF:
        return FluxVector(rng.random(spec.dim), INF)
    return FluxVector.from_numerators(sample_numerators(spec, 1, rng)[0], spec.q)


def atoms(spec: FluxSpec) -> np.ndarray:
    """All q^{2g} numerator vectors of a finite-q measure, lexicographic."""
    if spec.q is INF:
        raise InvalidFluxSpec("Lebesgue flux has no atoms")
    grids = np.meshgrid(*[np.arange(spec.q)] * spec.dim, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# characters and arithmetic kernels


def char_eval(theta, h, n: int = 1) -> complex:
    """e(n theta . h) = exp(2 pi i n sum_k theta_k h_k)."""
    t = theta.theta if isinstance(theta, FluxVector) else np.asarray(theta, dtype=float)
    x = n * float(np.dot(t, np.asarray(h, dtype=float)))
    x -= math.floor(x)
    return complex(np.exp(2j * np.pi * x))


def _gcd_entries(h) -> int:
    return reduce(math.gcd, (abs(int(x)) for x in h), 0)


def q_star(h, q: int) -> int:
    """q / gcd(h, q) with gcd(0, q) = q, so the zero vector gives 1."""
    if q is INF:
        raise InvalidFluxSpec("q_star needs a finite q")
    return q // math.gcd(_gcd_entries(h), q)


class _AllResidues:
    """Marker for ker_inf of the zero vector: every integer qualifies."""

    def __contains__(self, n):
        return True

    def __repr__(self):
        return "ALL"


ALL = _AllResidues()


def ker_q(h, q):
    """{n in Z_q : n h = 0 mod q}; for q = INF, {0} unless h = 0."""
    h = [int(x) for x in h]
    if q is INF:
        return ALL if not any(h) else frozenset({0})
    return frozenset(n for n in range(q) if all((n * x) % q == 0 for x in h))


def pairing_ok(n1: int, h1, n2: int, h2, q) -> bool:
    """n1 h1 = n2 h2, entrywise mod q (exactly when q = INF)."""
    a = [n1 * int(x) for x in h1]
    b = [n2 * int(x) for x in h2]
    if q is INF:
        return a == b
    return all((x - y) % q == 0 for x, y in zip(a, b))


def is_real_character(theta) -> bool:
    """True iff every entry is 0 or 1/2 (mod 1) within 1e-12."""
    t = theta.theta if isinstance(theta, FluxVector) else np.asarray(theta, dtype=float)
    d = np.minimum(np.abs(t - np.round(t)), np.abs(t - 0.5 - np.round(t - 0.5)))
    return bool(np.all(d <= REAL_TOL))


def real_character_fraction(q, genus: int) -> float:
    """Probability that a flux draw gives a real character."""
    if q is INF:
        return 0.0
    return (2.0 / q) ** (2 * genus) if q % 2 == 0 else q ** (-2.0 * genus)


def real_character_mask(thetas: np.ndarray) -> np.ndarray:
    t = np.asarray(thetas)
    d = np.minimum(np.abs(t - np.round(t)), np.abs(t - 0.5 - np.round(t - 0.5)))
    return np.all(d <= REAL_TOL, axis=-1)
