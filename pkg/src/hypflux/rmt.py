"""Gaussian random-matrix ensembles and smoothed linear statistics.

Normalisation shared by every sampler: off-diagonal entries have
``E|H_ij|^2 = 1`` and diagonal entries variance ``2/beta``, so after dividing
by sqrt(N) the eigenvalue density tends to the semicircle on [-2, 2].  The
tridiagonal models are the Householder reductions of the same matrices:

    diagonal     ~ N(0, 2/beta)
    off-diagonal ~ chi_{beta (N-k)} / sqrt(beta),  k = 1..N-1
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.linalg import eigvalsh_tridiagonal

from .errors import ConfigError
from .kernels import TestFunction

BETA = {"goe": 1, "gue": 2, "gse": 4}
REPLICA_CHUNK = 50


@dataclass(frozen=True)
class EnsembleSpec:
    """``window_center`` is in units of the semicircle half-width, so the
    statistic is centred at eigenvalue 2 * window_center before unfolding."""

    kind: str
    N: int = 512
    replicas: int = 2000
    window_center: float = 0.0
    W: float = 32.0
    method: str = "tridiagonal"

    def __post_init__(self):
        if self.kind not in BETA:
            raise ConfigError(f"kind: expected goe, gue or gse, got {self.kind!r}")
        if self.N < 64:
            raise ConfigError(f"N: must be >= 64, got {self.N}")
        if self.replicas < 100:
            raise ConfigError(f"replicas: must be >= 100, got {self.replicas}")
        if not -1 < self.window_center < 1:
            raise ConfigError("window_center: must lie strictly inside (-1, 1)")
        if self.W < 8:
            raise ConfigError(f"W: must be >= 8 mean spacings, got {self.W}")
        if self.W > self.N / 8:
            raise ConfigError(f"W: must be <= N/8 = {self.N / 8} to stay in the bulk")
        if self.method not in ("tridiagonal", "dense"):
            raise ConfigError(f"method: expected tridiagonal or dense, got {self.method!r}")

    @property
    def beta(self) -> int:
        return BETA[self.kind]


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) | (int(replica) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def dense_matrix(kind: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """One dense draw; gse comes back as the 2n x 2n complex representation."""
    if kind == "goe":
        x = rng.standard_normal((n, n))
        return (x + x.T) / math.sqrt(2)
    if kind == "gue":
        x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
        return (x + x.conj().T) / math.sqrt(2)
    if kind == "gse":
        x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
        y = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
        a = (x + x.conj().T) / 2
        b = (y - y.T) / 2
        return np.block([[a, b], [-b.conj(), a.conj()]])
    raise ConfigError(f"unknown ensemble {kind!r}")


def tridiagonal_eigs(beta: int, n: int, rng: np.random.Generator) -> np.ndarray:
    d = rng.normal(0.0, math.sqrt(2.0 / beta), n)
    e = np.sqrt(rng.chisquare(beta * np.arange(n - 1, 0, -1))) / math.sqrt(beta)
    return eigvalsh_tridiagonal(d, e)


def kramers_pairs(eigs: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Collapse a sorted doubly-degenerate list to one value per doublet."""
    eigs = np.sort(eigs)
    if eigs.size % 2 or np.max(np.abs(eigs[0::2] - eigs[1::2]), initial=0.0) > tol:
        raise ValueError("eigenvalues are not paired into Kramers doublets")
    return eigs[0::2]


def sample_spectrum(spec: EnsembleSpec, seed: int, replica: int = 0, raw: bool = False) -> np.ndarray:
    """Sorted eigenvalues of one draw, scaled to the semicircle on [-2, 2].

    For gse the dense route produces every eigenvalue twice; ``raw=True``
    returns that list, otherwise each doublet appears once.  The tridiagonal
    gse model already has one value per doublet.
    """
    rng = replica_rng(seed, replica)
    n = spec.N
    if spec.method == "tridiagonal":
        eigs = tridiagonal_eigs(spec.beta, n, rng)
    else:
        eigs = np.linalg.eigvalsh(dense_matrix(spec.kind, n, rng))
        if spec.kind == "gse" and not raw:
            eigs = kramers_pairs(eigs, tol=1e-8 * math.sqrt(n))
    return np.sort(eigs) / math.sqrt(n)


def semicircle_cdf(lam):
    lam = np.clip(np.asarray(lam, dtype=float), -2.0, 2.0)
    return 0.5 + lam * np.sqrt(4.0 - lam**2) / (4 * np.pi) + np.arcsin(lam / 2) / np.pi


def unfold(eigs, N: int) -> np.ndarray:
    """x_i = N F(lambda_i) with F the semicircle distribution function."""
    return N * semicircle_cdf(eigs)


@dataclass(frozen=True)
class VarianceEstimate:
    variance: float
    se: float
    replicas: int


def _statistic_chunk(args):
    spec, tf, seed, start, stop = args
    x0 = spec.N * float(semicircle_cdf(2 * spec.window_center))
    out = np.empty(stop - start)
    for i, r in enumerate(range(start, stop)):
        x = unfold(sample_spectrum(spec, seed, r), spec.N)
        out[i] = np.sum(tf.f_eval((x - x0) / spec.W))
    return out


def linear_statistics(spec: EnsembleSpec, tf: TestFunction, seed: int, workers: int = 1) -> np.ndarray:
    """S = sum_i f((x_i - x0)/W) for each replica; replica r always reads stream r."""
    jobs = [(spec, tf, seed, s, min(s + REPLICA_CHUNK, spec.replicas))
            for s in range(0, spec.replicas, REPLICA_CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(_statistic_chunk, jobs))
    else:
        parts = [_statistic_chunk(j) for j in jobs]
    return np.concatenate(parts)


def variance_with_se(samples: np.ndarray) -> VarianceEstimate:
    s = np.asarray(samples, dtype=float)
    n = s.size
    dev = (s - s.mean()) ** 2
    m2 = float(dev.mean())
    var = float(dev.sum() / (n - 1))
    se = math.sqrt(max(float((dev**2).mean()) - m2**2, 0.0) / n)
    return VarianceEstimate(var, se, n)


def statistic_variance(spec: EnsembleSpec, tf: TestFunction, seed: int, workers: int = 1) -> VarianceEstimate:
    return variance_with_se(linear_statistics(spec, tf, seed, workers))


def macroscopic_variance(spec: EnsembleSpec, tf: TestFunction, nodes: int = 1 << 16) -> float:
    """Large-N variance of the statistic at fixed N/W.

    The statistic is phi(lambda) = f((N F(lambda) - x0) / W), a smooth
    function on the semicircle support, so its variance tends to
    (2/beta) * (1/4) * sum_k k a_k^2 with phi(2 cos t) = a_0/2 + sum a_k cos(k t).
    As W/N -> 0 this tends to the sine-kernel density integral; at N/W = 16
    the two differ by a few percent.
    """
    t = np.pi * (np.arange(nodes) + 0.5) / nodes
    x0 = spec.N * float(semicircle_cdf(2 * spec.window_center))
    phi = tf.f_eval((unfold(2 * np.cos(t), spec.N) - x0) / spec.W)
    a = dct(phi, type=2) / nodes
    k = np.arange(nodes)
    return float((2.0 / spec.beta) * 0.25 * np.sum(k[1:] * a[1:] ** 2))
