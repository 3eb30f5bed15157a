"""Geometric side of the flux-twisted trace formulas and its flux statistics.

The oscillating part of the smoothed counting function is a finite sum over
(primitive class, power) pairs,

    N_osc(theta) = sum_k c_k e(theta . v_k),
    c_k = [sigma^n] l hhat(n l) / (2 sinh(n l / 2)),   v_k = n [gamma],

finite because hhat vanishes beyond A*L.  Averaging e(theta . v) over the
flux measure keeps exactly the terms with v = 0 mod q, so the exact mean is
the sum of c_k over those keys, and the exact second moment is the sum over
residue classes v mod q of |sum of c_k with that key|^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import IncompleteSpectrum, InvalidFluxSpec
from .flux import INF, FluxSpec, FluxVector, flux_rng, real_character_mask
from .geodesics import LengthSpectrum, power_table
from .kernels import TestFunction, WindowParams, hhat_window, i_fq, rmt_density, weyl_term

MC_CHUNK = 1024
CSV_COLUMNS = ("q", "A", "L", "tau", "op", "exact_var", "mc_var", "mc_se", "ref_var", "ifq",
               "samples", "seed")


@dataclass(frozen=True)
class OperatorKind:
    kind: str = "laplace"
    halve_counting: bool = False

    def __post_init__(self):
        if self.kind not in ("laplace", "dirac"):
            raise ValueError(f"operator kind must be laplace or dirac, got {self.kind!r}")
        if self.halve_counting and self.kind != "dirac":
            raise ValueError("only the Dirac count is halved")

    @classmethod
    def for_flux(cls, kind: str, q) -> "OperatorKind":
        """Operator for flux denominator ``q``: Dirac needs even q or INF and
        halves its count at q = 2, where every eigenvalue is doubly degenerate."""
        if kind == "dirac":
            FluxSpec(q, 1).require_dirac_compatible()
        return cls(kind, kind == "dirac" and q == 2)

    @property
    def factor(self) -> float:
        return 0.5 if self.halve_counting else 1.0


def reference_ensemble(kind: str, q) -> str:
    """Random-matrix class predicted for the operator and flux denominator."""
    if kind == "laplace":
        return "goe" if q in (1, 2) else "gue"
    if kind == "dirac":
        if q is not INF and q % 2:
            raise InvalidFluxSpec(f"Dirac experiments need even q or inf, got {q}")
        return "gse" if q == 2 else "gue"
    raise ValueError(f"unknown operator kind {kind!r}")


@dataclass(frozen=True, eq=False)
class GeometricTerms:
    """Flattened geometric sum: coefficients, integer keys n[gamma], provenance."""

    coef: np.ndarray
    keys: np.ndarray
    cls: np.ndarray
    n: np.ndarray
    cutoff: float

    def __len__(self):
        return len(self.coef)


def _check_complete(spec: LengthSpectrum, cutoff: float):
    if spec.L_max < cutoff * (1 - 1e-12):
        raise IncompleteSpectrum(
            f"spectrum complete to {spec.L_max} but the window needs lengths up to A*L = {cutoff}")


def geometric_terms(spec: LengthSpectrum, tf: TestFunction, w: WindowParams,
                    op: OperatorKind = OperatorKind()) -> GeometricTerms:
    cutoff = tf.A * w.L
    _check_complete(spec, cutoff)
    t = power_table(spec, cutoff)
    lengths = spec.lengths[t.cls] if len(t) else np.zeros(0)
    coef = lengths * hhat_window(tf, w, t.nl) / (2.0 * np.sinh(t.nl / 2.0))
    if op.kind == "dirac":
        coef = coef * np.where((spec.sigmas[t.cls] < 0) & (t.n % 2 == 1), -1.0, 1.0)
    coef = coef * op.factor
    dim = 2 * max(spec.genus, 1)
    keys = (spec.homology[t.cls] * t.n[:, None]) if len(t) else np.zeros((0, dim), np.int64)
    return GeometricTerms(np.asarray(coef, float), keys.astype(np.int64), t.cls, t.n, cutoff)


def _phases(terms_keys: np.ndarray, theta: FluxVector) -> np.ndarray:
    if theta.numerators is not None:
        q = theta.q
        return _unit_roots(q)[(terms_keys @ theta.numerators) % q]
    x = terms_keys @ theta.theta
    return np.exp(2j * np.pi * (x - np.floor(x)))


def geometric_side(spec: LengthSpectrum, theta, tf: TestFunction, w: WindowParams,
                   op: OperatorKind = OperatorKind()) -> complex:
    """N_osc(theta): the geodesic sum of the twisted trace formula."""
    terms = geometric_terms(spec, tf, w, op)
    if not isinstance(theta, FluxVector):
        theta = FluxVector(np.asarray(theta, dtype=float) % 1.0)
    if len(terms) == 0:
        return 0j
    return complex(np.sum(terms.coef * _phases(terms.keys, theta)))


def counting_decomposition(spec, theta, tf, w, op: OperatorKind, genus: int) -> tuple[float, complex]:
    """(smooth term, oscillating term) of the trace-formula count."""
    smooth = op.factor * weyl_term(tf, w, genus, op.kind)
    return smooth, geometric_side(spec, theta, tf, w, op)


def counting_estimate(spec, theta, tf, w, op: OperatorKind = OperatorKind(), genus: int = 2) -> float:
    """Trace-formula prediction of sum_j h(r_j): smooth term + Re N_osc."""
    smooth, osc = counting_decomposition(spec, theta, tf, w, op, genus)
    return smooth + osc.real


# ---------------------------------------------------------------------------
# exact flux moments


def _reduced_keys(keys: np.ndarray, q) -> np.ndarray:
    return keys if q is INF else keys % q


def grouped_coefficients(terms: GeometricTerms, q) -> tuple[np.ndarray, np.ndarray]:
    """Distinct keys (mod q) and the summed coefficient of each."""
    if len(terms) == 0:
        return np.zeros((0, terms.keys.shape[1]), np.int64), np.zeros(0)
    red = _reduced_keys(terms.keys, q)
    uniq, inv = np.unique(red, axis=0, return_inverse=True)
    sums = np.bincount(inv.ravel(), weights=terms.coef, minlength=len(uniq))
    return uniq, sums


def exact_theta_mean(spec, q, tf, w, op: OperatorKind = OperatorKind()) -> complex:
    terms = geometric_terms(spec, tf, w, op)
    if len(terms) == 0:
        return 0j
    zero = ~np.any(_reduced_keys(terms.keys, q), axis=1)
    return complex(np.sum(terms.coef[zero]))


def exact_theta_moments(spec, q, tf, w, op: OperatorKind = OperatorKind()) -> tuple[complex, float, float]:
    """(mean, second moment E|Z|^2, variance) of N_osc under the flux measure."""
    terms = geometric_terms(spec, tf, w, op)
    keys, sums = grouped_coefficients(terms, q)
    zero = ~np.any(keys, axis=1) if len(keys) else np.zeros(0, bool)
    mean = complex(np.sum(sums[zero]))
    second = float(np.sum(sums ** 2))
    var = float(np.sum(sums[~zero] ** 2))
    return mean, second, var


def exact_theta_variance(spec, q, tf, w, op: OperatorKind = OperatorKind()) -> float:
    """E|Z|^2 - |EZ|^2, evaluated as the sum of |C_v|^2 over nonzero keys v
    (so it is nonnegative by construction, not by clamping)."""
    return exact_theta_moments(spec, q, tf, w, op)[2]


# ---------------------------------------------------------------------------
# Monte Carlo over the flux


@dataclass
class StatReport:
    q: object
    op: str
    halve_counting: bool
    A: float
    L: float
    tau: float
    family: str
    cutoff_NL: float
    term_count: int
    sample_count: int
    seed: int
    exact_mean: complex
    exact_second_moment: float
    exact_variance: float
    mc_mean: complex
    mc_mean_se: float
    mc_variance: float
    mc_variance_se: float
    degenerate: bool
    real_character_fraction: float
    reference_ensemble: str
    rmt_density: float
    ifq: float
    reference_mean: float
    reference_variance: float

    def mean_agrees(self, k: float = 3.0) -> bool:
        if self.degenerate:
            return abs(self.mc_mean - self.exact_mean) <= 1e-9 * max(1.0, abs(self.exact_mean))
        return abs(self.mc_mean - self.exact_mean) <= k * self.mc_mean_se

    def variance_agrees(self, k: float = 3.0) -> bool:
        if self.degenerate:
            return self.mc_variance == 0.0 and self.exact_variance <= 1e-10
        return abs(self.mc_variance - self.exact_variance) <= k * self.mc_variance_se

    def to_dict(self) -> dict:
        d = asdict(self)
        d["q"] = str(self.q)
        for name in ("exact_mean", "mc_mean"):
            z = complex(d.pop(name))
            d[name] = {"re": z.real, "im": z.imag}
        d["notes"] = ("reference values are asymptotic large-genus predictions; "
                      "reference_variance = rmt_density + reference_mean^2 is the limiting "
                      "second moment, rmt_density the limiting variance")
        return d

    def csv_row(self) -> dict:
        return {"q": str(self.q), "A": self.A, "L": self.L, "tau": self.tau, "op": self.op,
                "exact_var": self.exact_variance, "mc_var": self.mc_variance,
                "mc_se": self.mc_variance_se, "ref_var": self.reference_variance,
                "ifq": self.ifq, "samples": self.sample_count, "seed": self.seed}


def _unit_roots(q: int) -> np.ndarray:
    """e(k/q) for k < q, exact at multiples of a quarter turn."""
    k = np.arange(q)
    roots = np.exp(2j * np.pi * k / q)
    for j, z in enumerate((1, 1j, -1, -1j)):
        roots[(4 * k) == j * q] = z
    return roots


def _sample_chunk(args):
    fluxspec, seed, stream, count, keys, sums = args
    rng = flux_rng(seed, stream)
    if fluxspec.q is INF:
        theta = rng.random((count, fluxspec.dim))
        x = theta @ keys.T.astype(float)
        z = np.exp(2j * np.pi * (x - np.floor(x))) @ sums
        real = np.zeros(count, bool)
    else:
        q = fluxspec.q
        m = rng.integers(0, q, size=(count, fluxspec.dim), dtype=np.int64)
        roots = _unit_roots(q)
        z = roots[(m @ keys.T) % q] @ sums
        real = real_character_mask(m / q)
    return z, real


def sample_geometric_side(terms: GeometricTerms, fluxspec: FluxSpec, samples: int, seed: int,
                          workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """N_osc at ``samples`` flux draws, plus a real-character mask.

    Draw j belongs to chunk j // MC_CHUNK and chunk c reads Philox stream c,
    so the output does not depend on ``workers``.
    """
    keys, sums = grouped_coefficients(terms, fluxspec.q)
    jobs = []
    for c, start in enumerate(range(0, samples, MC_CHUNK)):
        jobs.append((fluxspec, seed, c, min(MC_CHUNK, samples - start), keys, sums))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(_sample_chunk, jobs))
    else:
        parts = [_sample_chunk(j) for j in jobs]
    if not parts:
        return np.zeros(0, complex), np.zeros(0, bool)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def mc_flux_experiment(spec: LengthSpectrum, fluxspec: FluxSpec, tf: TestFunction,
                       w: WindowParams, op: OperatorKind | str = "laplace", samples: int = 10_000,
                       seed: int = 0, workers: int = 1) -> StatReport:
    if samples < 2:
        raise ValueError("need at least two samples")
    if isinstance(op, str):
        op = OperatorKind.for_flux(op, fluxspec.q)
    elif op.kind == "dirac":
        fluxspec.require_dirac_compatible()
    q = fluxspec.q
    ens = reference_ensemble(op.kind, q)
    terms = geometric_terms(spec, tf, w, op)
    e_mean, e_second, e_var = exact_theta_moments(spec, q, tf, w, op)
    z, real = sample_geometric_side(terms, fluxspec, samples, seed, workers)
    mean = z.mean()
    dev = np.abs(z - mean) ** 2
    degenerate = bool(np.all(z == z[0]))
    if degenerate:
        mc_var = se_var = se_mean = 0.0
        mean = z[0]
    else:
        s2 = float(dev.mean())
        mc_var = float(dev.sum() / (samples - 1))
        se_mean = math.sqrt(mc_var / samples)
        se_var = math.sqrt(max(float((dev ** 2).mean()) - s2 ** 2, 0.0) / samples)
    sigma2 = rmt_density(tf, ens)
    ifq = i_fq(tf, w, q)
    ref_mean = op.factor * ifq
    return StatReport(
        q=q, op=op.kind, halve_counting=op.halve_counting, A=tf.A, L=w.L, tau=w.tau,
        family=tf.family_tag, cutoff_NL=terms.cutoff, term_count=len(terms),
        sample_count=samples, seed=seed, exact_mean=e_mean, exact_second_moment=e_second,
        exact_variance=e_var, mc_mean=complex(mean), mc_mean_se=se_mean, mc_variance=mc_var,
        mc_variance_se=se_var, degenerate=degenerate,
        real_character_fraction=float(real.mean()), reference_ensemble=ens,
        rmt_density=sigma2, ifq=ifq, reference_mean=ref_mean,
        reference_variance=sigma2 + ref_mean ** 2)
