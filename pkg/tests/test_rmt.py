import math

import numpy as np
import pytest
from scipy import stats

from hypflux import ConfigError, EnsembleSpec, rmt_density, sample_spectrum, statistic_variance, unfold
from hypflux.kernels import TestFunction
from hypflux.rmt import (dense_matrix, kramers_pairs, linear_statistics, macroscopic_variance,
                         replica_rng, semicircle_cdf, tridiagonal_eigs)


@pytest.mark.parametrize("kw", [dict(N=32), dict(replicas=50), dict(window_center=1.0),
                                dict(W=4), dict(W=100), dict(method="lanczos")])
def test_ensemble_spec_guards(kw):
    with pytest.raises(ConfigError):
        EnsembleSpec("gue", **kw)
    with pytest.raises(ConfigError):
        EnsembleSpec("cue")


def test_gse_dense_doublets():
    spec = EnsembleSpec("gse", N=64, W=8, method="dense")
    raw = sample_spectrum(spec, seed=1, raw=True)
    assert raw.size == 128
    assert np.max(np.abs(raw[0::2] - raw[1::2])) < 1e-8
    assert np.array_equal(sample_spectrum(spec, seed=1), raw[0::2])
    with pytest.raises(ValueError):
        kramers_pairs(np.arange(6.0))


@pytest.mark.parametrize("kind", ["goe", "gue", "gse"])
@pytest.mark.parametrize("method", ["tridiagonal", "dense"])
def test_semicircle_chi_square(kind, method):
    spec = EnsembleSpec(kind, N=128 if method == "dense" else 512, W=8, method=method)
    eigs = np.concatenate([sample_spectrum(spec, seed=9, replica=r) for r in range(100)])
    bins = 40
    idx = np.minimum((semicircle_cdf(eigs) * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    assert stats.chisquare(counts).pvalue > 0.01


@pytest.mark.parametrize("sampler", ["dense", "tridiagonal"])
def test_two_by_two_goe_gap(sampler):
    rng = replica_rng(5, 0)
    gaps = []
    for _ in range(20_000):
        if sampler == "dense":
            e = np.linalg.eigvalsh(dense_matrix("goe", 2, rng))
        else:
            e = tridiagonal_eigs(1, 2, rng)
        gaps.append(e[1] - e[0])
    gaps = np.array(gaps)
    # gap = 2 sqrt(X^2 + Y^2) with X, Y standard normal: a scaled Rayleigh law
    mean, var = math.sqrt(2 * math.pi), 8 - 2 * math.pi
    assert abs(gaps.mean() - mean) < 4 * math.sqrt(var / gaps.size)


def test_dense_normalisation():
    rng = replica_rng(2, 0)
    for kind, beta in (("goe", 1), ("gue", 2)):
        h = np.array([dense_matrix(kind, 60, rng) for _ in range(40)])
        off = h[:, np.triu_indices(60, 1)[0], np.triu_indices(60, 1)[1]]
        assert np.mean(np.abs(off) ** 2) == pytest.approx(1.0, abs=0.03)
        assert np.var(np.real(np.diagonal(h, axis1=1, axis2=2))) == pytest.approx(2 / beta, rel=0.06)


def test_unfold_examples():
    N = 512
    assert unfold(np.array([-2.0, 2.0]), N).tolist() == [0.0, N]
    assert unfold(np.array([0.0]), N)[0] == pytest.approx(N / 2)
    spec = EnsembleSpec("goe", N=N)
    x = unfold(sample_spectrum(spec, seed=4), N)
    assert np.all(np.diff(x) >= 0)


def test_bulk_spacing():
    spec = EnsembleSpec("gue", N=512)
    spacings = []
    for r in range(200):
        x = unfold(sample_spectrum(spec, seed=12, replica=r), 512)
        spacings.append(np.diff(x[128:384]))
    assert 0.98 <= np.mean(spacings) <= 1.02


def test_zero_test_function():
    tf = TestFunction(1.0, lambda u: np.zeros_like(np.asarray(u, float)), "zero")
    est = statistic_variance(EnsembleSpec("goe", N=64, replicas=100, W=8), tf, seed=0)
    assert est.variance == 0.0


def test_statistics_deterministic_and_worker_free(bump):
    spec = EnsembleSpec("gue", N=128, replicas=120, W=16)
    a = linear_statistics(spec, bump, seed=8, workers=1)
    b = linear_statistics(spec, bump, seed=8, workers=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, linear_statistics(spec, bump, seed=9))


@pytest.mark.parametrize("kind", ["goe", "gue", "gse"])
def test_variance_matches_finite_n_reference(bump, kind):
    spec = EnsembleSpec(kind, N=256, replicas=1000, W=16)
    est = statistic_variance(spec, bump, seed=31)
    ref = macroscopic_variance(spec, bump)
    assert abs(est.variance - ref) < 4 * est.se


def test_finite_n_reference_tends_to_density(bump):
    dens = rmt_density(bump, "gue")
    ratios = [macroscopic_variance(EnsembleSpec("gue", N=n, W=32), bump) / dens
              for n in (512, 1024, 4096)]
    assert ratios == sorted(ratios)
    assert abs(ratios[-1] - 1) < 1e-3
    goe = macroscopic_variance(EnsembleSpec("goe", N=512, W=32), bump)
    assert goe == pytest.approx(2 * ratios[0] * dens, rel=1e-12)


def test_ratio_law(bump):
    est = {k: statistic_variance(EnsembleSpec(k, N=256, replicas=800, W=16), bump, seed=6)
           for k in ("goe", "gue", "gse")}
    for a, b, factor in (("goe", "gue", 2), ("gue", "gse", 2)):
        diff = est[a].variance - factor * est[b].variance
        assert abs(diff) < 3 * math.hypot(est[a].se, factor * est[b].se)


def test_doubling_window(bump):
    a = statistic_variance(EnsembleSpec("gue", N=512, replicas=400, W=16), bump, seed=3)
    b = statistic_variance(EnsembleSpec("gue", N=512, replicas=400, W=32), bump, seed=3)
    assert abs(a.variance - b.variance) < 3 * math.hypot(a.se, b.se)
