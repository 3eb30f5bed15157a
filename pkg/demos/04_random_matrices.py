# Random-matrix baselines
#
# The large-genus predictions are number variances of random matrix
# ensembles.  For a smooth statistic sum_j f((x_j - x0) / W) over unfolded
# eigenvalues x_j, the variance tends to
#
#     GOE: int 2|u| fhat(u)^2 du,   GUE: int |u| fhat(u)^2 du,   GSE: half of GUE.
#
# Here we sample the ensembles with the tridiagonal beta-Hermite model,
# unfold with the semicircle law, and compare.

import numpy as np

from hypflux import EnsembleSpec, make_bump, rmt_density, sample_spectrum, statistic_variance, unfold
from hypflux.rmt import macroscopic_variance

tf = make_bump(1.0)
for kind in ("goe", "gue", "gse"):
    print(f"{kind} density: {rmt_density(tf, kind):.6f}")

# Unfolded spectra have unit mean spacing in the bulk.

spec = EnsembleSpec("gue", N=512, W=32)
x = unfold(sample_spectrum(spec, seed=3), spec.N)
print()
print(f"mean bulk spacing of one GUE sample: {np.diff(x[128:384]).mean():.4f}")

# Monte Carlo variance of the windowed statistic.  The window is W = 32 mean
# spacings wide, a sixteenth of the spectrum at N = 512, and that is not yet
# the N -> infinity limit: the exact large-N answer at fixed N/W (the
# "finite-N" column) is a few percent below the density.

print()
print(" kind     N   MC variance (+- se)   finite-N   density")
for kind in ("goe", "gue", "gse"):
    for N in (256, 512):
        ens = EnsembleSpec(kind, N=N, replicas=1000, W=N // 16)
        est = statistic_variance(ens, tf, seed=5, workers=4)
        print(f" {kind}  {N:5d}   {est.variance:.5f} (+- {est.se:.5f})    "
              f"{macroscopic_variance(ens, tf):.5f}   {rmt_density(tf, kind):.5f}")

# GOE over GUE is 2 and GUE over GSE is 2 in both the finite-N and the
# limiting columns; the Monte Carlo follows the finite-N column.  The three
# ensembles share a seed, and the tridiagonal model feeds them the same
# normal draws, so their Monte Carlo errors move together.
