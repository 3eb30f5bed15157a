# Threading flux through the handles
#
# Attach an Aharonov-Bohm flux theta in the torus T^4 to the four handles of
# the Bolza surface.  The Laplacian twisted by the character
# chi_theta(gamma) = exp(2 pi i theta . [gamma]) has a spectrum that moves
# with theta, and its geodesic sum picks up the phase of each class's
# homology vector.  Averaging over theta wipes out every term whose homology
# does not cancel in pairs, which is why the mean and variance over flux
# can be computed exactly from the length spectrum.
#
# When theta is restricted to rationals with denominator q, more pairs
# survive (homology only has to cancel mod q), and the variance picks up an
# extra piece.  For large genus that piece is |I_{f,q}|^2, and the rest is
# a random-matrix number variance: GOE for q = 1, 2, otherwise GUE.  A
# Dirac operator swaps GOE for GSE at q = 2 (Kramers pairs, hence the halved
# count).  At genus two these are only heuristic references.
#
# Usage: python3 03_flux_moments.py [spectrum cache]

import sys

from hypflux import (INF, FluxSpec, WindowParams, bolza, enumerate_classes, make_bump,
                     mc_flux_experiment, read_spectrum)

L = 10.0
spec = read_spectrum(sys.argv[1]) if len(sys.argv) > 1 else enumerate_classes(bolza(), L, workers=4)
tf = make_bump(1.0)
w = WindowParams(L, 2.0)

print(f"window L = {L}, tau = {w.tau}; geodesics up to length {tf.A * L}")
print()
print(" op       q    exact var   MC var (+- se)       ref   ensemble  real chars")
for op, q in [("laplace", 1), ("laplace", 2), ("laplace", 3), ("laplace", INF),
              ("dirac", 2), ("dirac", 4), ("dirac", INF)]:
    rep = mc_flux_experiment(spec, FluxSpec(q, 2), tf, w, op, samples=20_000, seed=1, workers=4)
    print(f" {op:7s} {str(q):>3s}   {rep.exact_variance:9.5f}   {rep.mc_variance:8.5f} "
          f"(+- {rep.mc_variance_se:.5f})  {rep.reference_variance:8.5f}   "
          f"{rep.reference_ensemble:4s}      {rep.real_character_fraction:.4f}")

# q = 1 is no flux at all, so the variance is exactly zero and the Monte
# Carlo agrees bit for bit.  Elsewhere the exact moments sit inside the
# Monte Carlo error bars.  With this seed the laplace q = 2 row lands about
# three standard errors low; other seeds scatter within two, and the exact
# value equals a brute-force average over the 16 atoms of the q = 2
# measure.  The reference column is the large-genus value of
# the second moment and only sets the scale.
#
# The last column is the fraction of draws for which the character is real
# (all 2 theta integral), where time-reversal symmetry survives.  It is 1 for
# q = 2, (2/q)^4 for other even q, 1/q^4 for odd q and 0 for Lebesgue flux.
