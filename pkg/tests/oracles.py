"""Independent checks that do not go through the word combinatorics."""

import math

import numpy as np
from scipy import integrate

from hypflux.kernels import h_window
from hypflux.surface_group import hyperbolic_distance, mobius, word_to_matrix

# Bolza Laplace eigenvalues with multiplicities, from published high-precision
# computations; enough of them for windows with tau below about 2.5
BOLZA_EIGENVALUES = [(3.8388872588, 3), (5.3536013411, 4), (8.2495548152, 2),
                     (14.726216787, 4), (15.048916133, 3)]


def spectral_side(tf, w):
    """Sum of h(r_j) over the published eigenvalues, including lambda = 0."""
    # the zero eigenvalue sits at r = i/2, where h is a cosh integral
    bottom = 2 * integrate.quad(lambda u: tf.fhat_eval(u) * math.cosh(u * w.L / 2)
                                * math.cos(u * w.L * w.tau), -tf.A, tf.A, limit=400)[0]
    return bottom + sum(m * h_window(tf, w, math.sqrt(lam - 0.25)) for lam, m in BOLZA_EIGENVALUES)


def _psl_key(m, digits=6):
    m = m / np.sqrt(abs(np.linalg.det(m)))
    flat = m.ravel()
    lead = flat[np.argmax(np.abs(flat) > 1e-9)]
    return tuple(np.round(np.sign(lead) * flat, digits))


class AxisWalker:
    """Collect the conjugates of a hyperbolic element whose axis passes
    through the Dirichlet polygon of the Bolza group.

    Two elements are conjugate exactly when these finite sets intersect, so
    the sets give a purely geometric conjugacy test.
    """

    def __init__(self, gens):
        self.gens = gens
        self.sides = np.array([word_to_matrix(w, gens) for w in gens.domain.side_words])
        self.center = gens.domain.center
        self.images = [mobius(m, self.center) for m in self.sides]

    def _pull_back(self, z):
        acc = np.eye(2)
        for _ in range(500):
            d0 = hyperbolic_distance(z, self.center)
            ds = [hyperbolic_distance(z, im) for im in self.images]
            k = int(np.argmin(ds))
            if ds[k] >= d0 - 1e-12:
                return acc
            z = mobius(np.linalg.inv(self.sides[k]), z)
            acc = acc @ self.sides[k]
        raise RuntimeError("reduction to the polygon did not terminate")

    def keys(self, word, step=0.02):
        m = word_to_matrix(word, self.gens)
        a, b, c, d = m.ravel()
        length = 2 * np.arccosh(abs(a + d) / 2)
        if abs(c) < 1e-12:
            to_axis = np.array([[1.0, b / (d - a)], [0.0, 1.0]])
        else:
            disc = np.sqrt((a + d) ** 2 - 4)
            xp, xm = ((a - d) + disc) / (2 * c), ((a - d) - disc) / (2 * c)
            to_axis = np.array([[max(xp, xm), min(xp, xm)], [1.0, 1.0]])
        out = set()
        for t in np.arange(-length / 2 - 0.5, length / 2 + 0.5, step):
            acc = self._pull_back(mobius(to_axis, 1j * np.exp(t)))
            out.add(_psl_key(np.linalg.inv(acc) @ m @ acc))
        return out


def duplicate_pairs(spec, gens):
    """Pairs of cache entries that are geometrically the same class."""
    walker = AxisWalker(gens)
    owner, dups = {}, []
    for i, c in enumerate(spec.classes):
        ks = walker.keys(c.normal_form)
        hit = {owner[k] for k in ks if k in owner}
        dups.extend((j, i) for j in hit)
        for k in ks:
            owner.setdefault(k, i)
    return dups
