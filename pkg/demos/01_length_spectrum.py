# Length spectrum of the Bolza surface
#
# The Bolza surface is the most symmetric closed hyperbolic surface of genus
# two.  Its fundamental group is generated by four hyperbolic matrices
# a1, b1, a2, b2 (and their inverses), subject to one relation of length
# eight.  Closed geodesics on the surface correspond to conjugacy classes of
# hyperbolic elements, and the length of the geodesic is read off the trace:
# |tr g| = 2 cosh(l / 2).
#
# This script builds the generators, checks them, and lists the shortest
# geodesics.

import math
from collections import Counter

import numpy as np

from hypflux import (BOLZA_SYSTOLE, abelianize, bolza, cyclic_normal_form, enumerate_classes,
                     validate_generators, word_to_matrix)
from hypflux.surface_group import format_word, inverse

# The generators come from the side pairings of the regular octagon with
# interior angles pi/4.  Validation checks the determinant, the relator, the
# traces and that the pairings really map sides of the octagon to sides.

gens = bolza()


def fmt(w):
    return format_word(w, gens.genus)


print("\n".join(validate_generators(gens).lines()))

# Words are tuples of nonzero integers: k stands for the k-th generator and
# -k for its inverse.  Conjugate words name the same closed geodesic, so the
# library reduces every word to a canonical cyclic normal form.  Below, a word
# and a conjugate of it padded with a relator land on the same form.

w = (1, 2, -1, 3)
rel = gens.relator
padded = (4, -2) + w + rel + (2, -4)
print()
print("word        :", fmt(w))
print("padded      :", fmt(padded))
print("normal forms:", fmt(cyclic_normal_form(w, gens)), "|",
      fmt(cyclic_normal_form(padded, gens)))

t = float(np.trace(word_to_matrix(w, gens)))
print(f"trace {t:.6f} -> length {2 * math.acosh(abs(t) / 2):.6f}")

# Now enumerate every primitive oriented class up to length 6.  The shortest
# one is the systole, 2 arccosh(1 + sqrt 2).

spec = enumerate_classes(gens, 6.0)
print()
print(f"{len(spec)} primitive oriented classes with length <= 6")
print(f"systole {spec.lengths.min():.12f}  closed form {BOLZA_SYSTOLE:.12f}")

# Lengths come in big degenerate packets, a trace of the surface's large
# symmetry group.

counts = Counter(np.round(spec.lengths, 6))
for length, m in sorted(counts.items()):
    print(f"  length {length:.6f}  multiplicity {m}")

# Every class comes with its homology vector (signed generator counts) and
# the sign of the trace of the literal matrix product, which is what the
# Dirac operator sees.  Reversing orientation negates the homology vector
# and keeps the sign.

c = spec.classes[0]
print()
print("shortest class  :", fmt(c.normal_form))
print("homology        :", c.homology, " inverse:", abelianize(inverse(c.normal_form), 2))
print("sigma           :", c.sigma)
print("sigma histogram :", dict(Counter(int(s) for s in spec.sigmas)))
