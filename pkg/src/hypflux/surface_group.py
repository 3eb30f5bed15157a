"""Word and matrix arithmetic in a closed surface group.

Words are tuples of nonzero signed generator indices.  For genus ``g`` the
index ``i`` in ``1..g`` stands for ``a_i`` and ``g+i`` stands for ``b_i``; a
negative index is the formal inverse.  The group is presented as

    < a_1, b_1, ..., a_g, b_g | [a_1, b_1] ... [a_g, b_g] >

and every matrix-valued quantity uses the positive-trace SL(2, R) lifts
stored on a :class:`GeneratorSet`.

Internally the combinatorial routines work on *ranks*: letter ``v`` has rank
``2*(|v|-1) + (v < 0)`` so that inversion is ``rank ^ 1`` and tuple
comparison realizes the letter order a_1 < a_1^-1 < a_2 < ... < b_g^-1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import InvalidGenerators, NotHyperbolic, TrivialWord

Word = tuple[int, ...]

DET_TOL = 1e-12
RELATOR_TOL = 1e-9


# ---------------------------------------------------------------------------
# letters, parsing, formatting


def letter_rank(v: int) -> int:
    return 2 * (abs(v) - 1) + (v < 0)


def rank_letter(r: int) -> int:
    return -(r // 2 + 1) if r & 1 else r // 2 + 1


def to_ranks(w) -> tuple[int, ...]:
    return tuple(2 * (abs(v) - 1) + (v < 0) for v in w)


def from_ranks(rs) -> Word:
    return tuple(-(r // 2 + 1) if r & 1 else r // 2 + 1 for r in rs)


def letter_name(v: int, genus: int) -> str:
    i = abs(v)
    base = f"a{i}" if i <= genus else f"b{i - genus}"
    return base if v > 0 else base + "^-1"


def format_word(w, genus: int) -> str:
    return " ".join(letter_name(v, genus) for v in w) if w else "1"


def parse_word(text: str, genus: int) -> Word:
    """Parse ``"a1 b1 a1^-1 B1"``; upper case letters denote inverses."""
    out = []
    for tok in text.replace("*", " ").split():
        if tok == "1":
            continue
        sign = 1
        if tok.endswith("^-1"):
            sign, tok = -1, tok[:-3]
        if tok[0] in "AB":
            sign = -sign
        kind, idx = tok[0].lower(), int(tok[1:])
        if kind not in "ab" or not 1 <= idx <= genus:
            raise ValueError(f"bad letter {tok!r} for genus {genus}")
        out.append(sign * (idx if kind == "a" else genus + idx))
    return tuple(out)


def inverse(w) -> Word:
    return tuple(-v for v in reversed(w))


def relator_word(genus: int) -> Word:
    """The product of commutators [a_1, b_1] ... [a_g, b_g]."""
    out: list[int] = []
    for i in range(1, genus + 1):
        out += [i, genus + i, -i, -(genus + i)]
    return tuple(out)


# ---------------------------------------------------------------------------
# rank-space kernels


def _free_reduce_r(rs) -> list[int]:
    out: list[int] = []
    for r in rs:
        if out and out[-1] == r ^ 1:
            out.pop()
        else:
            out.append(r)
    return out


def _cyclic_strip_r(rs: list[int]) -> list[int]:
    i, j = 0, len(rs) - 1
    while i < j and rs[i] == rs[j] ^ 1:
        i += 1
        j -= 1
    return rs[i:j + 1]


def _inv_r(rs) -> tuple[int, ...]:
    return tuple(r ^ 1 for r in reversed(rs))


@dataclass(frozen=True)
class _RelatorTables:
    genus: int
    half: int
    long: dict
    swap: dict
    chain: dict


@lru_cache(maxsize=None)
def _tables(genus: int) -> _RelatorTables:
    rel = to_ranks(relator_word(genus))
    n = len(rel)
    shifts = set()
    for base in (rel, _inv_r(rel)):
        for i in range(n):
            shifts.add(base[i:] + base[:i])
    half = n // 2
    long, swap, chain = {}, {}, {}
    for rho in shifts:
        chain[rho[:half - 1]] = _inv_r(rho[half - 1:])
        for k in range(half, n + 1):
            sub, rest = rho[:k], rho[k:]
            if k == half:
                swap[sub] = _inv_r(rest)
            else:
                long[sub] = _inv_r(rest)
    return _RelatorTables(genus, half, long, swap, chain)


def _dehn_r(rs, tab: _RelatorTables) -> list[int]:
    w = _free_reduce_r(rs)
    top = 2 * tab.half
    while True:
        n = len(w)
        hit = None
        for k in range(min(top, n), tab.half, -1):
            for i in range(n - k + 1):
                rep = tab.long.get(tuple(w[i:i + k]))
                if rep is not None:
                    hit = (i, k, rep)
                    break
            if hit:
                break
        if hit is None:
            return w
        i, k, rep = hit
        w = _free_reduce_r(w[:i] + list(rep) + w[i + k:])


def _cyclic_dehn_r(rs, tab: _RelatorTables) -> list[int]:
    w = _cyclic_strip_r(_dehn_r(rs, tab))
    top = 2 * tab.half
    while w:
        n = len(w)
        ww = w + w
        hit = None
        for k in range(min(top, n), tab.half, -1):
            for i in range(n):
                rep = tab.long.get(tuple(ww[i:i + k]))
                if rep is not None:
                    hit = (i, k, rep)
                    break
            if hit:
                break
        if hit is None:
            return w
        i, k, rep = hit
        w = _cyclic_strip_r(_dehn_r(list(rep) + ww[i + k:i + n], tab))
    return w


def _min_rotation(rs) -> tuple[int, ...]:
    t = tuple(rs)
    return min(t[i:] + t[:i] for i in range(len(t)))


def _is_periodic(t: tuple[int, ...]) -> bool:
    n = len(t)
    for d in range(1, n // 2 + 1):
        if n % d == 0 and t == t[:d] * (n // d):
            return True
    return False


def _chain_moves(u: tuple[int, ...], tab: _RelatorTables):
    """Rewrite a cyclic word that is a closed chain of (half - 1)-pieces.

    Such a word carries no half-relator subword, so the exchange moves never
    touch it, yet replacing every piece by the rest of its relator (the
    junction letters cancel pairwise) gives another word of the same length
    in the same class.  These are the only one-layer annular moves that the
    half exchanges do not generate.
    """
    k = tab.half - 1
    n = len(u)
    if k < 2 or n % k:
        return
    uu = u + u
    for off in range(k):
        reps = []
        for i in range(off, off + n, k):
            rep = tab.chain.get(uu[i:i + k])
            if rep is None:
                break
            reps.append(rep)
        else:
            flat = [r for rep in reps for r in rep]
            yield _cyclic_dehn_r(_cyclic_strip_r(_free_reduce_r(flat)), tab)


def _closure_r(rs, tab: _RelatorTables) -> set[tuple[int, ...]]:
    """Rotation-canonical members of the closure under half-relator exchanges
    and closed-chain rewrites."""
    start = _cyclic_dehn_r(rs, tab)
    while True:
        if not start:
            raise TrivialWord("word represents the identity")
        n = len(start)
        first = _min_rotation(start)
        seen = {first}
        stack = [first]
        shorter = None
        h = tab.half
        while stack and shorter is None:
            u = stack.pop()
            if n < h:
                break
            uu = u + u
            for i in range(n):
                rep = tab.swap.get(uu[i:i + h])
                if rep is None:
                    continue
                v = _cyclic_dehn_r(list(rep) + list(uu[i + h:i + n]), tab)
                if len(v) < n:
                    shorter = v
                    break
                c = _min_rotation(v)
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
            if shorter is None:
                for v in _chain_moves(u, tab):
                    if len(v) < n:
                        shorter = v
                        break
                    if len(v) > n:
                        continue
                    c = _min_rotation(v)
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        if shorter is None:
            return seen
        start = shorter


# ---------------------------------------------------------------------------
# public word operations


def _genus_of(gens) -> int:
    return gens if isinstance(gens, int) else gens.genus


def free_reduce(w) -> Word:
    """Cancel adjacent letter/inverse pairs."""
    out: list[int] = []
    for v in w:
        if out and out[-1] == -v:
            out.pop()
        else:
            out.append(v)
    return tuple(out)


def dehn_reduce(w, gens) -> Word:
    """Dehn's algorithm: replace more-than-half relator subwords by the rest.

    ``gens`` may be a :class:`GeneratorSet` or a bare genus.
    """
    tab = _tables(_genus_of(gens))
    return from_ranks(_dehn_r(to_ranks(w), tab))


def cyclic_dehn_reduce(w, gens) -> Word:
    tab = _tables(_genus_of(gens))
    return from_ranks(_cyclic_dehn_r(to_ranks(w), tab))


def conjugacy_data(w, gens) -> tuple[Word, bool]:
    """Return ``(cyclic_normal_form(w), is_primitive(w))`` in one pass."""
    tab = _tables(_genus_of(gens))
    members = _closure_r(to_ranks(w), tab)
    nf = min(members)
    primitive = not any(_is_periodic(m) for m in members)
    return from_ranks(nf), primitive


def cyclic_normal_form(w, gens) -> Word:
    """Canonical representative of the conjugacy class of ``w``.

    Lexicographic minimum over all rotations of all cyclically Dehn-reduced
    words reachable by half-relator exchanges and closed-chain rewrites.  Raises :class:`TrivialWord`
    for the identity.
    """
    tab = _tables(_genus_of(gens))
    return from_ranks(min(_closure_r(to_ranks(w), tab)))


def is_primitive(w, gens) -> bool:
    # A proper power u^k has a periodic member (u'^k) in the closure, and
    # a periodic member is a proper power, so testing every member is exact.
    tab = _tables(_genus_of(gens))
    return not any(_is_periodic(m) for m in _closure_r(to_ranks(w), tab))


def abelianize(w, genus: int) -> np.ndarray:
    h = np.zeros(2 * genus, dtype=np.int64)
    for v in w:
        h[abs(v) - 1] += 1 if v > 0 else -1
    return h


def trace_to_length(t: float) -> float:
    a = abs(t)
    if not a > 2.0:
        raise NotHyperbolic(f"|trace| = {a} <= 2")
    return 2.0 * math.acosh(a / 2.0)


def length_to_trace(length: float) -> float:
    return 2.0 * math.cosh(length / 2.0)


# ---------------------------------------------------------------------------
# generator sets


@dataclass(frozen=True, eq=False)
class FundamentalDomain:
    """A Dirichlet polygon centred at ``center`` with its side pairings.

    ``side_words`` express the side-pairing transformations as words in the
    standard generators; ``side_matrices`` are the same maps in SL(2, R)
    (defined up to sign).  ``vertices`` are points of the upper half plane.
    """

    center: complex
    vertices: np.ndarray
    side_words: tuple[Word, ...]
    side_matrices: np.ndarray

    @property
    def circumradius(self) -> float:
        return max(hyperbolic_distance(self.center, v) for v in self.vertices)


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    genus: int
    matrices: np.ndarray
    label: str = "custom"
    domain: FundamentalDomain | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=float)
        object.__setattr__(self, "matrices", m)
        if m.shape != (2 * self.genus, 2, 2):
            raise InvalidGenerators(
                f"expected {2 * self.genus} matrices of shape 2x2, got {m.shape}")

    @property
    def relator(self) -> Word:
        return relator_word(self.genus)

    @property
    def relator_sign(self) -> int:
        m = word_to_matrix(self.relator, self)
        return 1 if m[0, 0] > 0 else -1

    @property
    def letter_matrices(self) -> np.ndarray:
        """Array indexed by rank: generator, inverse, next generator, ..."""
        out = np.empty((4 * self.genus, 2, 2))
        for i, m in enumerate(self.matrices):
            out[2 * i] = m
            out[2 * i + 1] = [[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]
        return out


def word_to_matrix(w, gens: GeneratorSet) -> np.ndarray:
    """Product of generator lifts along ``w`` (left to right)."""
    lm = _letter_matrices(gens)
    m = np.eye(2)
    for v in w:
        m = m @ lm[2 * (abs(v) - 1) + (v < 0)]
    return m


def _letter_matrices(gens: GeneratorSet) -> np.ndarray:
    cached = gens.__dict__.get("_lm")
    if cached is None:
        cached = gens.letter_matrices
        object.__setattr__(gens, "_lm", cached)
    return cached


def sigma_sign(w, gens: GeneratorSet) -> int:
    """Sign of the trace of the literal lift product; needs |trace| > 2."""
    t = float(np.trace(word_to_matrix(w, gens)))
    if abs(t) <= 2.0:
        raise NotHyperbolic(f"|trace| = {abs(t)} <= 2")
    return 1 if t > 0 else -1


@dataclass
class ValidationReport:
    label: str
    genus: int
    relator_sign: int
    relator_residual: float
    max_det_residual: float
    min_trace: float
    domain_residual: float | None
    ok: bool = True

    def lines(self) -> list[str]:
        out = [
            f"generator set : {self.label} (genus {self.genus})",
            f"relator sign  : {self.relator_sign:+d}",
            f"relator resid : {self.relator_residual:.3e}",
            f"det residual  : {self.max_det_residual:.3e}",
            f"min trace     : {self.min_trace:.12f}",
        ]
        if self.domain_residual is not None:
            out.append(f"domain resid  : {self.domain_residual:.3e}")
        out.append("status        : " + ("pass" if self.ok else "FAIL"))
        return out


def validate_generators(gens: GeneratorSet) -> ValidationReport:
    """Check determinants, positive hyperbolic traces and the relator.

    Raises :class:`InvalidGenerators` naming the first failing invariant.
    """
    m = gens.matrices
    dets = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    det_res = float(np.max(np.abs(dets - 1.0)))
    if det_res > DET_TOL:
        raise InvalidGenerators(f"determinant differs from 1 by {det_res:.3e}")
    traces = m[:, 0, 0] + m[:, 1, 1]
    if not np.all(traces > 2.0):
        k = int(np.argmin(traces))
        raise InvalidGenerators(
            f"generator {letter_name(k + 1, gens.genus)} has trace {traces[k]:.6g}, "
            "need a positive-trace hyperbolic lift")
    rel = word_to_matrix(gens.relator, gens)
    sign = 1 if rel[0, 0] > 0 else -1
    resid = float(np.max(np.abs(rel - sign * np.eye(2))))
    if resid > RELATOR_TOL:
        raise InvalidGenerators(f"relator product is not +-I (residual {resid:.3e})")
    dom_res = None
    if gens.domain is not None:
        dom_res = 0.0
        for wd, sm in zip(gens.domain.side_words, gens.domain.side_matrices):
            wm = word_to_matrix(wd, gens)
            s = 1.0 if np.sum(wm * sm) > 0 else -1.0
            dom_res = max(dom_res, float(np.max(np.abs(wm - s * sm))))
        if dom_res > RELATOR_TOL:
            raise InvalidGenerators(
                f"side-pairing words disagree with side matrices ({dom_res:.3e})")
    return ValidationReport(gens.label, gens.genus, sign, resid, det_res,
                            float(np.min(traces)), dom_res)


# ---------------------------------------------------------------------------
# hyperbolic plane helpers


def mobius(m: np.ndarray, z: complex) -> complex:
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def hyperbolic_distance(z: complex, w: complex) -> float:
    return math.acosh(1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag))


def _rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return np.array([[c, s], [-s, c]])


# ---------------------------------------------------------------------------
# the Bolza surface


def _octagon_side_pairings() -> np.ndarray:
    """Translations g_0..g_3 pairing opposite sides of the regular octagon.

    The octagon has interior angles pi/4 and is centred at i; g_k translates
    by twice the inradius along the geodesic through i at angle k*pi/4.
    These satisfy g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = 1.
    """
    d = 2.0 * math.acosh(1.0 + math.sqrt(2.0))
    t = np.diag([math.exp(d / 2), math.exp(-d / 2)])
    return np.array([_rotation(k * math.pi / 4) @ t @ _rotation(-k * math.pi / 4)
                     for k in range(4)])


def bolza() -> GeneratorSet:
    """Genus-2 Bolza group in standard commutator generators.

    With x, y, z, w the opposite-side pairings g0..g3, the substitution

        a1 = x,  b1 = y^-1 z w^-1,  a2 = y^-1 z,  b2 = w^-1 y

    turns x y^-1 z w^-1 x^-1 y z^-1 w into [a1, b1][a2, b2]; its inverse is
    x = a1, y = b1^-1 a2 b2, z = b1^-1 a2 b2 a2, w = b1^-1 a2.
    """
    x, y, z, w = _octagon_side_pairings()
    inv = np.linalg.inv
    a1 = x
    b1 = inv(y) @ z @ inv(w)
    a2 = inv(y) @ z
    b2 = inv(w) @ y
    lifts = [m if np.trace(m) > 0 else -m for m in (a1, a2, b1, b2)]

    # side words in the letters a1=1, a2=2, b1=3, b2=4
    xw, yw, zw, ww = (1,), (-3, 2, 4), (-3, 2, 4, 2), (-3, 2)
    words = (xw, yw, zw, ww, inverse(xw), inverse(yw), inverse(zw), inverse(ww))
    sides = np.array([x, y, z, w, inv(x), inv(y), inv(z), inv(w)])

    r_circ = math.acosh((1.0 + math.sqrt(2.0)) ** 2)
    apex = 1j * math.exp(r_circ)
    verts = np.array([mobius(_rotation((k + 0.5) * math.pi / 4), apex) for k in range(8)])
    dom = FundamentalDomain(center=1j, vertices=verts, side_words=words,
                            side_matrices=sides)
    return GeneratorSet(genus=2, matrices=np.array(lifts), label="bolza", domain=dom)


BOLZA_SYSTOLE = 2.0 * math.acosh(1.0 + math.sqrt(2.0))


def load_generators(source: str | Path) -> GeneratorSet:
    """Return the built-in ``"bolza"`` set or read a JSON config file.

    The file holds ``{"label": ..., "genus": g, "matrices": [[m00, m01, m10,
    m11], ...]}`` with 2g row-major matrices; entries may be numbers or
    decimal strings.
    """
    if str(source) == "bolza":
        return bolza()
    try:
        cfg = json.loads(Path(source).read_text())
        genus = int(cfg["genus"])
        mats = np.array([[float(x) for x in row] for row in cfg["matrices"]])
        label = str(cfg.get("label", Path(source).stem))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise InvalidGenerators(f"cannot read generator config {source}: {exc}") from exc
    if mats.ndim != 2 or mats.shape[1] != 4:
        raise InvalidGenerators("each matrix must be given as 4 row-major entries")
    gens = GeneratorSet(genus=genus, matrices=mats.reshape(-1, 2, 2), label=label)
    validate_generators(gens)
    return gens


def save_generators(gens: GeneratorSet, path: str | Path) -> None:
    cfg = {"label": gens.label, "genus": gens.genus,
           "matrices": [[repr(float(x)) for x in m.ravel()] for m in gens.matrices]}
    Path(path).write_text(json.dumps(cfg, indent=1) + "\n")
