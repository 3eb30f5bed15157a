"""Primitive oriented closed geodesics up to a length cutoff.

The main enumerator walks the tiling by the fundamental polygon: every
conjugacy class of length <= L has a representative whose axis crosses the
polygon, and such a representative moves the polygon centre by at most

    R = 2 asinh(cosh(r) sinh(L / 2)),    r = circumradius.

For a Dirichlet polygon, every tile met by the segment from the centre to a
translate lies no farther out than that translate, so a breadth-first walk
over side pairings that never leaves the ball of radius R reaches every
orbit point inside it.  Candidates are then rewritten as words in the
standard generators and deduplicated by cyclic normal form.

:func:`enumerate_by_words` is an independent search over freely reduced
words in the standard generators, pruned by the displacement of the base
point.  It is used as a completeness oracle and as the fallback for generator
sets that carry no fundamental polygon.
"""

from __future__ import annotations

import hashlib
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (CorruptRecord, CutoffTooLarge, FormatVersionMismatch,
                     InvariantViolation, TrivialWord)
from .surface_group import (GeneratorSet, Word, abelianize, conjugacy_data,
                            free_reduce, inverse, length_to_trace,
                            trace_to_length, validate_generators, word_to_matrix,
                            letter_rank)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAX_CUTOFF = 30.0
LENGTH_TOL = 1e-9
_KEY_SCALE = 1e5
_CHUNK = 2048
# float products of relator-equivalent words land within ~1e-12 of trace 2
_TRACE_FLOOR = 2.0 + 1e-7


@dataclass(frozen=True)
class GeodesicClass:
    normal_form: Word
    length: float
    homology: tuple[int, ...]
    sigma: int
    trace: float

    @property
    def sort_key(self):
        return (self.length, tuple(letter_rank(v) for v in self.normal_form))


@dataclass(eq=False)
class LengthSpectrum:
    gens_label: str
    L_max: float
    classes: list[GeodesicClass]
    format_version: int = FORMAT_VERSION
    genus: int = field(default=0)

    def __post_init__(self):
        if not self.genus and self.classes:
            self.genus = len(self.classes[0].homology) // 2

    def __len__(self):
        return len(self.classes)

    def __eq__(self, other):
        if not isinstance(other, LengthSpectrum):
            return NotImplemented
        return (self.gens_label == other.gens_label and self.L_max == other.L_max
                and self.classes == other.classes
                and self.format_version == other.format_version)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([c.length for c in self.classes], dtype=float)

    @cached_property
    def homology(self) -> np.ndarray:
        return np.array([c.homology for c in self.classes], dtype=np.int64).reshape(
            len(self.classes), 2 * self.genus)

    @cached_property
    def sigmas(self) -> np.ndarray:
        return np.array([c.sigma for c in self.classes], dtype=np.int64)

    @cached_property
    def index(self) -> dict[Word, int]:
        return {c.normal_form: i for i, c in enumerate(self.classes)}

    def truncate(self, L_max: float) -> "LengthSpectrum":
        """The sub-spectrum of classes with length <= ``L_max``."""
        if L_max > self.L_max:
            raise ValueError("cannot extend a spectrum by truncation")
        keep = [c for c in self.classes if c.length <= L_max]
        return LengthSpectrum(self.gens_label, float(L_max), keep, self.format_version,
                              self.genus)

    def without(self, normal_forms) -> "LengthSpectrum":
        drop = set(normal_forms)
        keep = [c for c in self.classes if c.normal_form not in drop]
        return LengthSpectrum(self.gens_label, self.L_max, keep, self.format_version,
                              self.genus)


def inverse_class_form(c: GeodesicClass, genus: int) -> Word:
    return conjugacy_data(inverse(c.normal_form), genus)[0]


# ---------------------------------------------------------------------------
# class records


def _make_class(nf: Word, gens: GeneratorSet) -> GeodesicClass:
    t = float(np.trace(word_to_matrix(nf, gens)))
    return GeodesicClass(
        normal_form=nf,
        length=trace_to_length(t),
        homology=tuple(int(x) for x in abelianize(nf, gens.genus)),
        sigma=1 if t > 0 else -1,
        trace=t,
    )


def _classify_chunk(args):
    words, genus = args
    out = []
    for w in words:
        try:
            nf, prim = conjugacy_data(w, genus)
        except TrivialWord:
            continue
        if prim:
            out.append(nf)
    return out


def _classify(words: list[Word], genus: int, workers: int) -> set[Word]:
    chunks = [(words[i:i + _CHUNK], genus) for i in range(0, len(words), _CHUNK)]
    found: set[Word] = set()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_classify_chunk, chunks):
                found.update(res)
    else:
        for ch in chunks:
            found.update(_classify_chunk(ch))
    return found


def _finish(nfs, gens: GeneratorSet, L_max: float) -> LengthSpectrum:
    classes = []
    for nf in nfs:
        c = _make_class(nf, gens)
        if c.length <= L_max:
            classes.append(c)
    classes.sort(key=lambda c: c.sort_key)
    return LengthSpectrum(gens.label, float(L_max), classes, genus=gens.genus)


def _displacement_radius(radius: float, L_max: float) -> float:
    return 2.0 * math.asinh(math.cosh(radius) * math.sinh(L_max / 2.0))


def _psl_keys(m: np.ndarray) -> np.ndarray:
    a = m[:, 0, 0]
    s = np.where(a > 1e-9, 1.0, np.where(a < -1e-9, -1.0, np.sign(m[:, 0, 1])))
    k = np.rint(m.reshape(-1, 4) * s[:, None] * _KEY_SCALE).astype(np.int64)
    return np.ascontiguousarray(k).view(np.dtype((np.void, 32))).ravel()


def _to_center(m: np.ndarray, center: complex) -> np.ndarray:
    """Conjugate so that ``center`` becomes i (displacement formula applies)."""
    x, y = center.real, center.imag
    s = np.array([[math.sqrt(y), x / math.sqrt(y)], [0.0, 1.0 / math.sqrt(y)]])
    si = np.linalg.inv(s)
    return si @ m @ s


def _axis_meets_polygon(m: np.ndarray, verts: np.ndarray) -> np.ndarray:
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    x, y = verts.real, verts.imag
    q = (c[:, None] * (x ** 2 + y ** 2)[None, :] + (d - a)[:, None] * x[None, :]
         - b[:, None])
    return (q.min(axis=1) <= 0.0) & (q.max(axis=1) >= 0.0)


# ---------------------------------------------------------------------------
# enumerators


def _check_cutoff(L_max: float):
    if not L_max > 0:
        raise ValueError("L_max must be positive")
    if L_max > MAX_CUTOFF:
        raise CutoffTooLarge(f"L_max = {L_max} exceeds the guard {MAX_CUTOFF}")


def tile_candidates(gens: GeneratorSet, L_max: float) -> list[Word]:
    """Words for every element whose axis crosses the fundamental polygon.

    Only elements with 2 < |trace| <= 2 cosh(L_max / 2) are kept.
    """
    dom = gens.domain
    sides = np.array([_to_center(m, dom.center) for m in dom.side_matrices])
    verts = np.array([(v - dom.center.real) / dom.center.imag for v in dom.vertices])
    radius = _displacement_radius(dom.circumradius, L_max)
    ball = 2.0 * math.cosh(radius) * (1 + 1e-12)
    tmax = length_to_trace(L_max) * (1 + 1e-9)
    nside = len(sides)

    parents: list[np.ndarray] = []
    moves: list[np.ndarray] = []
    picks: list[tuple[int, np.ndarray]] = []
    prev_k = _psl_keys(np.zeros((0, 2, 2)))
    cur = np.eye(2)[None]
    cur_k = _psl_keys(cur)
    depth = 0
    while len(cur):
        ch = np.einsum("nij,gjk->ngik", cur, sides).reshape(-1, 2, 2)
        par = np.repeat(np.arange(len(cur)), nside)
        mv = np.tile(np.arange(nside), len(cur))
        ok = np.einsum("nij,nij->n", ch, ch) <= ball
        ch, par, mv = ch[ok], par[ok], mv[ok]
        keys = _psl_keys(ch)
        keys, first = np.unique(keys, return_index=True)
        ch, par, mv = ch[first], par[first], mv[first]
        new = ~(np.isin(keys, cur_k) | np.isin(keys, prev_k))
        prev_k = cur_k
        cur, cur_k = ch[new], keys[new]
        parents.append(par[new])
        moves.append(mv[new])
        depth += 1
        if len(cur):
            tr = np.abs(cur[:, 0, 0] + cur[:, 1, 1])
            sel = np.flatnonzero((tr > _TRACE_FLOOR) & (tr <= tmax))
            if len(sel):
                sel = sel[_axis_meets_polygon(cur[sel], verts)]
            picks.append((depth - 1, sel))
    log.debug("tile walk: depth %d, %d orbit points", depth,
              sum(len(p) for p in parents))

    words = []
    side_words = dom.side_words
    for lev, sel in picks:
        for j in sel:
            seq = []
            k, i = lev, int(j)
            while k >= 0:
                seq.append(int(moves[k][i]))
                i = int(parents[k][i])
                k -= 1
            w: list[int] = []
            for s in reversed(seq):
                w.extend(side_words[s])
            words.append(free_reduce(w))
    return words


def enumerate_classes(gens: GeneratorSet, L_max: float, workers: int = 1) -> LengthSpectrum:
    """All primitive oriented conjugacy classes with length <= ``L_max``.

    Output is sorted by (length, normal form) and does not depend on
    ``workers``.
    """
    _check_cutoff(L_max)
    validate_generators(gens)
    if gens.domain is None:
        return enumerate_by_words(gens, L_max, workers=workers)
    words = tile_candidates(gens, L_max)
    log.info("classifying %d candidate words", len(words))
    return _finish(_classify(words, gens.genus, workers), gens, L_max)


def enumerate_by_words(gens: GeneratorSet, L_max: float, max_letters: int | None = None,
                       radius: float | None = None, slack: float = 2.0,
                       workers: int = 1) -> LengthSpectrum:
    """Search freely reduced words in the standard generators.

    Words up to ``max_letters`` letters (default ``ceil(3 L_max)``) are grown
    letter by letter; a branch is cut once the base point i is displaced by
    more than ``R + slack``, with ``R`` the crossing bound for a disc of
    ``radius`` (default: the polygon circumradius, or the largest generator
    displacement).  The cut is a heuristic, so the result can only miss
    classes, never invent them.
    """
    _check_cutoff(L_max)
    validate_generators(gens)
    if max_letters is None:
        max_letters = math.ceil(3 * L_max)
    lm = gens.letter_matrices
    if radius is None:
        if gens.domain is not None:
            radius = gens.domain.circumradius
        else:
            radius = float(np.max(np.arccosh(np.einsum("nij,nij->n", lm, lm) / 2)))
    bound = 2.0 * math.cosh(_displacement_radius(radius, L_max) + slack)
    tmax = length_to_trace(L_max) * (1 + 1e-9)
    nl = len(lm)

    cur = lm.copy()
    first = np.arange(nl)
    last = np.arange(nl)
    ok = np.einsum("nij,nij->n", cur, cur) <= bound
    cur, first, last = cur[ok], first[ok], last[ok]
    parents = [np.full(len(cur), -1)]
    letters = [last.copy()]
    picks = []
    for depth in range(1, max_letters + 1):
        if depth > 1:
            ch = np.einsum("nij,gjk->ngik", cur, lm).reshape(-1, 2, 2)
            par = np.repeat(np.arange(len(cur)), nl)
            let = np.tile(np.arange(nl), len(cur))
            keep = (let != (last[par] ^ 1)) & (np.einsum("nij,nij->n", ch, ch) <= bound)
            cur, par, let = ch[keep], par[keep], let[keep]
            first = first[par]
            last = let
            parents.append(par)
            letters.append(let)
        if not len(cur):
            break
        tr = np.abs(cur[:, 0, 0] + cur[:, 1, 1])
        sel = np.flatnonzero((tr > _TRACE_FLOOR) & (tr <= tmax) & (first != (last ^ 1)))
        picks.append((depth - 1, sel))

    seen = set()
    words = []
    for lev, sel in picks:
        for j in sel:
            seq = []
            k, i = lev, int(j)
            while k >= 0:
                seq.append(int(letters[k][i]))
                i = int(parents[k][i])
                k -= 1
            w = tuple(-(r // 2 + 1) if r & 1 else r // 2 + 1 for r in reversed(seq))
            rot = min(w[i:] + w[:i] for i in range(len(w)))
            if rot not in seen:
                seen.add(rot)
                words.append(w)
    log.info("word search: %d cyclic candidates", len(words))
    return _finish(_classify(words, gens.genus, workers), gens, L_max)


# ---------------------------------------------------------------------------
# powers


@dataclass(frozen=True)
class PowerTable:
    """Flattened (class, power) pairs with n * length <= cutoff."""

    cls: np.ndarray
    n: np.ndarray
    nl: np.ndarray

    def __len__(self):
        return len(self.n)


def power_table(spec: LengthSpectrum, NL_max: float) -> PowerTable:
    lengths = spec.lengths
    counts = np.floor(NL_max / lengths).astype(np.int64) if len(lengths) else np.zeros(0, int)
    counts = np.maximum(counts, 0)
    cls = np.repeat(np.arange(len(lengths)), counts)
    start = np.cumsum(counts) - counts
    n = np.arange(len(cls)) - np.repeat(start, counts) + 1
    nl = n * lengths[cls]
    ok = nl <= NL_max
    return PowerTable(cls[ok], n[ok], nl[ok])


def power_extend(spec: LengthSpectrum, NL_max: float) -> list[tuple[GeodesicClass, int, float]]:
    """Every (primitive class, power n) with n * length <= ``NL_max``."""
    t = power_table(spec, NL_max)
    return [(spec.classes[c], int(n), float(x)) for c, n, x in zip(t.cls, t.n, t.nl)]


# ---------------------------------------------------------------------------
# cache file


def _format_record(c: GeodesicClass) -> str:
    nf = ",".join(str(v) for v in c.normal_form)
    hom = " ".join(str(x) for x in c.homology)
    return f"{nf} {c.length:.17g} {hom} {c.sigma:+d} {c.trace:.17g}"


def spectrum_text(spec: LengthSpectrum) -> str:
    buf = io.StringIO()
    buf.write(f"HYPSPEC v{spec.format_version} {spec.gens_label} {spec.L_max!r}\n")
    for c in spec.classes:
        buf.write(_format_record(c) + "\n")
    buf.write(f"END {len(spec.classes)}\n")
    return buf.getvalue()


def write_spectrum(spec: LengthSpectrum, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(spectrum_text(spec))
    os.replace(tmp, path)


def blob_hash(data: bytes) -> str:
    """Git blob hash (sha1 over ``blob <size>\\0`` + bytes)."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def content_hash(path: str | Path) -> str:
    """Git blob hash of a file's bytes."""
    return blob_hash(Path(path).read_bytes())


def spectrum_hash(spec: LengthSpectrum) -> str:
    """Hash of the cache file ``write_spectrum`` would produce."""
    return blob_hash(spectrum_text(spec).encode())


def read_spectrum(path: str | Path, check_primitive: bool = True) -> LengthSpectrum:
    """Read and fully validate a cache file."""
    text = Path(path).read_text()
    lines = text.split("\n")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "HYPSPEC" or not head[1].startswith("v"):
        raise CorruptRecord(f"{path}: bad header {lines[0]!r}")
    try:
        version = int(head[1][1:])
    except ValueError as exc:
        raise CorruptRecord(f"{path}: bad version tag {head[1]!r}") from exc
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"{path}: version {version}, expected {FORMAT_VERSION}")
    label = head[2]
    try:
        L_max = float(head[3])
    except ValueError as exc:
        raise CorruptRecord(f"{path}: bad cutoff {head[3]!r}") from exc
    if not text.endswith("\n") or len(lines) < 3 or not lines[-2].startswith("END "):
        raise CorruptRecord(f"{path}: missing END trailer (truncated file?)")
    body = lines[1:-2]
    try:
        count = int(lines[-2].split()[1])
    except (IndexError, ValueError) as exc:
        raise CorruptRecord(f"{path}: bad END trailer") from exc
    if count != len(body):
        raise CorruptRecord(f"{path}: END says {count} records, found {len(body)}")

    classes = []
    genus = 0
    for ln, line in enumerate(body, start=2):
        parts = line.split()
        try:
            if not genus:
                genus = (len(parts) - 4) // 2
            if len(parts) != 2 * genus + 4 or genus < 1:
                raise ValueError("wrong field count")
            nf = tuple(int(v) for v in parts[0].split(","))
            length = float(parts[1])
            hom = tuple(int(x) for x in parts[2:2 + 2 * genus])
            sigma = int(parts[2 + 2 * genus])
            trace = float(parts[3 + 2 * genus])
            if sigma not in (1, -1) or any(v == 0 or abs(v) > 2 * genus for v in nf):
                raise ValueError("field out of range")
        except ValueError as exc:
            raise CorruptRecord(f"{path}:{ln}: {exc}") from exc
        classes.append(GeodesicClass(nf, length, hom, sigma, trace))
    spec = LengthSpectrum(label, L_max, classes, version, genus)
    check_spectrum(spec, check_primitive=check_primitive)
    return spec


def check_spectrum(spec: LengthSpectrum, check_primitive: bool = True) -> None:
    """Raise :class:`InvariantViolation` if any spectrum invariant fails."""
    g = spec.genus
    keys = [c.sort_key for c in spec.classes]
    if keys != sorted(keys):
        raise InvariantViolation("records are not sorted by (length, normal form)")
    seen = set()
    for c in spec.classes:
        if c.normal_form in seen:
            raise InvariantViolation(f"duplicate class {c.normal_form}")
        seen.add(c.normal_form)
        if c.length > spec.L_max:
            raise InvariantViolation(f"length {c.length} exceeds L_max {spec.L_max}")
        if abs(c.length - trace_to_length(c.trace)) > LENGTH_TOL:
            raise InvariantViolation(f"length/trace mismatch for {c.normal_form}")
        if c.sigma != (1 if c.trace > 0 else -1):
            raise InvariantViolation(f"sigma disagrees with trace sign for {c.normal_form}")
        if tuple(abelianize(c.normal_form, g)) != c.homology:
            raise InvariantViolation(f"homology mismatch for {c.normal_form}")
    for c in spec.classes:
        nf, prim = conjugacy_data(c.normal_form, g)
        if nf != c.normal_form:
            raise InvariantViolation(f"{c.normal_form} is not in normal form")
        if check_primitive and not prim:
            raise InvariantViolation(f"{c.normal_form} is not primitive")
        inv = conjugacy_data(inverse(c.normal_form), g)[0]
        j = spec.index.get(inv)
        if j is None:
            raise InvariantViolation(f"inverse of {c.normal_form} missing")
        d = spec.classes[j]
        if (abs(d.length - c.length) > LENGTH_TOL or d.sigma != c.sigma
                or d.homology != tuple(-x for x in c.homology)):
            raise InvariantViolation(f"inverse pair {c.normal_form} / {inv} inconsistent")
