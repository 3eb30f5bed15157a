"""Test functions, the smoothed spectral window and the integrals built on them.

Fourier convention: ``f(r) = integral fhat(u) exp(i u r) du``.  Every test
function here is even with ``fhat`` supported in ``[-A, A]``, so
``f(r) = 2 * integral_0^A fhat(u) cos(u r) du``.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .errors import QuadratureFailure

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
_GL_POINTS = 32
_GRID_STEP = 0.02   # spline grid spacing in units of 1/A
_SCAN_STEP = 0.5
_SCAN_MAX = 4000.0


def _gl_panels(a: float, b: float, panels: int, npts: int = _GL_POINTS):
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = ((hi - lo) / 2 * x + (hi + lo) / 2).ravel()
    weights = ((hi - lo) / 2 * w).ravel()
    return nodes, weights


def bump_fhat(A: float) -> Callable[[np.ndarray], np.ndarray]:
    def fhat(u):
        t = np.abs(np.asarray(u, dtype=float)) / A
        out = np.zeros_like(t)
        inside = t < 1
        out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return out
    return fhat


def fejer_fhat(A: float) -> Callable[[np.ndarray], np.ndarray]:
    def fhat(u):
        t = np.abs(np.asarray(u, dtype=float)) / A
        return np.clip(1.0 - t, 0.0, None)
    return fhat


@dataclass(frozen=True, eq=False)
class TestFunction:
    """An even test function given through its compactly supported fhat.

    ``f_eval`` reads a cubic spline built once on a uniform grid covering
    ``[0, tail_radius]``; past the tail radius |f| is below
    ``quadrature_tol / 100`` and the evaluator returns 0.  Families with a
    closed-form ``f`` (``f_closed``) skip the grid.
    """

    __test__ = False  # keep pytest from collecting the class

    A: float
    fhat: Callable[[np.ndarray], np.ndarray]
    family_tag: str = "custom"
    quadrature_tol: float = DEFAULT_TOL
    f_closed: Callable[[np.ndarray], np.ndarray] | None = None
    tail_radius: float = field(init=False, default=math.inf)
    _spline: CubicSpline | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("support radius must be positive")
        if self.f_closed is None:
            self._build_grid()

    # -- direct quadrature, used for the grid and as a reference ----------
    def f_direct(self, r) -> np.ndarray:
        r = np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
        if r.size == 0:
            return r
        panels = max(16, int(math.ceil(self.A * float(r.max()) / (4 * math.pi))))
        u, w = _gl_panels(0.0, self.A, panels)
        wf = 2.0 * w * self.fhat(u)
        out = np.empty_like(r)
        step = max(1, 2_000_000 // u.size)
        for s in range(0, r.size, step):
            out[s:s + step] = np.cos(np.outer(r[s:s + step], u)) @ wf
        return out

    def _build_grid(self):
        floor = self.quadrature_tol / 100
        # scan outward in blocks until a whole block stays below the floor
        block = 100.0 / self.A
        radius, start = 0.0, 0.0
        while True:
            scan = np.arange(start, start + block, _SCAN_STEP / self.A)
            above = np.nonzero(np.abs(self.f_direct(scan)) > floor)[0]
            if above.size == 0:
                break
            radius = scan[above[-1]] + _SCAN_STEP / self.A
            start += block
            if start >= _SCAN_MAX / self.A:
                log.warning("f has not decayed below %.1e by r=%.0f; tail truncated", floor, start)
                break
        grid = np.arange(0.0, radius + 4 * _GRID_STEP / self.A, _GRID_STEP / self.A)
        # f is even, so f'(0) = 0 pins the left end
        spline = CubicSpline(grid, self.f_direct(grid), bc_type=((1, 0.0), "not-a-knot"))
        object.__setattr__(self, "tail_radius", float(grid[-1]))
        object.__setattr__(self, "_spline", spline)
        log.debug("%s A=%g: |f| < %.1e beyond r=%.2f (%d grid nodes)",
                  self.family_tag, self.A, floor, grid[-1], grid.size)

    def f_eval(self, r):
        scalar = np.ndim(r) == 0
        r = np.abs(np.asarray(r, dtype=float))
        if self.f_closed is not None:
            out = self.f_closed(r)
        else:
            out = np.where(r <= self.tail_radius, self._spline(np.minimum(r, self.tail_radius)), 0.0)
        return float(out) if scalar else out

    def fhat_eval(self, u):
        scalar = np.ndim(u) == 0
        out = self.fhat(np.atleast_1d(u))
        return float(out[0]) if scalar else out

    __call__ = f_eval


@functools.lru_cache(maxsize=16)
def make_bump(A: float = 1.0, quadrature_tol: float = DEFAULT_TOL) -> TestFunction:
    """fhat(u) = exp(-1/(1-(u/A)^2)) on |u| < A, else 0."""
    if not A > 0:
        raise ValueError("A must be positive")
    return TestFunction(A, bump_fhat(A), "bump", quadrature_tol)


def make_fejer(A: float = 1.0) -> TestFunction:
    """Triangular fhat (max(0, 1-|u|/A)).  Only continuous, so it falls
    outside the smooth class; useful for checking the quadrature machinery
    against the closed form f(r) = 2(1 - cos Ar) / (A r^2)."""

    def f(r):
        r = np.asarray(r, dtype=float)
        small = np.abs(A * r) < 1e-4
        safe = np.where(small, 1.0, r)
        x = A * r
        series = A * (1 - x**2 / 12 + x**4 / 360)
        return np.where(small, series, 2 * (1 - np.cos(A * safe)) / (A * safe**2))

    return TestFunction(A, fejer_fhat(A), "fejer", DEFAULT_TOL, f_closed=f)


def make_test_function(family: str, A: float, tol: float = DEFAULT_TOL) -> TestFunction:
    if family == "bump":
        return make_bump(A, tol)
    if family == "fejer":
        return make_fejer(A)
    raise ValueError(f"unknown test-function family {family!r}")


# ---------------------------------------------------------------------------
# window


@dataclass(frozen=True)
class WindowParams:
    L: float
    tau: float

    def __post_init__(self):
        if not self.L >= 2:
            raise ValueError(f"window scale L must be >= 2, got {self.L}")
        if not self.tau > 0:
            raise ValueError(f"window centre tau must be positive, got {self.tau}")

    @classmethod
    def unchecked(cls, L: float, tau: float) -> "WindowParams":
        """Bypass the L >= 2 guard (used for closed-form spot checks)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "L", float(L))
        object.__setattr__(obj, "tau", float(tau))
        return obj


def hhat_window(tf: TestFunction, w: WindowParams, u):
    """Fourier transform of h: (2/L) fhat(u/L) cos(tau u)."""
    u = np.asarray(u, dtype=float)
    val = (2.0 / w.L) * tf.fhat(np.atleast_1d(u / w.L)).reshape(u.shape) * np.cos(w.tau * u)
    return float(val) if val.ndim == 0 else val


def h_window(tf: TestFunction, w: WindowParams, r):
    """h(r) = f(L(r - tau)) + f(L(r + tau))."""
    r = np.asarray(r, dtype=float)
    val = tf.f_eval(w.L * (r - w.tau)) + tf.f_eval(w.L * (r + w.tau))
    return float(val) if np.ndim(val) == 0 else val


# ---------------------------------------------------------------------------
# smooth (Weyl) term


def r_tanh(r):
    return r * np.tanh(np.pi * r)


def r_coth(r):
    """r coth(pi r), continued to 1/pi at r = 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < 1e-6
    safe = np.where(small, 1.0, r)
    return np.where(small, 1 / np.pi + np.pi * r**2 / 3, safe / np.tanh(np.pi * safe))


def weyl_density(kind: str):
    if kind == "laplace":
        return r_tanh
    if kind == "dirac":
        return r_coth
    raise ValueError(f"unknown operator kind {kind!r}")


def weyl_term(tf: TestFunction, w: WindowParams, genus: int, kind: str = "laplace") -> float:
    """(genus - 1) * integral over R of h(r) * r tanh(pi r) dr (coth for dirac)."""
    rho = weyl_density(kind)
    if genus == 1:
        return 0.0
    if not math.isfinite(tf.tail_radius):
        raise QuadratureFailure(
            f"{tf.family_tag} test function decays too slowly for a certified Weyl tail")
    upper = w.tau + tf.tail_radius / w.L

    def g(r):
        return h_window(tf, w, r) * float(rho(r))

    # the whole integrand is even, so integrate [0, upper] and double
    breaks = sorted({w.tau, max(w.tau - tf.tail_radius / w.L, 0.0)} - {0.0})
    val, err = integrate.quad(g, 0.0, upper, points=breaks or None,
                              epsabs=tf.quadrature_tol / 4, epsrel=1e-13, limit=4000)
    # beyond the tail radius |h| < tol/50 while r*rho grows linearly; bound it crudely
    tail = 2 * (tf.quadrature_tol / 50) * upper * (tf.tail_radius / w.L)
    if err > tf.quadrature_tol * max(1.0, abs(val)) or not math.isfinite(val):
        raise QuadratureFailure(f"Weyl integral did not converge (error estimate {err:.2e})")
    log.debug("weyl_term: value %.12g, quad err %.1e, tail bound %.1e", val, err, tail)
    return 2.0 * (genus - 1) * val


# ---------------------------------------------------------------------------
# correction integral for q-rational flux


def _sinh2_sum(t):
    """S(t) = sum_{n>=1} sinh(t/n)^2 / n for an array t >= 0.

    Direct summation up to n = N >= 2 max(t), then the Taylor series
    sinh^2 x = sum_k 2^{2k-1} x^{2k} / (2k)! summed against Hurwitz zeta
    values for the tail.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    N = max(8, int(math.ceil(2 * float(t.max(initial=0.0)))))
    n = np.arange(1, N + 1, dtype=float)
    head = (np.sinh(t[:, None] / n) ** 2 / n).sum(axis=1)
    tail = np.zeros_like(t)
    for k in range(1, 16):
        coef = 2.0 ** (2 * k - 1) / math.factorial(2 * k) * special.zeta(2 * k + 1, N + 1)
        tail += coef * t ** (2 * k)
    return head + tail


@dataclass(frozen=True)
class IfqResult:
    value: float
    error: float


def i_fq_detail(tf: TestFunction, w: WindowParams, q, tol: float | None = None) -> IfqResult:
    """I_{f,q}(L, tau) with a quadrature error estimate.

    Each term of the defining n-sum is rescaled by y = n q x / L onto the
    support of fhat.  The terms then share the factor
    fhat(y) cos(tau L y) / sinh(L y / 2) and the n-sum collapses to
    sinh^2(c y / n) / n with c = L / (2q), summed by ``_sinh2_sum``.  The
    remaining one-dimensional integral has a cosine weight, handled by
    QUADPACK's QAWO.
    """
    from .flux import INF

    if q is INF:
        return IfqResult(0.0, 0.0)
    tol = tf.quadrature_tol if tol is None else tol
    L, A = w.L, tf.A
    c = L / (2.0 * q)

    def amp(y):
        if y <= 0.0:
            return 0.0
        fh = tf.fhat(np.array([y]))[0]
        if fh == 0.0:
            return 0.0
        return fh * _sinh2_sum(np.array([c * y]))[0] / math.sinh(L * y / 2)

    val, err = integrate.quad(amp, 0.0, A, weight="cos", wvar=w.tau * L,
                              epsabs=tol * q / 4, epsrel=1e-12, limit=2000)
    val, err = 4.0 / q * val, 4.0 / q * err
    if not math.isfinite(val) or err > 10 * tol * max(1.0, abs(val)):
        raise QuadratureFailure(f"I_fq quadrature error estimate {err:.2e} exceeds tolerance")
    return IfqResult(float(val), float(err))


def i_fq(tf: TestFunction, w: WindowParams, q) -> float:
    return i_fq_detail(tf, w, q).value


def i_fq_term(tf: TestFunction, w: WindowParams, m: int, panels: int = 64) -> float:
    """J(m) = (4/L) integral_0^{AL/m} fhat(m x/L) sinh^2(x/2)/sinh(m x/2) cos(m tau x) dx,
    so that I_{f,q} = sum_{n>=1} J(n q).  Composite Gauss-Legendre in x."""
    L = w.L
    x, wt = _gl_panels(0.0, tf.A * L / m, panels)
    vals = tf.fhat(m * x / L) * np.sinh(x / 2) ** 2 / np.sinh(m * x / 2) * np.cos(m * w.tau * x)
    return float(4.0 / L * (wt @ vals))


def i_fq_moments(tf: TestFunction, w: WindowParams, kmax: int = 14, panels: int = 128) -> np.ndarray:
    """M_k = integral_0^A fhat(y) y^{2k} cos(tau L y) / sinh(L y / 2) dy, k = 1..kmax."""
    y, wt = _gl_panels(0.0, tf.A, panels)
    base = tf.fhat(y) * np.cos(w.tau * w.L * y) / np.sinh(w.L * y / 2)
    return np.array([wt @ (base * y ** (2 * k)) for k in range(1, kmax + 1)])


def i_fq_termwise(tf: TestFunction, w: WindowParams, q, head: int = 64, tol: float | None = None) -> float:
    """Second route to I_{f,q}: the first ``head`` terms J(nq) by a composite
    Gauss-Legendre rule (panel count doubled until stable), plus the tail
    n > head expanded in moments of fhat against Hurwitz zeta values."""
    from .flux import INF

    if q is INF:
        return 0.0
    tol = (tf.quadrature_tol if tol is None else tol)
    total = 0.0
    for n in range(1, head + 1):
        panels, prev = 32, i_fq_term(tf, w, n * q, 16)
        while True:
            cur = i_fq_term(tf, w, n * q, panels)
            if abs(cur - prev) <= tol / head or panels >= 4096:
                break
            prev, panels = cur, 2 * panels
        total += cur
    c = w.L / (2.0 * q)
    mom = i_fq_moments(tf, w)
    tail = 0.0
    for k, M in enumerate(mom, start=1):
        tail += 2.0 ** (2 * k - 1) / math.factorial(2 * k) * c ** (2 * k) * special.zeta(2 * k + 1, head + 1) * M
    return total + 4.0 / q * tail


# ---------------------------------------------------------------------------
# random-matrix variance densities

_RMT_WEIGHT = {"goe": 2.0, "gue": 1.0, "gse": 0.5}


def rmt_density(tf: TestFunction, kind: str) -> float:
    """integral of c |x| fhat(x)^2 over [-A, A], c = 2, 1, 1/2 for goe, gue, gse."""
    try:
        c = _RMT_WEIGHT[kind]
    except KeyError:
        raise ValueError(f"unknown ensemble {kind!r}") from None
    val, err = integrate.quad(lambda x: x * tf.fhat(np.array([x]))[0] ** 2, 0.0, tf.A,
                              epsabs=1e-15, epsrel=1e-13, limit=500)
    return 2.0 * c * val
