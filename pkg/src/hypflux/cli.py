"""Command-line front end: ``hypflux <subcommand> [options]``.

Exit codes: 0 success, 1 invalid configuration or input, 2 incomplete or
corrupt input data, 3 numerical failure.  Reports are written as sorted-key
JSON with no timestamps, so rerunning the embedded config reproduces them
byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, HypfluxError, InvalidGenerators
from .flux import FluxSpec, parse_q
from .geodesics import (LengthSpectrum, check_spectrum, content_hash, enumerate_classes,
                        read_spectrum, spectrum_hash, write_spectrum)
from .kernels import WindowParams, i_fq_detail, make_test_function, rmt_density
from .rmt import EnsembleSpec, macroscopic_variance, statistic_variance
from .surface_group import format_word, load_generators, validate_generators
from .trace import CSV_COLUMNS, OperatorKind, mc_flux_experiment

ENV_WORKERS = "HYPFLUX_WORKERS"
SCAN_COLUMNS = CSV_COLUMNS + ("cutoff",)
STOCHASTIC = {"variance", "rmt", "scan"}

log = logging.getLogger("hypflux")


@dataclass
class RunConfig:
    subcommand: str
    gens: str = "bolza"
    spectrum: str | None = None
    q: str = "1"
    A: float = 1.0
    L: float = 6.0
    tau: float = 2.0
    op: str = "laplace"
    L_max: float | None = None
    samples: int = 10_000
    seed: int | None = None
    workers: int = 1
    out: str | None = None
    csv: str | None = None
    tol: float = 1e-10
    family: str = "bump"
    kind: str = "gue"
    n: int = 512
    reps: int = 2000
    W: float = 32.0
    center: float = 0.0
    method: str = "tridiagonal"
    sweep_L: str | None = None
    sweep_tau: str | None = None
    check: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def auto_L_max(self) -> float:
        """A * L, the largest length the window transform can see."""
        top = max(parse_range(self.sweep_L)) if self.sweep_L else self.L
        return self.A * top

    @property
    def effective_L_max(self) -> float:
        return self.auto_L_max if self.L_max is None else self.L_max

    def validate(self) -> None:
        problems = []
        if self.subcommand in STOCHASTIC and self.seed is None:
            problems.append("seed: required for stochastic subcommands")
        if not self.A > 0:
            problems.append("A: must be positive")
        if self.subcommand in ("variance", "scan", "ifq"):
            try:
                parse_q(self.q)
            except (ValueError, HypfluxError):
                problems.append(f"q: expected a positive integer or 'inf', got {self.q!r}")
        if self.op not in ("laplace", "dirac"):
            problems.append(f"op: expected laplace or dirac, got {self.op!r}")
        if self.samples < 2:
            problems.append("samples: need at least 2")
        if self.workers < 1:
            problems.append("workers: must be >= 1")
        if self.L_max is not None and not self.L_max > 0:
            problems.append("L_max: must be positive")
        for name in ("sweep_L", "sweep_tau"):
            text = getattr(self, name)
            if text:
                try:
                    parse_range(text)
                except ValueError as exc:
                    problems.append(f"{name}: {exc}")
        if problems:
            raise ConfigError("invalid configuration: " + "; ".join(problems))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        d.pop("out")
        d.pop("csv")
        d.pop("workers")  # results do not depend on it
        d["L_max_effective"] = self.effective_L_max
        return d


def parse_range(text: str) -> list[float]:
    """'start:step:stop' inclusive of stop, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"expected start:step:stop, got {text!r}")
    a, h, b = map(float, parts)
    if h <= 0 or b < a:
        raise ValueError(f"empty or descending range {text!r}")
    count = int(np.floor((b - a) / h + 1e-9)) + 1
    return [round(a + i * h, 12) for i in range(count)]


# ---------------------------------------------------------------------------
# shared plumbing


def _spectrum_for(cfg: RunConfig) -> tuple[LengthSpectrum, str]:
    if cfg.spectrum:
        spec = read_spectrum(cfg.spectrum)
        return spec, content_hash(cfg.spectrum)
    gens = load_generators(cfg.gens)
    spec = enumerate_classes(gens, cfg.effective_L_max, workers=cfg.workers)
    return spec, spectrum_hash(spec)


def _experiment(cfg: RunConfig, spec: LengthSpectrum, L: float, tau: float):
    q = parse_q(cfg.q)
    tf = make_test_function(cfg.family, cfg.A, cfg.tol)
    w = WindowParams(L, tau)
    op = OperatorKind.for_flux(cfg.op, q)
    return mc_flux_experiment(spec, FluxSpec(q, spec.genus or 2), tf, w, op,
                              cfg.samples, cfg.seed, cfg.workers)


def _csv_text(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, text lines)


def cmd_validate(cfg: RunConfig):
    gens = load_generators(cfg.gens)
    rep = validate_generators(gens)
    payload = {"generators": asdict(rep)}
    lines = rep.lines()
    if cfg.spectrum:
        spec = read_spectrum(cfg.spectrum)
        check_spectrum(spec)
        payload["spectrum"] = {"path": cfg.spectrum, "classes": len(spec),
                               "hash": content_hash(cfg.spectrum)}
        lines.append(f"spectrum      : {len(spec)} classes, invariants hold")
    if not rep.ok:
        raise InvalidGenerators("\n".join(lines))
    return payload, lines


def cmd_enumerate(cfg: RunConfig):
    spec, digest = _spectrum_for(RunConfig(**{**asdict(cfg), "spectrum": None}))
    if cfg.out:
        write_spectrum(spec, cfg.out)
        digest = content_hash(cfg.out)
        if cfg.check:
            check_spectrum(read_spectrum(cfg.out))
    elif cfg.check:
        check_spectrum(spec)
    genus = spec.genus or 2
    payload = {"classes": len(spec), "L_max": spec.L_max, "spectrum_hash": digest,
               "systole": float(spec.lengths[0]) if len(spec) else None, "path": cfg.out}
    lines = [f"{len(spec)} primitive oriented classes with length <= {spec.L_max}"]
    for c in spec.classes[:5]:
        lines.append(f"  {c.length:.12f}  {format_word(c.normal_form, genus)}")
    if cfg.out:
        lines.append(f"written to {cfg.out} (hash {digest})")
    return payload, lines


def cmd_ifq(cfg: RunConfig):
    tf = make_test_function(cfg.family, cfg.A, cfg.tol)
    res = i_fq_detail(tf, WindowParams(cfg.L, cfg.tau), parse_q(cfg.q))
    return ({"ifq": res.value, "error_estimate": res.error},
            [f"I_fq = {res.value!r}", f"error estimate = {res.error:.3e}"])


def cmd_density(cfg: RunConfig):
    tf = make_test_function(cfg.family, cfg.A, cfg.tol)
    val = rmt_density(tf, cfg.kind)
    return {"kind": cfg.kind, "density": val}, [f"{cfg.kind} density = {val!r}"]


def cmd_variance(cfg: RunConfig):
    spec, digest = _spectrum_for(cfg)
    rep = _experiment(cfg, spec, cfg.L, cfg.tau)
    payload = {"report": rep.to_dict(), "spectrum_hash": digest}
    if cfg.csv:
        Path(cfg.csv).write_text(_csv_text([{**rep.csv_row(), "cutoff": rep.cutoff_NL}], SCAN_COLUMNS))
    lines = [
        f"exact mean      {rep.exact_mean.real:+.6e}   mc {rep.mc_mean.real:+.6e} +- {rep.mc_mean_se:.1e}",
        f"exact variance  {rep.exact_variance:.6e}   mc {rep.mc_variance:.6e} +- {rep.mc_variance_se:.1e}",
        f"reference ({rep.reference_ensemble}, large-genus) variance {rep.rmt_density:.6e}, "
        f"second moment {rep.reference_variance:.6e}",
    ]
    if rep.degenerate:
        lines.append("degenerate: every flux draw gives the same value")
    return payload, lines


def cmd_rmt(cfg: RunConfig):
    ens = EnsembleSpec(cfg.kind, cfg.n, cfg.reps, cfg.center, cfg.W, cfg.method)
    tf = make_test_function(cfg.family, cfg.A, cfg.tol)
    est = statistic_variance(ens, tf, cfg.seed, cfg.workers)
    ref = rmt_density(tf, cfg.kind)
    payload = {"variance": est.variance, "se": est.se, "reference": ref,
               "ratio_to_reference": est.variance / ref,
               "finite_n_reference": macroscopic_variance(ens, tf)}
    return payload, [f"{k} = {v!r}" for k, v in payload.items()]


def cmd_scan(cfg: RunConfig):
    if cfg.sweep_L and cfg.sweep_tau:
        raise ConfigError("scan: sweep either --L or --tau, not both")
    spec, digest = _spectrum_for(cfg)
    points = ([(L, cfg.tau) for L in parse_range(cfg.sweep_L)] if cfg.sweep_L else
              [(cfg.L, t) for t in parse_range(cfg.sweep_tau or str(cfg.tau))])
    rows = []
    for L, tau in points:
        rep = _experiment(cfg, spec, L, tau)
        rows.append({**rep.csv_row(), "cutoff": rep.cutoff_NL})
    text = _csv_text(rows, SCAN_COLUMNS)
    if cfg.csv:
        Path(cfg.csv).write_text(text)
    return {"rows": rows, "spectrum_hash": digest}, text.rstrip("\n").split("\n")


COMMANDS = {"validate": cmd_validate, "enumerate": cmd_enumerate, "ifq": cmd_ifq,
            "density": cmd_density, "variance": cmd_variance, "rmt": cmd_rmt, "scan": cmd_scan}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hypflux", description=__doc__.splitlines()[0])
    output = _Parser(add_help=False)
    for parser, default in ((p, False), (output, argparse.SUPPRESS)):
        # accepted both before and after the subcommand
        parser.add_argument("--quiet", action="store_true", default=default,
                            help="print nothing on success")
        parser.add_argument("--json", action="store_true", default=default,
                            help="print the JSON artifact instead of text")
        parser.add_argument("-v", "--verbose", action="store_true", default=default)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[output], **k)

    def common(sp, *groups):
        if "gens" in groups:
            sp.add_argument("--gens", default="bolza", help="'bolza' or a generator JSON file")
        if "spectrum" in groups:
            sp.add_argument("--spectrum", help="length-spectrum cache file")
            sp.add_argument("--L-max", "--lmax", dest="L_max", type=float,
                            help="enumeration cutoff (default A*L)")
            sp.add_argument("--workers", type=int,
                            default=int(os.environ.get(ENV_WORKERS, "1")))
        if "window" in groups:
            sp.add_argument("--A", type=float, default=1.0, help="support radius of fhat")
            sp.add_argument("--L", type=float, default=6.0)
            sp.add_argument("--tau", type=float, default=2.0)
            sp.add_argument("--family", choices=("bump", "fejer"), default="bump")
            sp.add_argument("--tol", type=float, default=1e-10)
        if "flux" in groups:
            sp.add_argument("--q", default="1", help="flux denominator or 'inf'")
            sp.add_argument("--op", choices=("laplace", "dirac"), default="laplace")
            sp.add_argument("--samples", type=int, default=10_000)
            sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="write the JSON report (or cache file) here")

    common(sub.add_parser("validate", help="check a generator set"), "gens")
    sub.choices["validate"].add_argument("--spectrum", help="also check a cache file")
    e = sub.add_parser("enumerate", help="enumerate primitive geodesic classes")
    common(e, "gens", "spectrum")
    e.add_argument("--A", type=float, default=1.0)
    e.add_argument("--L", type=float, default=6.0)
    e.add_argument("--check", action="store_true",
                   help="re-read the written cache and verify its invariants")
    common(sub.add_parser("ifq", help="correction integral I_fq"), "window")
    sub.choices["ifq"].add_argument("--q", default="1")
    d = sub.add_parser("density", help="random-matrix variance density")
    d.add_argument("--kind", choices=("goe", "gue", "gse"), default="gue")
    d.add_argument("--A", type=float, default=1.0)
    d.add_argument("--family", choices=("bump", "fejer"), default="bump")
    d.add_argument("--out")
    v = sub.add_parser("variance", help="exact and Monte-Carlo flux moments")
    common(v, "gens", "spectrum", "window", "flux")
    v.add_argument("--csv", help="write CSV rows here")
    r = sub.add_parser("rmt", help="random-matrix Monte Carlo")
    r.add_argument("--kind", choices=("goe", "gue", "gse"), default="gue")
    r.add_argument("--n", type=int, default=512)
    r.add_argument("--reps", type=int, default=2000)
    r.add_argument("--A", type=float, default=1.0)
    r.add_argument("--W", type=float, default=32.0)
    r.add_argument("--center", type=float, default=0.0)
    r.add_argument("--method", choices=("tridiagonal", "dense"), default="tridiagonal")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int, default=int(os.environ.get(ENV_WORKERS, "1")))
    r.add_argument("--out")
    s = sub.add_parser("scan", help="sweep L or tau, one CSV row per point")
    common(s, "gens", "spectrum", "window", "flux")
    s.set_defaults(samples=2000)
    s.add_argument("--csv", help="CSV output path (default: stdout)")
    # --L and --tau accept ranges for scan
    for action in s._actions:
        if action.dest in ("L", "tau"):
            action.type = str
            action.default = str(action.default)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    raw = {k: v for k, v in vars(ns).items() if k not in ("quiet", "json", "verbose")}
    if raw["subcommand"] == "scan":
        L, tau = raw.pop("L"), raw.pop("tau")
        raw["sweep_L"] = L if ":" in L else None
        raw["sweep_tau"] = tau if ":" in tau else None
        raw["L"] = float(L.split(":")[0])
        raw["tau"] = float(tau.split(":")[0])
    names = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in raw.items() if k in names})
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> dict:
    """Execute one configured subcommand and return its artifact dict."""
    payload, lines = COMMANDS[cfg.subcommand](cfg)
    artifact = {"config": cfg.to_dict(), **payload}
    cfg.extra["lines"] = lines
    if cfg.out and cfg.subcommand != "enumerate":
        Path(cfg.out).write_text(json.dumps(artifact, sort_keys=True, indent=2, default=str) + "\n")
    return artifact


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    quiet = "--quiet" in argv
    try:
        ns = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = config_from_args(ns)
        artifact = run(cfg)
    except HypfluxError as exc:
        if not quiet:
            print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        if not quiet:
            print(f"error (invalid input): {exc}", file=sys.stderr)
        return 1
    if not ns.quiet:
        if ns.json:
            print(json.dumps(artifact, sort_keys=True, indent=2, default=str))
        else:
            print("\n".join(cfg.extra["lines"]))
    return 0
