"""Command-line front end: ``qnek verify``, ``qnek eval-block``, ``qnek eval-tau``."""
from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import blocks as B
from . import lax as L
from ._pool import map_ordered
from .config import BlockConfig, ConfigError, LaxConfig, Settings, format_complex, load_config
from .partitions import enumerate_tuples
from .qspecial import QBase, ResonanceError
from .report import VerificationReport

__all__ = ["RunConfig", "Check", "block_checks", "lax_checks", "run_checks", "run_suite", "main"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
# outcomes recorded as skipped(reason) rather than fail
SKIPPABLE = (ResonanceError, L.TauZeroError, L.AnnulusError)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    config: str
    seed: int = 42
    out: str | None = None
    fmt: str = "json"
    cutoff: int | None = None
    radius: int | None = None
    tolerance: float | None = None
    timings: bool = False


@dataclass(frozen=True)
class Check:
    """A group of identities computed together; ``ids`` are known before running."""

    ids: tuple[str, ...]
    run: Callable[[], list[VerificationReport]]


# ---------------------------------------------------------------------------
# random draws for block-level identities


def _near_integer(z: complex, eps: float = 1e-3) -> bool:
    return abs(z - round(z.real)) < eps


class _Draws:
    """Seeded parameter draws, resampled away from resonant configurations."""

    def __init__(self, seed: int, N: int):
        self.rng = np.random.default_rng(seed)
        self.N = N

    def complex(self, re: tuple, im: tuple) -> complex:
        return complex(self.rng.uniform(*re), self.rng.uniform(*im))

    def traceless(self) -> np.ndarray:
        while True:
            v = self.rng.uniform(-0.4, 0.4, self.N) + 1j * self.rng.uniform(-0.2, 0.2, self.N)
            v -= v.mean()
            if not any(_near_integer(d) for d in _differences(v)):
                return v

    def generic(self, make, exponents):
        """Redraw ``make()`` until no value of ``exponents(*draw)`` is near an integer."""
        while True:
            d = make()
            if not any(_near_integer(e) for e in exponents(*d)):
                return d

    def index(self) -> int:
        return int(self.rng.integers(1, self.N + 1))

    def tuple_upto(self, k: int):
        pool = enumerate_tuples(self.N, k)
        return pool[int(self.rng.integers(len(pool)))]


def _differences(v) -> list[complex]:
    return [v[a] - v[b] for a in range(len(v)) for b in range(len(v)) if a != b]


def _cross(theta, s2, s0, N):
    # exponents feeding Gamma_q / Barnes factors of the degenerate blocks
    out = [1 - 1.0 / N + a - theta - b for a in s2 for b in s0]
    return out + _differences(s2) + _differences(s0)


def block_checks(N: int, base: QBase, seed: int, st: Settings) -> list[Check]:
    """Identity checks on seeded random blocks."""
    d = _Draws(seed, N)
    checks = []

    for kind, lx1, lx2 in (("zero", cmath.log(1.3 + 0.2j), cmath.log(0.4 - 0.1j)),
                          ("infinity", cmath.log(0.3 + 0.2j), cmath.log(1.4 - 0.1j))):
        th1, s2, s0 = d.generic(lambda: (d.complex((0.2, 0.45), (-0.1, 0.1)), d.traceless(), d.traceless()),
                                lambda t, a, b: _cross(t, a, b, N))
        i = d.index()
        cutoff = st.block_cutoff
        checks.append(Check((f"reduction.{kind}",), lambda a=(kind, th1, s2, s0, i, lx1, lx2, cutoff):
                            [B.verify_reduction(*a[:7], base, cutoff=a[7], tol=st.tol_for(f"reduction.{a[0]}", 1e-8))]))

    th1, s2, s0 = d.generic(lambda: (d.complex((0.2, 0.8), (-0.2, 0.2)), d.traceless(), d.traceless()),
                            lambda t, a, b: _cross(t, a, b, N))
    u = d.complex((-0.5, 0.5), (-0.3, 0.3))
    laws = ("connection_matrix.det", "connection_matrix.sigma_shift", "connection_matrix.theta_fraction_shift",
            "connection_matrix.theta_plus_one", "connection_matrix.x_periodicity")
    checks.append(Check(laws, lambda: B.verify_matrix_laws(th1, s2, s0, u, base)))

    # four-point connection formula on the overlap annulus
    th4, s2c, s0c = d.generic(lambda: (d.complex((0.5, 0.7), (-0.05, 0.05)), d.traceless(), d.traceless()),
                              lambda t, a, b: _cross(t, a, b, N))

    def four_point():
        radii = B.overlap_radii(N, th4, base, bound=0.9)
        settings = {"kind": "four_point", "N": N, "cutoff": st.block_cutoff}
        if radii is None:
            return [VerificationReport.skip("connection.four_point", "no overlap", 0.0, settings)]
        r = math.sqrt(radii[0] * radii[1])
        arg = max(abs(base.power(N * th4)) * r, abs(base.q) / r)
        tol = max(B.truncation_tolerance([arg], st.block_cutoff), 1e-10)
        lrs = [cmath.log(r) + 1j * (0.4 + 2.0 * a) for a in range(3)]
        return [B.verify_connection("four_point", {"theta1": th4, "sigma2": s2c, "sigma0": s0c}, (0.2 + 0.3j, lrs),
                                    st.block_cutoff, base, st.tol_for("connection.four_point", tol))]

    checks.append(Check(("connection.four_point",), four_point))

    six = {"theta4": d.complex((0.2, 0.4), (-0.1, 0.1)), "theta2": 0.7, "theta1": d.complex((0.2, 0.3), (-0.1, 0.1)),
           "sigma4": d.traceless(), "sigma3": d.traceless(), "sigma1": d.traceless(), "sigma0": d.traceless(),
           "i": d.index()}
    lx3 = -0.2 * base.log + 0.3j
    r3 = abs(cmath.exp(lx3))
    tol6 = max(B.truncation_tolerance([abs(base.power(N * six["theta2"])) / r3, abs(base.q) * r3], 6), 1e-4)
    checks.append(Check(("connection.six_point",), lambda: [B.verify_connection(
        "six_point", six, (math.log(0.01), 0.0, lx3, math.log(100.0)), 6, base,
        st.tol_for("connection.six_point", tol6), outer_size=1)]))

    # contiguity relations and their prefactor-dressed forms
    for which in ("S1", "S2", "S3", "F1", "F2"):
        lam, nu = d.tuple_upto(2), d.tuple_upto(2)
        i = d.index()
        j = i if which == "S3" else d.index()
        while which == "S2" and j == i:
            j = d.index()
        m = max(len(lam[j - 1]), 1) + int(d.rng.integers(0, 2))
        params = {"theta2": d.complex((0.2, 0.4), (-0.1, 0.1)), "sigma1": d.traceless(), "sigma3": d.traceless(),
                  "i": i, "j": j}
        if which.startswith("S"):
            ident = f"contiguity.{which}"
            checks.append(Check((ident,), lambda w=which, a=(lam, nu, params, m), ident=ident: [B.verify_contiguity(
                w, *a, st.series_order, base, tol=st.tol_for(ident, 1e-9))]))
        else:
            ident = f"dressed_contiguity.{which}"
            checks.append(Check((ident,), lambda w=int(which[1]), a=(lam, nu, params, m), ident=ident: [
                B.verify_dressed_contiguity(w, *a, st.series_order, base, tol=st.tol_for(ident, 1e-9))]))
    return checks


# ---------------------------------------------------------------------------
# identities of the rank-N system


def det_y_samples(p: L.LaxParams, n: int = 10) -> list[complex]:
    """``n`` points far enough out for the expansion at infinity."""
    r = 20.0 * abs(p.t[0])
    return [r * (1 + a / (n - 1)) * cmath.exp(1j * (0.3 + 0.6 * a)) for a in range(n)]


class _Lazy:
    """Compute-once value shared between checks (thread safe)."""

    def __init__(self, fn):
        import threading

        self._fn, self._lock, self._val, self._err = fn, threading.Lock(), None, None
        self._done = False

    def get(self):
        with self._lock:
            if not self._done:
                try:
                    self._val = self._fn()
                except SKIPPABLE as e:
                    self._err = e
                self._done = True
        if self._err is not None:
            raise self._err
        return self._val


def lax_checks(p: L.LaxParams, st: Settings) -> list[Check]:
    m = p.m
    w, c = L.LatticeWindow(st.radius), st.cutoff
    fam = _Lazy(lambda: L.tau_family(p, w, c))
    checks = [
        Check(("tau.block_form", "tau.normalization"), lambda: L.verify_tau_forms(p, w, c)),
        Check(("lax.Y_infinity_asymptotics",), lambda: [L.verify_asymptotics(p, w, c)]),
        Check(("lax.det_Y.closed_form", "lax.det_Y.x_independence"),
              lambda: L.verify_det_y(p, det_y_samples(p), w, c)),
        Check(("lax.G_two_paths", "lax.Y1_two_paths", "lax.det_G_closed_form"), lambda: L.verify_extraction(p, w, c)),
        Check(("lax.A0_closed_form", "lax.A_leading", "lax.A_rational_fit", "lax.compatibility", "lax.det_A",
               "lax.det_B"), lambda: L.lax_matrices(p, None, w, c)[2]),
    ]
    for k in range(m + 1):
        checks.append(Check((f"lax.connection_relation.k{k}",), lambda k=k: [L.verify_connection_relation(p, k, None, w, c)]))
    for k in range(1, m + 2):
        checks.append(Check((f"tau.determinantal.p{k}", f"lax.B_i0_two_forms.p{k}"),
                            lambda k=k: L.verify_det_tau(p, k, 1, 2, w, c)))
    kinds = [("r", i) for i in range(1, m + 2)] + [("p", None)]
    for kind, i in kinds:
        name = f"schlesinger.{kind}" + ("" if i is None else str(i))

        def run(kind=kind, i=i):
            fam_s = L.tau_family(L.schlesinger(p, kind, i), w, c)
            reps = [L.verify_schlesinger(p, kind, 0, w=w, c=c, i=i)]
            for case in (1, 2, 3):
                reps.append(L.verify_schlesinger(p, kind, case, (2, 2), w, c, i=i, fam=fam.get(), fam_s=fam_s))
            return reps

        checks.append(Check(tuple(f"{name}.{x}" for x in ("case1", "case2", "case3", "dual_forms")), run))
    return checks


# ---------------------------------------------------------------------------
# running


def _apply_tolerance(rep: VerificationReport, st: Settings) -> VerificationReport:
    tol = st.tol_for(rep.identity, rep.tolerance)
    if tol == rep.tolerance or rep.skipped:
        return rep
    return replace(rep, tolerance=tol, status="")


def _run_one(check: Check, st: Settings) -> list[VerificationReport]:
    t0 = time.perf_counter()
    try:
        reps = check.run()
    except SKIPPABLE as e:
        reason = f"{type(e).__name__}: {e}"
        reps = [VerificationReport.skip(i, reason) for i in check.ids]
    found = sorted(r.identity for r in reps)
    if found != sorted(check.ids):
        raise RuntimeError(f"check produced {found}, registered {sorted(check.ids)}")
    elapsed = time.perf_counter() - t0
    out = []
    for r in reps:
        r = _apply_tolerance(r, st)
        r.wall_time = r.wall_time or elapsed
        out.append(r)
    return out


def run_checks(checks: list[Check], st: Settings) -> list[VerificationReport]:
    """Run every check (possibly concurrently); reports come back sorted by identity."""
    groups = map_ordered(lambda ch: _run_one(ch, st), checks)
    reps = [r for g in groups for r in g]
    ids = [r.identity for r in reps]
    if len(set(ids)) != len(ids):
        raise RuntimeError("duplicate identity ids")
    return sorted(reps, key=lambda r: r.identity)


def suite_checks(cfg: LaxConfig | BlockConfig, seed: int) -> list[Check]:
    st = cfg.settings
    p = cfg.params
    checks = block_checks(p.N, QBase(cfg.q), seed, st)
    if isinstance(cfg, LaxConfig):
        checks += lax_checks(p, st)
    return checks


def _with_overrides(cfg, rc: RunConfig):
    st = cfg.settings
    kw = {}
    if rc.cutoff is not None:
        kw["cutoff"] = rc.cutoff
    if rc.radius is not None:
        kw["radius"] = rc.radius
    if rc.tolerance is not None:
        kw["tolerance"] = rc.tolerance
    return replace(cfg, settings=replace(st, **kw)) if kw else cfg


def render_json(reports: list[VerificationReport], timings: bool = False) -> str:
    return json.dumps([r.as_record(timings) for r in reports], indent=2, sort_keys=True) + "\n"


def run_suite(rc: RunConfig) -> int:
    try:
        cfg = _with_overrides(load_config(rc.config), rc)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    reports = run_checks(suite_checks(cfg, rc.seed), cfg.settings)
    text = render_json(reports, rc.timings)
    if rc.out:
        with open(rc.out, "w") as fh:
            fh.write(text)
    for r in reports:
        print(r.line())
    failed = [r for r in reports if not r.passed and not r.skipped]
    skipped = sum(r.skipped for r in reports)
    print(f"{len(reports)} identities: {len(reports) - len(failed) - skipped} pass, {len(failed)} fail, {skipped} skipped")
    return EXIT_FAIL if failed else EXIT_OK


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


def eval_block(rc: RunConfig) -> int:
    try:
        cfg = _with_overrides(load_config(rc.config), rc)
        if not isinstance(cfg, BlockConfig):
            raise ConfigError("eval-block needs a 'kind = block' file")
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    base = QBase(cfg.q)
    cutoff = cfg.settings.cutoff
    try:
        pre = B.block_prefactor(cfg.params, base)
        sums = [B.instanton_sum(cfg.params, k, base) for k in range(cutoff + 1)]
    except ResonanceError as e:
        print(f"resonance: {e}", file=sys.stderr)
        return EXIT_FAIL
    if rc.fmt == "csv":
        rows = [[k, repr(z.real), repr(z.imag), repr((pre * z).real), repr((pre * z).imag)] for k, z in enumerate(sums)]
        _emit(_csv(["size", "instanton_re", "instanton_im", "block_re", "block_im"], rows), rc.out)
    else:
        _emit(f"block = {format_complex(pre * sums[-1])}\n", rc.out)
    return EXIT_OK


def eval_tau(rc: RunConfig) -> int:
    try:
        cfg = _with_overrides(load_config(rc.config), rc)
        if not isinstance(cfg, LaxConfig):
            raise ConfigError("eval-tau needs a 'kind = lax' file")
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    st = cfg.settings
    w = L.LatticeWindow(st.radius)
    try:
        if rc.fmt == "csv":
            vals = [L.tau(cfg.params, w, k) for k in range(st.cutoff + 1)]
            rows = [[k, repr(v.real), repr(v.imag)] for k, v in enumerate(vals)]
            _emit(_csv(["cutoff", "tau_re", "tau_im"], rows), rc.out)
        else:
            _emit(f"tau = {format_complex(L.tau(cfg.params, w, st.cutoff))}\n", rc.out)
    except SKIPPABLE as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qnek", description="q-conformal blocks, tau functions and identity checks")
    sub = ap.add_subparsers(dest="mode", required=True)

    v = sub.add_parser("verify", help="run every registered identity check")
    v.add_argument("--config", required=True)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--out", help="report file (JSON)")
    v.add_argument("--cutoff", type=int)
    v.add_argument("--radius", type=int)
    v.add_argument("--tolerance", type=float, help="tolerance applied to every identity")
    v.add_argument("--timings", action="store_true", help="include wall times (breaks byte-identical reports)")

    b = sub.add_parser("eval-block", help="evaluate a q-conformal block")
    b.add_argument("--config", required=True)
    b.add_argument("--cutoff", type=int)
    b.add_argument("--format", dest="fmt", choices=("text", "csv"), default="text")
    b.add_argument("--out")

    t = sub.add_parser("eval-tau", help="evaluate a tau function")
    t.add_argument("--config", required=True)
    t.add_argument("--radius", type=int)
    t.add_argument("--cutoff", type=int)
    t.add_argument("--format", dest="fmt", choices=("text", "csv"), default="text")
    t.add_argument("--out")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    for name in ("cutoff", "radius"):
        val = getattr(args, name, None)
        if val is not None and val < 0:
            print(f"configuration error: --{name} must be nonnegative", file=sys.stderr)
            return EXIT_CONFIG
    rc = RunConfig(
        mode=args.mode, config=args.config, seed=getattr(args, "seed", 42), out=args.out, fmt=args.fmt if
        hasattr(args, "fmt") else "json", cutoff=args.cutoff, radius=getattr(args, "radius", None),
        tolerance=getattr(args, "tolerance", None), timings=getattr(args, "timings", False),
    )
    handler = {"verify": run_suite, "eval-block": eval_block, "eval-tau": eval_tau}[rc.mode]
    return handler(rc)


if __name__ == "__main__":
    sys.exit(main())
