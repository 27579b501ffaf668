"""Command-line entry point for the verification suites.

Every subcommand writes one CSV (tabular rows, self-describing ``#`` header)
and one JSON file (nested summary) per suite, prints a one-line summary per
suite, and exits with 0 if every selected suite passed, 1 if any failed and
2 on configuration errors.

Options are resolved in the order command line > config file section for
the subcommand > ``[common]`` section > built-in default.  The config file
is given by ``--config`` or the ``GLUEDBESSEL_CONFIG`` environment variable.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__

CONFIG_ENV = "GLUEDBESSEL_CONFIG"
CI_ENV = "GLUEDBESSEL_CI"

HEAT_SUITES = ("assembly", "gauss", "mixed", "pi")
RIESZ_SUITES = ("kernel", "bounds", "lp", "xcheck")
HARDY_SUITES = ("rh", "h1l1", "counterexample", "maximal")
SIM_SUITES = ("exit", "hit", "occupation")
FLAVORS = ("CW", "hD", "two-harmonic")


class ConfigError(ValueError):
    """Invalid configuration; reported with exit code 2."""


@dataclass
class Report:
    """Outcome of one suite: pass flag, scalar summary and tabular rows."""

    suite: str
    passed: bool
    summary: dict
    rows: list = field(default_factory=list)
    runtime: float = 0.0
    version: str = __version__
    error: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        keys = [k for k, v in self.summary.items() if isinstance(v, (int, float)) and not isinstance(v, bool)]
        stats = "  ".join(f"{k}={_fmt(self.summary[k])}" for k in keys[:4])
        msg = f"  error: {self.error}" if self.error else ""
        return f"[{tag}] {self.suite:<24s} {stats}  ({self.runtime:.1f} s){msg}"


def _fmt(v):
    return f"{v:.4g}" if isinstance(v, float) else str(v)


# ---------------------------------------------------------------------------
# output


def _plain(v):
    """JSON/CSV-safe scalar or container."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def _cell(v):
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ";".join(str(x) for x in v)
    return str(v)


def csv_body(rows) -> str:
    """Rows as CSV text; columns in order of first appearance."""
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in cols])
    return buf.getvalue()


def write_report(report: Report, config: dict, out: Path, stem: str):
    """Write ``<stem>.csv`` (config echo header, deterministic body) and ``<stem>.json``."""
    out.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    head = [f"# gluedbessel {report.version}", f"# suite: {report.suite}", f"# generated: {stamp}"]
    head += [f"# {k} = {_cell(v)}" for k, v in sorted(config.items())]
    rows = report.rows or [report.summary]
    csv_path = out / f"{stem}.csv"
    csv_path.write_text("\n".join(head) + "\n" + csv_body(rows))
    doc = {"suite": report.suite, "passed": report.passed, "runtime": report.runtime,
           "version": report.version, "generated": stamp, "config": config, "summary": report.summary}
    if report.error:
        doc["error"] = report.error
    (out / f"{stem}.json").write_text(json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")
    return csv_path


def read_csv_body(path) -> str:
    """CSV text with the ``#`` header removed (for reproducibility comparisons)."""
    return "".join(ln for ln in Path(path).read_text().splitlines(True) if not ln.startswith("#"))


# ---------------------------------------------------------------------------
# suites


def _timed(suite, fn):
    t0 = time.perf_counter()
    try:
        rep = fn()
    except Exception as exc:  # a crashing suite is a failed suite
        rep = Report(suite, False, {}, error=f"{type(exc).__name__}: {exc}")
    rep.suite = suite
    rep.runtime = time.perf_counter() - t0
    return rep


def suite_specfun(a):
    from .specfun import psi_prime, tau, verify_asymptotics

    rep = verify_asymptotics(a.d)
    rows = rep.to_records()
    boundary = []
    for lam in (1e-3, 1e-1, 1.0, 10.0, 1e3):
        boundary.append({"lambda": lam, "tau(1)": tau(a.d, lam, 1.0).value,
                         "psi'(1)": psi_prime(a.d, lam, 1.0).value})
    worst = max(max(abs(b["tau(1)"]), abs(b["psi'(1)"])) for b in boundary)
    rows += [{"function": "boundary", "quantity": f"lambda={b['lambda']}", "fitted": max(abs(b["tau(1)"]),
              abs(b["psi'(1)"])), "tolerance": 1e-12, "passed": True} for b in boundary]
    ok = rep.passed and worst <= 1e-12
    return Report("specfun", ok, {"rows": len(rep.rows), "failures": len(rep.failures()),
                                  "boundary_max": worst}, rows)


def suite_heat(a):
    from . import heat

    times = a.t or [0.1, 1.0, 10.0]
    if a.suite == "assembly":
        r = heat.assembly_check(a.d, times=times)
        rows = [{"x": w["x"], "y": w["y"], "t": w["t"], "value": w["direct"], "bound_low": w["assembled"],
                 "bound_high": w["assembled"], "ratio": w["direct"] / w["assembled"] if w["assembled"] else
                 math.nan, "rel": w["rel"]} for w in r.rows]
        return Report("heat/assembly", r.passed, {"max_rel": max(r.max_rel), "tolerance": r.tolerance,
                                                  "max_rel_independent": max(r.max_rel_independent)}, rows)
    if a.suite == "gauss":
        s = heat.sandwich_check(a.d, times=a.t)
        p = heat.prefactor_law(a.d)
        rows = []
        for name, res in (("coarse", s.coarse), ("fine", s.fine)):
            rows.append({"grid": name, "c1": res.c1, "c2": res.c2, "C": res.C, "C_low": res.C_low,
                         "C_up": res.C_up, "worst_low": list(res.worst_low), "worst_up": list(res.worst_up),
                         "cells": res.n_cells, "violations": len(res.violations)})
        rows.append({"grid": "prefactor", "slope": p.slope, "expected": p.expected, "tolerance": p.tolerance})
        return Report("heat/gauss", s.passed and p.passed,
                      {"C": max(s.coarse.C, s.fine.C), "change": s.change, "threshold": s.threshold,
                       "prefactor_slope": p.slope, "prefactor_expected": p.expected}, rows)
    if a.suite == "mixed":
        m = heat.mixed_check(a.d, rtol=a.rtol)
        rows = [{"y": r["y"], "t": r["t"], "value": r["y^(d-2) Psi"],
                 "bound_low": m.psi.constants["c"] * math.exp(-r["y"] ** 2 / (m.psi.constants["c5"] * r["t"])),
                 "bound_high": m.psi.constants["C"]} for r in m.psi.rows]
        return Report("heat/mixed", m.passed, {"psi_C": m.psi.C, "pi_C": m.pi.C, "change": m.change,
                                               "rtol": m.rtol, "psi_constants": m.psi.constants,
                                               "pi_constants": m.pi.constants}, rows)
    p = heat.pi_consistency(a.d, rtol=a.rtol)
    e = heat.first_passage_consistency(a.d)
    rows = [{"x": r["x"], "y": r["y"], "t": r["t"], "value": r["T"], "bound_low": r["Pi_low"],
             "bound_high": r["Pi_up"], "ratio": r["T"] / r["Pi_up"]} for r in p.rows]
    return Report("heat/pi", p.finite and math.isfinite(e.C),
                  {"pi_C": p.C, "first_passage_C": e.C, "cells": p.n_cells, "pi_constants": p.constants}, rows)


def suite_riesz(a):
    from . import riesz

    if a.suite == "kernel":
        xs = (1.5, 2.0, 3.0, 5.0, 10.0, 20.0)
        rows, sign_ok = [], True
        for bc in ("N", "D"):
            for x in xs:
                for y in xs:
                    if x == y:
                        continue
                    v, err = riesz.riesz_kernel(bc, a.d, x, y, return_error=True)
                    rows.append({"bc": bc, "x": x, "y": y, "value": v, "est_error": err})
        for x in (4.0, 8.0, 16.0):
            for y in (2.0, 2.5, 3.0):
                sign_ok &= riesz.riesz_kernel("D", a.d, x, y) <= 0.0
        return Report("riesz/kernel", sign_ok and all(math.isfinite(r["value"]) for r in rows),
                      {"entries": len(rows), "R_D_nonpositive": bool(sign_ok)}, rows)
    if a.suite == "bounds":
        n = 6 if a.quick else 10
        r = riesz.verify_derivative_bounds(a.d, n=n, n_fd=20 if a.quick else 50, seed=a.seed or 0)
        rows = [{"level": i, "C_N": r.C_N[i], "C_D": r.C_D[i], "worst_N": list(r.worst_N[i]),
                 "worst_D": list(r.worst_D[i]), "cells": r.n_cells[i]} for i in range(len(r.C_N))]
        return Report("riesz/bounds", r.passed, {"C_N": r.C_N[-1], "C_D": r.C_D[-1], "change_N": r.change_N,
                                                 "change_D": r.change_D, "fd_max_rel": r.fd_max_rel}, rows)
    if a.suite == "lp":
        g = riesz.lp_growth(a.d, bc="D")
        top, low = riesz.l2_bound(a.d, "N", n_funcs=20 if a.quick else 100, seed=a.seed or 0)
        rows = [{"M": M, "ratio": v, "p": g["p"]} for M, v in zip(g["M"], g["ratio"])]
        ok = g["slope_loglog"] > 0 and all(np.diff(g["ratio"]) > 0) and math.isfinite(top)
        return Report("riesz/lp", ok, {"slope_loglog": g["slope_loglog"], "p": g["p"], "l2_max": top,
                                       "l2_min": low}, rows)
    fd = riesz.fd_crosscheck(a.d, n=20 if a.quick else 50, seed=a.seed or 0)
    rows = []
    for bc in ("N", "D"):
        rows += [dict(r, bc=bc) for r in riesz.kernel_operator_consistency(a.d, bc)]
    worst = max(r["rel"] for r in rows)
    return Report("riesz/xcheck", fd <= 1e-5 and worst <= 0.02, {"fd_max_rel": fd, "operator_max_rel": worst},
                  rows)


def suite_hardy(a):
    from . import hardy

    seed = a.seed or 0
    if a.suite == "rh":
        r = hardy.reverse_holder_check(a.d, seed=seed)
        return Report("hardy/rh", r.passed, {"constant": r.constant, "change": r.change, "far_max": r.far_max,
                                             "worst": list(r.worst)})
    if a.suite == "counterexample":
        g = hardy.counterexample_growth(a.d)
        rows = [{"M": M, "norm": v, "contrast": c} for M, v, c in zip(g.M, g.norms, g.contrast)]
        return Report("hardy/counterexample", g.passed, {"slope": g.slope, "r2": g.r2,
                                                         "contrast_slope": g.contrast_slope,
                                                         "odd_defect": g.odd_defect}, rows)
    if a.suite == "maximal":
        c = hardy.compare_norms(a.d, n_atoms=a.atoms, seed=seed)
        s = c.summary()
        rows = [{"atom": i, "maximal_norm": v} for i, v in enumerate(c.ratios)]
        return Report("hardy/maximal", c.passed, s, rows)
    flavors = FLAVORS if a.flavor == "all" else (a.flavor,)
    rows, summaries, ok = [], {}, True
    for fl in flavors:
        r = hardy.h1_to_l1_sweep(fl, a.d, n_atoms=a.atoms, seed=seed)
        summaries[fl] = r.summary()
        ok &= r.passed
        rows += [{"flavor": fl, "atom": i, "center": c, "radius": rad, "norm": v, "norm_fine": vf,
                  "control": ctl, "far": far}
                 for i, (c, rad, v, vf, ctl, far) in enumerate(zip(r.centers, r.radii, r.norms, r.norms_fine,
                                                                   r.control, r.far))]
    head = summaries[flavors[-1]]
    return Report("hardy/h1l1", ok, {"max": max(s["max"] for s in summaries.values()),
                                     "separation": min(s["separation"] for s in summaries.values()),
                                     "refinement_change": max(s["refinement_change"]
                                                              for s in summaries.values()),
                                     "n_atoms": head["n_atoms"], "flavors": summaries}, rows)


def _process_config(a):
    from .stochastic import OCCUPATION_DT, ProcessConfig

    dt = a.dt if a.dt is not None else (OCCUPATION_DT if a.suite == "occupation" else 4e-3)
    try:
        return ProcessConfig(d=a.d, dt=dt, n_paths=a.paths, seed=a.seed or 0, workers=a.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _process_echo(cfg):
    return {f"process.{k}": v for k, v in cfg.echo().items()}


def suite_simulate(a, cfg):
    from . import stochastic as st

    if a.suite == "exit":
        e = st.exit_probability(cfg, a.x0, backend=a.backend)
        row = {"estimate": e.estimate, "se": e.se, "expected": e.expected, "z": e.z, "d": e.d, "x0": e.x0,
               "expected_finite": e.expected_finite, "truncation": e.truncation,
               "n_exit_plus": e.n_exit_plus, "n_exit_minus": e.n_exit_minus, "n_censored": e.n_censored,
               "censor_flag": e.censor_flag}
        return Report("simulate/exit", e.passed, row, [row])
    if a.suite == "hit":
        h = st.hitting_histogram(cfg, a.x0, backend=a.backend)
        rows = [{"t_low": lo, "t_high": hi, "count": c, "expected": h.n_hits * m}
                for lo, hi, c, m in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts, h.shape_mass)]
        return Report("simulate/hit", h.passed, {"ks": h.ks, "hit_fraction": h.hit_fraction,
                                                 "se": h.hit_fraction_se, "expected": h.hit_fraction_expected,
                                                 "n_hits": h.n_hits, "first_bin_count": h.first_bin_count,
                                                 "scale": h.scale}, rows)
    o = st.occupation_histogram(cfg, a.x0, a.time, backend=a.backend)
    rows = [{"s_low": lo, "s_high": hi, "count": c, "pde_mass": m, "rel_error": r}
            for lo, hi, c, m, r in zip(o.edges[:-1], o.edges[1:], o.counts, o.pde_mass, o.rel_error)]
    return Report("simulate/occupation", o.passed, {"max_rel_error": o.max_rel_error,
                                                    "opposite_mc": o.opposite_mc, "opposite_se": o.opposite_se,
                                                    "opposite_pde": o.opposite_pde, "chi2": o.chi2}, rows)


# ---------------------------------------------------------------------------
# argument handling


def _floats(text):
    try:
        return [float(v) for v in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key-value config file (default: ${CONFIG_ENV})")
    common.add_argument("--out", default="reports", help="output directory, or a .csv path")
    common.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1,
                        help="worker-pool size cap (default: available cores)")
    common.add_argument("--ci", action="store_true", default=bool(os.environ.get(CI_ENV)),
                        help=f"CI mode: stochastic suites require --seed (also ${CI_ENV})")
    common.add_argument("--quick", action="store_true", help="reduced problem sizes")
    common.add_argument("--d", type=float, default=3.0, help="dimension parameter")

    p = _Parser(prog="gluedbessel", description="Verification suites for the glued Bessel operator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("specfun-check", parents=[common], help="special-function asymptotics and boundary zeros")

    h = sub.add_parser("heat", parents=[common], help="heat kernel suites")
    h.add_argument("--suite", choices=HEAT_SUITES, default="assembly")
    h.add_argument("--t", type=_floats, default=None, help="times, comma separated")
    h.add_argument("--rtol", type=float, default=1e-8, help="time-integral quadrature tolerance")

    r = sub.add_parser("riesz", parents=[common], help="Riesz transform suites")
    r.add_argument("--suite", choices=RIESZ_SUITES, default="kernel")
    r.add_argument("--seed", type=_seed, default=None)

    a = sub.add_parser("hardy", parents=[common], help="Hardy-space suites")
    a.add_argument("--suite", choices=HARDY_SUITES, default="rh")
    a.add_argument("--atoms", type=_positive_int, default=200)
    a.add_argument("--seed", type=_seed, default=None)
    a.add_argument("--flavor", choices=FLAVORS + ("all",), default="all")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo suites")
    s.add_argument("--suite", choices=SIM_SUITES, default="exit")
    s.add_argument("--x0", type=float, default=2.0, help="starting point (signed)")
    s.add_argument("--paths", type=_positive_int, default=100_000)
    s.add_argument("--seed", type=_seed, default=None)
    s.add_argument("--time", type=float, default=1.0, help="observation time (occupation)")
    s.add_argument("--dt", type=float, default=None, help="base step (default per suite)")
    s.add_argument("--backend", choices=("cython", "numpy"), default=None)

    al = sub.add_parser("all", parents=[common], help="every suite (reduced with --quick)")
    al.add_argument("--seed", type=_seed, default=None)
    return p


def _subparser(parser, command):
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[command]
    raise KeyError(command)


def load_config(path, command, sp):
    """Defaults for subparser ``sp`` from the ``[common]`` and ``[command]`` sections."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    actions = {act.dest: act for act in sp._actions if act.dest not in ("help", "config")}
    out = {}
    for section in ("common", command):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            dest = key.replace("-", "_")
            if dest not in actions:
                if section == "common":
                    continue
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            act = actions[dest]
            try:
                if isinstance(act, argparse._StoreTrueAction):
                    val = cp.getboolean(section, key)
                else:
                    val = act.type(raw) if act.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"bad value for {key!r} in [{section}]: {raw!r}") from exc
            if act.choices is not None and val not in act.choices:
                raise ConfigError(f"{key} must be one of {list(act.choices)}, got {val!r}")
            out[dest] = val
    return out


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        sp = _subparser(parser, args.command)
        sp.set_defaults(**load_config(path, args.command, sp))
        args = parser.parse_args(argv)
        args.config = path
    return args


def _echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("workers", "out")}


def _outputs(args, stem):
    out = Path(args.out)
    if out.suffix == ".csv":
        return out.parent, out.stem if stem is None else f"{out.stem}-{stem}"
    return out, stem


def _plan(args):
    """List of (label, callable) for the selected command."""
    cmd = args.command
    if cmd == "specfun-check":
        return [("specfun", lambda: suite_specfun(args), {})]
    if cmd == "heat":
        return [(f"heat-{args.suite}", lambda: suite_heat(args), {})]
    if cmd == "riesz":
        return [(f"riesz-{args.suite}", lambda: suite_riesz(args), {})]
    if cmd == "hardy":
        return [(f"hardy-{args.suite}", lambda: suite_hardy(args), {})]
    if cmd == "simulate":
        if args.x0 is None or not math.isfinite(args.x0) or abs(args.x0) < 1.0:
            raise ConfigError("--x0 must satisfy |x0| >= 1")
        if args.suite == "hit" and not args.x0 > 1.0:
            raise ConfigError("the hit suite needs x0 > 1")
        if not args.time > 0:
            raise ConfigError("--time must be positive")
        cfg = _process_config(args)
        return [(f"simulate-{args.suite}", lambda: suite_simulate(args, cfg), _process_echo(cfg))]
    return _plan_all(args)


def _plan_all(args):
    quick = args.quick
    ns = argparse.Namespace(**vars(args))
    plan = []

    def add(label, fn, **kw):
        local = argparse.Namespace(**{**vars(ns), **kw})
        plan.append((label, lambda: fn(local), {k: v for k, v in kw.items() if k != "suite"}))

    add("specfun", suite_specfun)
    add("heat-assembly", suite_heat, suite="assembly", t=None, rtol=1e-8)
    add("heat-mixed", suite_heat, suite="mixed", t=None, rtol=1e-8)
    if not quick:
        add("heat-gauss", suite_heat, suite="gauss", t=None, rtol=1e-8)
        add("heat-pi", suite_heat, suite="pi", t=None, rtol=1e-8)
    for s in ("kernel", "bounds", "xcheck") + (() if quick else ("lp",)):
        add(f"riesz-{s}", suite_riesz, suite=s)
    add("hardy-rh", suite_hardy, suite="rh", atoms=200, flavor="all")
    add("hardy-counterexample", suite_hardy, suite="counterexample", atoms=200, flavor="all")
    add("hardy-h1l1", suite_hardy, suite="h1l1", atoms=20 if quick else 200,
        flavor="two-harmonic" if quick else "all")
    add("hardy-maximal", suite_hardy, suite="maximal", atoms=20 if quick else 100, flavor="all")
    paths = 20_000 if quick else 100_000
    for s in SIM_SUITES:
        # per-bin 5% tolerance needs the full path count
        n = 100_000 if s == "occupation" else paths
        sa = argparse.Namespace(**{**vars(ns), "suite": s, "x0": 2.0, "paths": n, "time": 1.0, "dt": None,
                                   "backend": None})
        cfg = _process_config(sa)
        plan.append((f"simulate-{s}", lambda sa=sa, cfg=cfg: suite_simulate(sa, cfg),
                     {"x0": sa.x0, "paths": sa.paths, "time": sa.time, **_process_echo(cfg)}))
    return plan


def run(argv=None) -> int:
    """Run the selected suites; returns the process exit code."""
    try:
        args = parse(argv)
    except ConfigError as exc:
        print(f"gluedbessel: config error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    stochastic = args.command in ("simulate", "all")
    if args.ci and stochastic and getattr(args, "seed", None) is None:
        print("gluedbessel: config error: --seed is required for stochastic suites in CI mode", file=sys.stderr)
        return 2
    if not (math.isfinite(args.d) and args.d > 2.0):
        print(f"gluedbessel: config error: d = {args.d} must exceed 2", file=sys.stderr)
        return 2
    try:
        plan = _plan(args)
    except ConfigError as exc:
        print(f"gluedbessel: config error: {exc}", file=sys.stderr)
        return 2
    echo = _echo(args)
    ok = True
    for label, fn, extra in plan:
        rep = _timed(label.replace("-", "/", 1), fn)
        out, stem = _outputs(args, label if (args.command == "all" or Path(args.out).suffix != ".csv") else None)
        path = write_report(rep, {**echo, **extra, "suite": rep.suite}, out, stem)
        print(f"{rep.line()}  -> {path}")
        ok &= rep.passed
    print("all selected suites passed" if ok else "some suites FAILED")
    return 0 if ok else 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
