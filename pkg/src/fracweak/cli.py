"""Command-line driver: ``solve``, ``verify`` and ``selftest``.

``solve CONFIG`` writes ``solution.csv`` (t, node_index, value) and
``manifest.txt`` (a complete configuration that reproduces the run); when
verification is enabled it also writes ``report.csv`` (check, sample,
measured, tolerance, pass).  ``verify CONFIG --solution CSV`` checks an
existing solution.  The exit status is nonzero whenever a check fails or an
error occurs.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, build_kernel, field_values, parse_config, parse_config_text
from .contour import ContourConfig, unit_check
from .elliptic import assemble_operator, eigensolve
from .errors import ConfigError, FracWeakError
from .grids import TimeGrid, Trajectory
from .kernels import MultiTerm, VariableOrder
from .solvers import SourceSpec, duhamel_solve, finite_time_solve
from .verify.laplace import LaplaceProbe, laplace_residual
from .verify.oracles import mittag_leffler, mittag_leffler_integral, mittag_leffler_series
from .verify.probes import b_operator_norm
from .verify.report import VerificationReport
from .verify.weak import weak_refinement, weak_residual


# ---------------------------------------------------------------- setup ----
@dataclasses.dataclass
class Setup:
    cfg: RunConfig
    prob: object
    kernel: object
    u0: np.ndarray
    source: SourceSpec
    grid: TimeGrid
    eigen_index: int | None
    eigenvalue: float | None


def _shape(cfg):
    s = cfg.shape
    return s[0] if len(s) == 1 else s


def _sine(prob, k):
    pts = prob.points()
    lengths = [h * (s + 1) for h, s in zip(prob.h, prob.shape)]
    out = np.ones(prob.n)
    for d in range(prob.dim):
        out = out * np.sin(k * math.pi * pts[:, d] / lengths[d])
    return out


def _data_field(desc, prob, cfg, key):
    """Returns ``(values, eigen_index, eigenvalue)``."""
    desc = desc.strip()
    kind, _, arg = desc.partition(":")
    if kind == "zero":
        return np.zeros(prob.n), None, None
    if kind == "eigen":
        k = int(arg)
        if not 1 <= k <= prob.n:
            raise ConfigError(f"{key}: eigen index must lie in [1, {prob.n}]")
        basis = eigensolve(prob, k)
        return basis.vectors[:, k - 1].copy(), k, float(basis.eigenvalues[k - 1])
    if kind == "sine":
        return _sine(prob, int(arg)), None, None
    return field_values(desc, prob.coords, cfg.base_dir, key), None, None


def _time_profile(desc):
    desc = desc.strip()
    kind, _, arg = desc.partition(":")
    if kind == "one":
        return lambda t: 1.0
    if kind == "t":
        return lambda t: t
    if kind == "exp":
        rate = float(arg)
        return lambda t: math.exp(-rate * t)
    if kind == "cos":
        om = float(arg)
        return lambda t: math.cos(om * t)
    raise ConfigError(f"data.source_time: unknown profile {desc!r} (one, t, exp:RATE, cos:OMEGA)")


def build_setup(cfg: RunConfig) -> Setup:
    coords_shape = _shape(cfg)
    p = cfg.problem
    lengths = cfg.grid_lengths()
    probe = assemble_operator(p.dim, coords_shape, lengths=lengths)
    a = field_values(p.a, probe.coords, cfg.base_dir, "problem.a")
    q = field_values(p.q, probe.coords, cfg.base_dir, "problem.q")
    rho = field_values(p.rho, probe.coords, cfg.base_dir, "problem.rho")
    prob = assemble_operator(p.dim, coords_shape, a, q, rho, lengths)
    kernel = build_kernel(cfg, prob.n, prob.coords)
    u0, k, lam = _data_field(cfg.data.u0, prob, cfg, "data.u0")
    d = cfg.data
    if d.source.strip() == "zero":
        source = SourceSpec.zero()
    else:
        w, _, _ = _data_field(d.source, prob, cfg, "data.source")
        J = None if d.growth.strip() == "none" else int(d.growth)
        hz = None if d.horizon.strip() == "none" else float(d.horizon)
        source = SourceSpec.separable(_time_profile(d.source_time), w, J, hz)
    t = cfg.time
    grid = TimeGrid.graded(t.T, t.M, t.grading)
    return Setup(cfg, prob, kernel, u0, source, grid, k, lam)


def solve(setup: Setup, grid=None, threads=1):
    cfg = setup.cfg
    grid = setup.grid if grid is None else grid
    ft = cfg.final_time()
    if ft is not None:
        return finite_time_solve(setup.prob, setup.kernel, cfg.contour_config(), setup.u0,
                                 setup.source, ft, grid, threads)
    return duhamel_solve(setup.prob, setup.kernel, cfg.contour_config(), setup.u0,
                         setup.source, grid, threads)


# ------------------------------------------------------------------ I/O ----
def write_solution(path, traj: Trajectory):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "node_index", "value"])
        for t, row in zip(traj.times, traj.values):
            ts = repr(float(t))
            for i, v in enumerate(row):
                w.writerow([ts, i, repr(float(v))])


def read_solution(path, n=None):
    data = {}
    try:
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            for row in rd:
                data.setdefault(float(row["t"]), {})[int(row["node_index"])] = float(row["value"])
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read solution {path}: {exc}") from exc
    times = sorted(data)
    width = max(len(v) for v in data.values()) if n is None else n
    values = np.empty((len(times), width))
    for m, t in enumerate(times):
        row = data[t]
        if len(row) != width:
            raise ConfigError(f"solution {path}: time {t} has {len(row)} nodes, expected {width}")
        values[m] = [row[i] for i in range(width)]
    return Trajectory(np.array(times), values, {"source": str(path)})


def write_report(path, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "sample", "measured", "tolerance", "pass"])
        for rep in sorted(reports, key=lambda r: r.check):
            for row in rep.csv_rows():
                w.writerow(row)


def _absolute_paths(cfg: RunConfig):
    """Copy of ``cfg`` whose csv: descriptors are absolute, so the manifest runs anywhere."""
    new = dataclasses.replace(cfg)
    for sec in ("problem", "kernel", "data"):
        block = dataclasses.replace(getattr(cfg, sec))
        for f in dataclasses.fields(block):
            val = getattr(block, f.name)
            if isinstance(val, str) and "csv:" in val:
                parts = []
                for piece in val.split(";"):
                    kind, _, arg = piece.strip().partition(":")
                    if kind == "csv" and not Path(arg).is_absolute():
                        piece = f"csv:{(cfg.base_dir / arg).resolve()}"
                    parts.append(piece)
                setattr(block, f.name, ";".join(parts))
        setattr(new, sec, block)
    return new


def write_manifest(path, cfg, command, status, extra=()):
    lines = [f"# fracweak {__version__} run manifest", f"# command: {command}",
             f"# status: {status}"]
    lines += [f"# {e}" for e in extra]
    text = "\n".join(lines) + "\n" + _absolute_paths(cfg).to_ini()
    Path(path).write_text(text)


def _sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --------------------------------------------------------------- checks ----
def _constant_order(kernel, n):
    """``(alpha, scale)`` when the kernel is c t^-alpha/Gamma(1-alpha) with constant c."""
    if isinstance(kernel, VariableOrder) and kernel.is_constant:
        return kernel.alpha0, 1.0
    if isinstance(kernel, MultiTerm) and kernel.N == 1:
        r = np.atleast_1d(kernel.rho_fields[0])
        if np.all(r == r[0]):
            return kernel.alphas[0], float(r[0])
    return None


def check_unit(setup, tol):
    rep = VerificationReport("unit_check")
    cfg = setup.cfg.contour_config()
    t_min, T = float(setup.grid.steps.min()), setup.grid.T
    spec = cfg.for_window(t_min, T)
    for t in sorted({t_min, math.sqrt(t_min * T), T}):
        rep.add(f"window t={t:.3g}", unit_check(spec, [t]), tol)
    for t in (0.1, 1.0, 10.0):
        rep.add(f"per-time t={t:g}", unit_check(cfg, [t]), tol)
    return rep


def check_eigenmode(setup, traj, tol, strict):
    rep = VerificationReport("eigenmode")
    co = _constant_order(setup.kernel, setup.prob.n)
    rho = setup.prob.rho_field
    if setup.eigen_index is None or not setup.source.is_zero() or co is None:
        if strict:
            rep.flag("applicability", "needs eigen:K data, zero source and constant order")
        else:
            rep.details["skipped"] = True
        return rep
    alpha, c = co
    lam = setup.eigenvalue / c
    phi = setup.u0
    worst = 0.0
    for t, row in zip(traj.times[1:], traj.values[1:]):
        ref = mittag_leffler(alpha, 1.0, -lam * t**alpha)
        err = setup.prob.norm(row - ref * phi) / (abs(ref) * setup.prob.norm(phi))
        worst = max(worst, float(err))
    rep.add("max relative error", worst, tol)
    rep.details["rho_constant"] = bool(np.all(rho == rho[0]))
    return rep


def check_laplace(setup, traj, tol, probe_points):
    p_min = min(p.real for p in probe_points)
    probe = LaplaceProbe(probe_points, None, p_min)
    try:
        return laplace_residual(setup.prob, setup.kernel, traj, setup.u0, setup.source, probe,
                                tol)
    except FracWeakError as exc:
        rep = VerificationReport("laplace_residual")
        rep.flag("probe", str(exc))
        return rep


def check_weak_refinement(setup, threads, corrupt):
    v = setup.cfg.verify
    t = setup.cfg.time
    grid0 = TimeGrid.graded(t.T, v.weak_M0, t.grading)
    transform = None if corrupt == 1.0 else (lambda tr: tr.scaled(corrupt))
    return weak_refinement(setup.prob, setup.kernel, lambda g: solve(setup, g, threads), grid0,
                           setup.u0, setup.source, v.weak_doublings, v.weak_min_order,
                           transform)


def run_checks(setup, traj, mode, threads=1, strict=False):
    cfg = setup.cfg
    v = cfg.verify
    if v.corrupt != 1.0:
        traj = traj.scaled(v.corrupt)
    reports = []
    for name in cfg.checks():
        if name == "unit":
            reports.append(check_unit(setup, v.tol_unit))
        elif name == "eigenmode":
            rep = check_eigenmode(setup, traj, v.tol_eigenmode, strict)
            if rep.rows:
                reports.append(rep)
        elif name == "laplace":
            reports.append(check_laplace(setup, traj, v.tol_laplace, cfg.probe_points()))
        elif name == "weak":
            if mode == "solve":
                reports.append(check_weak_refinement(setup, threads, v.corrupt))
            else:
                reports.append(weak_residual(setup.prob, setup.kernel, traj, setup.u0,
                                             setup.source, tol=v.tol_weak))
    return reports


# ------------------------------------------------------------- commands ----
def _out_dir(cfg, override):
    out = Path(override) if override else Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(reports, out):
    write_report(out / "report.csv", reports)
    ok = all(r.passed for r in reports)
    for r in sorted(reports, key=lambda r: r.check):
        print(r.summary())
    print("overall:", "PASS" if ok else "FAIL")
    return ok


def cmd_solve(args):
    cfg = parse_config(args.config)
    out = _out_dir(cfg, args.out)
    status, extra = "error", []
    try:
        setup = build_setup(cfg)
        t0 = time.perf_counter()
        traj = solve(setup, threads=args.threads)
        extra.append(f"solve_seconds: {time.perf_counter() - t0:.3f}")
        if cfg.output.solution:
            write_solution(out / "solution.csv", traj)
            extra.append(f"solution_sha256: {_sha(out / 'solution.csv')}")
        ok = True
        if cfg.verify.enabled:
            ok = _finish(run_checks(setup, traj, "solve", args.threads, args.strict), out)
        status = "pass" if ok else "fail"
        return 0 if ok else 1
    except FracWeakError as exc:
        extra.append(f"error: {type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        write_manifest(out / "manifest.txt", cfg, "solve", status, extra)


def cmd_verify(args):
    cfg = parse_config(args.config)
    out = _out_dir(cfg, args.out)
    status, extra = "error", [f"solution: {Path(args.solution).resolve()}"]
    try:
        setup = build_setup(cfg)
        traj = read_solution(args.solution, setup.prob.n)
        ok = _finish(run_checks(setup, traj, "verify", args.threads, args.strict), out)
        status = "pass" if ok else "fail"
        return 0 if ok else 1
    except FracWeakError as exc:
        extra.append(f"error: {type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        write_manifest(out / "manifest.txt", cfg, "verify", status, extra)


def selftest_reports():
    """Contour unit check, oracle self-consistency and B = 0 on a shipped problem."""
    reps = []
    t0 = time.perf_counter()
    rep = VerificationReport("contour_unit")
    cfg = ContourConfig()
    for t in (0.1, 1.0, 10.0):
        rep.add(f"t={t:g}", unit_check(cfg, [t]), 1e-10)
    rep.add("runtime seconds", time.perf_counter() - t0, 1.0)
    reps.append(rep)

    rep = VerificationReport("oracle_consistency")
    for a, b in ((0.5, 1.0), (0.5, 0.5), (0.3, 1.0), (0.8, 0.8), (0.9, 1.0)):
        for x in (3.0, 4.0, 5.0):
            s = mittag_leffler_series(a, b, -x)
            i = mittag_leffler_integral(a, b, -x)
            rep.add(f"a={a},b={b},z={-x:g}", abs(s - i) / abs(s), 1e-10)
    rep.add("E_1/2(-1) vs e*erfc(1)", abs(mittag_leffler(0.5, 1.0, -1.0) - math.e * math.erfc(1.0)),
            1e-14)
    reps.append(rep)

    prob = assemble_operator(1, 31)
    kernel = MultiTerm((0.3, 0.7), (1.0, 1.0))
    H = eigensolve(prob, 5).vectors.T
    reps.append(b_operator_norm(prob, kernel, None, H))
    return reps


def cmd_selftest(args):
    reps = selftest_reports()
    ok = all(r.passed for r in reps)
    for r in reps:
        print(r.summary())
    print("overall:", "PASS" if ok else "FAIL")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_report(out / "report.csv", reps)
    return 0 if ok else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="fracweak", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1, help="worker threads for contour solves")
    ap.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    ap.add_argument("--strict", action="store_true",
                    help="treat warnings and inapplicable checks as failures")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve and (optionally) verify a configured run")
    s.add_argument("config")
    v = sub.add_parser("verify", help="verify an existing solution.csv")
    v.add_argument("config")
    v.add_argument("--solution", required=True)
    sub.add_parser("selftest", help="contour, oracle and B = 0 self-checks")
    for p in (s, v, sub.choices["selftest"]):
        p.add_argument("--threads", type=int, default=argparse.SUPPRESS)
        p.add_argument("--out", default=argparse.SUPPRESS)
        p.add_argument("--strict", action="store_true", default=argparse.SUPPRESS)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    handler = {"solve": cmd_solve, "verify": cmd_verify, "selftest": cmd_selftest}[args.command]
    try:
        with warnings.catch_warnings():
            if args.strict:
                warnings.simplefilter("error", RuntimeWarning)
            return handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except RuntimeWarning as exc:
        print(f"strict mode: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
