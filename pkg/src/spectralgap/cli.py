"""Command-line front end: ``bound``, ``sweep``, ``model``, ``verify``, ``selftest``."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import groupby, product

import numpy as np

from .errors import DomainError, PreconditionError, SpectralGapError
from .gapbound import DEFAULT_TOL, Method, hat_lambda
from .models import CurvatureDimension, d_max

SCHEMA = 1
EXIT_OK, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 1, 2

SWEEP_FIELDS = ("K", "N", "d", "lambda_hat", "method", "achieved_tol")
MODEL_FIELDS = ("R", "l", "lambda", "a", "b", "m")
TRAJECTORY_FIELDS = ("s", "v", "dv", "rho")
VERIFY_FIELDS = ("space", "K", "N", "diameter", "lambda1", "lambda_hat", "margin", "pass")


@dataclass(frozen=True)
class RunConfig:
    command: str
    K: tuple[float, ...] = ()
    N: tuple[float, ...] = ()
    d: tuple[float, ...] = ()
    tol: float = DEFAULT_TOL
    method: str = Method.SHOOTING.value
    fmt: str = "csv"
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if not 1e-13 <= self.tol <= 1e-3:
            raise PreconditionError(f"tol must lie in [1e-13, 1e-3], got {self.tol}")
        if self.jobs < 1:
            raise PreconditionError("jobs must be >= 1")
        if self.command == "sweep" and not (self.K and self.N and self.d):
            raise PreconditionError("sweep grids must be non-empty")


def parse_grid(text: str) -> tuple[float, ...]:
    """``"1,2,3"`` or ``"start:stop:count"`` (inclusive, evenly spaced)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"bad range {text!r}, expected start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise argparse.ArgumentTypeError("count must be >= 1")
        return tuple(float(x) for x in np.linspace(start, stop, count))
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values:
        raise argparse.ArgumentTypeError("empty grid")
    return values


def fmt_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def render(rows: list[dict], fields, fmt: str, trailer: dict | None = None) -> str:
    trailer = trailer or {}
    if fmt == "json":
        doc = {"schema": SCHEMA, "rows": rows, **trailer}
        return json.dumps(doc, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    buf.write(",".join(fields) + "\n")
    for row in rows:
        buf.write(",".join(fmt_value(row[f]) for f in fields) + "\n")
    for key, value in trailer.items():
        buf.write(f"# {key}={fmt_value(value)}\n")
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _bound_row(args: tuple) -> dict:
    K, N, d, tol, method = args
    row = {"K": K, "N": N, "d": d}
    try:
        res = hat_lambda(CurvatureDimension(K, N), d, tol, method)
    except (PreconditionError, DomainError):
        return {**row, "lambda_hat": math.nan, "method": "skipped", "achieved_tol": math.nan}
    except SpectralGapError as exc:
        return {**row, "lambda_hat": math.nan, "method": f"failed:{type(exc).__name__}",
                "achieved_tol": math.nan}
    return {**row, "lambda_hat": res.lam, "method": res.method.value, "achieved_tol": res.achieved_tol}


def monotonicity_violations(rows: list[dict], margin: float) -> int:
    """Count adjacent ``d`` pairs (per ``(K, N)``) where lambda_hat fails to drop by ``margin``."""
    count = 0
    valid = [r for r in rows if math.isfinite(r["lambda_hat"])]
    key = lambda r: (r["K"], r["N"])  # noqa: E731
    for _, group in groupby(sorted(valid, key=lambda r: (r["K"], r["N"], r["d"])), key=key):
        group = list(group)
        for a, b in zip(group, group[1:]):
            if b["d"] > a["d"] and not a["lambda_hat"] - b["lambda_hat"] > margin:
                count += 1
    return count


def run_sweep(cfg: RunConfig) -> tuple[list[dict], dict]:
    tasks = [(K, N, d, cfg.tol, cfg.method) for K, N, d in product(cfg.K, cfg.N, cfg.d)]
    if cfg.jobs == 1:
        rows = [_bound_row(t) for t in tasks]
    else:
        # map returns results in task order, so the table is filled by grid position
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_bound_row, tasks, chunksize=max(1, len(tasks) // (4 * cfg.jobs))))
    trailer = {
        "monotonicity_violations": monotonicity_violations(rows, 10 * cfg.tol),
        "skipped": sum(r["method"] == "skipped" for r in rows),
        "failed": sum(r["method"].startswith("failed") for r in rows),
    }
    return rows, trailer


def cmd_bound(ns) -> int:
    cfg = RunConfig("bound", (ns.K,), (ns.N,), (ns.d,), ns.tol, ns.method, ns.format, ns.out)
    try:
        cd = CurvatureDimension(ns.K, ns.N)
        res = hat_lambda(cd, ns.d, cfg.tol, cfg.method)
    except (PreconditionError, DomainError) as exc:
        try:
            dm = d_max(CurvatureDimension(ns.K, ns.N))
            extra = f" (d_max = {fmt_value(dm)})"
        except DomainError:
            extra = ""
        print(f"error: {exc}{extra}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SpectralGapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    row = {"K": ns.K, "N": ns.N, "d": ns.d, **res.as_record()}
    fields = ["K", "N", "d", "lambda_hat", "method", "achieved_tol"]
    if "agreement" in res.diagnostics:
        row["discretization"] = res.diagnostics["discretization"]
        row["agreement"] = res.diagnostics["agreement"]
        fields += ["discretization", "agreement"]
    emit(render([row], fields, cfg.fmt), cfg.out)
    return EXIT_OK


def cmd_sweep(ns) -> int:
    cfg = RunConfig("sweep", ns.K, ns.N, ns.d, ns.tol, ns.method, ns.format, ns.out, ns.jobs)
    rows, trailer = run_sweep(cfg)
    emit(render(rows, SWEEP_FIELDS, cfg.fmt, trailer), cfg.out)
    if trailer["failed"] or trailer["monotonicity_violations"]:
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_model(ns) -> int:
    from .modelfun import model_profile

    try:
        prof = model_profile(ns.R, ns.l, ns.lam)
    except (PreconditionError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SpectralGapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if ns.trajectory:
        t = prof.trajectory
        rows = [
            {"s": s, "v": v, "dv": w, "rho": prof.model.density(min(max(s, prof.model.a), prof.model.right_end))}
            for s, v, w in zip(t.x, t.v, t.dv)
        ]
        emit(render(rows, TRAJECTORY_FIELDS, ns.format), ns.out)
    else:
        row = {"R": ns.R, "l": ns.l, "lambda": ns.lam, "a": prof.a, "b": prof.b, "m": prof.m}
        emit(render([row], MODEL_FIELDS, ns.format), ns.out)
    return EXIT_OK


def _verify_entry(args):
    from .modelfun import check_gradient_comparison, check_max_comparison, gradient_model_for
    from .spaces import WeightedInterval, verify_bound

    entry, tol = args
    rep = verify_bound(entry.space, tol, entry.name)
    row = rep.as_record()
    notes = []
    if isinstance(entry.space, WeightedInterval):
        mx = check_max_comparison(entry.space)
        notes.append(f"max_comparison {entry.name} max_f={fmt_value(mx.max_f)} m={fmt_value(mx.m)} "
                     f"pass={fmt_value(mx.passed)}")
        ok = mx.passed
        if not entry.space.full_range:
            gr = check_gradient_comparison(entry.space, gradient_model_for(entry.space))
            notes.append(f"gradient_comparison {entry.name} max_violation={fmt_value(gr.max_violation)} "
                         f"pass={fmt_value(gr.passed)}")
            ok = ok and gr.passed
        row["pass"] = bool(row["pass"] and ok)
    return row, notes


def cmd_verify(ns) -> int:
    from .spaces import catalog

    names = None if ns.filter is None else [s for s in ns.filter.split(",") if s]
    entries = catalog(names, ns.equality_only)
    tasks = [(e, ns.tol) for e in entries]
    if ns.jobs == 1:
        results = [_verify_entry(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_verify_entry, tasks))
    rows = [r for r, _ in results]
    text = render(rows, VERIFY_FIELDS, ns.format, {"failures": sum(not r["pass"] for r in rows)})
    if ns.format == "csv":
        text += "".join(f"# {n}\n" for _, notes in results for n in notes)
    emit(text, ns.out)
    if ns.format == "csv" and not ns.out:
        for r in rows:
            print(f"{'PASS' if r['pass'] else 'FAIL'} {r['space']}", file=sys.stderr)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_NUMERIC


def cmd_selftest(ns) -> int:
    from .modelfun import model_profile
    from .tridiag_eigen import assemble_neumann, eigenvalue_k

    checks = []
    for N in (1.0, 3.5):
        for d in (0.5, math.pi):
            lam = hat_lambda(CurvatureDimension(0.0, N), d).lam
            checks.append((f"flat N={N} d={d:.4g}", abs(lam - math.pi**2 / d**2) <= 1e-10))
    for N in (2, 3):
        lam = hat_lambda(CurvatureDimension(N - 1, N), math.pi).lam
        checks.append((f"sphere endpoint N={N}", abs(lam - N) <= 1e-5))
    prof = model_profile(2.0, 3.0, 3.0)
    checks.append(("model profile sin", abs(prof.b - math.pi / 2) <= 1e-8 and abs(prof.m - 1) <= 1e-8))
    n = 16
    pencil = assemble_neumann(lambda x: 1.0, (0.0, 1.0), n)
    exact = 4 * n * n * math.sin(math.pi / (2 * n)) ** 2
    checks.append(("discrete cosine", abs(eigenvalue_k(pencil, 1) - exact) <= 1e-12 * exact))
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectralgap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grids=False):
        kind = parse_grid if grids else float
        p.add_argument("--K", type=kind, required=True)
        p.add_argument("--N", type=kind, required=True)
        p.add_argument("--d", type=kind, required=True)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--method", choices=[m.value for m in Method if m is not Method.CLOSED_FORM],
                       default=Method.SHOOTING.value)

    def output(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("bound", help="compute lambda_hat(K, N, d)")
    common(p)
    output(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="lambda_hat over a (K, N, d) grid")
    common(p, grids=True)
    output(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("model", help="one-sided model profile (a, b, m)")
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--trajectory", action="store_true", help="emit s,v,dv,rho samples instead")
    output(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("verify", help="check the bound and comparisons on the space catalog")
    p.add_argument("--filter", default=None, help="comma-separated name substrings")
    p.add_argument("--equality-only", action="store_true")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--jobs", type=int, default=1)
    output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("selftest", help="quick closed-form checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
