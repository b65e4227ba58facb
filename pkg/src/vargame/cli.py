"""Command-line entry point: ``vargame <subcommand> ...``.

Exit codes: 0 success, 2 validation failure, 3 non-convergence under
``--strict``, 4 profile-count cap exceeded.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import random
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from vargame import __version__
from vargame.analysis import (
    SWEEP_PARAMS,
    NoSignChange,
    SweepSpec,
    classify_regime,
    k_threshold,
    parse_grid,
    sweep,
    write_sweep_csv,
)
from vargame.experiments import EXPERIMENTS, reproduce
from vargame.formatting import fmt
from vargame.fp import modes_of, run_fp
from vargame.game import CapacityError, build_tables, dump_tables_csv
from vargame.oracle import DegenerateGame, enumerate_pure_ne, solve_2x2_mixed
from vargame.power import Reference, Scenario, validate_scenario
from vargame.scenarios import ScenarioError, ScenarioInvalid, load_scenario, scenario_to_dict

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_CAPACITY = 0, 2, 3, 4

DECISION_NOTES = (
    "Belief update counts the action actually played (indicator of a_i(m) == a); the "
    "printed indicator 1{a_i(m-1) = a_i(m)} does not keep frequencies on the simplex.",
    "Initial mixed strategies enter as a pseudo-observation of weight prior_weight.",
    "Convergence: infinity-norm frequency step < stop_tol and epsilon-NE gap <= ne_tol.",
    "Ties in best response go to the lowest power-factor action (1e-12 tolerance).",
)


@contextlib.contextmanager
def _forbid_rng():
    """Make any use of Python or numpy global RNGs raise."""
    def boom(*_a, **_k):
        raise RuntimeError("random number generator consulted under --seedless")

    patched = [(random, name) for name in ("random", "randint", "choice", "shuffle", "seed")]
    patched += [(np.random, name) for name in ("default_rng", "random", "rand", "randint",
                                                "choice", "seed")]
    saved = [(mod, name, getattr(mod, name)) for mod, name in patched]
    for mod, name in patched:
        setattr(mod, name, boom)
    try:
        yield
    finally:
        for mod, name, fn in saved:
            setattr(mod, name, fn)


def _apply_overrides(s: Scenario, args) -> Scenario:
    changes = {}
    for name in ("tau", "alpha", "beta", "k"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    if getattr(args, "reference", None) is not None:
        changes["reference"] = Reference.parse(args.reference)
    if changes:
        s = s.with_customers(**changes)
    if getattr(args, "update_order", None):
        s = replace(s, fp=replace(s.fp, update_order=args.update_order))
    if getattr(args, "max_iters", None):
        s = replace(s, fp=replace(s.fp, max_iters=args.max_iters))
    report = validate_scenario(s)
    if not report.ok:
        raise ScenarioInvalid(report)
    return s


def _out_dir(args) -> Path | None:
    if not args.out:
        return None
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(text: str, out: Path | None, filename: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        (out / filename).write_text(text)


def _ne_report(s: Scenario, tables, modes) -> dict:
    out = {"regime": str(classify_regime(s))}
    for m in modes:
        if tables.n == 2 and tables.sizes == (2, 2):
            try:
                rep = solve_2x2_mixed(tables, m)
            except DegenerateGame as exc:
                rep = enumerate_pure_ne(tables, m)
                rep.note = f"{rep.note}; {exc}".strip("; ")
        else:
            rep = enumerate_pure_ne(tables, m)
        out[m] = rep.to_json(tables)
    return out


def cmd_solve(args) -> int:
    s = _apply_overrides(load_scenario(args.scenario), args)
    modes = modes_of(args.mode or s.mode)
    t0 = time.perf_counter()
    tables = build_tables(s)
    results = {m: run_fp(s, m, tables=tables, trace=args.trace) for m in modes}
    summary = {
        "engine": f"vargame {__version__}",
        "scenario": scenario_to_dict(s),
        "modes": list(modes),
        "reference_utilities": tables.u0.tolist(),
        "results": {m: r.to_json() for m, r in results.items()},
        "ne_report": _ne_report(s, tables, modes),
        "timing_s": round(time.perf_counter() - t0, 6),
        "notes": list(DECISION_NOTES),
    }
    out = _out_dir(args)
    _emit(json.dumps(summary, indent=2) + "\n", out, "summary.json")
    if args.trace:
        for m, r in results.items():
            rows = [[mm, i, a] + [fmt(x) for x in f] for mm, i, a, *f in r.trace]
            width = max(len(c.actions) for c in s.customers)
            header = ["m", "customer", "action"] + [f"f{j}" for j in range(width)]
            text = _rows_csv(header, rows)
            if out is None:
                sys.stderr.write(f"# trace {m}\n{text}")
            else:
                (out / f"trace_{m}.csv").write_text(text)
    if args.tables and out is not None:
        with open(out / "tables.csv", "w", newline="") as fh:
            dump_tables_csv(tables, fh)
    if args.strict and not all(r.converged for r in results.values()):
        return EXIT_NONCONVERGED
    return EXIT_OK


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    s = _apply_overrides(load_scenario(args.scenario), args)
    modes = modes_of(args.mode or "both")
    spec = SweepSpec(args.param, parse_grid(args.grid), s, modes)
    rows = sweep(spec, workers=args.workers)
    buf = io.StringIO()
    write_sweep_csv(spec, rows, buf)
    _emit(buf.getvalue(), _out_dir(args), f"sweep_{args.param}.csv")
    if args.strict and not all(r.results[m].converged for r in rows for m in modes):
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_threshold(args) -> int:
    s = _apply_overrides(load_scenario(args.scenario), args)
    scope = args.scope if args.scope == "total" else int(args.scope)
    try:
        res = k_threshold(s, (args.k_min, args.k_max), args.tol, scope)
    except NoSignChange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = {"engine": f"vargame {__version__}", "scenario": scenario_to_dict(s),
               "threshold": res.to_json()}
    _emit(json.dumps(summary, indent=2) + "\n", _out_dir(args), "threshold.json")
    return EXIT_OK


def cmd_oracle(args) -> int:
    s = _apply_overrides(load_scenario(args.scenario), args)
    tables = build_tables(s)
    summary = {"engine": f"vargame {__version__}", "scenario": scenario_to_dict(s),
               "ne_report": _ne_report(s, tables, modes_of(args.mode or s.mode))}
    _emit(json.dumps(summary, indent=2) + "\n", _out_dir(args), "oracle.json")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        s = load_scenario(args.scenario, validate=False)
    except ScenarioError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report = validate_scenario(s)
    print(report)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_reproduce(args) -> int:
    bundle = reproduce(args.experiment)
    out = Path(args.out or f"reproduce_{args.experiment}")
    out.mkdir(parents=True, exist_ok=True)
    for name, text in bundle.tables.items():
        (out / name).write_text(text)
    (out / "checks.csv").write_text(bundle.checks_csv())
    for c in bundle.checks:
        print(f"{'pass' if c.passed else 'FAIL'}  {args.experiment}:{c.name}  {c.detail}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vargame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"vargame {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, overrides=True):
        sp.add_argument("scenario", help="scenario JSON path or bundled name")
        sp.add_argument("--out", help="directory for output files (default: stdout)")
        sp.add_argument("--seedless", action="store_true",
                        help="fail if any random number generator is consulted")
        sp.add_argument("--mode", choices=["eut", "pt", "both"])
        sp.add_argument("--strict", action="store_true",
                        help="exit 3 if any fictitious-play run does not converge")
        if overrides:
            for name in ("tau", "alpha", "beta", "k"):
                sp.add_argument(f"--{name}", type=float, help=f"set {name} for every customer")
            sp.add_argument("--reference", help="standard | zero | <number>")
            sp.add_argument("--update-order", choices=["simultaneous", "round_robin"])
            sp.add_argument("--max-iters", type=int)

    sp = sub.add_parser("solve", help="solve by fictitious play and report")
    common(sp)
    sp.add_argument("--trace", action="store_true", help="emit per-iteration CSV")
    sp.add_argument("--tables", action="store_true", help="dump utility tables (needs --out)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="re-solve across a parameter grid")
    common(sp)
    sp.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sp.add_argument("--grid", required=True, help="start:stop:step or comma list")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("threshold", help="bisect for the loss-aversion threshold k0")
    common(sp)
    sp.add_argument("--k-min", type=float, default=0.5)
    sp.add_argument("--k-max", type=float, default=2.0)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--scope", default="total", help="'total' or a customer index")
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("oracle", help="pure-NE enumeration and 2x2 mixed solution")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("validate", help="check a scenario file")
    sp.add_argument("scenario")
    sp.add_argument("--seedless", action="store_true")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("reproduce", help="emit data and checks for a reference experiment")
    sp.add_argument("experiment", choices=EXPERIMENTS)
    sp.add_argument("--out")
    sp.add_argument("--seedless", action="store_true")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    guard = _forbid_rng() if args.seedless else contextlib.nullcontext()
    try:
        with guard:
            return args.func(args)
    except ScenarioInvalid as exc:
        print(f"invalid scenario:\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    except ScenarioError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
