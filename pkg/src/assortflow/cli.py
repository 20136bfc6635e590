"""Command line front end.

Exit codes: 0 ok, 1 internal error or failed verification, 2 input error,
3 unsupported case (DA with non-IFR demand).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import report
from .catalog import Model, ValidationError, validate
from .da_planner import UnsupportedDemand, solve_da
from .dap_planner import optimize_dap
from .fluid import sequence
from .policies import build_sampling_policy
from .simulator import simulate_da, simulate_dap
from .verify import SUITES, run_suite

DEFAULT_TRIALS = {"so": 500, "separability": 1000, "cdlp": 200, "bounds": 50, "guarantees": 5}


class InputError(Exception):
    pass


def num(x):
    """Round to 9 significant digits for stable output."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(f"{float(x):.9g}")
        return int(x) if x.is_integer() and abs(x) < 2**53 else x
    if isinstance(x, dict):
        return {k: num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [num(v) for v in x]
    return x


def _line_of(text: str, message: str) -> int:
    for key in re.findall(r"'([^']+)'", message):
        for lineno, line in enumerate(text.splitlines(), 1):
            if f'"{key}"' in line:
                return lineno
    return 1


def load_config(path: str) -> Model:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}: {e.msg}") from None
    try:
        return validate(raw)
    except (ValidationError, KeyError, TypeError, ValueError) as e:
        msg = str(e) if isinstance(e, ValidationError) else f"malformed config: {e}"
        raise InputError(f"{path}:{_line_of(text, msg)}: {msg}") from None


def _need(model: Model, demand=True, constraint=True):
    if demand and model.demand is None:
        raise InputError("config is missing 'demand'")
    if constraint and model.constraint is None:
        raise InputError("config is missing 'constraint'")


def _labels(model: Model) -> list[str]:
    return [f"p{int(u) + 1}" for u in model.types.order]


def _sim_block(model: Model, sim) -> dict:
    return {
        "mean": sim.mean,
        "stderr": sim.stderr,
        "reps": sim.reps,
        "seed": sim.seed,
        "consumption": model.types.to_user(sim.consumption),
    }


def _emit(result: dict, table: list[list], args) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        csv.writer(buf).writerows(table)
        text = buf.getvalue()
    else:
        text = json.dumps(num(result), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: Path, rows: list[list]) -> None:
    with open(path, "w", newline="") as f:
        csv.writer(f).writerows(num(rows))


def _report_dir(args) -> Path | None:
    if not args.report:
        return None
    d = Path(args.report)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_solve_da(args) -> int:
    model = load_config(args.config)
    _need(model)
    cat = model.catalog
    plan = solve_da(cat, model.constraint, model.demand, args.epsilon, args.threads)
    inv = cat.to_user(plan.inventory)
    result = {
        "inventory": inv.astype(int).tolist(),
        "objective": plan.objective,
        "horizon": plan.horizon,
        "telemetry": {
            "y0": plan.y0,
            "grid_index": plan.grid_index,
            "rounding": plan.rounding,
            "fallback": plan.fallback,
        },
    }
    if args.simulate:
        sim = simulate_da(cat, plan.inventory, model.demand, args.simulate, args.seed, args.threads)
        result["simulation"] = _sim_block(model, sim)
    table = [["product", "inventory"]] + [[k + 1, int(v)] for k, v in enumerate(inv)]
    _emit(result, table, args)

    if (d := _report_dir(args)) is not None:
        tr = sequence(cat, plan.inventory, plan.horizon)
        labels = _labels(model)
        rows = [["phase", "start", "duration", "assortment"]]
        t = 0.0
        for l, (S, dt) in enumerate(tr.phases()):
            rows.append([l + 1, t, dt, " ".join(labels[i] for i in S)])
            t += dt
        _write_csv(d / "trace.csv", rows)
        report.inventory_paths(plan.inventory, tr.phases(), cat.weights, labels, d / "trace.png")
    return 0


def cmd_solve_dap(args) -> int:
    model = load_config(args.config)
    _need(model)
    types, dem = model.types, model.demand
    if dem.is_deterministic:
        plan = optimize_dap(types, model.constraint, eps=args.epsilon, T=dem.t_max, threads=args.threads)
    else:
        plan = optimize_dap(types, model.constraint, dem, args.epsilon, threads=args.threads)
    inv = types.to_user(plan.inventory)
    allocs = [types.to_user(C) for C in plan.allocation]
    result = {
        "inventory": inv.astype(int).tolist(),
        "objective": plan.objective,
        "horizons": plan.horizons.values,
        "allocation": allocs[0] if dem.is_deterministic else allocs,
        "telemetry": {"tau": plan.tau, "grid_index": plan.grid_index, "singleton": plan.singleton},
    }
    if args.simulate:
        if args.policy == "sampling":
            if not dem.is_deterministic:
                raise InputError("the sampling policy needs deterministic demand")
            policy = build_sampling_policy(types, plan.inventory, dem.t_max)
        else:
            policy = args.policy
        sim = simulate_dap(types, plan.inventory, policy, dem, args.simulate, args.seed, args.threads)
        result["simulation"] = _sim_block(model, sim)
    head = ["horizon", "product", "inventory"] + [f"type_{k + 1}" for k in range(types.m)]
    table = [head]
    for H, A in zip(plan.horizons.values, allocs):
        table += [[H, j + 1, int(inv[j])] + list(A[:, j]) for j in range(types.n)]
    _emit(result, num(table), args)

    if (d := _report_dir(args)) is not None:
        _write_csv(d / "allocation.csv", table)
        labels = [f"p{j + 1}" for j in range(types.n)]
        w = plan.horizons.weights
        report.stacked_allocation(np.tensordot(w, np.array(allocs), axes=1), labels, d / "allocation.png")
    return 0


def _load_inventory(path: str, model: Model) -> np.ndarray:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}: {e.msg}") from None
    vec = raw.get("inventory") if isinstance(raw, dict) else raw
    try:
        vec = np.asarray(vec, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{path}: inventory must be a list of numbers") from None
    if vec.shape != (model.types.n,) or np.any(vec < 0) or np.any(vec != np.round(vec)):
        raise InputError(f"{path}: inventory must hold {model.types.n} non-negative integers")
    c = model.types.to_internal(vec)
    if model.constraint is not None and not model.constraint.feasible(c):
        raise InputError(f"{path}: inventory violates the config constraint")
    return c


def cmd_simulate(args) -> int:
    model = load_config(args.config)
    _need(model, constraint=False)
    c = _load_inventory(args.inventory, model)
    types, dem = model.types, model.demand
    if args.policy == "sampling":
        if not dem.is_deterministic:
            raise InputError("the sampling policy needs deterministic demand")
        policy = build_sampling_policy(types, c, dem.t_max)
    else:
        policy = args.policy
    sim = simulate_dap(types, c, policy, dem, args.reps, args.seed, args.threads)
    result = {"inventory": types.to_user(c).astype(int).tolist(), "policy": args.policy, **_sim_block(model, sim)}
    sold = types.to_user(sim.consumption)
    inv = types.to_user(c)
    table = [["product", "inventory", "mean_sold"]] + [
        [j + 1, int(inv[j]), sold[j]] for j in range(types.n)
    ]
    _emit(result, num(table), args)
    if (d := _report_dir(args)) is not None:
        _write_csv(d / "sales.csv", table)
        report.stock_vs_sales(inv, sold, [f"p{j + 1}" for j in range(types.n)], d / "sales.png")
    return 0


def cmd_verify(args) -> int:
    trials = args.trials if args.trials is not None else DEFAULT_TRIALS[args.suite]
    rows = run_suite(args.suite, trials, args.seed)
    by_check: dict[str, dict] = {}
    for r in rows:
        b = by_check.setdefault(r.check, {"count": 0, "failures": 0, "min_margin": np.inf})
        b["count"] += 1
        b["failures"] += int(not r.passed)
        b["min_margin"] = min(b["min_margin"], r.margin)
    failures = sum(b["failures"] for b in by_check.values())
    result = {
        "suite": args.suite,
        "trials": trials,
        "seed": args.seed,
        "checks": len(rows),
        "failures": failures,
        "min_margin": min((r.margin for r in rows), default=0.0),
        "by_check": by_check,
    }
    table = [["check", "trial", "value", "bound", "margin", "passed"]] + [
        [r.check, r.trial, r.value, r.bound, r.margin, r.passed] for r in rows
    ]
    _emit(result, num(table), args)
    if (d := _report_dir(args)) is not None:
        _write_csv(d / f"{args.suite}_margins.csv", table)
        report.margins([r.margin for r in rows], f"{args.suite}: {failures} failures", d / f"{args.suite}_margins.png")
    return 0 if failures == 0 else 1


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get("ASSORTFLOW_THREADS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="assortflow", description="Inventory planning for MNL dynamic assortment.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="result file (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None, help="worker threads (default: $ASSORTFLOW_THREADS or 1)")
        sp.add_argument("--report", metavar="DIR", help="also write CSV tables and PNG figures here")

    sp = sub.add_parser("solve-da", help="plan inventory when every customer sees all stock")
    sp.add_argument("--config", required=True)
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--simulate", type=int, default=0, metavar="R", help="append an R-replication simulation")
    common(sp)
    sp.set_defaults(func=cmd_solve_da)

    sp = sub.add_parser("solve-dap", help="plan inventory with personalized offers")
    sp.add_argument("--config", required=True)
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--simulate", type=int, default=0, metavar="R")
    sp.add_argument("--policy", choices=("sampling", "greedy"), default="greedy")
    common(sp)
    sp.set_defaults(func=cmd_solve_dap)

    sp = sub.add_parser("simulate", help="simulate a given inventory")
    sp.add_argument("--config", required=True)
    sp.add_argument("--inventory", required=True)
    sp.add_argument("--policy", choices=("all", "greedy", "sampling"), default="all")
    sp.add_argument("--reps", type=int, default=100_000)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run a randomized self-check suite")
    sp.add_argument("--suite", required=True, choices=sorted(SUITES))
    sp.add_argument("--trials", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = _threads_default()
    try:
        return args.func(args)
    except (InputError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except UnsupportedDemand as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
