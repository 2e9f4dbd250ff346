"""Command-line entry point: ``mmap-rel <command> [flags]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import economics, example, measures, optimizer, sim_oracle
from .mmap_continuous import dump_blocks, initial_distribution
from .mmap_discrete import build
from .model import ModelError, discretize, from_config


class CLIError(Exception):
    pass


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise CLIError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: invalid JSON ({exc})") from exc


def _model(args):
    cfg = _load_json(args.model) if args.model else json.loads(example.data_path("paper_example.json").read_text())
    m = from_config(cfg)
    params = getattr(args, "params", None)
    if params:
        if params in example.POLICIES:
            pol = example.policies()[params]
        else:
            pol = optimizer.PolicyParams.from_dict(_load_json(params))
        m = optimizer.instantiate(m, pol)
    step = getattr(args, "discretize", None)
    if step:
        m = discretize(m, step, args.method)
    return m


def _econ(args):
    if getattr(args, "econ", None):
        e = economics.EconomicParameters.from_dict(_load_json(args.econ))
    else:
        e = example.econ()
    step = getattr(args, "discretize", None)
    # time-based charges become per-period charges in the discrete variant
    return e.per_period(step) if step else e


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    cfg = _load_json(args.model) if args.model else json.loads(example.data_path("paper_example.json").read_text())
    try:
        from_config(cfg)
    except ModelError as exc:
        print("fail")
        for err in exc.errors:
            print(f"  {err}")
        raise
    print("pass")
    return 0


def cmd_build(args) -> int:
    m = _model(args)
    process = build(m)
    lay = process.layout
    print(f"{m.time_mode} process, {lay.total} phases: "
          + ", ".join(f"{n}={s}" for n, s in zip(("Ov", "Onv", "RF", "NRF", "CR", "PM"), lay.sizes)))
    if args.dump_blocks:
        paths = dump_blocks(process, args.dump_blocks)
        print(f"wrote {len(paths)} blocks to {args.dump_blocks}")
    return 0


def cmd_measures(args) -> int:
    m, e = _model(args), _econ(args)
    res = example.compute(m, e, args.onv_charge, with_break_even=not args.no_break_even)
    out = _out(args)
    (out / "measures.json").write_text(json.dumps(_jsonable(res), indent=2) + "\n")
    measures.write_series(out / "event_rates.csv", ["event", "rate"], list(res["event_rates"].items()))
    process = build(m)
    pi = measures.stationary(process)
    np.savetxt(out / "stationary.csv", pi.vector, fmt="%.17g")
    if m.discrete:
        print("discrete time: rates and times are per period")
    print(f"availability        {res['availability']:.6f}")
    print(f"profit rate         {res['profit_rate']:.6f}")
    print(f"mean first failure  {res['mean_first_failure']:.6f}")
    if "break_even" in res:
        be = res["break_even"]
        print(f"break-even          {be if isinstance(be, str) else f'{be:.4f}'}")
    for k, v in res["occupancy"].items():
        print(f"occupancy {k:<4}      {v:.6f}")
    for k, v in res["event_rates"].items():
        print(f"rate {k:<4}           {v:.6f}")
    return 0


def _grid(spec: str | None, discrete: bool) -> np.ndarray:
    if spec is None:
        start, stop, n = 0.1, 1e4, 400
    else:
        try:
            a, b, c = spec.split(":")
            start, stop, n = float(a), float(b), int(c)
        except ValueError as exc:
            raise CLIError(f"--grid expects start:stop:points, got {spec!r}") from exc
    if not (0 < start < stop) or n < 2:
        raise CLIError("--grid needs 0 < start < stop and at least 2 points")
    grid = np.geomspace(start, stop, n)
    if discrete:
        grid = np.unique(np.round(grid).astype(int))
    return grid


def cmd_transient(args) -> int:
    m, e = _model(args), _econ(args)
    process = build(m)
    theta = initial_distribution(m)
    grid = _grid(args.grid, m.discrete)
    header, rows = measures.transient_table(process, theta, grid)
    out = _out(args)
    measures.write_series(out / "transient.csv", header, rows)
    c = economics.cost_vector(m, e, args.onv_charge)
    lam = economics.total_profit_series(process, theta, c, e, grid)
    horizon = grid + 1 if m.discrete else grid
    measures.write_series(out / "profit.csv", ["t", "profit", "profit_per_time"],
                          [[float(t), float(x), float(x / h)] for t, x, h in zip(grid, lam, horizon)])
    print(f"wrote {len(grid)} time points to {out}/transient.csv and {out}/profit.csv")
    return 0


def cmd_optimize(args) -> int:
    template, e = _model(args), _econ(args)
    bounds = optimizer.Bounds.from_dict(_load_json(args.bounds)) if args.bounds else optimizer.Bounds()
    cfg = optimizer.GAConfig(population=args.pop, generations=args.gens, seed=args.seed,
                             bounds=bounds, workers=args.workers)
    front = optimizer.pareto_front(template, e, cfg)
    csv_path, sel_path = optimizer.write_front(front, _out(args))
    z = optimizer.ideal_point(front)
    print(f"{len(front)} nondominated points; ideal point ({z[0]:.4f}, {z[1]:.4f})")
    for label, pick in (("max profit", optimizer.select_max_profit), ("closest to ideal", optimizer.select_closest),
                        ("max availability", optimizer.select_max_availability)):
        p = pick(front)
        print(f"{label:<18} f1={p.profit_rate:.4f} f2={p.availability:.4f}")
    print(f"wrote {csv_path} and {sel_path}")
    return 0


def cmd_simulate(args) -> int:
    m, e = _model(args), _econ(args)
    cfg = sim_oracle.SimConfig(args.horizon, args.reps, args.seed, args.warmup)
    est = sim_oracle.simulate(m, e, cfg, args.onv_charge)
    process = build(m)
    pi = measures.stationary(process)
    report = sim_oracle.compare(sim_oracle.analytic_targets(process, pi, e, args.onv_charge), est)
    path = sim_oracle.write_report(_out(args) / "sim_report.json", est, report)
    print(report)
    print(f"backend {est.backend}; wrote {path}")
    return 0 if report.passed else 1


def cmd_reproduce(args) -> int:
    cells = example.reproduce(args.onv_charge)
    table = example.format_cells(cells)
    print(table)
    out = _out(args)
    (out / "comparison.txt").write_text(table + "\n")
    (out / "comparison.json").write_text(json.dumps(
        [_jsonable(dict(c.__dict__, deviation=c.deviation)) for c in cells], indent=2) + "\n")
    misses = [c for c in cells if not c.ok]
    print(f"{len(cells) - len(misses)}/{len(cells)} figures within tolerance")
    return 0


# ---------------------------------------------------------------- parser

def _common(p, params=True, econ=True, discrete=True):
    p.add_argument("--model", help="model config JSON (default: bundled worked example)")
    if econ:
        p.add_argument("--econ", help="economics JSON (default: bundled example costs)")
        p.add_argument("--onv-charge", choices=economics.ONV_CHARGES, default="H",
                       help="staffing charge while the repairperson waits on site")
    if params:
        p.add_argument("--params", help="model1|model2|model3 or a JSON file with V and p")
    if discrete:
        p.add_argument("--discretize", type=float, metavar="STEP", help="use the discrete-time variant with this period")
        p.add_argument("--method", choices=("exact", "euler"), default="exact", help="discretization scheme")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmap-rel", description=__doc__)
    parser.add_argument("--json-errors", action="store_true", help="print failures as a JSON object on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model config")
    p.add_argument("--model", help="model config JSON (default: bundled worked example)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", help="assemble the labelled blocks")
    _common(p, econ=False)
    p.add_argument("--dump-blocks", metavar="DIR", help="write every labelled block as CSV")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("measures", help="stationary measures, profit rate and event rates")
    _common(p)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--no-break-even", action="store_true", help="skip the break-even search")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("transient", help="time series of availability, reliability, event rates and profit")
    _common(p)
    p.add_argument("--grid", help="start:stop:points, geometric (default 0.1:10000:400)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_transient)

    p = sub.add_parser("optimize", help="Pareto search over the vacation policy")
    _common(p, params=False, discrete=False)
    p.add_argument("--pop", type=int, default=80)
    p.add_argument("--gens", type=int, default=120)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--bounds", help="JSON with rate_min and rate_max")
    p.add_argument("--workers", type=int, default=1, help="parallel evaluation processes")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="Monte Carlo check of the analytic measures")
    _common(p)
    p.add_argument("--horizon", type=float, default=2e5)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--warmup", type=float, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce-paper", help="recompute the worked example and compare with reported figures")
    p.add_argument("--onv-charge", choices=economics.ONV_CHARGES, default="H")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, CLIError, ValueError, ArithmeticError, np.linalg.LinAlgError, KeyError) as exc:
        errors = getattr(exc, "errors", None) or [str(exc)]
        if args.json_errors:
            print(json.dumps({"command": args.command, "error": type(exc).__name__, "messages": errors}),
                  file=sys.stderr)
        elif args.command != "validate":
            print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
