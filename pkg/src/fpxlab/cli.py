"""Command-line front end: solve | norms | diagnose | iterate | check-exponent.

Outputs are plain CSV (17 significant digits, byte-identical across runs of
the same configuration) and JSON reports.  Errors leave a machine-readable
{code, field, message} object on stderr and a nonzero exit status.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import regularity as reg
from .config import ConfigError, parse_config
from .exponents import check_exterior_comparison, check_interior_oscillation, check_log_holder, field_from_spec
from .grid import ball_mask, read_grid_function, write_grid_function
from .operators import PairKernel, tail
from .solve import NonConvergenceError, comparison_check, exterior_data, minimize
from .spaces import gagliardo_modular, lebesgue_modular, lebesgue_norm, sobolev_seminorm

__all__ = ["main"]


def _fail(code: str, field: str, message: str) -> int:
    json.dump({"code": code, "field": field, "message": message}, sys.stderr)
    sys.stderr.write("\n")
    return 1


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_json(path: Path, payload) -> None:
    def default(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if dataclasses.is_dataclass(obj):
            return dataclasses.asdict(obj)
        raise TypeError(f"cannot serialise {type(obj)!r}")

    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=default) + "\n")


def _load_run(args):
    config = parse_config(args.config)
    if args.seed is not None:
        config.solve.seed = args.seed
        config.seed = args.seed
    grid = config.solve.build_grid()
    field = config.solve.build_field()
    return config, grid, field


def _cmd_solve(args) -> int:
    config, grid, field = _load_run(args)
    out = _out_dir(args)
    g = exterior_data(config.solve.exterior, grid, config.seed)
    try:
        result = minimize(config.solve, grid=grid, field=field, g=g)
    except NonConvergenceError as err:
        write_grid_function(out / "solution.csv", grid, err.result.u)
        return _fail("non_convergence", "problem.max_iter", str(err))
    write_grid_function(out / "solution.csv", grid, result.u)
    history_path = out / "energy_history.csv"
    with open(history_path, "w") as fh:
        fh.write("step,energy\n")
        for i, e in enumerate(result.energy_history):
            fh.write(f"{i},{e:.17g}\n")
    principle = comparison_check(result.u, grid, g)
    _dump_json(out / "solve.json", {
        "iterations": result.iterations,
        "final_residual": result.final_residual,
        "energy_history_path": history_path.name,
        "max_principle": dataclasses.asdict(principle),
    })
    if not principle.passed:
        return _fail("max_principle", "solution", f"violated by {principle.excess:.3e}")
    return 0


def _cmd_norms(args) -> int:
    config, grid, field = _load_run(args)
    out = _out_dir(args)
    u = read_grid_function(args.input, grid)
    region = grid.interior
    pbar = np.asarray(field.diagonal(grid.nodes))
    modular = lebesgue_modular(u, pbar, grid, region)
    norm = lebesgue_norm(u, pbar, grid, region)
    gag = gagliardo_modular(u, field, config.solve.s, grid, region)
    semi = sobolev_seminorm(u, field, config.solve.s, grid, region)
    _dump_json(out / "norms.json", {
        "modular": modular.value,
        "norm": norm.value,
        "bracket": list(norm.bracket),
        "iterations": norm.iterations,
        "gagliardo_modular": gag.value,
        "seminorm": semi.value,
        "seminorm_bracket": list(semi.bracket),
        "seminorm_iterations": semi.iterations,
    })
    return 0


def _cmd_diagnose(args) -> int:
    config, grid, field = _load_run(args)
    out = _out_dir(args)
    u = read_grid_function(args.input, grid)
    dg = config.diagnostics
    s = config.solve.s
    sigma = config.solve.sigma
    q = config.solve.q
    x0 = np.asarray(dg.center)
    radius = dg.radius
    kernel = PairKernel(grid, field, s)

    if dg.levels == "quartiles":
        levels = [float(np.quantile(u[grid.interior], t)) for t in (0.25, 0.5, 0.75)]
    else:
        levels = [float(v) for v in dg.levels.split(",")]
    caccioppoli = [
        reg.caccioppoli_report(u, field, s, grid, x0, dg.inner_factor * radius, radius, k, kernel=kernel)
        for k in levels
    ]

    tails = {
        sign: dataclasses.asdict(tail(grid, field, s, u, x0, radius, sign))
        for sign in ("plus", "minus", "abs")
    }
    sup_rep = reg.sup_bound_check(u, field, s, grid, x0, sigma, q=None, radius=radius)

    shift = float(np.min(u))
    v = u - shift  # growth/sublevel diagnostics expect nonnegative data
    h_level = float(np.max(v[ball_mask(grid, x0, radius)])) / 2.0
    if h_level <= 0:
        delta, growth = None, None
    elif dg.delta == "auto":
        delta, growth = reg.calibrate_growth_delta(v, field, s, grid, x0, radius, sigma, q)
    else:
        scenario = reg.GrowthScenario(x0=tuple(x0), radius=radius, H=h_level,
                                      delta=float(dg.delta), gamma=dg.gamma,
                                      s=s, sigma=sigma, q=q)
        growth = reg.growth_lemma_check(v, field, s, grid, scenario)
        delta = float(dg.delta)

    sub_levels = [lv for lv in (np.quantile(v[grid.interior], 0.5),) if lv > 0]
    sublevel = [
        dataclasses.asdict(reg.sublevel_energy_check(v, field, s, grid, x0, radius, float(lv), sigma, q))
        for lv in sub_levels
    ]

    try:
        holder = dataclasses.asdict(reg.holder_exponent_fit(u, grid, x0, radius, dg.dyadic_levels))
    except reg.ResolutionError as err:
        holder = {"error": str(err)}

    hard_ok = all(rep.satisfied for rep in caccioppoli)
    _dump_json(out / "diagnostics.json", {
        "caccioppoli": [dataclasses.asdict(rep) for rep in caccioppoli],
        "tail": tails,
        "sup_bound": dataclasses.asdict(sup_rep),
        "growth": None if growth is None else dataclasses.asdict(growth),
        "growth_delta": delta,
        "sublevel": sublevel,
        "holder": holder,
    })
    if not hard_ok:
        return _fail("caccioppoli", "diagnostics", "level-set energy estimate violated")
    return 0


def _cmd_iterate(args) -> int:
    params = reg.DeGiorgiParams(
        C=args.C, b=args.b, betas=tuple(float(x) for x in args.betas.split(",")), y0=args.y0,
    )
    run = reg.degiorgi_iterate(params, args.jmax)
    lines = ["j,y,bound"]
    for j, (y, bound) in enumerate(zip(run.ys, run.bounds)):
        lines.append(f"{j},{y:.17g},{bound:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        (_out_dir(args) / "iteration.csv").write_text(text)
    else:
        sys.stdout.write(text)
    if run.threshold_met and not run.bound_holds:
        return _fail("iteration_bound", "y0", f"decay bound violated by {run.max_excess:.3e}")
    return 0


def _cmd_check_exponent(args) -> int:
    if args.config:
        config, grid, field = _load_run(args)
    else:
        from .grid import build_grid

        grid = build_grid(1, 0.0, 1.0, 4.0, 201)
        field = field_from_spec(args.preset or "radial")
    out = _out_dir(args)
    reports = {
        "interior_oscillation": check_interior_oscillation(field, grid),
        "exterior_comparison": check_exterior_comparison(field, grid),
        "log_holder": check_log_holder(field, grid),
    }
    _dump_json(out / "exponent.json", {k: dataclasses.asdict(v) for k, v in reports.items()})
    if not all(v.passed for v in reports.values()):
        failing = [k for k, v in reports.items() if not v.passed]
        return _fail("exponent_condition", ",".join(failing), "condition check failed")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fpxlab", description=__doc__)
    parser.add_argument("--seed", type=int, default=None, help="override the configured seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="minimise the energy for the configured data")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", required=True)

    p_norms = sub.add_parser("norms", help="modular and Luxemburg norm of a grid function")
    p_norms.add_argument("--config", required=True)
    p_norms.add_argument("--input", required=True)
    p_norms.add_argument("--out", required=True)

    p_diag = sub.add_parser("diagnose", help="regularity diagnostics of a solution")
    p_diag.add_argument("--config", required=True)
    p_diag.add_argument("--input", required=True)
    p_diag.add_argument("--out", required=True)

    p_iter = sub.add_parser("iterate", help="simulate the geometric iteration recursion")
    p_iter.add_argument("--C", type=float, required=True)
    p_iter.add_argument("--b", type=float, required=True)
    p_iter.add_argument("--betas", required=True, help="comma list, non-increasing")
    p_iter.add_argument("--y0", type=float, required=True)
    p_iter.add_argument("--jmax", type=int, default=50)
    p_iter.add_argument("--out", default=None)

    p_check = sub.add_parser("check-exponent", help="exponent admissibility conditions")
    p_check.add_argument("--preset", default=None)
    p_check.add_argument("--config", default=None)
    p_check.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "norms":
            return _cmd_norms(args)
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        if args.command == "iterate":
            return _cmd_iterate(args)
        if args.command == "check-exponent":
            return _cmd_check_exponent(args)
    except ConfigError as err:
        json.dump({"code": "config", "problems": err.problems}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (ValueError, RuntimeError, OSError) as err:
        return _fail(type(err).__name__, args.command, str(err))
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
