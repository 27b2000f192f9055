"""Command line front end.

Every subcommand reads a JSON config, runs one experiment, and writes CSV
tables plus a manifest into the output directory. Exit codes: 0 success,
2 configuration or domain error, 3 resource limit, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import harness
from .chains import LocalOperator, operator_norm
from .dynamics import commutator_trace, eigendecompose, pauli_commutator_estimator
from .errors import (
    ConfigurationError,
    DomainError,
    MblsimError,
    NumericalError,
    ResourceLimitError,
)
from .freefermion import build_M, kernel_to_csv, localization_kernel
from .harness import ExperimentConfig, emit_results, load_config, make_time_grid
from .lioms import (
    build_lioms_second_kind,
    decay_envelope,
    default_gap_tol,
    liom_first_kind_decompose,
)
from .lrbounds import (
    contract,
    contracted_interaction,
    f_constants,
    integral_I,
    interaction_picture_terms,
    lr_bound_value,
    static_bound_trace,
)
from .models import longest_zero_run


def _sites(values) -> tuple:
    return tuple(int(v) for v in values)


def cmd_build(cfg: ExperimentConfig, args) -> dict:
    """Construct realization 0 and report its basic invariants."""
    phi, H, chain = harness.build_realization(cfg.model, cfg.seed, 0)
    herm = float(np.abs(H.matrix - H.matrix.conj().T).max())
    extra = {
        "n": cfg.model["n"],
        "sites": chain.n_sites,
        "dimension": chain.total_dim,
        "terms": len(phi.items()),
        "max_term_norm": phi.max_term_norm(),
        "hermiticity_defect": herm,
    }
    rows = [
        (",".join(str(s) for s in supp), operator_norm(op))
        for supp, op in phi.items()
    ]
    tables = {"model_terms": (["support", "norm"], rows)}
    return emit_results(args.output_dir, cfg, tables, extra=extra)


def cmd_evolve(cfg: ExperimentConfig, args) -> dict:
    blk = cfg.section("evolve")
    X = _sites(blk["x"])
    Y = _sites(blk["y"])
    beta = float(blk.get("beta", 0.0))
    grid = make_time_grid(cfg.time_grid)
    _, H, chain = harness.build_realization(cfg.model, cfg.seed, int(blk.get("realization", 0)))
    es = eigendecompose(H, chain=chain)
    trace = commutator_trace(es, X, Y, grid, beta=beta)
    rows = [
        (trace.time_grid[i], trace.values[i], trace.chi, trace.beta)
        for i in range(trace.time_grid.shape[0])
    ]
    extra = {
        "sup_weighted": float(trace.weighted_values().max()),
        "x": list(X),
        "y": list(Y),
    }
    return emit_results(
        args.output_dir, cfg, {"trace": (["t", "estimator", "chi", "beta"], rows)}, extra=extra
    )


def cmd_localize(cfg: ExperimentConfig, args) -> dict:
    t0 = time.monotonic()
    blk = cfg.section("localize")
    result = harness.run_localization_experiment(cfg, threads=args.threads)
    tables = {}
    extra = {}
    if isinstance(result, dict):
        for name in ("one_body", "many_body"):
            rep = result[name]
            tables.update(harness.localization_tables(rep, name))
            extra[name] = {"eta": rep.fit.eta, "eta_se": rep.fit.eta_se, "intercept": rep.fit.intercept}
        extra["agreement"] = result["agreement"]
    else:
        tables.update(harness.localization_tables(result, result.engine))
        extra[result.engine] = {
            "eta": result.fit.eta,
            "eta_se": result.fit.eta_se,
            "intercept": result.fit.intercept,
        }
    if blk.get("emit_kernel") and cfg.model["type"] == "xy":
        params = harness.realize_xy(cfg.model, cfg.seed, 0)
        kern = localization_kernel(build_M(params))
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        kernel_to_csv(kern, out / "kernel.csv")
    return emit_results(args.output_dir, cfg, tables, extra=extra, wall_time_s=time.monotonic() - t0)


def cmd_ttime(cfg: ExperimentConfig, args) -> dict:
    t0 = time.monotonic()
    result = harness.run_transmission_scaling(cfg, threads=args.threads)
    tables = harness.scaling_tables(result)
    records_path = Path(args.output_dir)
    records_path.mkdir(parents=True, exist_ok=True)
    with open(records_path / "transmission_records.json", "w") as fh:
        json.dump(list(result.records), fh, indent=2, sort_keys=True)
        fh.write("\n")
    extra = {"rows": [row.__dict__ for row in result.rows]}
    return emit_results(args.output_dir, cfg, tables, extra=extra, wall_time_s=time.monotonic() - t0)


def cmd_lioms(cfg: ExperimentConfig, args) -> dict:
    blk = cfg.raw.get("lioms", {})
    phi, H, chain = harness.build_realization(cfg.model, cfg.seed, int(blk.get("realization", 0)))
    es = eigendecompose(H, chain=chain)
    gap_tol = blk.get("gap_tol")
    radii = blk.get("radii")
    dephased, profiles = build_lioms_second_kind(
        es, phi.local_terms(), gap_tol=gap_tol, radii=radii
    )
    profile_rows = []
    for k, (op, prof) in enumerate(zip(dephased, profiles)):
        for r_idx, val in enumerate(prof):
            profile_rows.append(
                (k, ",".join(str(s) for s in op.source_support), r_idx, val)
            )
    tables = {
        "liom_profiles": (["term", "support", "radius", "error"], profile_rows),
    }
    extra = {"gap_tol": dephased[0].gap_tol if dephased else default_gap_tol(es)}
    if blk.get("first_kind", True):
        lf = liom_first_kind_decompose(es)
        nz = np.flatnonzero(np.abs(lf.phi) > float(blk.get("phi_floor", 1e-12)))
        phi_rows = [(int(m), format(int(m), f"0{chain.n_sites}b"), lf.phi[m]) for m in nz]
        tp_rows = [
            (x, y, lf.two_point[x, y])
            for x in range(chain.n_sites)
            for y in range(x + 1, chain.n_sites)
        ]
        env = decay_envelope(lf)
        tables["liom_phi"] = (["mask", "bits", "value"], phi_rows)
        tables["liom_two_point"] = (["x", "y", "value"], tp_rows)
        tables["liom_envelope"] = (["distance", "envelope"], list(enumerate(env)))
    return emit_results(args.output_dir, cfg, tables, extra=extra)


def cmd_lrbound(cfg: ExperimentConfig, args) -> dict:
    t0 = time.monotonic()
    blk = cfg.section("lrbound")
    X = _sites(blk["x"])
    Y = _sites(blk["y"])
    n = int(cfg.model["n"])
    grid = make_time_grid(cfg.time_grid)
    mu = float(blk.get("mu", 1.0))
    metric_mode = blk.get("metric_mode", "restricted")
    realization = int(blk.get("realization", 0))

    phi, H, chain = harness.build_realization(cfg.model, cfg.seed, realization)
    intervals = blk.get("intervals")
    if intervals is None:
        pert = harness.realize_perturbation(cfg.model, cfg.seed, realization)
        if pert is None:
            raise ConfigurationError("lrbound needs 'intervals' or a model perturbation")
        run, start = longest_zero_run(pert.delta)
        if run == 0:
            raise ConfigurationError("perturbation mask has no zero run to decouple")
        intervals = [[0, start], [start + run, n]] if start > 0 else [[run, n]]
        intervals = [iv for iv in intervals if iv[0] < iv[1]]
    lattice = contract(n, [tuple(iv) for iv in intervals], metric_mode=metric_mode)
    f = f_constants(None, lattice, mu=mu)
    es = eigendecompose(H, chain=chain)

    route = blk.get("route", "static")
    if route == "static":
        bound = static_bound_trace(phi, lattice, f, X, Y, grid)
    elif route == "interaction_picture":
        base_model = dict(cfg.model)
        base_model.pop("perturbation", None)
        _, H0, _ = harness.build_realization(base_model, cfg.seed, realization)
        es0 = eigendecompose(H0, chain=chain)
        pert = harness.realize_perturbation(cfg.model, cfg.seed, realization)
        # midpoint-refined sampling so every grid time has >= 3 integrand samples
        sample_times = np.unique(np.concatenate([grid, 0.5 * (grid[1:] + grid[:-1])]))
        terms = interaction_picture_terms(es0, pert, sample_times)
        bound = np.zeros_like(grid)
        for i, t in enumerate(grid):
            if t == 0.0:
                continue
            ival, _ = integral_I(terms, f, lattice, float(t))
            bound[i] = lr_bound_value(f, lattice, X, Y, ival)
    else:
        raise ConfigurationError("lrbound.route must be 'static' or 'interaction_picture'")

    measured = np.zeros_like(grid)
    for i, t in enumerate(grid):
        if t != 0.0:
            measured[i] = pauli_commutator_estimator(es, X, Y, float(t))
    rows = [
        (grid[i], measured[i], bound[i], bound[i] - measured[i])
        for i in range(grid.shape[0])
    ]
    extra = {
        "dominates": bool(np.all(measured <= bound + 1e-10)),
        "route": route,
        "intervals": [list(iv) for iv in intervals],
        "mu": mu,
    }
    return emit_results(
        args.output_dir,
        cfg,
        {"lr_comparison": (["t", "measured", "bound", "margin"], rows)},
        extra=extra,
        wall_time_s=time.monotonic() - t0,
    )


def cmd_gaps(cfg: ExperimentConfig, args) -> dict:
    t0 = time.monotonic()
    stats = harness.run_gap_statistics(cfg, threads=args.threads)
    tables = harness.gap_tables(stats)
    extra = {
        "zero_events": stats.zero_events,
        "tail_exponent": stats.tail_exponent,
        "tail_points": stats.tail_points,
        "min_gap": float(stats.min_gaps.min()),
    }
    return emit_results(args.output_dir, cfg, tables, extra=extra, wall_time_s=time.monotonic() - t0)


def cmd_report(args) -> dict:
    path = Path(args.output_dir) / "manifest.json"
    if not path.exists():
        raise ConfigurationError(f"no manifest found at {path}")
    with open(path) as fh:
        manifest = json.load(fh)
    print(f"config hash : {manifest['config_hash']}")
    print(f"seed        : {manifest['seed']}")
    print(f"backend     : {manifest.get('kernel_backend', '?')}")
    for name, meta in sorted(manifest.get("outputs", {}).items()):
        print(f"output      : {name} ({meta['rows']} rows)")
    for key, val in sorted(manifest.get("results", {}).items()):
        print(f"result      : {key} = {val}")
    return manifest


_COMMANDS = {
    "build": cmd_build,
    "evolve": cmd_evolve,
    "localize": cmd_localize,
    "ttime": cmd_ttime,
    "lioms": cmd_lioms,
    "lrbound": cmd_lrbound,
    "gaps": cmd_gaps,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mblsim",
        description="Localization diagnostics for disordered spin chains.",
    )
    parser.add_argument("--config", help="path to the JSON experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads over realizations")
    parser.add_argument("--output-dir", default=None, help="override the config output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(_COMMANDS) + ["report"]:
        sub.add_parser(name)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            if args.output_dir is None:
                raise ConfigurationError("report needs --output-dir")
            cmd_report(args)
            return 0
        if args.config is None:
            raise ConfigurationError(f"{args.command} needs --config")
        cfg = load_config(args.config)
        if args.seed is not None:
            raw = dict(cfg.raw)
            raw["seed"] = args.seed
            cfg = harness.validate_config(raw)
        if args.output_dir is None:
            args.output_dir = cfg.output_dir
        _COMMANDS[args.command](cfg, args)
        return 0
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, MblsimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
