"""Command-line front end.

Subcommands: queue-sim, verify, trajectory, rates, tune, compare,
efficiency.  CSV is the canonical table format (one `# config: {...}`
comment line embeds the resolved parameters); JSON summaries carry the
same config plus a ``generated_at`` timestamp, which is the only
non-reproducible field.  Identical invocation and seed give byte-identical
CSV files.

Exit codes: 0 success or all checks pass, 1 verification failure,
2 inconclusive, 64 usage error, 65 domain error.  A JSON file passed via
--config supplies values for any flag not given on the command line
(flags win).  STALE_MOMENTUM_THREADS caps tuning-sweep parallelism.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys

import numpy as np

from . import rates as rates_mod
from . import verify as verify_mod
from ._backend import active_backend
from .engine import (
    expected_iterates_exact,
    recurrence_iterates,
    run_async_sgd,
    run_momentum_sgd,
)
from .errors import DivergenceError, DomainError, StaleMomentumError
from .objectives import NoiseModel, QuadraticObjective
from .queueing import QueueConfig, StalenessTrace, histogram, simulate, time_per_step
from .staleness import StalenessDistribution

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_DOMAIN = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x != ""]


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x != ""]


def _merged(args, defaults: dict) -> dict:
    """Resolve option values: explicit flag > config file > built-in default."""
    file_cfg = getattr(args, "_file_config", {}) or {}
    out = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = file_cfg.get(key, default)
        out[key] = value
    return out


def _require(parser_name: str, cfg: dict, *keys):
    for key in keys:
        if cfg[key] is None:
            _TOP_PARSER.error(f"{parser_name}: --{key.replace('_', '-')} is required")


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_csv(path, config: dict, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _summary(config: dict, **payload) -> dict:
    return {"config": config, "generated_at": _timestamp(), **payload}


def _emit(summary: dict, out_prefix, fmt: str, table=None) -> None:
    """Print the summary and write files when an output prefix is given."""
    print(json.dumps(summary, indent=2, sort_keys=True))
    if out_prefix is None or table is None:
        if out_prefix is not None:
            _write_json(f"{out_prefix}_summary.json", summary)
        return
    header, rows = table
    if fmt == "csv":
        _write_csv(f"{out_prefix}.csv", summary["config"], header, rows)
    else:
        _write_json(
            f"{out_prefix}.json",
            {**summary, "table": [dict(zip(header, row)) for row in rows]},
        )
    _write_json(f"{out_prefix}_summary.json", summary)


def _eigenvalues_from(cfg: dict) -> np.ndarray:
    """Spectrum selection: --eigs wins, then --condition {1,Q}, then --dim.

    --dim d means the integer spectrum {1, ..., d} (a condition-number-d
    quadratic for d > 1, the unit 1-D problem for d = 1).
    """
    if cfg.get("eigs"):
        return np.asarray(_csv_floats(cfg["eigs"]), dtype=float)
    cond = cfg.get("condition")
    if isinstance(cond, (list, tuple)):
        cond = cond[0] if cond else None
    if cond is not None:
        return rates_mod.two_point_spectrum(float(cond))
    dim = int(cfg.get("dim") or 1)
    return np.arange(1, dim + 1, dtype=float)


# ----------------------------------------------------------------------
# queue-sim
# ----------------------------------------------------------------------
def _cmd_queue_sim(args) -> int:
    cfg = _merged(
        args,
        {
            "workers": None,
            "rate": 1.0,
            "writes": 100_000,
            "work": "exponential",
            "seed": 0,
            "out": None,
            "format": "csv",
        },
    )
    _require("queue-sim", cfg, "workers")
    qcfg = QueueConfig(
        workers=int(cfg["workers"]),
        rate=float(cfg["rate"]),
        num_writes=int(cfg["writes"]),
        seed=int(cfg["seed"]),
        work=cfg["work"],
    )
    trace = simulate(qcfg)
    fit = verify_mod.fit_geometric(trace.post_warmup_staleness(), qcfg.workers)
    resolved = qcfg.to_dict()
    summary = _summary(
        resolved,
        backend=active_backend(),
        total_writes=len(trace),
        warmup=trace.warmup,
        time_per_step=time_per_step(trace),
        staleness=fit,
        histogram=histogram(trace).to_dict(),
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    if cfg["out"] is not None:
        trace.to_csv(f"{cfg['out']}_trace.csv")
        _write_json(f"{cfg['out']}_summary.json", summary)
    return EXIT_OK


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------
def _cmd_verify(args) -> int:
    cfg = _merged(
        args,
        {
            "theorem": None,
            "alpha": 0.1,
            "mu_s": 0.5,
            "mu_l": 0.0,
            "pmf": None,
            "dim": None,
            "eigs": None,
            "condition": None,
            "steps": 200,
            "workers": 2,
            "rate": 1.0,
            "writes": 100_000,
            "work": "exponential",
            "mc_runs": None,
            "noise_sigma": 0.0,
            "seed": 0,
            "out": None,
            "format": "json",
        },
    )
    _require("verify", cfg, "theorem")
    theorems = sorted(set(cfg["theorem"]))
    obj = QuadraticObjective.from_spectrum(_eigenvalues_from(cfg))
    reports = []
    for theorem in theorems:
        if theorem == 1:
            if cfg["pmf"] is not None:
                dist = StalenessDistribution.empirical(_csv_floats(cfg["pmf"]))
            else:
                dist = StalenessDistribution.geometric(float(cfg["mu_s"]))
            report = verify_mod.verify_theorem1(obj, float(cfg["alpha"]), dist, int(cfg["steps"]))
        elif theorem == 2:
            report = verify_mod.verify_theorem2(
                obj,
                float(cfg["alpha"]),
                float(cfg["mu_s"]),
                int(cfg["steps"]),
                mc_runs=None if cfg["mc_runs"] is None else int(cfg["mc_runs"]),
                noise_sigma=float(cfg["noise_sigma"]),
                seed=int(cfg["seed"]),
            )
        elif theorem == 3:
            report = verify_mod.verify_theorem3(
                workers=int(cfg["workers"]),
                rate=float(cfg["rate"]),
                num_writes=int(cfg["writes"]),
                seed=int(cfg["seed"]),
                work=cfg["work"],
            )
        elif theorem == 4:
            report = verify_mod.verify_theorem4(
                obj, float(cfg["alpha"]), float(cfg["mu_s"]), float(cfg["mu_l"]), int(cfg["steps"])
            )
        else:
            _TOP_PARSER.error(f"verify: unknown theorem {theorem}")
        reports.append(report)
        print(
            f"theorem {theorem}: {report.status}"
            f" (max discrepancy {report.max_discrepancy:.3e},"
            f" tolerance {report.tolerance:.3e})"
        )
        if cfg["out"] is not None:
            _write_json(f"{cfg['out']}_theorem{theorem}.json", report.to_dict())
    codes = [r.exit_code for r in reports]
    if EXIT_VERIFY_FAIL in codes:
        return EXIT_VERIFY_FAIL
    if EXIT_INCONCLUSIVE in codes:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# ----------------------------------------------------------------------
# trajectory
# ----------------------------------------------------------------------
def _cmd_trajectory(args) -> int:
    cfg = _merged(
        args,
        {
            "mode": None,
            "alpha": None,
            "mu_l": 0.0,
            "mu_s": None,
            "staleness_json": None,
            "staleness_trace": None,
            "delay": None,
            "eigs": None,
            "condition": None,
            "dim": None,
            "objective_json": None,
            "steps": 100,
            "w0": None,
            "noise_sigma": 0.0,
            "seed": 0,
            "out": None,
            "format": "csv",
        },
    )
    _require("trajectory", cfg, "mode", "alpha")
    if cfg["objective_json"] is not None:
        obj = QuadraticObjective.from_json(cfg["objective_json"])
    else:
        obj = QuadraticObjective.from_spectrum(_eigenvalues_from(cfg))
    w0 = (
        np.asarray(_csv_floats(cfg["w0"]))
        if cfg["w0"] is not None
        else np.ones(obj.dim)
    )
    steps = int(cfg["steps"])
    alpha, mu_l = float(cfg["alpha"]), float(cfg["mu_l"])
    noise = NoiseModel.gaussian(float(cfg["noise_sigma"]))
    mode = cfg["mode"]

    def staleness_source():
        if cfg["staleness_trace"] is not None:
            return StalenessTrace.from_csv(cfg["staleness_trace"])
        if cfg["staleness_json"] is not None:
            return StalenessDistribution.from_json(cfg["staleness_json"])
        if cfg["delay"] is not None:
            return StalenessDistribution.degenerate(int(cfg["delay"]))
        if cfg["mu_s"] is not None:
            return StalenessDistribution.geometric(float(cfg["mu_s"]))
        _TOP_PARSER.error("trajectory: async mode needs --mu-s, --delay, "
                          "--staleness-json or --staleness-trace")

    if mode == "momentum":
        traj = run_momentum_sgd(obj, alpha, mu_l, steps, w0, noise, int(cfg["seed"]))
    elif mode == "async":
        traj = run_async_sgd(
            obj, alpha, mu_l, staleness_source(), steps, w0, noise, int(cfg["seed"])
        )
    elif mode == "exact":
        src = staleness_source()
        if not isinstance(src, StalenessDistribution):
            _TOP_PARSER.error("trajectory: exact mode needs a distribution, not a trace")
        traj = expected_iterates_exact(obj, alpha, mu_l, src, steps, w0)
    elif mode == "recurrence":
        if cfg["mu_s"] is None:
            _TOP_PARSER.error("trajectory: recurrence mode needs --mu-s")
        traj = recurrence_iterates(obj, alpha, mu_l, float(cfg["mu_s"]), steps, w0)
    else:
        _TOP_PARSER.error(f"trajectory: unknown mode {mode!r}")

    resolved = {
        "mode": mode,
        "alpha": alpha,
        "mu_l": mu_l,
        "staleness": traj.staleness,
        "steps": steps,
        "eigenvalues": obj.eigenvalues.tolist(),
        "w0": w0.tolist(),
        "noise_sigma": noise.sigma,
        "seed": traj.seed if isinstance(traj.seed, str) else int(cfg["seed"]),
    }
    summary = _summary(
        resolved,
        final_distance=float(np.linalg.norm(traj.final - obj.w_star)),
        final_value=obj.value(traj.final),
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    if cfg["out"] is not None:
        traj.to_csv(f"{cfg['out']}.csv")
        _write_json(f"{cfg['out']}_summary.json", summary)
    return EXIT_OK


# ----------------------------------------------------------------------
# rates / tune / compare / efficiency
# ----------------------------------------------------------------------
def _cmd_rates(args) -> int:
    cfg = _merged(
        args,
        {
            "mu_s": 0.0,
            "mu_l": 0.0,
            "alpha": None,
            "eigs": None,
            "condition": None,
            "dim": None,
            "out": None,
            "format": "csv",
        },
    )
    _require("rates", cfg, "alpha")
    eigs = _eigenvalues_from(cfg)
    report = rates_mod.convergence_rate(eigs, float(cfg["mu_s"]), float(cfg["mu_l"]), float(cfg["alpha"]))
    resolved = {
        "mu_s": float(cfg["mu_s"]),
        "mu_l": float(cfg["mu_l"]),
        "alpha": float(cfg["alpha"]),
        "eigenvalues": eigs.tolist(),
    }
    summary = _summary(resolved, gamma=report.gamma, stable=report.stable)
    header = ["eigenvalue", "root_re", "root_im", "rate"]
    rows = [
        (
            e.eigenvalue,
            "" if e.root is None else repr(e.root.real),
            "" if e.root is None else repr(e.root.imag),
            repr(e.rate),
        )
        for e in report.per_eigenvalue
    ]
    _emit(summary, cfg["out"], cfg["format"], table=(header, rows))
    return EXIT_OK


def _cmd_tune(args) -> int:
    cfg = _merged(
        args,
        {
            "condition": None,
            "eigs": None,
            "dim": None,
            "mu_s_grid": None,
            "mu_l_grid": None,
            "alpha_grid": None,
            "full_grid": None,
            "out": None,
            "format": "csv",
        },
    )
    conditions = cfg["condition"] if cfg["condition"] else [None]
    mu_s_values = (
        _csv_floats(cfg["mu_s_grid"]) if cfg["mu_s_grid"] else rates_mod.DEFAULT_MU_S_SWEEP
    )
    mu_l_grid = _csv_floats(cfg["mu_l_grid"]) if cfg["mu_l_grid"] else None
    alpha_grid = _csv_floats(cfg["alpha_grid"]) if cfg["alpha_grid"] else None

    curves = []
    cell_rows = []
    for cond in conditions:
        spec_cfg = dict(cfg)
        spec_cfg["condition"] = cond
        eigs = _eigenvalues_from(spec_cfg)
        label = cond if cond is not None else f"eigs:{','.join(map(str, eigs))}"
        grid = rates_mod.tune_sweep(eigs, mu_s_values, mu_l_grid, alpha_grid)
        for entry in grid.entries:
            curves.append(
                (
                    label,
                    entry.mu_s,
                    entry.best_mu_l,
                    entry.best_alpha,
                    repr(entry.best_gamma),
                    entry.stable,
                )
            )
        if cfg["full_grid"]:
            for mu_s, ml, a, g in grid.rows():
                cell_rows.append((label, mu_s, ml, a, repr(g)))

    resolved = {
        "conditions": [c for c in conditions if c is not None],
        "mu_s_values": list(map(float, mu_s_values)),
        "mu_l_grid": list(map(float, mu_l_grid)) if mu_l_grid else list(rates_mod.DEFAULT_MU_L_GRID),
        "alpha_grid_points": len(alpha_grid) if alpha_grid else len(rates_mod.DEFAULT_ALPHA_GRID),
    }
    summary = _summary(
        resolved,
        curves=[
            {
                "condition": str(c[0]),
                "mu_s": c[1],
                "best_mu_l": c[2],
                "best_alpha": c[3],
                "best_gamma": float(c[4]),
                "stable": c[5],
            }
            for c in curves
        ],
    )
    header = ["condition", "mu_s", "best_mu_l", "best_alpha", "best_gamma", "stable"]
    _emit(summary, cfg["out"], cfg["format"], table=(header, curves))
    if cfg["out"] is not None and cfg["full_grid"]:
        _write_csv(
            f"{cfg['out']}_cells.csv",
            resolved,
            ["condition", "mu_s", "mu_l", "alpha", "gamma"],
            cell_rows,
        )
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = _merged(
        args,
        {
            "condition": 10.0,
            "steps": 10,
            "mu_s_grid": None,
            "out": None,
            "format": "csv",
        },
    )
    eigs = rates_mod.two_point_spectrum(float(cfg["condition"]))
    mu_s_values = (
        _csv_floats(cfg["mu_s_grid"]) if cfg["mu_s_grid"] else rates_mod.DEFAULT_MU_S_SWEEP
    )
    rows = rates_mod.strategy_compare(eigs, mu_s_values, int(cfg["steps"]))
    resolved = {
        "condition": float(cfg["condition"]),
        "steps": int(cfg["steps"]),
        "mu_s_values": list(map(float, mu_s_values)),
    }
    header = [
        "mu_s",
        "gamma_tuned",
        "gamma_fixed_zero",
        "gamma_fixed_half",
        "proxy_tuned",
        "proxy_fixed_zero",
        "proxy_fixed_half",
        "speedup_vs_zero",
    ]
    table_rows = [
        (
            r.mu_s,
            repr(r.gamma_tuned),
            repr(r.gamma_fixed_zero),
            repr(r.gamma_fixed_half),
            repr(r.proxy_tuned),
            repr(r.proxy_fixed_zero),
            repr(r.proxy_fixed_half),
            repr(r.speedup_vs_zero),
        )
        for r in rows
    ]
    summary = _summary(
        resolved,
        max_speedup_vs_zero=float(np.nanmax([r.speedup_vs_zero for r in rows])),
    )
    _emit(summary, cfg["out"], cfg["format"], table=(header, table_rows))
    return EXIT_OK


def _cmd_efficiency(args) -> int:
    cfg = _merged(
        args,
        {
            "workers": None,
            "gamma": None,
            "target_ratio": 0.01,
            "simulate": None,
            "rate": 1.0,
            "writes": 100_000,
            "seed": 0,
            "out": None,
            "format": "csv",
        },
    )
    _require("efficiency", cfg, "workers", "gamma")
    worker_counts = _csv_ints(cfg["workers"]) if isinstance(cfg["workers"], str) else list(cfg["workers"])
    gammas = _csv_floats(cfg["gamma"]) if isinstance(cfg["gamma"], str) else list(cfg["gamma"])
    rows = rates_mod.efficiency_metrics(worker_counts, gammas, float(cfg["target_ratio"]))

    measured = {}
    if cfg["simulate"]:
        for m in worker_counts:
            trace = simulate(
                QueueConfig(
                    workers=m,
                    rate=float(cfg["rate"]),
                    num_writes=int(cfg["writes"]),
                    seed=int(cfg["seed"]),
                )
            )
            measured[m] = time_per_step(trace)
    base_time = measured.get(1)

    resolved = {
        "workers": worker_counts,
        "gamma": gammas,
        "target_ratio": float(cfg["target_ratio"]),
        "simulate": bool(cfg["simulate"]),
    }
    header = [
        "workers",
        "hardware_efficiency",
        "iterations",
        "statistical_efficiency",
        "time_proxy",
        "unstable",
    ]
    if measured:
        header += ["measured_time_per_step", "measured_hardware_efficiency"]
    table_rows = []
    for r in rows:
        row = [
            r.workers,
            repr(r.hardware_efficiency),
            r.iterations,
            repr(r.statistical_efficiency),
            repr(r.time_proxy),
            r.unstable,
        ]
        if measured:
            row += [repr(measured[r.workers]), repr(measured[r.workers] / base_time)]
        table_rows.append(tuple(row))
    summary = _summary(resolved, rows=[dict(zip(header, row)) for row in table_rows])
    _emit(summary, cfg["out"], cfg["format"], table=(header, table_rows))
    return EXIT_OK


# ----------------------------------------------------------------------
# parser assembly
# ----------------------------------------------------------------------
def _add_common(sub):
    sub.add_argument("--seed", type=int, default=None, help="master RNG seed (default 0)")
    sub.add_argument("--out", default=None, help="output path prefix")
    sub.add_argument("--format", choices=("csv", "json"), default=None, help="table format")
    sub.add_argument("--config", default=None, help="JSON file with default flag values")


def _add_spectrum(sub):
    sub.add_argument("--eigs", default=None, help="comma-separated eigenvalues of A^T A")
    sub.add_argument("--condition", type=float, action="append", default=None,
                     help="condition number Q for a two-point spectrum {1, Q}")
    sub.add_argument("--dim", type=int, default=None,
                     help="dimension d, shorthand for the integer spectrum 1..d")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="stale-momentum",
        description="Asynchronous SGD as momentum: simulation, verification, and rate tuning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("queue-sim", help="simulate asynchronous workers, fit the staleness law")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--rate", type=float, default=None, help="work rate lambda (default 1)")
    p.add_argument("--writes", type=int, default=None, help="post-warm-up writes (default 1e5)")
    p.add_argument("--work", choices=("exponential", "constant"), default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_queue_sim)

    p = sub.add_parser("verify", help="run equivalence checks 1-4")
    p.add_argument("--theorem", type=int, action="append", choices=(1, 2, 3, 4), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--mu-s", dest="mu_s", type=float, default=None)
    p.add_argument("--mu-l", dest="mu_l", type=float, default=None)
    p.add_argument("--pmf", default=None, help="comma-separated staleness pmf (check 1)")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help="worker count (check 3)")
    p.add_argument("--rate", type=float, default=None, help="work rate (check 3)")
    p.add_argument("--writes", type=int, default=None, help="simulated writes (check 3)")
    p.add_argument("--work", choices=("exponential", "constant"), default=None)
    p.add_argument("--mc-runs", dest="mc_runs", type=int, default=None,
                   help="Monte-Carlo ensemble size (check 2)")
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=None)
    _add_spectrum(p)
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("trajectory", help="run one trajectory and export it")
    p.add_argument("--mode", choices=("momentum", "async", "exact", "recurrence"), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--mu-l", dest="mu_l", type=float, default=None)
    p.add_argument("--mu-s", dest="mu_s", type=float, default=None)
    p.add_argument("--delay", type=int, default=None, help="degenerate staleness delay")
    p.add_argument("--staleness-json", dest="staleness_json", default=None)
    p.add_argument("--staleness-trace", dest="staleness_trace", default=None,
                   help="CSV trace whose staleness column is replayed")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--w0", default=None, help="comma-separated start point")
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=None)
    p.add_argument("--objective-json", dest="objective_json", default=None,
                   help='objective as JSON: {"matrix": ..., "b": ...} or {"eigenvalues": [...]}')
    _add_spectrum(p)
    _add_common(p)
    p.set_defaults(func=_cmd_trajectory)

    p = sub.add_parser("rates", help="convergence rate for one parameter point")
    p.add_argument("--mu-s", dest="mu_s", type=float, default=None)
    p.add_argument("--mu-l", dest="mu_l", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    _add_spectrum(p)
    _add_common(p)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("tune", help="grid-search mu_l and alpha over a mu_s sweep")
    p.add_argument("--mu-s-grid", dest="mu_s_grid", default=None,
                   help="comma-separated mu_s values (default 0..0.95)")
    p.add_argument("--mu-l-grid", dest="mu_l_grid", default=None)
    p.add_argument("--alpha-grid", dest="alpha_grid", default=None)
    p.add_argument("--full-grid", dest="full_grid", action="store_const", const=True,
                   default=None, help="also export every grid cell")
    _add_spectrum(p)
    _add_common(p)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("compare", help="tuned vs fixed-momentum strategies after k steps")
    p.add_argument("--condition", type=float, default=None)
    p.add_argument("--steps", type=int, default=None, help="k, the step horizon")
    p.add_argument("--mu-s-grid", dest="mu_s_grid", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("efficiency", help="hardware/statistical efficiency table")
    p.add_argument("--workers", default=None, help="comma-separated worker counts incl. 1")
    p.add_argument("--gamma", default=None, help="comma-separated rates, aligned with workers")
    p.add_argument("--target-ratio", dest="target_ratio", type=float, default=None)
    p.add_argument("--simulate", action="store_const", const=True, default=None,
                   help="also measure time-per-step from simulated traces")
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--writes", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_efficiency)

    return parser


_TOP_PARSER = build_parser()


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = _TOP_PARSER.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                args._file_config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            _TOP_PARSER.error(f"cannot read --config file: {exc}")
    else:
        args._file_config = {}
    try:
        return args.func(args)
    except (DomainError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except StaleMomentumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
