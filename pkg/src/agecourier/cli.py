"""Command-line front-end: parse an experiment config, dispatch a subcommand,
emit CSV tables and optional delivery traces.

Subcommands: bound | waterfill | walk | phases | audit | simulate | sweep.
Global flags: --config FILE (required), --seed N (replaces the config's seed
list with the single seed N), --out FILE (write the CSV there instead of
stdout), --echo-config (print the normalized config and exit).

Output conventions: CSV tables always start with '#' comment lines recording
the package version and the seeds in effect, followed by a header row; floats
are printed with 6 significant digits; no timestamps, so identical inputs
produce byte-identical files. Exit codes: 0 success, 1 invalid input or
config, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys

from . import __version__
from .analysis import _mean_std, lower_bound, phase_comparison, split_sweep
from .config import ConfigError, ExperimentConfig, load_config, render_config
from .conveyor_plan import (
    EulerWalk,
    PhaseSet,
    clustered_phases,
    coverage_audit,
    euler_walk,
    random_phases,
    uniform_phases,
)
from .graph_core import Graph, bfs_distances, build_graph, shortest_path_tree
from .sensing_alloc import (
    SensingAllocation,
    SensingModel,
    allocation_objective,
    make_model,
    mu,
    success_probability,
    uniform_alloc,
    water_fill,
)
from .sim_engine import SimConfig, run, run_energy


# ---------------------------------------------------------------------------
# Assembling model objects from an ExperimentConfig
# ---------------------------------------------------------------------------


def _build_graph(cfg: ExperimentConfig) -> Graph:
    return build_graph(cfg.node_count, cfg.edges)


def _default_max_m(cfg: ExperimentConfig) -> int:
    if cfg.max_m is not None:
        return cfg.max_m
    if cfg.allocation == "explicit":
        return max(cfg.m) + 1
    return cfg.n_s + 1


def _build_model(cfg: ExperimentConfig) -> SensingModel:
    return make_model(cfg.alphas, _default_max_m(cfg))


def _build_alloc(cfg: ExperimentConfig, model: SensingModel) -> SensingAllocation:
    if cfg.allocation == "explicit":
        alloc = SensingAllocation(m=tuple(cfg.m))
        if len(alloc.m) != model.node_count:
            raise ConfigError(
                f"[sensing] m: got {len(alloc.m)} entries for "
                f"{model.node_count} non-base nodes"
            )
        if cfg.n_s is not None and alloc.total != cfg.n_s:
            raise ConfigError(f"[sensing] n_s: {cfg.n_s} but m sums to {alloc.total}")
        return alloc
    if cfg.allocation == "uniform":
        return uniform_alloc(model, cfg.n_s)
    return water_fill(model, cfg.n_s)


def _build_phases(cfg: ExperimentConfig, walk: EulerWalk) -> PhaseSet:
    if cfg.phase_strategy == "clustered":
        return clustered_phases(cfg.n_c, walk.length)
    if cfg.phase_strategy == "random":
        return random_phases(cfg.n_c, walk.length, cfg.phase_seed)
    return uniform_phases(walk.length, cfg.n_c)


def _sensing_budget(cfg: ExperimentConfig) -> int:
    if cfg.n_s is not None:
        return cfg.n_s
    return sum(cfg.m)


# ---------------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.6g" % value
    return str(value)


def _render_csv(header, rows, comments) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _comments(cfg: ExperimentConfig, with_seeds: bool = True) -> list[str]:
    lines = [f"agecourier {__version__}"]
    if with_seeds:
        lines.append("seeds: " + ",".join(str(s) for s in cfg.seeds))
    return lines


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_bound(cfg: ExperimentConfig, out_path: str | None) -> int:
    graph = _build_graph(cfg)
    model = _build_model(cfg)
    alloc = _build_alloc(cfg, model)
    report = lower_bound(model, alloc, bfs_distances(graph))
    rows = [(node, b) for node, b in sorted(report.per_node_bound.items())]
    rows.append(("network", report.network_bound))
    text = _render_csv(("node", "bound"), rows, _comments(cfg, with_seeds=False))
    _emit(text, out_path)
    return 0


def cmd_waterfill(cfg: ExperimentConfig, out_path: str | None) -> int:
    model = _build_model(cfg)
    alloc = water_fill(model, _sensing_budget(cfg))
    rows = [
        (
            i + 1,
            cfg.alphas[i],
            alloc.m[i],
            mu(model, i, alloc.m[i]),
            success_probability(model, i, alloc.m[i]),
        )
        for i in range(model.node_count)
    ]
    comments = _comments(cfg, with_seeds=False)
    comments.append(f"objective: {_fmt(allocation_objective(model, alloc))}")
    text = _render_csv(("node", "alpha", "m", "mu", "q"), rows, comments)
    _emit(text, out_path)
    return 0


def cmd_walk(cfg: ExperimentConfig, out_path: str | None) -> int:
    walk = euler_walk(shortest_path_tree(_build_graph(cfg)))
    comments = _comments(cfg, with_seeds=False)
    comments.append(f"walk length: {walk.length}")
    rows = list(enumerate(walk.sequence))
    text = _render_csv(("step", "node"), rows, comments)
    _emit(text, out_path)
    return 0


def cmd_audit(cfg: ExperimentConfig, out_path: str | None) -> int:
    walk = euler_walk(shortest_path_tree(_build_graph(cfg)))
    report = coverage_audit(walk, _build_phases(cfg, walk))
    lines = [f"full coverage: {'true' if report.full_coverage else 'false'}"]
    for node, slot in report.violations:
        lines.append(f"violation: node={node} slot={slot}")
    text = "\n".join(lines) + "\n"
    _emit(text, out_path)
    return 0


def cmd_simulate(cfg: ExperimentConfig, out_path: str | None) -> int:
    graph = _build_graph(cfg)
    tree = shortest_path_tree(graph)
    walk = euler_walk(tree)
    phases = _build_phases(cfg, walk)
    model = _build_model(cfg)
    alloc = _build_alloc(cfg, model)
    bound = lower_bound(model, alloc, bfs_distances(graph))

    results = []
    for seed in cfg.seeds:
        sim_cfg = SimConfig(
            graph=graph,
            tree=tree,
            walk=walk,
            phase_set=phases,
            model=model,
            alloc=alloc,
            horizon=cfg.horizon,
            warmup=cfg.warmup,
            seed=seed,
            energy=cfg.energy,
        )
        results.append(run_energy(sim_cfg) if cfg.energy is not None else run(sim_cfg))

    rows = []
    for node in sorted(bound.per_node_bound):
        mean, std = _mean_std([r.per_node_aoi[node] for r in results])
        rows.append((node, mean, std, bound.per_node_bound[node], mean - bound.per_node_bound[node]))
    net_mean, net_std = _mean_std([r.network_aoi for r in results])
    rows.append(
        ("network", net_mean, net_std, bound.network_bound, net_mean - bound.network_bound)
    )
    text = _render_csv(("node", "mean_aoi", "std_aoi", "bound", "delta"), rows, _comments(cfg))
    _emit(text, out_path)
    if out_path is not None:
        print("seeds: " + ",".join(str(s) for s in cfg.seeds))

    if cfg.out_trace is not None:
        _write_trace(cfg.out_trace, results[0].delivery_log, cfg.seeds[0])
    return 0


def _write_trace(path: str, log, seed: int) -> None:
    """One JSON object per delivery event, in delivery order, for the first seed."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps({"version": __version__, "seed": seed}) + "\n")
        for ev in log:
            fh.write(
                json.dumps(
                    {
                        "origin": ev.origin,
                        "sensing_start": ev.sensing_start,
                        "generated": ev.generated,
                        "delivered": ev.delivered,
                        "became_freshest": ev.became_freshest,
                    }
                )
                + "\n"
            )


def cmd_sweep(cfg: ExperimentConfig, out_path: str | None) -> int:
    if cfg.sweep_total is None:
        raise ConfigError("[sweep] total: missing required field")
    cells, best = split_sweep(
        _build_graph(cfg),
        cfg.alphas,
        cfg.sweep_total,
        horizon=cfg.horizon,
        warmup=cfg.warmup,
        seeds=cfg.seeds,
    )
    rows = [
        (c.n_s, c.n_c, c.mean_aoi, c.std_aoi, c.bound, int(c is best)) for c in cells
    ]
    comments = _comments(cfg)
    comments.append(f"best: n_s={best.n_s}, n_c={best.n_c}")
    text = _render_csv(("n_s", "n_c", "mean_aoi", "std_aoi", "bound", "best"), rows, comments)
    _emit(text, out_path)
    return 0


def cmd_phases(cfg: ExperimentConfig, out_path: str | None) -> int:
    n_c_values = cfg.phases_n_c_values
    if n_c_values is None:
        n_c_values = (cfg.n_c,)
    rows_src = phase_comparison(
        _build_graph(cfg),
        cfg.alphas,
        _sensing_budget(cfg),
        n_c_values,
        horizon=cfg.horizon,
        warmup=cfg.warmup,
        seeds=cfg.seeds,
        random_draws=cfg.phases_random_draws,
        phase_seed=cfg.phase_seed,
    )
    rows = [(r.strategy, r.n_c, r.mean_aoi, r.std_aoi) for r in rows_src]
    text = _render_csv(("strategy", "n_c", "mean_aoi", "std_aoi"), rows, _comments(cfg))
    _emit(text, out_path)
    return 0


_COMMANDS = {
    "bound": cmd_bound,
    "waterfill": cmd_waterfill,
    "walk": cmd_walk,
    "phases": cmd_phases,
    "audit": cmd_audit,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", required=True, help="experiment config file")
    shared.add_argument(
        "--seed", type=int, default=None, help="replace the config's seed list with this seed"
    )
    shared.add_argument("--out", default=None, help="write the table here instead of stdout")
    shared.add_argument(
        "--echo-config",
        action="store_true",
        help="print the normalized config and exit without running",
    )
    parser = argparse.ArgumentParser(
        prog="agecourier",
        description="Simulate and optimize age-of-information for sensing and courier robots",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[shared])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seeds=(args.seed,))
        if args.echo_config:
            _emit(render_config(cfg), args.out)
            return 0
        return _COMMANDS[args.command](cfg, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())
