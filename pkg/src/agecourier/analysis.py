"""Analytic floors, transport penalties, and experiment sweeps.

Every non-base node's average age is floored by 2 mu_i(m_i) - 2 + d_i: the
sensing mean enters twice (age accrues while a sample is sensed and again
while the next one is), and the hop distance is the minimum shipping time.
The gap between a simulated average and this floor is the transport penalty,
the price of the conveyor schedule. Sweeps split a fixed robot budget between
sensing and conveying to locate the best division of labor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conveyor_plan import (
    EulerWalk,
    PhaseSet,
    baseward_departure_slots,
    clustered_phases,
    euler_walk,
    random_phases,
    uniform_phases,
)
from .graph_core import DistanceMap, Graph, bfs_distances, shortest_path_tree
from .sensing_alloc import (
    SensingAllocation,
    SensingModel,
    make_model,
    mu,
    water_fill,
)
from .sim_engine import SimConfig, SimResult, generation_mask, run


class DimensionMismatch(ValueError):
    """Inputs describe different node sets."""


class BudgetTooSmall(ValueError):
    """Total robot budget cannot cover one sensor per node plus one conveyor."""


@dataclass(frozen=True)
class BoundReport:
    per_node_bound: dict[int, float]
    network_bound: float


@dataclass(frozen=True)
class PenaltyReport:
    per_node_delta: dict[int, float]
    delta_avg: float


@dataclass(frozen=True)
class SweepCell:
    n_s: int
    n_c: int
    n_c_effective: int
    mean_aoi: float
    std_aoi: float
    bound: float
    seeds: int


@dataclass(frozen=True)
class PhaseRow:
    strategy: str
    n_c: int | None
    mean_aoi: float
    std_aoi: float


def lower_bound(
    model: SensingModel, alloc: SensingAllocation, distances: DistanceMap
) -> BoundReport:
    """Per-node analytic age floor 2 mu_i(m_i) - 2 + d_i and its network mean."""
    k = len(distances.dist) - 1
    if model.node_count != k or len(alloc.m) != k:
        raise DimensionMismatch(
            f"distances cover {k} non-base nodes, model {model.node_count}, "
            f"allocation {len(alloc.m)}"
        )
    per_node = {
        i + 1: 2.0 * mu(model, i, alloc.m[i]) - 2.0 + distances.dist[i + 1]
        for i in range(k)
    }
    return BoundReport(per_node_bound=per_node, network_bound=sum(per_node.values()) / k)


def transport_penalty(result: SimResult, bound: BoundReport) -> PenaltyReport:
    """Raw per-node excess of simulated age over the analytic floor.

    Deliberately unclamped: sampling noise can push a tiny bit below zero, and
    hiding that would mask accounting errors.
    """
    if set(result.per_node_aoi) != set(bound.per_node_bound):
        raise DimensionMismatch("result and bound cover different node sets")
    delta = {
        node: result.per_node_aoi[node] - bound.per_node_bound[node]
        for node in sorted(result.per_node_aoi)
    }
    return PenaltyReport(per_node_delta=delta, delta_avg=sum(delta.values()) / len(delta))


def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def _simulate_networks(
    graph: Graph,
    walk: EulerWalk,
    phases: PhaseSet,
    model: SensingModel,
    alloc: SensingAllocation,
    horizon: int,
    warmup: int,
    seeds,
) -> list[float]:
    tree = shortest_path_tree(graph)
    out = []
    for seed in seeds:
        cfg = SimConfig(
            graph=graph,
            tree=tree,
            walk=walk,
            phase_set=phases,
            model=model,
            alloc=alloc,
            horizon=horizon,
            warmup=warmup,
            seed=seed,
        )
        out.append(run(cfg).network_aoi)
    return out


def split_sweep(
    graph: Graph,
    alphas,
    total: int,
    *,
    horizon: int,
    warmup: int,
    seeds,
) -> tuple[list[SweepCell], SweepCell]:
    """Sweep every split of `total` robots into n_s sensors plus n_c conveyors.

    Sensing robots are placed by water-filling; conveyors get evenly spread
    phases. Splits asking for more conveyors than walk positions reuse the
    full phase set, and the cell records the effective count. Returns all
    cells plus the argmin cell (ties resolve to the larger n_s, favoring
    sensing once conveying is saturated).
    """
    k = graph.node_count - 1
    if total < k + 1:
        raise BudgetTooSmall(f"total {total} cannot cover {k} sensors plus one conveyor")
    tree = shortest_path_tree(graph)
    walk = euler_walk(tree)
    dist = bfs_distances(graph)
    model = make_model(alphas, max_m=total)
    seeds = list(seeds)

    cells: list[SweepCell] = []
    best: SweepCell | None = None
    for n_s in range(k, total):
        n_c = total - n_s
        n_c_eff = min(n_c, walk.length)
        alloc = water_fill(model, n_s)
        phases = uniform_phases(walk.length, n_c_eff)
        nets = _simulate_networks(graph, walk, phases, model, alloc, horizon, warmup, seeds)
        mean, std = _mean_std(nets)
        cell = SweepCell(
            n_s=n_s,
            n_c=n_c,
            n_c_effective=n_c_eff,
            mean_aoi=mean,
            std_aoi=std,
            bound=lower_bound(model, alloc, dist).network_bound,
            seeds=len(seeds),
        )
        cells.append(cell)
        if best is None or cell.mean_aoi <= best.mean_aoi:  # ties: larger n_s wins
            best = cell
    return cells, best


def phase_comparison(
    graph: Graph,
    alphas,
    n_s: int,
    n_c_values,
    *,
    horizon: int,
    warmup: int,
    seeds,
    random_draws: int = 5,
    phase_seed: int = 0,
) -> list[PhaseRow]:
    """Compare phase strategies at several conveyor counts.

    For each n_c the table holds one row for the evenly spread schedule, one
    for the clustered convoy, and one per seeded random draw; a final row
    carries the analytic floor for reference.
    """
    k = graph.node_count - 1
    tree = shortest_path_tree(graph)
    walk = euler_walk(tree)
    dist = bfs_distances(graph)
    model = make_model(alphas, max_m=max(n_s, k) + 1)
    alloc = water_fill(model, n_s)
    seeds = list(seeds)

    rows: list[PhaseRow] = []
    for n_c in n_c_values:
        schedules = [("uniform", uniform_phases(walk.length, n_c))]
        schedules.append(("clustered", clustered_phases(n_c, walk.length)))
        for j in range(random_draws):
            schedules.append((f"random{j}", random_phases(n_c, walk.length, phase_seed + j)))
        for name, phases in schedules:
            nets = _simulate_networks(
                graph, walk, phases, model, alloc, horizon, warmup, seeds
            )
            mean, std = _mean_std(nets)
            rows.append(PhaseRow(strategy=name, n_c=n_c, mean_aoi=mean, std_aoi=std))
    rows.append(
        PhaseRow(
            strategy="bound",
            n_c=None,
            mean_aoi=lower_bound(model, alloc, dist).network_bound,
            std_aoi=0.0,
        )
    )
    return rows


def pickup_wait_mean(
    walk: EulerWalk,
    phases: PhaseSet,
    model: SensingModel,
    alloc: SensingAllocation,
    horizon: int,
    seed: int,
) -> float:
    """Average wait from each simulated sensing completion to the next slot a
    conveyor departs its node toward the base (0 when one departs the same
    slot). Uses the same per-node generation streams as the simulator."""
    L = walk.length
    total = 0
    count = 0
    for i in range(model.node_count):
        node = i + 1
        deps = baseward_departure_slots(walk, node, phases)
        wait_by_residue = [min((tau - r) % L for tau in deps) for r in range(L)]
        q = model.q_table[i][alloc.m[i] - 1]
        gens = np.flatnonzero(generation_mask(seed, node, q, horizon))
        if gens.size:
            waits = np.asarray(wait_by_residue, dtype=np.int64)[gens % L]
            total += int(waits.sum())
            count += int(gens.size)
    return total / count if count else float("nan")
