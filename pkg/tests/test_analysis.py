"""Analytic floors, penalties, budget sweeps, and phase comparisons."""

import math
from fractions import Fraction

import numpy as np
import pytest

import agecourier as ac
from agecourier.analysis import BudgetTooSmall, DimensionMismatch

from _support import (
    REF_ALPHAS,
    REF_BOUNDS_M1,
    REF_NETWORK_M1,
    REF_WATERFILL_10,
    checked_run,
    ref_config,
    ref_graph,
    ref_model,
    ref_walk,
)


def test_reference_bounds_single_robot():
    rep = ac.lower_bound(
        ref_model(), ac.SensingAllocation((1,) * 7), ac.bfs_distances(ref_graph())
    )
    assert rep.per_node_bound == {i + 1: REF_BOUNDS_M1[i] for i in range(7)}
    assert rep.network_bound == REF_NETWORK_M1


def test_reference_bounds_waterfilled():
    rep = ac.lower_bound(
        ref_model(), ac.SensingAllocation(REF_WATERFILL_10), ac.bfs_distances(ref_graph())
    )
    assert rep.per_node_bound == {1: 7.0, 2: 11.0, 3: 6.0, 4: 9.0, 5: 11.0, 6: 8.0, 7: 8.0}
    assert rep.network_bound == pytest.approx(60.0 / 7.0)


def test_bound_single_edge():
    g = ac.build_graph(2, [(0, 1)])
    rep = ac.lower_bound(
        ac.make_model((2.0,), max_m=1), ac.SensingAllocation((1,)), ac.bfs_distances(g)
    )
    assert rep.per_node_bound == {1: 3.0}
    assert rep.network_bound == 3.0


def test_bound_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        ac.lower_bound(
            ac.make_model((2.0, 2.0), max_m=1),
            ac.SensingAllocation((1, 1)),
            ac.bfs_distances(ref_graph()),
        )


def test_transport_penalty_arithmetic():
    cfg = ref_config(horizon=3000, warmup=300, seed=0)
    res = checked_run(cfg)
    bound = ac.lower_bound(cfg.model, cfg.alloc, ac.bfs_distances(cfg.graph))
    pen = ac.transport_penalty(res, bound)
    for node in range(1, 8):
        assert pen.per_node_delta[node] == res.per_node_aoi[node] - bound.per_node_bound[node]
    assert pen.delta_avg == pytest.approx(sum(pen.per_node_delta.values()) / 7)
    with pytest.raises(DimensionMismatch):
        ac.transport_penalty(res, ac.BoundReport(per_node_bound={1: 3.0}, network_bound=3.0))


def test_split_sweep_budget_guard():
    with pytest.raises(BudgetTooSmall):
        ac.split_sweep(ref_graph(), REF_ALPHAS, 7, horizon=300, warmup=30, seeds=[0])


def test_split_sweep_cells_and_plateau():
    # one non-base node: walk length 2, so any n_c above 2 reuses both offsets;
    # the sensing mean is clamped at 1 from two robots on, so the capped cells
    # are exact replicas of each other
    g = ac.build_graph(2, [(0, 1)])
    cells, best = ac.split_sweep(g, (2.0,), 6, horizon=1200, warmup=100, seeds=[0, 1, 2])
    assert [(c.n_s, c.n_c) for c in cells] == [(1, 5), (2, 4), (3, 3), (4, 2), (5, 1)]
    assert [c.n_c_effective for c in cells] == [2, 2, 2, 2, 1]
    by_ns = {c.n_s: c for c in cells}
    assert by_ns[2].mean_aoi == by_ns[3].mean_aoi == by_ns[4].mean_aoi
    assert by_ns[2].std_aoi == by_ns[4].std_aoi
    # ties between replicas resolve toward more sensing
    assert best == by_ns[4]
    assert all(c.seeds == 3 for c in cells)
    assert best.mean_aoi == min(c.mean_aoi for c in cells)


def test_split_sweep_bounds_recorded():
    g = ref_graph()
    cells, _ = ac.split_sweep(g, REF_ALPHAS, 9, horizon=600, warmup=60, seeds=[0])
    model = ac.make_model(REF_ALPHAS, max_m=9)
    for cell in cells:
        alloc = ac.water_fill(model, cell.n_s)
        expect = ac.lower_bound(model, alloc, ac.bfs_distances(g)).network_bound
        assert cell.bound == expect
        assert cell.mean_aoi > cell.bound  # scarce conveyors always pay transport


def test_phase_comparison_shape_and_bound_row():
    rows = ac.phase_comparison(
        ref_graph(), REF_ALPHAS, 7, (3, 14),
        horizon=800, warmup=80, seeds=[0, 1], random_draws=2, phase_seed=5,
    )
    strategies = [r.strategy for r in rows]
    assert strategies == [
        "uniform", "clustered", "random0", "random1",
        "uniform", "clustered", "random0", "random1",
        "bound",
    ]
    assert rows[-1].n_c is None
    assert rows[-1].std_aoi == 0.0
    model = ac.make_model(REF_ALPHAS, max_m=8)
    alloc = ac.water_fill(model, 7)
    assert rows[-1].mean_aoi == ac.lower_bound(
        model, alloc, ac.bfs_distances(ref_graph())
    ).network_bound
    # at full staffing every strategy degenerates to the same offset set
    full = [r for r in rows if r.n_c == 14]
    assert len({(r.mean_aoi, r.std_aoi) for r in full}) == 1


def test_pickup_wait_matches_exact_residual_computation():
    # single conveyor: the wait from a completion at residue r to the next
    # baseward departure is deterministic, so the simulated mean must sit
    # near the per-residue average weighted by the generation process
    walk = ref_walk()
    phases = ac.uniform_phases(14, 7)
    model = ref_model()
    alloc = ac.SensingAllocation((1,) * 7)
    waits = [
        ac.pickup_wait_mean(walk, phases, model, alloc, horizon=60_000, seed=s)
        for s in range(5)
    ]
    mean = sum(waits) / len(waits)
    # discrete waits 0..h-1 per gap average to sum(h^2)/(2L) - 1/2 = 0.5
    expect = float(ac.residual_life_mean(phases)) - 0.5
    assert abs(mean - expect) < 0.02


def test_residual_life_mean_is_exact_fraction():
    assert ac.residual_life_mean(ac.uniform_phases(14, 7)) == Fraction(1, 1)
    val = ac.residual_life_mean(ac.clustered_phases(3, 14))
    assert isinstance(val, Fraction)
    assert val == Fraction(1 + 1 + 144, 28)
