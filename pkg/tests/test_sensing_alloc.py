"""Sensing model tables and the water-filling allocator against its oracle."""

import numpy as np
import pytest

import agecourier as ac
from agecourier.sensing_alloc import (
    ConvexityViolation,
    InstanceTooLarge,
    InsufficientBudget,
    MaxMExceeded,
    NonPositiveAlpha,
    OutOfRange,
)

from _support import REF_ALPHAS, REF_WATERFILL_10, ref_model


def test_parametric_tables():
    model = ac.make_model((4.0,), max_m=5)
    assert model.mu_table[0] == (4.0, 2.0, 4.0 / 3.0, 1.0, 1.0)
    assert model.q_table[0] == (0.25, 0.5, 0.75, 1.0, 1.0)
    assert ac.mu(model, 0, 1) == 4.0
    assert ac.success_probability(model, 0, 4) == 1.0
    assert model.node_count == 1


def test_mu_times_q_is_one_before_the_clamp():
    model = ref_model(max_m=3)
    for i in range(model.node_count):
        for m in range(1, 4):
            if ac.success_probability(model, i, m) < 1.0:
                assert ac.mu(model, i, m) * ac.success_probability(model, i, m) == pytest.approx(1.0)
            else:
                assert ac.mu(model, i, m) == 1.0


def test_make_model_rejects_bad_inputs():
    with pytest.raises(NonPositiveAlpha):
        ac.make_model((4.0, 0.0), max_m=2)
    with pytest.raises(NonPositiveAlpha):
        ac.make_model((-1.0,), max_m=2)
    with pytest.raises(OutOfRange):
        ac.make_model((4.0,), max_m=0)


def test_model_from_mu_table_roundtrip_and_validation():
    model = ac.model_from_mu_table(((6.0, 3.0, 2.0), (2.0, 1.0, 1.0)))
    assert model.max_m == 3
    assert model.alphas == (6.0, 2.0)
    assert model.q_table[0] == (1.0 / 6.0, 1.0 / 3.0, 0.5)
    with pytest.raises(OutOfRange):
        ac.model_from_mu_table(())
    with pytest.raises(OutOfRange):
        ac.model_from_mu_table(((2.0, 1.0), (2.0,)))
    with pytest.raises(NonPositiveAlpha):
        ac.model_from_mu_table(((2.0, 0.0),))
    # mean sensing time must never rise with more robots
    with pytest.raises(ConvexityViolation):
        ac.model_from_mu_table(((2.0, 3.0),))
    # and each extra robot must help no more than the one before it
    with pytest.raises(ConvexityViolation) as exc:
        ac.model_from_mu_table(((5.0, 4.0, 1.0),))
    assert exc.value.node == 0 and exc.value.m == 2


def test_parametric_family_never_violates_convexity():
    rng = np.random.default_rng(23)
    for _ in range(200):
        k = int(rng.integers(1, 6))
        alphas = rng.uniform(0.2, 12.0, size=k)
        ac.make_model(tuple(alphas), max_m=int(rng.integers(1, 9)))


def test_index_guards():
    model = ref_model(max_m=3)
    with pytest.raises(OutOfRange):
        ac.mu(model, 7, 1)
    with pytest.raises(OutOfRange):
        ac.mu(model, -1, 1)
    with pytest.raises(OutOfRange):
        ac.mu(model, 0, 0)
    with pytest.raises(OutOfRange):
        ac.mu(model, 0, 4)
    with pytest.raises(OutOfRange):
        ac.marginal_benefit(model, 0, 3)  # needs room for an m+1-th robot
    with pytest.raises(OutOfRange):
        ac.allocation_objective(model, ac.SensingAllocation(m=(1, 1)))


def test_marginal_benefit_matches_table():
    model = ref_model(max_m=3)
    for i in range(7):
        for m in (1, 2):
            assert ac.marginal_benefit(model, i, m) == ac.mu(model, i, m) - ac.mu(model, i, m + 1)


def test_allocation_requires_one_robot_everywhere():
    with pytest.raises(ValueError):
        ac.SensingAllocation(m=(1, 0, 1))
    assert ac.SensingAllocation(m=(2, 1)).total == 3


def test_reference_waterfill():
    model = ref_model(max_m=3)
    alloc = ac.water_fill(model, 10)
    assert alloc.m == REF_WATERFILL_10
    assert ac.allocation_objective(model, alloc) == sum(
        max(a / m, 1.0) for a, m in zip(REF_ALPHAS, REF_WATERFILL_10)
    )
    brute = ac.brute_force_alloc(model, 10)
    assert ac.allocation_objective(model, brute) == ac.allocation_objective(model, alloc)


def test_waterfill_floor_is_one_each():
    model = ref_model(max_m=3)
    assert ac.water_fill(model, 7).m == (1,) * 7


def test_greedy_tiebreak_lowest_index():
    model = ac.make_model((4.0, 4.0), max_m=3)
    assert ac.water_fill(model, 3).m == (2, 1)


def test_budget_and_capacity_errors():
    model = ref_model(max_m=3)
    with pytest.raises(InsufficientBudget):
        ac.water_fill(model, 6)
    with pytest.raises(InsufficientBudget):
        ac.brute_force_alloc(model, 6)
    with pytest.raises(InsufficientBudget):
        ac.uniform_alloc(model, 6)
    capped = ac.make_model(REF_ALPHAS, max_m=1)
    with pytest.raises(MaxMExceeded):
        ac.water_fill(capped, 8)
    with pytest.raises(MaxMExceeded):
        ac.brute_force_alloc(capped, 8)
    with pytest.raises(MaxMExceeded):
        ac.uniform_alloc(capped, 14)
    with pytest.raises(InstanceTooLarge):
        ac.brute_force_alloc(ac.make_model((2.0, 2.0, 2.0, 2.0), max_m=500), 500)


def test_uniform_alloc_spreads_leftovers_low():
    model = ref_model(max_m=3)
    assert ac.uniform_alloc(model, 10).m == (2, 2, 2, 1, 1, 1, 1)
    assert ac.uniform_alloc(model, 14).m == (2,) * 7
    assert ac.uniform_alloc(model, 7).m == (1,) * 7


def test_greedy_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(41)
    for _ in range(60):
        k = int(rng.integers(1, 5))
        alphas = tuple(float(a) for a in rng.uniform(1.0, 10.0, size=k))
        n_s = int(rng.integers(k, k + 7))
        model = ac.make_model(alphas, max_m=n_s)
        greedy = ac.water_fill(model, n_s)
        brute = ac.brute_force_alloc(model, n_s)
        assert greedy.total == brute.total == n_s
        assert abs(
            ac.allocation_objective(model, greedy) - ac.allocation_objective(model, brute)
        ) <= 1e-9
