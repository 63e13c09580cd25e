import itertools
import math
import time

import numpy as np
import pytest

from services.graph_utils import banded_adjacency
from services.unimodularity import is_totally_unimodular
from src.errors import (
    DimensionMismatch,
    EmptyFeasibleSet,
    InfeasibleBudget,
    NoUndetectableAttack,
    RequiresCommonCosts,
    ValidationError,
)
from src.security_planner import (
    CostModel,
    SecurityMeasure,
    brute_force_plan,
    budget_staircase,
    check_max_resilience,
    efficient_plan,
    enumerate_budget_feasible,
    incidence_matrix,
    indicator_cost,
    is_detectable,
    maxmin_phi,
    pbh_detectable,
    plan_security,
    security_index,
    solve_relaxed_security_lp,
    synthesize_undetectable_attack,
    total_cost,
)
from src.simulation import build_platoon, replay_undetectable_attack
from src.system_model import CommGraph, LtiModel, eigenmode_basis, lift_system, relative_state_measurements
from utils.numerics import is_integral

PLATOON_H = np.array([
    [1, 1, 0, 0, 0],
    [1, 1, 0, 0, 0],
    [0, 1, 1, 0, 0],
    [0, 1, 1, 0, 0],
    [0, 0, 1, 1, 0],
    [0, 0, 1, 1, 0],
    [0, 0, 0, 1, 1],
    [0, 0, 0, 1, 1],
    [0, 0, 0, 0, 1],
    [0, 0, 0, 0, 1],
])

# Egenvärden för slumpinstanserna, skilda och med |λ| ≤ 1
EIGENVALUE_GRID = np.round(np.linspace(-1.0, 1.0, 21), 10)


def platoon_costs(N=5, budget=150.0):
    return CostModel.uniform(N, 1.0, 30.0, budget)


def random_tu_instance(rng, n_max=3, N_max=6):
    """Diagonal A och mätningar av egna eller relativa komponenter, så att H får intervallrader"""
    n = int(rng.integers(1, n_max + 1))
    N = int(rng.integers(2, N_max + 1))
    A = np.diag(rng.choice(EIGENVALUE_GRID, size=n, replace=False))
    own = [set(np.flatnonzero(rng.uniform(size=n) < 0.5)) for _ in range(N)]
    rel = [set()] + [set(np.flatnonzero(rng.uniform(size=n) < 0.5)) for _ in range(1, N)]
    for i in range(N):
        for j in range(n):
            seen = j in own[i] or j in rel[i] or (i + 1 < N and j in rel[i + 1])
            if not seen:
                own[i].add(j)
        if not own[i] and not rel[i]:
            own[i].add(int(rng.integers(n)))

    C = []
    for r in range(N):
        rows = []
        for j in sorted(own[r]):
            row = np.zeros(N * n)
            row[r * n + j] = 1.0
            rows.append(row)
        for j in sorted(rel[r]):
            row = np.zeros(N * n)
            row[r * n + j] = 1.0
            row[(r - 1) * n + j] = -1.0
            rows.append(row)
        C.append(np.vstack(rows))

    graph = CommGraph.from_adjacency(banded_adjacency(N, 1))
    system = lift_system(LtiModel(A=A, B=np.eye(n)), graph, C)
    c_normal = float(rng.integers(1, 3))
    c_secure = c_normal + float(rng.integers(1, 11))
    budget = float(rng.uniform(N * c_normal, N * c_secure + 5.0))
    return system, CostModel.uniform(N, c_normal, c_secure, budget)


def test_total_cost_examples():
    assert total_cost(SecurityMeasure.from_string("NNNNN"), platoon_costs()) == 5.0
    assert total_cost(SecurityMeasure.from_string("SNSNS"), platoon_costs()) == 92.0
    costs = CostModel([1.0, 2.0, 3.0], [5.0, 7.0, 4.0], 100.0)
    b = np.array([1, 0, 0])
    assert total_cost(SecurityMeasure.from_indicator(b), costs) == indicator_cost(b, costs) == 10.0


def test_invalid_costs_are_rejected():
    with pytest.raises(ValidationError):
        CostModel.uniform(3, 2.0, 1.0, 10.0)
    with pytest.raises(ValidationError):
        CostModel.uniform(3, 1.0, 2.0, 0.0)


def test_measure_parsing():
    measure = SecurityMeasure.from_string("snsns")
    assert measure.secure_set == (0, 2, 4)
    assert str(measure) == "SNSNS"
    with pytest.raises(ValidationError):
        SecurityMeasure.from_string("SXN")


def test_platoon_detectability(platoon_system):
    assert is_detectable(platoon_system, [0, 2, 4])
    assert not is_detectable(platoon_system, [])


def test_scalar_full_observation_is_detectable():
    system = lift_system(LtiModel(A=1.0, B=1.0), CommGraph.from_adjacency([[0]]), [[[1.0]]])
    assert is_detectable(system, [0])


def test_platoon_security_index_staircase_for_five(platoon_system):
    assert security_index(platoon_system, SecurityMeasure.from_string("NNNNN")).index == 1
    assert security_index(platoon_system, SecurityMeasure.from_string("NNNNS")).index == 2
    assert math.isinf(security_index(platoon_system, SecurityMeasure.from_string("SNSNS")).index)


def test_index_certificate_points_at_last_vehicle(platoon_system):
    basis = eigenmode_basis(platoon_system.model, 5)
    result = security_index(platoon_system, SecurityMeasure.from_string("NNNNN"), basis)
    assert basis.modes[result.certificate].agent == 4


@pytest.mark.parametrize("N", range(3, 9))
def test_security_index_staircase(N):
    system = build_platoon(N).system
    costs = CostModel.uniform(N, 1.0, 30.0, float(N))
    alternating = SecurityMeasure.from_secure_set(N, range(N - 1, -1, -2))
    assert security_index(system, SecurityMeasure.from_secure_set(N, [])).index == 1
    assert security_index(system, SecurityMeasure.from_secure_set(N, [N - 1])).index == 2
    assert math.isinf(security_index(system, alternating).index)

    one_secure = costs.with_budget(N + 29.0)
    for planner in (brute_force_plan, efficient_plan):
        plan = planner(system, one_secure)
        assert plan.index == 2
        assert plan.measure.secure_set == (N - 1,)

    enough = costs.with_budget(N + 29.0 * math.ceil(N / 2))
    for planner in (brute_force_plan, efficient_plan):
        assert math.isinf(planner(system, enough).index)


def test_platoon_incidence_matrix(platoon_system):
    H = incidence_matrix(platoon_system).H
    np.testing.assert_array_equal(H, PLATOON_H)
    assert is_totally_unimodular(H)


def test_full_and_own_observation_patterns():
    graph = CommGraph.from_adjacency([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    model = LtiModel(A=np.diag([0.5, 1.2]), B=np.eye(2))
    full = lift_system(model, graph, [np.eye(6)] * 3)
    assert np.all(incidence_matrix(full).H == 1)
    own = lift_system(model, graph, [np.kron(np.eye(3)[[i]], np.eye(2)) for i in range(3)])
    np.testing.assert_array_equal(incidence_matrix(own).H, np.kron(np.eye(3), np.ones((2, 1))))


def test_check_max_resilience():
    assert check_max_resilience(PLATOON_H, [1, 0, 1, 0, 1])
    assert not check_max_resilience(PLATOON_H, np.zeros(5))
    H = np.zeros((4, 3), dtype=int)
    H[:, 1] = 1
    assert check_max_resilience(H, [0, 1, 0])


def test_small_tu_examples():
    assert is_totally_unimodular(np.eye(4, dtype=int))
    assert not is_totally_unimodular(np.array([[1, 1], [1, -1]]))


def test_relaxed_lp_on_identity_pattern():
    b, value = solve_relaxed_security_lp(np.eye(4, dtype=int), CostModel.uniform(4, 1.0, 3.0, 100.0))
    np.testing.assert_array_equal(b, np.ones(4))
    assert value == 12.0


def test_relaxed_lp_on_platoon():
    b, value = solve_relaxed_security_lp(PLATOON_H, platoon_costs())
    np.testing.assert_array_equal(b, [1, 0, 1, 0, 1])
    assert value == pytest.approx(92.0)


def test_relaxed_lp_prefers_cheap_covering_agent():
    H = np.array([[1, 1, 0], [0, 1, 1], [1, 1, 1]])
    costs = CostModel([1.0, 1.0, 1.0], [10.0, 3.0, 10.0], 100.0)
    b, value = solve_relaxed_security_lp(H, costs)
    np.testing.assert_array_equal(b, [0, 1, 0])
    assert value == pytest.approx(5.0)


def test_enumeration_counts():
    assert len(list(enumerate_budget_feasible(CostModel.uniform(3, 1.0, 2.0, 5.0)))) == 7
    assert len(list(enumerate_budget_feasible(CostModel.uniform(5, 1.0, 30.0, 150.0)))) == 32
    assert list(enumerate_budget_feasible(CostModel.uniform(5, 1.0, 30.0, 4.0))) == []


def test_enumeration_order_is_by_size_then_lex():
    order = [tuple(b) for b in enumerate_budget_feasible(CostModel.uniform(3, 1.0, 2.0, 5.0))]
    assert order == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1)]


def test_enumeration_requires_common_costs():
    with pytest.raises(RequiresCommonCosts):
        list(enumerate_budget_feasible(CostModel([1.0, 1.0], [2.0, 3.0], 10.0)))


def test_maxmin_phi_examples():
    b, alpha = maxmin_phi(PLATOON_H, [np.zeros(5, dtype=int)])
    assert alpha == PLATOON_H.sum(axis=1).min() == 1
    with pytest.raises(EmptyFeasibleSet):
        maxmin_phi(PLATOON_H, [])


def test_maxmin_phi_matches_exhaustive_search(rng):
    for _ in range(20):
        H = (rng.uniform(size=(6, 4)) < 0.5).astype(int)
        H[H.sum(axis=1) == 0, 0] = 1
        indicators = [np.array(b) for b in itertools.product((0, 1), repeat=4) if sum(b) <= 2]
        _, alpha = maxmin_phi(H, indicators)
        best = -1.0
        for b in indicators:
            hidden = H @ b == 0
            value = math.inf if not hidden.any() else float((H @ (1 - b))[hidden].min())
            best = max(best, value)
        assert alpha == best


def all_indicators(N):
    return [np.array(b) for b in itertools.product((0, 1), repeat=N)]


def test_max_resilience_matches_detectability_on_random_instances(rng):
    for _ in range(100):
        system, _ = random_tu_instance(rng)
        basis = eigenmode_basis(system.model, system.N)
        H = incidence_matrix(system, basis)
        for b in all_indicators(system.N):
            secure = np.flatnonzero(b).tolist()
            assert check_max_resilience(H, b) == is_detectable(system, secure, basis)


def test_security_index_grows_with_secure_set(rng):
    for _ in range(50):
        system, _ = random_tu_instance(rng)
        basis = eigenmode_basis(system.model, system.N)
        for b in all_indicators(system.N):
            before = security_index(system, SecurityMeasure.from_indicator(b), basis).index
            for j in np.flatnonzero(b == 0):
                larger = b.copy()
                larger[j] = 1
                after = security_index(system, SecurityMeasure.from_indicator(larger), basis).index
                assert after >= before
                if math.isinf(before):
                    assert math.isinf(after)


def test_maxmin_phi_matches_security_index(rng):
    for _ in range(50):
        system, _ = random_tu_instance(rng)
        basis = eigenmode_basis(system.model, system.N)
        H = incidence_matrix(system, basis)
        indicators = [b for b in all_indicators(system.N) if b.sum() <= system.N // 2]
        b_star, alpha = maxmin_phi(H, indicators)
        indices = [security_index(system, SecurityMeasure.from_indicator(b), basis).index for b in indicators]
        assert alpha == max(indices)
        assert security_index(system, SecurityMeasure.from_indicator(b_star), basis).index == alpha


def test_measure_must_match_system_size(platoon_system):
    with pytest.raises(DimensionMismatch):
        security_index(platoon_system, SecurityMeasure.from_string("SNSN"))
    with pytest.raises(DimensionMismatch):
        security_index(platoon_system, SecurityMeasure.from_string("SNSNSN"))
    with pytest.raises(DimensionMismatch):
        synthesize_undetectable_attack(platoon_system, SecurityMeasure.from_string("NNNN"), 10)
    with pytest.raises(DimensionMismatch):
        is_detectable(platoon_system, [0, 5])


def test_platoon_plan_both_planners(platoon_system):
    for planner in (brute_force_plan, efficient_plan):
        start = time.perf_counter()
        plan = planner(platoon_system, platoon_costs())
        assert time.perf_counter() - start < 1.0
        assert plan.measure.as_list() == ["S", "N", "S", "N", "S"]
        assert math.isinf(plan.index)
        assert plan.cost == 92.0
    assert plan_security(platoon_system, platoon_costs()).to_dict()["index"] == "inf"


def test_platoon_one_secure_budget(platoon_system):
    for planner in (brute_force_plan, efficient_plan):
        plan = planner(platoon_system, platoon_costs(budget=34.0))
        assert plan.index == 2
        assert str(plan.measure) == "NNNNS"


def test_platoon_step_two_with_small_budget(platoon_system):
    brute = brute_force_plan(platoon_system, platoon_costs(budget=25.0))
    efficient = efficient_plan(platoon_system, platoon_costs(budget=25.0))
    assert efficient.index == brute.index == 1
    assert efficient.cost == brute.cost == 5.0


def test_budget_below_base_cost_is_infeasible(platoon_system):
    with pytest.raises(InfeasibleBudget):
        brute_force_plan(platoon_system, platoon_costs(budget=4.0))
    with pytest.raises(InfeasibleBudget):
        efficient_plan(platoon_system, platoon_costs(budget=4.0))


def test_budget_staircase_table(platoon_system):
    table = budget_staircase(platoon_system, platoon_costs(), [5.0, 34.0, 150.0])
    assert list(table.columns) == ["budget", "phi", "index", "cost"]
    assert table["index"].tolist()[:2] == [1, 2]
    assert math.isinf(table["index"].iloc[2])


def test_planners_agree_on_random_tu_instances(rng):
    start = time.perf_counter()
    for _ in range(200):
        system, costs = random_tu_instance(rng)
        basis = eigenmode_basis(system.model, system.N)
        H = incidence_matrix(system, basis).H
        assert is_totally_unimodular(H)
        brute = brute_force_plan(system, costs, basis)
        efficient = efficient_plan(system, costs, basis)
        assert efficient.index == brute.index
        assert efficient.cost == pytest.approx(brute.cost)
    assert time.perf_counter() - start < 60.0


def test_lp_vertices_are_integral_under_tu(rng):
    for _ in range(200):
        system, costs = random_tu_instance(rng)
        H = incidence_matrix(system).H
        b, _ = solve_relaxed_security_lp(H, costs, tie_break=False)
        assert is_integral(b, 1e-6)


def test_synthesized_attacks_are_undetectable(rng):
    found = 0
    while found < 50:
        system, _ = random_tu_instance(rng)
        secure = [i for i in range(system.N) if rng.uniform() < 0.4]
        if is_detectable(system, secure):
            continue
        measure = SecurityMeasure.from_secure_set(system.N, secure)
        witness = synthesize_undetectable_attack(system, measure, 100)
        Y1, Y2 = replay_undetectable_attack(system, witness)
        assert np.max(np.abs(Y1 - Y2)) <= 1e-9
        for i in secure:
            assert not np.any(witness.attacks[:, system.row_slices[i]])
        found += 1


def test_two_vehicle_witness_attacks_only_second_vehicle():
    system = build_platoon(2).system
    measure = SecurityMeasure.from_string("NN")
    witness = synthesize_undetectable_attack(system, measure, 100, x1_0=[0.0, 0.0, 1.0, 0.0])
    assert not np.any(witness.attacks[:, system.row_slices[0]])
    assert np.any(witness.attacks[:, system.row_slices[1]])
    Y1, Y2 = replay_undetectable_attack(system, witness)
    assert np.max(np.abs(Y1 - Y2)) <= 1e-9


def test_scalar_witness():
    system = lift_system(LtiModel(A=1.0, B=1.0), CommGraph.from_adjacency([[0]]), [[[1.0]]])
    witness = synthesize_undetectable_attack(system, SecurityMeasure.from_string("N"), 10, x1_0=[1.0])
    np.testing.assert_array_equal(witness.attacks, -np.ones((10, 1)))


def test_detectable_measure_has_no_attack(platoon_system):
    with pytest.raises(NoUndetectableAttack):
        synthesize_undetectable_attack(platoon_system, SecurityMeasure.from_string("SNSNS"), 10)


def test_witness_rejects_state_outside_kernel(platoon_system):
    with pytest.raises(ValidationError):
        synthesize_undetectable_attack(
            platoon_system, SecurityMeasure.from_string("SNNNN"), 10, x1_0=np.ones(10)
        )


def test_pbh_agrees_on_platoon_subsets(platoon_system):
    basis = eigenmode_basis(platoon_system.model, 5, "eigen")
    for size in range(6):
        for secure in itertools.combinations(range(5), size):
            assert is_detectable(platoon_system, secure, basis) == pbh_detectable(platoon_system, secure)


def test_relative_sensing_hides_common_mode_from_pbh(path3):
    C = relative_state_measurements(path3, 1)
    system = lift_system(LtiModel(A=1.0, B=1.0), path3, C)
    assert is_detectable(system, range(3))
    assert not pbh_detectable(system, range(3))
