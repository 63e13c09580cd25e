import numpy as np
import pandas as pd
import pytest
from pandas.testing import assert_frame_equal

from src.errors import DimensionMismatch, EmptyTrace, PlanInfeasible, ValidationError
from src.security_planner import SecurityMeasure
from src.simulation import (
    AttackKind,
    AttackSpec,
    build_platoon,
    compute_metrics,
    gen_noise,
    inject_attack,
    measure_outputs,
    planner_timing,
    run_scenario,
    run_seed_sweep,
    tail_length,
)


def test_noise_is_bounded_and_reproducible():
    for k in range(200):
        w = gen_noise(7, 0.1, 4, k, agent=k % 5)
        assert np.linalg.norm(w) <= 0.1
    np.testing.assert_array_equal(gen_noise(7, 0.1, 4, 3, 2, 1), gen_noise(7, 0.1, 4, 3, 2, 1))
    assert not np.array_equal(gen_noise(7, 0.1, 4, 3, 2, 0), gen_noise(7, 0.1, 4, 3, 2, 1))
    np.testing.assert_array_equal(gen_noise(7, 0.0, 4, 3), np.zeros(4))
    with pytest.raises(ValidationError):
        gen_noise(7, -1.0, 4, 3)


def test_zeroing_attack_leaves_only_noise(platoon_system, rng):
    x = rng.standard_normal(10) * 50.0
    spec = AttackSpec(target=1, kind=AttackKind.ZEROING)
    outcome = inject_attack(spec, x, platoon_system, 5, 100)
    assert outcome.active and not outcome.blocked
    v = [rng.uniform(-0.05, 0.05, size=p) for p in platoon_system.p_sizes]
    attacks = [np.zeros(p) for p in platoon_system.p_sizes]
    attacks[1] = outcome.applied
    y = measure_outputs(platoon_system, x, v, attacks)
    np.testing.assert_array_equal(y[1], v[1])


def test_bias_attack_window(platoon_system):
    spec = AttackSpec(target=1, kind=AttackKind.BIAS, start=10, end=20, bias=3.0)
    x = np.zeros(10)
    assert not inject_attack(spec, x, platoon_system, 9, 100).active
    assert inject_attack(spec, x, platoon_system, 10, 100).active
    assert inject_attack(spec, x, platoon_system, 20, 100).active
    assert not inject_attack(spec, x, platoon_system, 21, 100).active
    np.testing.assert_array_equal(inject_attack(spec, x, platoon_system, 15, 100).applied, np.full(4, 3.0))


def test_secure_agent_blocks_attack(platoon_system):
    spec = AttackSpec(target=0, kind=AttackKind.BIAS, bias=1.0)
    outcome = inject_attack(spec, np.zeros(10), platoon_system, 1, 10, SecurityMeasure.from_string("SNSNS"))
    assert outcome.blocked and not outcome.active
    np.testing.assert_array_equal(outcome.applied, np.zeros(2))
    np.testing.assert_array_equal(outcome.raw, np.ones(2))


def test_custom_attack_sequence_runs_out(platoon_system):
    spec = AttackSpec(target=2, kind=AttackKind.CUSTOM, sequence=np.ones((3, 4)))
    assert np.all(inject_attack(spec, np.zeros(10), platoon_system, 2, 10).applied == 1.0)
    assert np.all(inject_attack(spec, np.zeros(10), platoon_system, 5, 10).applied == 0.0)


def test_invalid_attack_specs():
    with pytest.raises(ValidationError):
        AttackSpec(target=0, start=5, end=2)
    with pytest.raises(ValidationError):
        AttackSpec(target=0, kind=AttackKind.BIAS)
    with pytest.raises(ValidationError):
        build_platoon(5, horizon=10).replace(attacks=(AttackSpec(target=7),))
    with pytest.raises(DimensionMismatch):
        build_platoon(5, horizon=10).replace(attacks=(AttackSpec(target=1, kind=AttackKind.BIAS, bias=[1.0, 2.0, 3.0]),))


def test_horizon_must_be_positive(platoon_config):
    with pytest.raises(ValidationError):
        platoon_config.replace(horizon=0)


def test_runs_are_deterministic(platoon_config):
    first = run_scenario(platoon_config)
    second = run_scenario(platoon_config)
    assert_frame_equal(first.trace, second.trace)
    assert first.summary["eq7_tail"] == second.summary["eq7_tail"]


def test_platoon_run_summary(platoon_config):
    result = run_scenario(platoon_config)
    assert str(result.plan.measure) == "SNSNS"
    assert len(result.trace) == (platoon_config.horizon + 1) * 5
    assert result.summary["blocked_attacks"] == {}
    assert result.summary["violations"]["estimation"] is None
    active = result.trace[result.trace["k"] >= 1].groupby("agent")["attack_active"].min()
    assert active.to_dict() == {1: 0, 2: 1, 3: 0, 4: 1, 5: 0}


def test_attacks_on_secure_agents_change_nothing(platoon_config):
    baseline = run_scenario(platoon_config)
    extra = platoon_config.attacks + (
        AttackSpec(target=0, kind=AttackKind.ZEROING),
        AttackSpec(target=2, kind=AttackKind.BIAS, bias=25.0),
    )
    attacked = run_scenario(platoon_config.replace(attacks=extra))
    assert_frame_equal(baseline.trace, attacked.trace)
    assert attacked.blocked_attacks == {1: platoon_config.horizon, 3: platoon_config.horizon}


def test_noiseless_platoon_converges():
    config = build_platoon(5, delta_w=0.0, delta_v=0.0, horizon=5000, attacked=())
    result = run_scenario(config)
    assert result.summary["tail_steps"] == 1001
    assert result.summary["eq7_tail"] < 1e-6


def test_budget_below_base_cost_fails_the_run(platoon_config):
    config = platoon_config.replace(costs=platoon_config.costs.with_budget(4.0))
    with pytest.raises(PlanInfeasible):
        run_scenario(config)


def test_supplied_measure_skips_planner(platoon_config):
    config = platoon_config.replace(horizon=20, measure=SecurityMeasure.from_string("SSSSS"))
    result = run_scenario(config)
    assert result.plan.algorithm == "supplied"
    assert result.summary["plan"]["cost"] == 150.0


def test_tail_length():
    assert tail_length(1000) == 200
    assert tail_length(5001) == 1001
    assert tail_length(50) == 50


def test_metrics_examples():
    zeros = pd.DataFrame({"k": np.repeat(np.arange(10), 2), "agent": np.tile([1, 2], 10),
                          "err_est": 0.0, "err_ctrl": 0.0})
    assert compute_metrics(zeros)["eq7_tail"] == 0.0
    single = pd.DataFrame({"k": [0], "agent": [1], "err_est": [1.0], "err_ctrl": [2.0]})
    summary = compute_metrics(single)
    assert summary["eq7_tail"] == 3.0
    assert summary["violations"] == {"estimation": None, "control": None}
    with pytest.raises(EmptyTrace):
        compute_metrics(pd.DataFrame(columns=["k", "agent", "err_est", "err_ctrl"]))


def test_seed_sweep_keeps_order(platoon_config):
    config = platoon_config.replace(horizon=30)
    summaries = run_seed_sweep(config, [3, 1, 2], workers=2)
    assert [s["seed"] for s in summaries] == [3, 1, 2]
    assert summaries[1]["eq7_tail"] == run_scenario(config.replace(seed=1)).summary["eq7_tail"]


def test_efficient_planner_is_faster_on_twelve_vehicles():
    table = planner_timing([12])
    row = table.iloc[0]
    assert bool(row["same_plan"])
    assert row["speedup"] >= 10.0
