#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Durdurma kuralı testleri: eşik, τ özellikleri, Monte Carlo değerlendirmesi ve β seçimi.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from pdmpstop import config
from pdmpstop.exceptions import AbsentRowError, ConfigError, DomainError
from pdmpstop.policy import (REASONS, apply_rule_batch, build_policy, choose_beta, evaluate_rule,
                             r_threshold, run_rule, run_rule_batch)
from pdmpstop.quantizer import ErrorTable
from pdmpstop.simulation import ChainBatch, simulate_chains
from pdmpstop.solver import backward_solve, min_deltas
from pdmpstop.streams import RngStream


@pytest.fixture(scope="module")
def policy(small_values, small_grids):
    return build_policy(small_values, small_grids, 0.0)


def test_negative_beta_rejected(small_values, small_grids):
    with pytest.raises(DomainError):
        build_policy(small_values, small_grids, -0.1)


def test_feasibility_flag(small_values, small_grids):
    md = float(np.min(min_deltas(small_values)))
    assert build_policy(small_values, small_grids, md / 2).feasible
    assert not build_policy(small_values, small_grids, md).feasible


def test_threshold_never_exceeds_exit_time(example_model, policy):
    rng = np.random.default_rng(3)
    for n in range(policy.N):
        for _ in range(50):
            z = float(rng.random() * 0.5)
            s = float(rng.random())
            r = r_threshold(example_model, policy, n, z, s)
            assert 0.0 <= r <= float(example_model.exit_time(z)) + 1e-12
    with pytest.raises(DomainError):
        r_threshold(example_model, policy, policy.N, 0.1, 0.1)


def test_threshold_rejects_unvisited_class(example_model, policy):
    grid = policy.gridset.grids[1]
    z, s = grid.codebook[0]
    cls = int(grid.z_classes[0])
    reachable = [r.copy() for r in policy.reachable]
    reachable[1][cls] = False
    tampered = replace(policy, reachable=reachable)
    with pytest.raises(AbsentRowError):
        r_threshold(example_model, tampered, 1, z, s)
    # diğer sınıflar etkilenmez
    others = np.flatnonzero(grid.z_classes != cls)
    if others.size:
        zo, so = grid.codebook[others[0]]
        assert r_threshold(example_model, tampered, 1, zo, so) >= 0.0


def test_threshold_offset_clamped_at_zero(example_model, policy):
    # s* ≥ t*(z) ve β > t*(z): eşik T_n anına kırpılır
    eager = replace(policy, beta=2.0,
                    continuation=[np.zeros_like(c) for c in policy.continuation],
                    s_star=[np.full_like(s, 5.0) for s in policy.s_star])
    for n in range(eager.N):
        assert r_threshold(example_model, eager, n, 0.3, 0.2) == 0.0
    batch = simulate_chains(example_model, 0.0, eager.N, 200, RngStream(9, "rule"))
    out = apply_rule_batch(example_model, eager, batch)
    assert np.all(out["tau"] == 0.0)
    assert np.all(out["stage"] == 0)
    assert np.all(out["reward"] == 0.0)


def test_stopping_time_properties(example_model, policy):
    batch = simulate_chains(example_model, 0.0, policy.N, 3000, RngStream(8, "rule"))
    out = apply_rule_batch(example_model, policy, batch)
    T = batch.T
    assert np.all(out["tau"] <= T[:, -1] + 1e-12)
    assert np.all((out["stage"] >= 0) & (out["stage"] <= policy.N))
    stopped = out["reason"] == REASONS.index("threshold-before-jump")
    rows = np.flatnonzero(stopped)
    stage = out["stage"][rows]
    assert np.all(out["tau"][rows] >= T[rows, stage] - 1e-12)
    assert np.all(out["tau"][rows] < T[rows, stage + 1])
    assert np.all(out["stage"][~stopped] == policy.N)
    np.testing.assert_allclose(out["reward"], out["state"])


def test_decision_ignores_future_jumps(example_model, policy):
    batch = simulate_chains(example_model, 0.0, policy.N, 3000, RngStream(8, "rule"))
    other = simulate_chains(example_model, 0.0, policy.N, 3000, RngStream(88, "rule"))
    out = apply_rule_batch(example_model, policy, batch)
    cols = np.arange(policy.N + 1)[None, :]
    stage = out["stage"][:, None]
    # aşama n'de duran yolda Z_{n+1}.. ve S_{n+2}.. başka bir yoldan alınır
    swap_z = cols > stage
    swap_s = cols > stage + 1
    replayed = ChainBatch(np.where(swap_z, other.Z, batch.Z), np.where(swap_s, other.S, batch.S),
                          np.where(swap_s, other.forced, batch.forced))
    again = apply_rule_batch(example_model, policy, replayed)
    stopped = out["reason"] == REASONS.index("threshold-before-jump")
    assert stopped.any()
    for key in ("tau", "stage", "reason", "state"):
        np.testing.assert_array_equal(again[key][stopped], out[key][stopped])


def test_run_rule_matches_batch_row(example_model, policy):
    stream = RngStream(21, "rule")
    single = run_rule(example_model, policy, 0.0, stream)
    batch = run_rule_batch(example_model, policy, 0.0, 1, stream)
    assert single.tau == batch["tau"][0]
    assert single.reward == batch["reward"][0]
    assert single.reason in REASONS


def test_horizon_mismatch_rejected(example_model, policy):
    batch = simulate_chains(example_model, 0.0, policy.N + 1, 3, RngStream(1, "x"))
    with pytest.raises(ConfigError):
        apply_rule_batch(example_model, policy, batch)


def test_reset_model_stops_at_best_node(reset_model, reset_grids):
    values = backward_solve(reset_model, reset_grids, 0.1)
    policy = build_policy(values, reset_grids, 0.0)
    result = evaluate_rule(reset_model, policy, 0.0, config.MIN_N_MC, RngStream(4, "rule"))
    assert result.V_bar_0 == pytest.approx(0.9)
    assert result.stderr == pytest.approx(0.0, abs=1e-12)
    assert result.E_sup == pytest.approx(1.0)
    assert result.B1 == pytest.approx(0.1)


def test_evaluation_is_reproducible_and_thread_independent(example_model, policy):
    a = evaluate_rule(example_model, policy, 0.0, 12_000, RngStream(6, "rule"), threads=1, debug=True)
    b = evaluate_rule(example_model, policy, 0.0, 12_000, RngStream(6, "rule"), threads=3)
    assert a.V_bar_0 == b.V_bar_0 and a.E_sup == b.E_sup
    assert 0.0 < a.V_bar_0 <= a.E_sup + 4 * a.B1_stderr
    assert list(a.debug.columns) == config.DEBUG_DUMP_COLUMNS
    assert len(a.debug) == 12_000
    assert a.debug["reward"].mean() == pytest.approx(a.V_bar_0)
    assert list(a.row()) == config.EVALUATION_COLUMNS


def test_evaluation_requires_enough_paths(example_model, policy):
    with pytest.raises(ConfigError):
        evaluate_rule(example_model, policy, 0.0, config.MIN_N_MC - 1, RngStream(6, "rule"))


def test_choose_beta_formula(example_model):
    errors = ErrorTable([0.0, 0.02, 0.03], [0.0, 0.01, 0.04], [0.0, 0.03, 0.05])
    choice = choose_beta(example_model.constants, errors, 0.5, 1.0)
    # β_n = a (2C_λ)^{-1/2} ([t*]/(1−a) e_Z(n) + e_S(n+1))^{1/2}, C_λ=3, [t*]=1
    expected = [0.5 * math.sqrt((0.0 + 0.01) / 6.0), 0.5 * math.sqrt((2 * 0.02 + 0.04) / 6.0)]
    np.testing.assert_allclose(choice.per_stage, expected)
    assert choice.beta == pytest.approx(max(expected))
    assert choice.feasible
    assert not choose_beta(example_model.constants, errors, 0.5, 0.01).feasible
    with pytest.raises(ConfigError):
        choose_beta(example_model.constants, errors, 1.0, 1.0)
