#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Geriye doğru çözücü testleri: zaman ızgarası, Ĵ/K̂/L̂ özellikleri ve değer tablosu.
"""

import math

import numpy as np
import pytest
from scipy import integrate, optimize

from pdmpstop.exceptions import AbsentRowError, DomainError
from pdmpstop.oracle import continuous_oracle
from pdmpstop.quantizer import QuantizationGridSet, StageGrid, train_grids
from pdmpstop.solver import (backward_solve, build_time_grid, delta_norms, load_values, min_deltas,
                             op_J_hat, op_K_hat, op_L_hat, save_values)
from pdmpstop.streams import RngStream


def _reachable_z(gridset, k):
    """Aşama k−1'in ulaşılabilir z değerleri."""
    grid = gridset.grids[k - 1]
    return grid.z_values[gridset.reachable(k - 1)]


@pytest.mark.parametrize("tstar,delta", [(1.0, 0.083), (0.6, 0.151), (0.1, 0.083), (0.013, 0.049)])
def test_time_grid_stays_below_exit_time(tstar, delta):
    tg = build_time_grid(0.0, tstar, delta)
    assert tg.nodes[0] == 0.0
    assert tg.nodes[-1] <= tstar - tg.step + 1e-12
    assert tg.step <= delta
    assert tg.clipped == (delta > tstar / 2)


def test_time_grid_rejects_bad_inputs():
    with pytest.raises(DomainError):
        build_time_grid(0.0, 0.0, 0.1)
    with pytest.raises(DomainError):
        build_time_grid(0.0, 1.0, 0.0)


def test_k_hat_preserves_constants(small_grids):
    for k in range(1, small_grids.N + 1):
        n_classes = small_grids.grids[k].n_classes
        for z in _reachable_z(small_grids, k):
            assert op_K_hat(small_grids, k, np.full(n_classes, 0.37), z) == pytest.approx(0.37, abs=1e-12)


def test_operators_are_monotone_in_w(example_model, small_grids):
    rng = np.random.default_rng(0)
    for k in range(1, small_grids.N + 1):
        n_classes = small_grids.grids[k].n_classes
        for _ in range(20):
            w = rng.random(n_classes)
            w2 = w + rng.random(n_classes) * 0.1
            for z in _reachable_z(small_grids, k):
                assert op_K_hat(small_grids, k, w2, z) >= op_K_hat(small_grids, k, w, z) - 1e-12
                s = float(rng.random() * example_model.exit_time(z))
                assert op_J_hat(example_model, small_grids, k, w2, z, s) >= \
                    op_J_hat(example_model, small_grids, k, w, z, s) - 1e-12
                tg = build_time_grid(z, float(example_model.exit_time(z)), 0.083)
                assert op_L_hat(example_model, small_grids, k, w2, z, tg)[0] >= \
                    op_L_hat(example_model, small_grids, k, w, z, tg)[0] - 1e-12


def test_j_hat_at_zero_is_reward(example_model, small_grids):
    k = 1
    w = np.zeros(small_grids.grids[k].n_classes)
    for z in _reachable_z(small_grids, k):
        assert op_J_hat(example_model, small_grids, k, w, z, 0.0) == pytest.approx(float(z))
    with pytest.raises(DomainError):
        op_J_hat(example_model, small_grids, k, w, 0.0, -0.1)


def test_l_hat_returns_smallest_argmax_on_grid(example_model, small_grids):
    k = small_grids.N
    z = float(_reachable_z(small_grids, k)[0])
    tg = build_time_grid(z, float(example_model.exit_time(z)), 0.083)
    w = np.asarray(example_model.reward(small_grids.grids[k].z_values))
    value, s_star, cont = op_L_hat(example_model, small_grids, k, w, z, tg)
    assert s_star in tg.nodes
    assert value == pytest.approx(max(op_J_hat(example_model, small_grids, k, w, z, s_star),
                                      op_K_hat(small_grids, k, w, z)))
    assert cont == (op_K_hat(small_grids, k, w, z) > op_J_hat(example_model, small_grids, k, w, z, s_star))


def test_value_table_bounds(example_model, small_grids, small_values):
    C_g = example_model.constants.C_g
    for k in range(small_values.N):
        st = small_values.stage(k)
        r = st.reachable
        assert np.all(st.v_hat[r] >= np.asarray(example_model.reward(st.z[r])) - 1e-12)
        assert np.all(np.abs(st.v_hat[r]) <= C_g + 1e-12)
        assert np.all(np.isnan(st.v_hat[~r]))
    last = small_values.stage(small_values.N)
    np.testing.assert_array_equal(last.v_hat, last.z)
    assert 0.0 < small_values.V0_hat <= 1.0


def test_deltas_and_norms(small_grids, small_values):
    norms = delta_norms(small_values, small_grids, 2.0)
    mins = min_deltas(small_values)
    assert norms.shape == mins.shape == (small_grids.N,)
    assert np.all(mins > 0) and np.all(mins <= 0.083)
    assert np.all(norms <= 0.083 + 1e-12)


def test_reset_model_values(reset_model, reset_grids):
    values = backward_solve(reset_model, reset_grids, 0.1)
    # Ĵ(s) = g(φ(0,s)) = s; en büyük düğüm 0.9
    assert values.V0_hat == pytest.approx(0.9)
    assert not values.stage(0).continuation[0]
    assert values.stage(0).s_star[0] == pytest.approx(0.9)


def test_constant_reward_value_is_constant():
    from pdmpstop.models import DeterministicResetModel
    from pdmpstop.quantizer import estimate_transition_weights

    model = DeterministicResetModel(reward_value=0.5)
    grids = train_grids(model, 0.0, 2, 1, 100, 2.0, RngStream(1, "train"))
    grids = estimate_transition_weights(model, grids, 100, RngStream(1, "weights"))
    assert backward_solve(model, grids, 0.2).V0_hat == pytest.approx(0.5)


def test_solve_requires_weights_and_matching_deltas(example_model, small_grids):
    bare = train_grids(example_model, 0.0, 2, 4, 400, 2.0, RngStream(2, "train"))
    with pytest.raises(AbsentRowError):
        backward_solve(example_model, bare, 0.1)
    with pytest.raises(DomainError):
        backward_solve(example_model, small_grids, [0.1, 0.1])


def test_per_stage_deltas(example_model, small_grids, small_values):
    same = backward_solve(example_model, small_grids, [0.083] * small_grids.N)
    assert same.V0_hat == small_values.V0_hat


def test_solve_is_thread_independent(example_model, small_grids, small_values):
    threaded = backward_solve(example_model, small_grids, 0.083, threads=4)
    assert threaded.V0_hat == small_values.V0_hat
    for a, b in zip(threaded.stages, small_values.stages):
        np.testing.assert_array_equal(a.v_hat, b.v_hat)


def test_save_and_load_values(tmp_path, small_values):
    loaded = load_values(save_values(small_values, tmp_path / "values.json"))
    assert loaded.V0_hat == small_values.V0_hat
    assert loaded.N == small_values.N
    for a, b in zip(loaded.stages, small_values.stages):
        np.testing.assert_array_equal(a.v_hat, b.v_hat)
        np.testing.assert_array_equal(a.continuation, b.continuation)


def test_oracle_on_reset_model(reset_model):
    # λ ≡ 0: bekleme değeri sup_t g = 1'e yaklaşır, N=0 ise g(x0)
    result = continuous_oracle(reset_model, 0.0, 2, state_points=65)
    assert result.V0 == pytest.approx(1.0, abs=1e-6)
    assert continuous_oracle(reset_model, 0.3, 0, state_points=9).V0 == pytest.approx(0.3)
    frame = result.mesh_frame()
    assert list(frame.columns) == ["k", "x", "v_k(x)"]
    assert len(frame) == 3 * 65


# ================== ELLE KURULAN SATIRLAR ==================

def _hand_gridset(row, codebook=((0.1, 0.2), (0.3, 0.8))):
    """x0=0 tek noktalı aşama 0 ve verilen satırla tek aşamalı ızgara kümesi."""
    grids = [StageGrid.from_codebook(0, [[0.0, 0.0]]), StageGrid.from_codebook(1, codebook)]
    return QuantizationGridSet("example", 1, 0.0, 2.0, (1.0, 1.0), grids,
                               transitions=[None, np.array([row], dtype=np.float64)],
                               visits=[None, np.array([100])])


def test_j_hat_two_point_row(example_model):
    gs = _hand_gridset([0.5, 0.5])
    w = np.array([1.0, 0.0])
    # 0.5·w(0.1) + 0.5·g(φ(0, 0.5))
    assert op_J_hat(example_model, gs, 1, w, 0.0, 0.5) == pytest.approx(0.75, abs=1e-15)
    assert op_J_hat(example_model, gs, 1, w, 0.0, 0.0) == 0.0
    assert op_J_hat(example_model, gs, 1, w, 0.0, 0.9) == pytest.approx(op_K_hat(gs, 1, w, 0.0))


def test_k_hat_dot_product():
    gs = _hand_gridset([0.25, 0.75])
    assert op_K_hat(gs, 1, np.array([0.0, 1.0]), 0.0) == pytest.approx(0.75, abs=1e-15)
    unit = _hand_gridset([0.0, 1.0])
    assert op_K_hat(unit, 1, np.array([0.4, 0.6]), 0.0) == pytest.approx(0.6, abs=1e-15)


def test_l_hat_three_nodes(example_model):
    gs = _hand_gridset([0.5, 0.5])
    w = np.array([1.0, 0.0])
    tg = build_time_grid(0.0, 1.0, 0.3)
    np.testing.assert_allclose(tg.nodes, [0.0, 0.3, 0.6])
    # Ĵ(0)=0, Ĵ(0.3)=0.5+0.5·0.3, Ĵ(0.6)=0.5+0.5·0.6; K̂=0.5
    value, s_star, cont = op_L_hat(example_model, gs, 1, w, 0.0, tg)
    assert value == pytest.approx(0.8, abs=1e-15)
    assert s_star == pytest.approx(0.6)
    assert not cont
    # K̂ baskın: w ≡ 1
    value, s_star, cont = op_L_hat(example_model, gs, 1, np.ones(2), 0.0, tg)
    assert value == pytest.approx(1.0) and cont and s_star == pytest.approx(0.6)


def test_l_hat_constant_tie_is_not_continuation():
    from pdmpstop.models import DeterministicResetModel

    model = DeterministicResetModel(reward_value=0.4)
    gs = _hand_gridset([0.5, 0.5])
    tg = build_time_grid(0.0, float(model.exit_time(0.0)), 0.25)
    value, s_star, cont = op_L_hat(model, gs, 1, np.full(2, 0.4), 0.0, tg)
    assert value == pytest.approx(0.4)
    assert s_star == 0.0
    assert not cont


# ================== ORACLE ==================

def test_oracle_single_stage_matches_quadrature(example_model):
    # v_0(0) = max_t [c(1 − e^{−Λ(0,t)}) + t e^{−Λ(0,t)}] ∨ c, c = Qg
    c, _ = integrate.quad(lambda y: 2.0 * y, 0.0, 0.5, epsabs=1e-12)

    def wait_value(t):
        hazard, _ = integrate.quad(lambda u: 3.0 * u, 0.0, t, epsabs=1e-12)
        return c * (1.0 - math.exp(-hazard)) + t * math.exp(-hazard)

    res = optimize.minimize_scalar(lambda t: -wait_value(t), bounds=(0.0, 1.0), method="bounded",
                                   options={"xatol": 1e-10})
    expected = max(-res.fun, c)
    result = continuous_oracle(example_model, 0.0, 1, state_points=33)
    assert result.continuation[0] == pytest.approx(c, abs=1e-8)
    assert result.V0 == pytest.approx(expected, abs=1e-6)
