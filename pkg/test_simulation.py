#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Simülasyon testleri: hazard, sıçrama zamanı dağılımı, zincir akışları.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from pdmpstop import config
from pdmpstop.exceptions import ConfigError, DomainError
from pdmpstop.models import ExampleModel, make_example_model
from pdmpstop.simulation import (ChainBatch, cumulative_hazard, flow_path, hazard_by_quadrature,
                                 sample_interjump, simulate_blocks, simulate_chain, simulate_chains,
                                 sup_reward_along_path, sup_reward_batch, trajectories_frame)
from pdmpstop.streams import RngStream, block_streams


class ScanningExampleModel(ExampleModel):
    """Aynı model, ama supremum akış boyunca taranarak hesaplanır."""
    reward_monotone_along_flow = False


def test_example_model_definitions():
    model = make_example_model(1.0, 1.0, 3.0)
    assert float(model.exit_time(0.4)) == pytest.approx(0.6)
    assert float(model.jump_rate(0.5)) == pytest.approx(1.5)
    assert float(make_example_model(2.0, 1.0, 3.0).exit_time(0.0)) == pytest.approx(0.5)
    c = model.constants
    assert (c.C_lambda, c.lip_lambda, c.C_tstar, c.lip_tstar, c.lip_Q) == (3.0, 3.0, 1.0, 1.0, 0.0)
    assert (c.C_g, c.lip_g_1, c.lip_g_2, c.lip_g_star) == (1.0, 1.0, 1.0, 0.0)


@pytest.mark.parametrize("args", [(0.0, 1.0, 3.0), (1.0, 0.5, 3.0), (1.0, 1.0, -1.0)])
def test_example_model_rejects_bad_parameters(args):
    with pytest.raises(DomainError):
        make_example_model(*args)


def test_flow_semigroup_and_exit_time(example_model):
    rng = np.random.default_rng(17)
    x = rng.random(1000)
    tstar = np.asarray(example_model.exit_time(x))
    s = rng.random(1000) * tstar
    t = rng.random(1000) * (tstar - s)
    m = example_model
    np.testing.assert_allclose(m.flow(m.flow(x, s), t), m.flow(x, s + t), atol=1e-10, rtol=0)
    np.testing.assert_allclose(m.exit_time(m.flow(x, s)), tstar - s, atol=1e-10, rtol=0)
    np.testing.assert_allclose(m.flow(x, tstar), m.state_high, atol=1e-10, rtol=0)


def test_exact_hazard_matches_quadrature(example_model):
    for x, t in [(0.0, 0.5), (0.2, 0.3), (0.7, 0.3)]:
        assert cumulative_hazard(example_model, x, t) == pytest.approx(
            hazard_by_quadrature(example_model, x, t), abs=1e-8)


def test_hazard_from_origin(example_model):
    # Λ(0,t) = 1.5 t²
    assert cumulative_hazard(example_model, 0.0, 1.0) == pytest.approx(1.5)
    assert cumulative_hazard(example_model, 0.0, 0.0) == 0.0


def test_hazard_outside_domain_raises(example_model):
    with pytest.raises(DomainError):
        cumulative_hazard(example_model, 0.5, 0.6)
    with pytest.raises(DomainError):
        cumulative_hazard(example_model, 0.5, -0.1)


def test_sample_interjump_inverts_hazard(example_model):
    s, forced = sample_interjump(example_model, 0.2, 0.4)
    assert not forced
    assert cumulative_hazard(example_model, 0.2, s) == pytest.approx(0.4, abs=1e-9)


def test_sample_interjump_forced_at_boundary(example_model):
    s, forced = sample_interjump(example_model, 0.0, 10.0)
    assert forced
    assert s == pytest.approx(1.0)
    with pytest.raises(DomainError):
        sample_interjump(example_model, 0.0, 0.0)


def test_first_interjump_law(example_model):
    """S_1 ~ F(t) = 1 − e^{−1.5t²} on [0,1) with an atom e^{−1.5} at 1."""
    n = 100_000
    batch = simulate_chains(example_model, 0.0, 1, n, RngStream(7, "law"))
    s, forced = batch.S[:, 1], batch.forced[:, 1]
    assert abs(forced.mean() - math.exp(-1.5)) < 0.005
    assert np.all(s[forced] == pytest.approx(1.0))
    mass = 1.0 - math.exp(-1.5)
    ks = stats.kstest(s[~forced], lambda t: (1.0 - np.exp(-1.5 * np.asarray(t) ** 2)) / mass)
    assert ks.statistic < 0.01


def test_post_jump_states_in_kernel_support(example_model):
    batch = simulate_chains(example_model, 0.0, 5, 2000, RngStream(1, "support"))
    assert np.all(batch.Z[:, 1:] >= 0.0) and np.all(batch.Z[:, 1:] <= 0.5)
    assert np.all(batch.S[:, 0] == 0.0)
    assert np.all(batch.S[:, 1:] <= example_model.exit_time(batch.Z[:, :-1]) + 1e-12)


def test_scalar_chain_is_first_batch_row(example_model):
    stream = RngStream(99, "chain")
    traj = simulate_chain(example_model, 0.1, 4, stream)
    batch = simulate_chains(example_model, 0.1, 4, 1, stream)
    np.testing.assert_array_equal(traj.Z, batch.Z[0])
    np.testing.assert_array_equal(traj.S, batch.S[0])
    np.testing.assert_array_equal(traj.T, batch.T[0])


def test_blocks_independent_of_threads(example_model):
    n = 2 * config.MC_BLOCK_SIZE + 17
    a = simulate_blocks(example_model, 0.0, 3, n, RngStream(5, "train"), threads=1)
    b = simulate_blocks(example_model, 0.0, 3, n, RngStream(5, "train"), threads=4)
    assert len(a) == n
    np.testing.assert_array_equal(a.Z, b.Z)
    np.testing.assert_array_equal(a.S, b.S)


def test_streams_differ_by_tag_and_index():
    a = RngStream(1, "train").generator().random(4)
    b = RngStream(1, "eval").generator().random(4)
    c = RngStream(1, "train", 1).generator().random(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    np.testing.assert_array_equal(a, RngStream(1, "train").generator().random(4))
    sizes = [size for _, size in block_streams(1, "x", 25_000, block_size=10_000)]
    assert sizes == [10_000, 10_000, 5_000]


def test_invalid_horizon_and_seed(example_model):
    with pytest.raises(ConfigError):
        simulate_chains(example_model, 0.0, 0, 10, RngStream(1, "x"))
    with pytest.raises(ConfigError):
        RngStream(-1, "x")


def test_reset_model_is_sawtooth(reset_model):
    batch = simulate_chains(reset_model, 0.0, 4, 10, RngStream(3, "saw"))
    assert np.all(batch.forced[:, 1:])
    np.testing.assert_allclose(batch.T[:, -1], 4.0)
    assert np.all(batch.Z == 0.0)


def test_sup_reward_monotone_shortcut_matches_scan():
    fast, scan = ExampleModel(), ScanningExampleModel()
    batch = simulate_chains(fast, 0.0, 4, 50, RngStream(11, "sup"))
    np.testing.assert_allclose(sup_reward_batch(fast, batch), sup_reward_batch(scan, batch), atol=1e-7)
    traj = batch.row(0)
    assert sup_reward_along_path(scan, traj) == pytest.approx(sup_reward_batch(fast, batch)[0], abs=1e-7)


def test_one_stage_sup_matches_quadrature(example_model):
    # sup_{t≤T_1} X(t) = max(S_1, Z_1); sınıra varışta sol limit 1 sayılır
    def tail(u):
        return 1.0 - (1.0 - math.exp(-1.5 * u * u)) * min(2.0 * u, 1.0)

    expected, _ = integrate.quad(tail, 0.0, 1.0, points=[0.5], epsabs=1e-10)
    batch = simulate_chains(example_model, 0.0, 1, 100_000, RngStream(13, "sup"))
    sup = sup_reward_batch(example_model, batch)
    assert np.all(sup[batch.forced[:, 1]] == pytest.approx(1.0))
    assert sup.mean() == pytest.approx(expected, abs=4 * sup.std() / math.sqrt(len(sup)))


def test_trajectories_frame_layout(example_model):
    batch = simulate_chains(example_model, 0.0, 3, 2, RngStream(2, "sim"))
    frame = trajectories_frame(batch)
    assert list(frame.columns) == config.TRAJECTORY_CSV_COLUMNS
    assert len(frame) == 2 * 4
    first = frame.iloc[0]
    assert first["k"] == 0 and first["S"] == 0.0 and first["T"] == 0.0


def test_empty_trajectories_frame_is_header_only():
    csv = trajectories_frame(ChainBatch.empty(3)).to_csv(index=False, lineterminator="\n")
    assert csv == ",".join(config.TRAJECTORY_CSV_COLUMNS) + "\n"


def test_flow_path_breaks_at_jumps(example_model):
    traj = simulate_chain(example_model, 0.0, 5, RngStream(4, "path"))
    t, x = flow_path(example_model, traj)
    assert int(np.sum(np.isnan(x))) == traj.N
    assert np.nanmax(t) == pytest.approx(traj.T[-1])
