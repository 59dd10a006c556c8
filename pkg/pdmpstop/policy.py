#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Hesaplanabilir ε-optimal durdurma kuralı: s*_n, r_{n,β}, τ_N.

Aşama n kararı p_n izdüşümünü ve aşama n+1 operatörlerinin
karşılaştırmasını (ValueTable aşama n kaydı) kullanır.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from . import config
from .exceptions import AbsentRowError, ConfigError, DomainError
from .models.base import ModelConstants, PdmpModel
from .quantizer import ErrorTable, QuantizationGridSet, project_batch
from .simulation import ChainBatch, Trajectory, simulate_chain, simulate_chains, sup_reward_batch
from .solver import ValueTable, min_deltas
from .streams import RngStream, block_streams
from .utils import log, ordered_mean, parallel_map

REASONS = ("threshold-before-jump", "exhausted-horizon")


@dataclass
class StoppingPolicy:
    """Aşama başına (0..N−1) z-sınıfı devam bayrakları, s* düğümleri ve β."""
    N: int
    beta: float
    gridset: QuantizationGridSet
    continuation: List[np.ndarray]
    s_star: List[np.ndarray]
    reachable: List[np.ndarray]
    min_delta: float
    feasible: bool

    def describe(self) -> Dict[str, Any]:
        return {"N": self.N, "beta": self.beta, "min_delta": self.min_delta,
                "feasible": self.feasible}


@dataclass
class StoppingOutcome:
    """Tek bir yol için τ, durma aşaması, sebep ve g(X(τ))."""
    tau: float
    stage: int
    reason: str
    reward: float
    state: float


@dataclass
class BetaChoice:
    """choose_beta sonucu: skaler β, aşama başına β_n ve uygunluk."""
    beta: float
    feasible: bool
    per_stage: np.ndarray
    a: float
    min_delta: float

    @property
    def beta_over_a(self) -> float:
        return self.beta / self.a


def build_policy(values: ValueTable, gridset: QuantizationGridSet, beta: float) -> StoppingPolicy:
    """
    Değer tablosundan durdurma kuralını kur.

    Args:
        values: backward_solve çıktısı
        gridset: Aynı ızgaralar
        beta: Zaman ofseti β ≥ 0

    Returns:
        StoppingPolicy: β < min Δ ise feasible=True
    """
    if not beta >= 0:
        raise DomainError(f"β ≥ 0 olmalı: {beta}")
    N = values.N
    continuation, s_star, reachable = [], [], []
    for n in range(N):
        st = values.stages[n]
        continuation.append(st.continuation.copy())
        s_star.append(st.s_star.copy())
        reachable.append(st.reachable.copy())
    md = float(np.min(min_deltas(values))) if N > 0 else math.inf
    feasible = beta < md
    if not feasible:
        log(f"⚠️ β={beta:.4g} ≥ min Δ={md:.4g}: kural teorem koşulunu sağlamıyor")
    return StoppingPolicy(N, float(beta), gridset, continuation, s_star, reachable, md,
                          feasible)


def r_threshold_batch(model: PdmpModel, policy: StoppingPolicy, n: int, z, s) -> np.ndarray:
    """
    r_threshold'ın vektörel hali.

    Raises:
        AbsentRowError: Bir nokta ziyaret edilmemiş bir z-sınıfına izdüşerse
    """
    if not 0 <= n < policy.N:
        raise DomainError(f"aşama 0..{policy.N - 1} aralığında olmalı: {n}")
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    grid = policy.gridset.grids[n]
    idx = project_batch(grid, np.column_stack([z, s]), policy.gridset.p,
                        policy.gridset.component_weights)
    cls = grid.z_classes[idx]
    absent = ~policy.reachable[n][cls]
    if np.any(absent):
        first = int(np.flatnonzero(absent)[0])
        raise AbsentRowError(f"aşama {n}: (z={z[first]:.6g}, s={s[first]:.6g}) "
                             f"ziyaret edilmemiş z-sınıfı {int(cls[first])} üzerine izdüştü")
    tstar = np.asarray(model.exit_time(z), dtype=np.float64)
    s_star = policy.s_star[n][cls]
    # τ ≥ T_n
    stop_branch = np.where(s_star < tstar, s_star, np.maximum(tstar - policy.beta, 0.0))
    return np.where(policy.continuation[n][cls], tstar, stop_branch)


def r_threshold(model: PdmpModel, policy: StoppingPolicy, n: int, z: float, s: float) -> float:
    """
    Aşama n'de (Z_n, S_n) için durma eşiği.

    Devam bayrağı varsa t*(z); yoksa s* < t*(z) ise s*, değilse max(t*(z) − β, 0).
    """
    return float(r_threshold_batch(model, policy, n, z, s)[0])


def apply_rule_batch(model: PdmpModel, policy: StoppingPolicy, batch: ChainBatch) -> Dict[str, np.ndarray]:
    """
    Verilen yollara kuralı uygula.

    Aşama n'de r = r_threshold(n, Z_n, S_n); S_{n+1} > r ise τ = T_n + r ve
    durum φ(Z_n, r). Aksi halde bir sonraki aşamaya geçilir; N'de τ = T_N.

    Returns:
        Dict: "tau", "stage", "reason" (REASONS indeksi), "state", "reward"
    """
    if batch.N != policy.N:
        raise ConfigError(f"yol ufku {batch.N} ≠ kural ufku {policy.N}")
    n_traj = len(batch)
    T = batch.T
    tau = T[:, -1].copy()
    stage = np.full(n_traj, policy.N, dtype=np.int64)
    reason = np.ones(n_traj, dtype=np.int64)
    state = batch.Z[:, -1].copy()
    active = np.ones(n_traj, dtype=bool)
    for n in range(policy.N):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        r = r_threshold_batch(model, policy, n, batch.Z[idx, n], batch.S[idx, n])
        stop = batch.S[idx, n + 1] > r
        sel = idx[stop]
        tau[sel] = T[sel, n] + r[stop]
        stage[sel] = n
        reason[sel] = 0
        state[sel] = model.flow(batch.Z[sel, n], r[stop])
        active[sel] = False
    reward = np.asarray(model.reward(state), dtype=np.float64)
    return {"tau": tau, "stage": stage, "reason": reason, "state": state, "reward": reward}


def apply_rule(model: PdmpModel, policy: StoppingPolicy, traj: Trajectory) -> StoppingOutcome:
    """Tek bir yola kuralı uygula."""
    batch = ChainBatch(traj.Z[None, :], traj.S[None, :], traj.forced[None, :])
    out = apply_rule_batch(model, policy, batch)
    return StoppingOutcome(float(out["tau"][0]), int(out["stage"][0]), REASONS[int(out["reason"][0])],
                           float(out["reward"][0]), float(out["state"][0]))


def run_rule(model: PdmpModel, policy: StoppingPolicy, x0: float, stream: RngStream) -> StoppingOutcome:
    """Yeni bir yol simüle edip kuralı uygula."""
    return apply_rule(model, policy, simulate_chain(model, x0, policy.N, stream))


def run_rule_batch(model: PdmpModel, policy: StoppingPolicy, x0: float, n: int,
                   stream: RngStream) -> Dict[str, np.ndarray]:
    """n yol simüle edip kuralı uygula; n=1 için run_rule(stream) ile aynıdır."""
    return apply_rule_batch(model, policy, simulate_chains(model, x0, policy.N, n, stream))


# ================== MONTE CARLO ==================

@dataclass
class RuleEvaluation:
    """V̄_0 ve E[sup g] tahminleri, ampirik B1."""
    n_mc: int
    V_bar_0: float
    stderr: float
    E_sup: float
    E_sup_stderr: float
    B1: float
    B1_stderr: float
    beta: float
    feasible: bool
    debug: Optional[pd.DataFrame] = field(default=None, repr=False)

    def row(self) -> Dict[str, Any]:
        """Değerlendirme CSV satırı."""
        return {"n_mc": self.n_mc, "V_bar_0": self.V_bar_0, "stderr": self.stderr,
                "E_sup": self.E_sup, "B1": self.B1, "beta": self.beta, "feasible": self.feasible}


def evaluate_rule(model: PdmpModel, policy: StoppingPolicy, x0: float, n_mc: int,
                  stream: RngStream, threads: int = 1, debug: bool = False) -> RuleEvaluation:
    """
    Kuralın ortalama ödülünü ve bağımsız E[sup_{t≤T_N} g(X(t))] tahminini hesapla.

    Args:
        model: PDMP modeli
        policy: Durdurma kuralı
        x0: Başlangıç durumu
        n_mc: Yol sayısı (≥ 1000)
        stream: Kural akışı; sup tahmini aynı tohumla "sup" etiketini kullanır
        threads: İş parçacığı sayısı
        debug: Yol bazlı döküm üret

    Returns:
        RuleEvaluation: V̄_0, stderr, E_sup, B1
    """
    if n_mc < config.MIN_N_MC:
        raise ConfigError(f"n_mc ≥ {config.MIN_N_MC} olmalı: {n_mc}")
    log(f"🎲 Kural değerlendirmesi: {n_mc} yol")
    rule_blocks = list(block_streams(stream.master_seed, stream.purpose_tag, n_mc))
    outcomes = parallel_map(lambda b: run_rule_batch(model, policy, x0, b[1], b[0]), rule_blocks, threads)
    v_bar, v_se, _ = ordered_mean(o["reward"] for o in outcomes)

    sup_blocks = list(block_streams(stream.master_seed, "sup", n_mc))
    sups = parallel_map(lambda b: sup_reward_batch(model, simulate_chains(model, x0, policy.N, b[1], b[0])),
                        sup_blocks, threads)
    e_sup, sup_se, _ = ordered_mean(sups)

    frame = None
    if debug:
        frame = pd.DataFrame({
            "traj_id": np.arange(n_mc),
            "stop_stage": np.concatenate([o["stage"] for o in outcomes]),
            "tau": np.concatenate([o["tau"] for o in outcomes]),
            "reward": np.concatenate([o["reward"] for o in outcomes]),
            "reason": [REASONS[r] for r in np.concatenate([o["reason"] for o in outcomes])],
        }, columns=config.DEBUG_DUMP_COLUMNS)
    result = RuleEvaluation(n_mc, v_bar, v_se, e_sup, sup_se, e_sup - v_bar,
                            math.hypot(v_se, sup_se), policy.beta, policy.feasible, frame)
    log(f"🎲 V̄_0 = {v_bar:.4f} ± {v_se:.4f}, E[sup g] = {e_sup:.4f}, B1 = {result.B1:.4f}")
    return result


def choose_beta(constants: ModelConstants, errors: ErrorTable, a: float, min_delta: float) -> BetaChoice:
    """
    β_n = a (2C_λ)^{−1/2} ([t*]/(1−a)·e_Z(n) + e_S(n+1))^{1/2}, β = max_n β_n.

    Returns:
        BetaChoice: feasible = β/a < min_delta
    """
    if not 0 < a < 1:
        raise ConfigError(f"0 < a < 1 olmalı: {a}")
    e_Z, e_S = errors.e_Z, errors.e_S
    inner = constants.lip_tstar / (1.0 - a) * e_Z[:-1] + e_S[1:]
    per_stage = a * np.sqrt(inner / (2.0 * constants.C_lambda))
    beta = float(np.max(per_stage)) if per_stage.size else 0.0
    return BetaChoice(beta, beta / a < min_delta, per_stage, float(a), float(min_delta))
