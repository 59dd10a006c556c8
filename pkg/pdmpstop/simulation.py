#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
PDMP simülasyonu: kümülatif hazard, sıçramalar arası süre çekilişi,
gömülü zincir (Z_n, S_n) ve akış boyunca ödül supremumu.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import pandas as pd
from scipy import integrate, optimize

from . import config
from .exceptions import ConfigError, DomainError
from .models.base import PdmpModel
from .streams import RngStream, block_streams
from .utils import parallel_map, vlog

# t = t*(x) kontrolünde kayan nokta payı
_TSTAR_SLACK = 1e-12


@dataclass
class Trajectory:
    """
    Tek bir gömülü zincir yolu: Z_0..Z_N, S_0..S_N (S_0=0), zorunlu sıçrama
    bayrakları. T_k = Σ_{i≤k} S_i.
    """
    Z: np.ndarray
    S: np.ndarray
    forced: np.ndarray

    @property
    def T(self) -> np.ndarray:
        return np.cumsum(self.S)

    @property
    def N(self) -> int:
        return len(self.Z) - 1


@dataclass
class ChainBatch:
    """n yolun dizileri; her dizi (n, N+1) biçiminde."""
    Z: np.ndarray
    S: np.ndarray
    forced: np.ndarray

    @property
    def T(self) -> np.ndarray:
        return np.cumsum(self.S, axis=1)

    @property
    def N(self) -> int:
        return self.Z.shape[1] - 1

    def __len__(self) -> int:
        return self.Z.shape[0]

    def row(self, i: int) -> Trajectory:
        """i. yolu Trajectory olarak döndür."""
        return Trajectory(self.Z[i].copy(), self.S[i].copy(), self.forced[i].copy())

    def theta(self, k: int) -> np.ndarray:
        """Aşama k için (Z_k, S_k) noktaları, (n, 2)."""
        return np.column_stack([self.Z[:, k], self.S[:, k]])

    @classmethod
    def concat(cls, batches: List["ChainBatch"], N: int) -> "ChainBatch":
        """Blokları sırayla birleştir."""
        if not batches:
            return cls.empty(N)
        return cls(np.concatenate([b.Z for b in batches]),
                   np.concatenate([b.S for b in batches]),
                   np.concatenate([b.forced for b in batches]))

    @classmethod
    def empty(cls, N: int) -> "ChainBatch":
        return cls(np.zeros((0, N + 1)), np.zeros((0, N + 1)), np.zeros((0, N + 1), dtype=bool))


# ================== HAZARD ==================

def cumulative_hazard(model: PdmpModel, x: float, t: float) -> float:
    """
    Λ(x,t) = ∫₀ᵗ λ(φ(x,s)) ds.

    Args:
        model: PDMP modeli
        x: Başlangıç durumu
        t: Süre, 0 ≤ t ≤ t*(x)

    Returns:
        float: Kümülatif hazard
    """
    tstar = float(model.exit_time(x))
    if not (0.0 <= t <= tstar * (1.0 + _TSTAR_SLACK) + _TSTAR_SLACK):
        raise DomainError(f"t={t} [0, t*(x)={tstar}] dışında")
    if t == 0.0:
        return 0.0
    exact = model.cumulative_hazard_exact(x, t)
    if exact is not None:
        return float(exact)
    return hazard_by_quadrature(model, x, t)


def hazard_by_quadrature(model: PdmpModel, x: float, t: float) -> float:
    """Λ(x,t) kuadratürle (analitik form kullanılmadan)."""
    value, _ = integrate.quad(lambda s: float(model.jump_rate(model.flow(x, s))), 0.0, float(t),
                              epsabs=config.QUAD_TOL, limit=config.QUAD_LIMIT)
    return max(value, 0.0)


def cumulative_hazard_batch(model: PdmpModel, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """cumulative_hazard'ın vektörel hali (t ∈ [0, t*(x)] varsayılır)."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    exact = model.cumulative_hazard_exact(x, t)
    if exact is not None:
        return np.asarray(exact, dtype=np.float64)
    xb, tb = np.broadcast_arrays(x, t)
    out = np.empty(xb.shape)
    for idx in np.ndindex(xb.shape):
        out[idx] = hazard_by_quadrature(model, float(xb[idx]), float(tb[idx])) if tb[idx] > 0 else 0.0
    return out


# ================== SIÇRAMA ZAMANI ==================

def _invert_hazard(model: PdmpModel, x: float, e: float, tstar: float) -> float:
    """Λ(x,t) = e denklemini [0, t*] aralığında çöz."""
    exact = model.hazard_inverse_exact(x, e)
    if exact is not None:
        return float(np.clip(exact, 0.0, tstar))
    return optimize.brentq(lambda t: cumulative_hazard(model, x, t) - e, 0.0, tstar,
                           xtol=config.ROOT_XTOL)


def sample_interjump(model: PdmpModel, x: float, exp_draw: float) -> Tuple[float, bool]:
    """
    Birim üstel çekilişten sıçramalar arası süreyi ters dönüşümle üret.

    Args:
        model: PDMP modeli
        x: Sıçrama sonrası durum
        exp_draw: Birim üstel değişken (> 0)

    Returns:
        Tuple: (S, sınırda zorunlu mu)
    """
    if not (exp_draw > 0 and np.isfinite(exp_draw)):
        raise DomainError(f"exp_draw pozitif ve sonlu olmalı: {exp_draw}")
    tstar = float(model.exit_time(x))
    if exp_draw >= cumulative_hazard(model, x, tstar):
        return tstar, True
    return _invert_hazard(model, x, exp_draw, tstar), False


def sample_interjump_batch(model: PdmpModel, x: np.ndarray, exp_draw: np.ndarray):
    """
    sample_interjump'ın vektörel hali.

    Returns:
        Tuple: (S dizisi, zorunlu bayrak dizisi)
    """
    x = np.asarray(x, dtype=np.float64)
    e = np.asarray(exp_draw, dtype=np.float64)
    if np.any(~(e > 0)) or np.any(~np.isfinite(e)):
        raise DomainError("exp_draw pozitif ve sonlu olmalı")
    tstar = np.asarray(model.exit_time(x), dtype=np.float64)
    forced = e >= cumulative_hazard_batch(model, x, tstar)
    S = tstar.copy()
    free = ~forced
    if np.any(free):
        inv = model.hazard_inverse_exact(x[free], e[free])
        if inv is not None:
            S[free] = np.clip(inv, 0.0, tstar[free])
        else:
            for i in np.flatnonzero(free):
                S[i] = _invert_hazard(model, float(x[i]), float(e[i]), float(tstar[i]))
    return S, forced


# ================== ZİNCİR ==================

def simulate_chains(model: PdmpModel, x0: float, N: int, n: int, stream: RngStream) -> ChainBatch:
    """
    n adet gömülü zinciri tek akıştan simüle et.

    Her aşamada önce n üstel, sonra n düzgün çekiliş yapılır; bu yüzden
    simulate_chain(stream) bu fonksiyonun n=1 halinin ilk satırıdır.

    Args:
        model: PDMP modeli
        x0: Başlangıç durumu (E içinde)
        N: Sıçrama sayısı (≥ 1)
        n: Yol sayısı
        stream: Rastgele akış

    Returns:
        ChainBatch: (n, N+1) diziler
    """
    if N < 1:
        raise ConfigError(f"N ≥ 1 olmalı: {N}")
    model.check_state(x0)
    rng = stream.generator()
    Z = np.empty((n, N + 1))
    S = np.zeros((n, N + 1))
    forced = np.zeros((n, N + 1), dtype=bool)
    Z[:, 0] = x0
    tiny = np.finfo(np.float64).tiny
    for k in range(1, N + 1):
        e = np.maximum(rng.standard_exponential(n), tiny)
        u = rng.random(n)
        S[:, k], forced[:, k] = sample_interjump_batch(model, Z[:, k - 1], e)
        Z[:, k] = model.kernel_sample(model.flow(Z[:, k - 1], S[:, k]), u)
    return ChainBatch(Z, S, forced)


def simulate_chain(model: PdmpModel, x0: float, N: int, stream: RngStream) -> Trajectory:
    """Tek bir yol simüle et."""
    return simulate_chains(model, x0, N, 1, stream).row(0)


def simulate_blocks(model: PdmpModel, x0: float, N: int, n: int, stream: RngStream,
                    threads: int = 1) -> ChainBatch:
    """
    n yolu sabit boyutlu bloklarda simüle et; blok b, (seed, etiket, b) akışını kullanır.

    Sonuç iş parçacığı sayısından bağımsızdır.
    """
    blocks = list(block_streams(stream.master_seed, stream.purpose_tag, n))
    vlog(f"🎲 {stream.purpose_tag}: {n} yol, {len(blocks)} blok")
    parts = parallel_map(lambda b: simulate_chains(model, x0, N, b[1], b[0]), blocks, threads)
    return ChainBatch.concat(parts, N)


# ================== ÖDÜL SUPREMUMU ==================

def _segment_sup(model: PdmpModel, z: float, s: float) -> float:
    """sup_{0≤u≤s} g(φ(z,u)): yoğun ızgara + altın oran iyileştirmesi."""
    if s <= 0:
        return float(model.reward(z))
    grid = np.linspace(0.0, s, config.SUP_GRID_POINTS)
    values = np.asarray(model.reward(model.flow(z, grid)), dtype=np.float64)
    i = int(np.argmax(values))
    best = float(values[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda u: -float(model.reward(model.flow(z, u))),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": config.GOLDEN_TOL})
        best = max(best, -float(res.fun))
    return best


def sup_reward_along_path(model: PdmpModel, traj: Trajectory) -> float:
    """
    sup_{0≤t≤T_N} g(X(t)) değeri.

    Args:
        model: PDMP modeli
        traj: Yol

    Returns:
        float: Yol boyunca ödül supremumu
    """
    best = float(model.reward(traj.Z[-1]))
    for k in range(traj.N):
        if model.reward_monotone_along_flow:
            seg = float(model.reward(model.flow(traj.Z[k], traj.S[k + 1])))
        else:
            seg = _segment_sup(model, float(traj.Z[k]), float(traj.S[k + 1]))
        best = max(best, seg)
    return best


def sup_reward_batch(model: PdmpModel, batch: ChainBatch) -> np.ndarray:
    """Her yol için sup_reward_along_path."""
    if len(batch) == 0:
        return np.zeros(0)
    if model.reward_monotone_along_flow:
        ends = model.reward(model.flow(batch.Z[:, :-1], batch.S[:, 1:]))
        return np.maximum(np.max(ends, axis=1), model.reward(batch.Z[:, -1]))
    return np.array([sup_reward_along_path(model, batch.row(i)) for i in range(len(batch))])


# ================== DIŞA AKTARIM ==================

def trajectories_frame(batch: ChainBatch, start_id: int = 0) -> pd.DataFrame:
    """
    Yolları "traj_id,k,Z,S,T,boundary_forced" sütunlu tabloya çevir.
    k=0 satırı (Z_0, S_0=0) dahildir.
    """
    n, width = batch.Z.shape
    if n == 0:
        return pd.DataFrame({c: pd.Series(dtype=object) for c in config.TRAJECTORY_CSV_COLUMNS})
    return pd.DataFrame({
        "traj_id": np.repeat(np.arange(start_id, start_id + n), width),
        "k": np.tile(np.arange(width), n),
        "Z": batch.Z.ravel(),
        "S": batch.S.ravel(),
        "T": batch.T.ravel(),
        "boundary_forced": batch.forced.ravel(),
    }, columns=config.TRAJECTORY_CSV_COLUMNS)


def flow_path(model: PdmpModel, traj: Trajectory, points_per_segment: int = 32):
    """
    X(t) yolunu çizim için örnekle. Segmentler arasına NaN konur, böylece
    sıçramalar tek çizgide kopukluk olarak görünür.

    Returns:
        Tuple: (zaman dizisi, durum dizisi)
    """
    T = traj.T
    ts, xs = [], []
    for k in range(traj.N):
        u = np.linspace(0.0, traj.S[k + 1], points_per_segment)
        ts.extend([T[k] + u, [np.nan]])
        xs.extend([model.flow(traj.Z[k], u), [np.nan]])
    ts.append([T[-1]])
    xs.append([traj.Z[-1]])
    t = np.concatenate([np.asarray(a, dtype=np.float64) for a in ts])
    x = np.concatenate([np.asarray(a, dtype=np.float64) for a in xs])
    return t, x
