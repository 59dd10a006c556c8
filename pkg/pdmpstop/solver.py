#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Kuantize dinamik programlama: yola uyarlı zaman ızgaraları G(z),
Ĵ_k / K̂_k / L̂_k^d operatörleri ve geriye doğru özyineleme.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from . import config
from .exceptions import AbsentRowError, ArtifactIOError, DomainError, SchemaError, SchemaVersionError
from .models.base import PdmpModel
from .quantizer import QuantizationGridSet
from .utils import log, vlog, parallel_map


@dataclass(frozen=True)
class TimeGrid:
    """
    G(z) = {0, Δ, …, n(z)·Δ}; n(z) = int(t*(z)/Δ) − 1.
    """
    anchor: float
    step: float
    size: int
    clipped: bool = False

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.size + 1) * self.step


def build_time_grid(z: float, tstar: float, delta_request: float) -> TimeGrid:
    """
    Δ(z) = min(delta_request, t*(z)/2) ile zaman ızgarası kur.

    Args:
        z: Çapa durumu
        tstar: t*(z) > 0
        delta_request: İstenen adım > 0

    Returns:
        TimeGrid: En büyük düğüm ≤ t*(z) − Δ(z)
    """
    if not tstar > 0 or not delta_request > 0:
        raise DomainError(f"tstar ve delta pozitif olmalı: {tstar}, {delta_request}")
    half = tstar / 2.0
    clipped = delta_request > half
    step = half if clipped else float(delta_request)
    return TimeGrid(float(z), step, int(tstar / step) - 1, clipped)


# ================== OPERATÖRLER ==================

def _row_and_values(gridset: QuantizationGridSet, k: int, w: np.ndarray, z: float):
    """(π satırı, w(z'_j), s'_j) üçlüsü; π=0 olan noktalar dışarıda kalır."""
    pi = gridset.row(k, gridset.class_of(k - 1, z))
    grid = gridset.grids[k]
    used = pi > 0
    wj = np.asarray(w, dtype=np.float64)[grid.z_classes[used]]
    if np.any(np.isnan(wj)):
        raise AbsentRowError(f"aşama {k}: ulaşılan noktada değer tanımsız")
    return pi[used], wj, grid.codebook[used, 1]


def _j_hat_nodes(model: PdmpModel, pi: np.ndarray, wj: np.ndarray, sj: np.ndarray,
                 z: float, nodes: np.ndarray) -> np.ndarray:
    # Ĵ(s) = Σ_{s'_j<s} π_j w_j + g(φ(z,s)) Σ_{s'_j≥s} π_j
    fired = sj[None, :] < nodes[:, None]
    jumped = fired.astype(np.float64) @ (pi * wj)
    stayed = (~fired).astype(np.float64) @ pi
    return jumped + np.asarray(model.reward(model.flow(z, nodes)), dtype=np.float64) * stayed


def op_J_hat(model: PdmpModel, gridset: QuantizationGridSet, k: int, w, z: float, s: float) -> float:
    """
    Ĵ_k(w, g)(z, s).

    Args:
        model: PDMP modeli (g ve φ için)
        gridset: Ağırlıkları tahmin edilmiş ızgaralar
        k: Aşama (1..N)
        w: Aşama k z-sınıfları üzerinde değerler
        z: Aşama k−1 z bileşeni
        s: Zaman ≥ 0

    Returns:
        float: Operatör değeri
    """
    if s < 0:
        raise DomainError(f"s ≥ 0 olmalı: {s}")
    pi, wj, sj = _row_and_values(gridset, k, w, z)
    return float(_j_hat_nodes(model, pi, wj, sj, z, np.array([float(s)]))[0])


def op_K_hat(gridset: QuantizationGridSet, k: int, w, z: float) -> float:
    """K̂_k(w)(z) = Σ_j π_k(z→j) w(z'_j)."""
    pi, wj, _ = _row_and_values(gridset, k, w, z)
    return float(np.dot(pi, wj))


def op_L_hat(model: PdmpModel, gridset: QuantizationGridSet, k: int, w, z: float,
             timegrid: TimeGrid):
    """
    L̂_k^d(w, g)(z) = max_{s∈G(z)} Ĵ_k(w,g)(z,s) ∨ K̂_k(w)(z).

    Returns:
        Tuple: (değer, en küçük argmax düğümü, devam bayrağı K̂ > max Ĵ)
    """
    j_max, s_star, k_value = _l_hat_parts(model, gridset, k, w, z, timegrid)
    return max(j_max, k_value), s_star, k_value > j_max


def _l_hat_parts(model, gridset, k, w, z, timegrid):
    """(max Ĵ, en küçük argmax düğümü, K̂)."""
    pi, wj, sj = _row_and_values(gridset, k, w, z)
    nodes = timegrid.nodes
    j_values = _j_hat_nodes(model, pi, wj, sj, z, nodes)
    i = int(np.argmax(j_values))
    return float(j_values[i]), float(nodes[i]), float(np.dot(pi, wj))


# ================== DEĞER TABLOSU ==================

@dataclass
class StageValues:
    """Bir aşamanın z-sınıfları üzerindeki değerleri (ulaşılamayanlarda NaN)."""
    z: np.ndarray
    v_hat: np.ndarray
    s_star: np.ndarray
    continuation: np.ndarray
    reachable: np.ndarray
    delta: np.ndarray
    k_hat: np.ndarray
    j_max: np.ndarray

    _ARRAYS = ("z", "v_hat", "s_star", "delta", "k_hat", "j_max")

    def to_dict(self) -> Dict[str, Any]:
        out = {name: _nan_to_none(getattr(self, name)) for name in self._ARRAYS}
        out["continuation_flag"] = [bool(f) for f in self.continuation]
        out["reachable"] = [bool(r) for r in self.reachable]
        return out


@dataclass
class ValueTable:
    """
    v̂_0..v̂_N ve argmax kayıtları.

    Aşama k < N kaydı L̂_{k+1}(v̂_{k+1}, g) karşılaştırmasını tutar.
    """
    N: int
    stages: List[StageValues]
    V0_hat: float
    clipping_count: int = 0
    warnings: List[str] = field(default_factory=list)

    def stage(self, k: int) -> StageValues:
        return self.stages[k]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": config.VALUES_SCHEMA_VERSION,
            "N": self.N,
            "V0_hat": self.V0_hat,
            "clipping_count": self.clipping_count,
            "warnings": list(self.warnings),
            "stages": [s.to_dict() for s in self.stages],
        }


def _nan_to_none(values) -> List[Optional[float]]:
    return [None if math.isnan(v) else float(v) for v in np.asarray(values, dtype=np.float64)]


def _solve_stage(model: PdmpModel, gridset: QuantizationGridSet, k: int, w: np.ndarray,
                 delta: float, threads: int):
    """Aşama k−1 z-sınıflarında L̂_k(w, g); (StageValues, kırpma sayısı) döner."""
    grid = gridset.grids[k - 1]
    reachable = gridset.reachable(k - 1)
    c = grid.n_classes
    out = {name: np.full(c, np.nan) for name in ("v_hat", "s_star", "delta", "k_hat", "j_max")}
    continuation = np.zeros(c, dtype=bool)
    clipped = np.zeros(c, dtype=bool)

    def solve_class(i: int):
        z = float(grid.z_values[i])
        tg = build_time_grid(z, float(model.exit_time(z)), delta)
        return (tg,) + _l_hat_parts(model, gridset, k, w, z, tg)

    classes = [int(i) for i in np.flatnonzero(reachable)]
    for i, (tg, j_max, s_star, k_value) in zip(classes, parallel_map(solve_class, classes, threads)):
        out["v_hat"][i] = max(j_max, k_value)
        out["s_star"][i] = s_star
        out["delta"][i] = tg.step
        out["k_hat"][i] = k_value
        out["j_max"][i] = j_max
        continuation[i] = k_value > j_max
        clipped[i] = tg.clipped
    stage = StageValues(grid.z_values.copy(), out["v_hat"], out["s_star"], continuation,
                        reachable.copy(), out["delta"], out["k_hat"], out["j_max"])
    return stage, int(np.sum(clipped))


def backward_solve(model: PdmpModel, gridset: QuantizationGridSet,
                   delta_request: Union[float, Sequence[float]], threads: int = 1) -> ValueTable:
    """
    v̂_N = g; k = N..1 için v̂_{k−1} = L̂_k^d(v̂_k, g).

    Args:
        model: PDMP modeli
        gridset: Ağırlıkları tahmin edilmiş ızgaralar
        delta_request: Sabit Δ ya da aşama başına (0..N−1) Δ listesi
        threads: İş parçacığı sayısı

    Returns:
        ValueTable: Değerler, argmax kayıtları ve V̂_0
    """
    if not gridset.has_weights:
        raise AbsentRowError("geçiş ağırlıkları tahmin edilmeden çözülemez")
    N = gridset.N
    deltas = [float(delta_request)] * N if np.isscalar(delta_request) else [float(d) for d in delta_request]
    if len(deltas) != N:
        raise DomainError(f"aşama başına {N} adet Δ bekleniyordu, {len(deltas)} verildi")
    log(f"📈 Geriye doğru çözüm: N={N}")
    last = gridset.grids[N]
    g_last = np.asarray(model.reward(last.z_values), dtype=np.float64)
    c = last.n_classes
    stages: List[Optional[StageValues]] = [None] * (N + 1)
    stages[N] = StageValues(last.z_values.copy(), g_last, np.full(c, np.nan), np.zeros(c, dtype=bool),
                            np.ones(c, dtype=bool), np.full(c, np.nan), np.full(c, np.nan),
                            np.full(c, np.nan))
    clipping = 0
    for k in range(N, 0, -1):
        stages[k - 1], n_clipped = _solve_stage(model, gridset, k, stages[k].v_hat, deltas[k - 1], threads)
        clipping += n_clipped
        vlog(f"   aşama {k - 1}: {int(np.sum(stages[k - 1].reachable))} z-sınıfı, "
             f"{n_clipped} kırpma")
    V0 = float(stages[0].v_hat[gridset.class_of(0, gridset.x0)])
    warnings = []
    if clipping:
        warnings.append(f"Δ(z) {clipping} noktada t*(z)/2 değerine kırpıldı")
        log(f"⚠️ {warnings[-1]}")
    log(f"📈 V̂_0 = {V0:.4f}")
    return ValueTable(N, stages, V0, clipping, warnings)


def delta_norms(values: ValueTable, gridset: QuantizationGridSet, p: float) -> np.ndarray:
    """
    Aşama n = 0..N−1 için ‖Δ(Ẑ_n)‖_p, aşama n marjinal ağırlıkları altında.
    """
    out = np.zeros(values.N)
    for n in range(values.N):
        weights = gridset.grids[n].class_weights()
        d = np.nan_to_num(values.stages[n].delta, nan=0.0)
        out[n] = float(np.sum(weights * d ** p)) ** (1.0 / p)
    return out


def min_deltas(values: ValueTable) -> np.ndarray:
    """Aşama n = 0..N−1 için ulaşılabilir noktalar üzerinde min Δ(ẑ)."""
    out = np.full(values.N, np.inf)
    for n in range(values.N):
        st = values.stages[n]
        if np.any(st.reachable):
            out[n] = float(np.min(st.delta[st.reachable]))
    return out


# ================== KALICILIK ==================

def _from_optional(values) -> np.ndarray:
    return np.array([np.nan if v is None else float(v) for v in values], dtype=np.float64)


def values_from_dict(data: Dict[str, Any]) -> ValueTable:
    """Sözlükten değer tablosu kur."""
    if not isinstance(data, dict) or "schema_version" not in data:
        raise SchemaError("değer dosyası bozuk: schema_version yok")
    if data["schema_version"] != config.VALUES_SCHEMA_VERSION:
        raise SchemaVersionError(f"desteklenmeyen schema_version: {data['schema_version']}")
    try:
        stages = [StageValues(
            z=_from_optional(s["z"]), v_hat=_from_optional(s["v_hat"]),
            s_star=_from_optional(s["s_star"]),
            continuation=np.array(s["continuation_flag"], dtype=bool),
            reachable=np.array(s["reachable"], dtype=bool),
            delta=_from_optional(s["delta"]), k_hat=_from_optional(s["k_hat"]),
            j_max=_from_optional(s["j_max"]),
        ) for s in data["stages"]]
        table = ValueTable(int(data["N"]), stages, float(data["V0_hat"]),
                           int(data.get("clipping_count", 0)), list(data.get("warnings", [])))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"değer dosyası bozuk: {e}")
    if len(table.stages) != table.N + 1:
        raise SchemaError(f"{table.N + 1} aşama bekleniyordu, {len(table.stages)} bulundu")
    return table


def save_values(values: ValueTable, path) -> Path:
    """Değer tablosunu JSON olarak yaz (NaN → null)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(values.to_dict()), encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"değer tablosu yazılamadı: {path} ({e})")
    log(f"💾 Değer tablosu kaydedildi: {path}")
    return path


def load_values(path) -> ValueTable:
    """JSON değer tablosunu oku."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ArtifactIOError(f"değer dosyası bulunamadı: {path}")
    except json.JSONDecodeError as e:
        raise SchemaError(f"değer dosyası bozuk: {e}")
    except OSError as e:
        raise ArtifactIOError(f"değer dosyası okunamadı: {path} ({e})")
    return values_from_dict(data)
