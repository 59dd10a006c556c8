#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Sürekli özyinelemenin kuadratürle çözümü (durumdan bağımsız çekirdekli
modeller için). Kuantize çözücünün kabul testlerinde referans değer üretir.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
import pandas as pd
from scipy import optimize

from . import config
from .exceptions import UnsupportedModelError
from .models.base import PdmpModel
from .simulation import cumulative_hazard_batch
from .utils import log, vlog


@dataclass
class OracleResult:
    """v_0..v_N ağ değerleri, c_k = Qv_{k+1} sabitleri ve V_0."""
    V0: float
    mesh: np.ndarray
    values: List[np.ndarray]
    continuation: List[float]

    def mesh_frame(self) -> pd.DataFrame:
        """Uzun biçimli "k,x,v_k(x)" tablosu."""
        frames = [pd.DataFrame({"k": np.full(len(self.mesh), k), "x": self.mesh, "v_k(x)": v},
                               columns=config.ORACLE_MESH_COLUMNS)
                  for k, v in enumerate(self.values)]
        return pd.concat(frames, ignore_index=True)


def _stop_or_wait(model: PdmpModel, x: float, t, c: float):
    # c(1 − e^{−Λ}) + g(φ(x,t)) e^{−Λ}
    survival = np.exp(-cumulative_hazard_batch(model, x, t))
    return c * (1.0 - survival) + np.asarray(model.reward(model.flow(x, t)), dtype=np.float64) * survival


def _best_value(model: PdmpModel, x: float, c: float, t_points: int) -> float:
    """max_{t∈[0,t*(x)]} J(x,t) ∨ c: yoğun t ağı + altın oran iyileştirmesi."""
    tstar = float(model.exit_time(x))
    if tstar <= 0:
        return max(float(model.reward(x)), c)
    t = np.linspace(0.0, tstar, t_points)
    values = _stop_or_wait(model, x, t, c)
    i = int(np.argmax(values))
    best = float(values[i])
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t_points - 1)]
    res = optimize.minimize_scalar(lambda s: -float(_stop_or_wait(model, x, s, c)),
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": config.GOLDEN_TOL})
    return max(best, -float(res.fun), c)


def continuous_oracle(model: PdmpModel, x0: float, N: int,
                      t_search_points: int = config.ORACLE_TIME_MESH,
                      quad_tol: float = config.QUAD_TOL,
                      state_points: int = config.ORACLE_STATE_MESH) -> OracleResult:
    """
    v_N = g, v_k = L(v_{k+1}, g) özyinelemesini Ē üzerindeki yoğun ağda çöz.

    Args:
        model: Durumdan bağımsız çekirdekli model
        x0: Başlangıç durumu
        N: Ufuk (0 olabilir)
        t_search_points: Zaman ağı nokta sayısı
        quad_tol: Qv kuadratür toleransı
        state_points: Durum ağı nokta sayısı

    Returns:
        OracleResult: V_0 ve ağ değerleri
    """
    if not model.kernel_state_independent:
        raise UnsupportedModelError(f"{model.tag}: sürekli kestirim durumdan bağımsız çekirdek gerektirir")
    model.check_state(x0)
    mesh = np.linspace(model.state_low, model.state_high, state_points)
    values: List[np.ndarray] = [np.asarray(model.reward(mesh), dtype=np.float64)]
    constants: List[float] = []
    V0 = float(model.reward(x0))
    log(f"🔭 Sürekli kestirim: N={N}, {state_points} durum noktası")
    for k in range(N - 1, -1, -1):
        v_next = values[0]
        c = float(model.kernel_expectation(lambda y: np.interp(y, mesh, v_next), tol=quad_tol))
        v_k = np.array([_best_value(model, float(x), c, t_search_points) for x in mesh])
        values.insert(0, v_k)
        constants.insert(0, c)
        if k == 0:
            V0 = _best_value(model, float(x0), c, t_search_points)
        vlog(f"   k={k}: Qv_{k + 1} = {c:.6f}")
    log(f"🔭 V_0 = {V0:.6f}")
    return OracleResult(V0, mesh, values, constants)
