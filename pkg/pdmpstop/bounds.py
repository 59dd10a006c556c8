#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Teorik hata sınırları: türetilmiş sabitler E1..E6, Lipschitz defteri,
değer hatası sınırı B2 ve durdurma kuralı sınırı B3.

Eşitsizliklerin sağ tarafları çalışma sabiti olarak atanır.
"""

import math
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import config
from .exceptions import ConfigError, DomainError
from .models.base import ModelConstants
from .quantizer import ErrorTable
from .utils import log

D_CASES = ("interior", "boundary", "mixed")


@dataclass(frozen=True)
class DerivedConstants:
    """E1..E6."""
    E1: float
    E2: float
    E3: float
    E4: float
    E5: float
    E6: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def derive_constants(mc: ModelConstants) -> DerivedConstants:
    """
    Model sabitlerinden E1..E6.

    Args:
        mc: Model sabitleri

    Returns:
        DerivedConstants: E1..E6
    """
    Cl, ll, Ct, lt = mc.C_lambda, mc.lip_lambda, mc.C_tstar, mc.lip_tstar
    E1 = Cl * lt + Ct * ll * (1.0 + Ct * Cl)
    E2 = Ct * Cl * mc.lip_Q
    E3 = mc.lip_g_1 + mc.lip_g_2 * lt + mc.C_g * (Ct * ll + Cl * lt)
    E4 = 2.0 * Cl * lt + Ct * ll * (2.0 + Ct * Cl)
    E5 = E1 + Cl * lt
    E6 = E3 + (mc.lip_g_2 + mc.C_g * Cl) * lt
    return DerivedConstants(E1, E2, E3, E4, E5, E6)


def d_constants(mc: ModelConstants, C_h: float, lip_h_1: float, lip_h_2: float,
                lip_h_star: float, case: str) -> Tuple[float, float]:
    """
    h(φ(x,t)) e^{−Λ(x,t)} için (D1(h), D2(h)) çifti.

    Args:
        case: "interior" (t<t*(x), u<t*(y)), "boundary" (t=t*(x), u=t*(y)) veya "mixed"

    Returns:
        Tuple: (D1, D2)
    """
    Cl, ll, Ct, lt = mc.C_lambda, mc.lip_lambda, mc.C_tstar, mc.lip_tstar
    if case == "interior":
        return lip_h_1 + C_h * Ct * ll, lip_h_2 + C_h * Cl
    if case == "boundary":
        return lip_h_star + C_h * Ct * ll + C_h * Cl * lt, 0.0
    if case == "mixed":
        return lip_h_1 + C_h * Ct * ll + lip_h_2 * lt + C_h * Cl * lt, lip_h_2 + C_h * Cl
    raise DomainError(f"bilinmeyen durum: {case} (seçenekler: {D_CASES})")


def time_lipschitz_J(mc: ModelConstants, C_w: float) -> float:
    """|J(w,g)(x,t) − J(w,g)(x,u)| ≤ (C_w C_λ + [g]₂ + C_g C_λ)|t−u| sabiti."""
    return C_w * mc.C_lambda + mc.lip_g_2 + mc.C_g * mc.C_lambda


# ================== LIPSCHITZ DEFTERİ ==================

@dataclass
class LipschitzLedger:
    """Aşama başına [v_n]₁, [v_n]₂, [v_n]_*, [v_n]."""
    lip1: np.ndarray
    lip2: np.ndarray
    lipstar: np.ndarray
    lip: np.ndarray
    sharpened: bool = False

    @property
    def N(self) -> int:
        return len(self.lip) - 1

    def rows(self) -> List[Dict[str, float]]:
        return [{"n": n, "lip1": float(self.lip1[n]), "lip2": float(self.lip2[n]),
                 "lipstar": float(self.lipstar[n]), "lip": float(self.lip[n])}
                for n in range(self.N + 1)]


def lipschitz_ledger(mc: ModelConstants, dc: DerivedConstants, N: int,
                     sharpen: bool = False) -> LipschitzLedger:
    """
    v_N = g ile tohumlanan Lipschitz özyinelemesi.

    sharpen=True ve model akış sabitlerini veriyorsa [v_n]_i ≤ [v_n]·[φ]_i
    ile sıkılaştırılır.

    Args:
        mc: Model sabitleri
        dc: Türetilmiş sabitler
        N: Ufuk (≥ 1)
        sharpen: Akış Lipschitz sıkılaştırması

    Returns:
        LipschitzLedger: N+1 satır
    """
    if N < 1:
        raise ConfigError(f"N ≥ 1 olmalı: {N}")
    Cl, ll, Ct, lt, lQ, Cg = (mc.C_lambda, mc.lip_lambda, mc.C_tstar, mc.lip_tstar,
                              mc.lip_Q, mc.C_g)
    use_flow = sharpen and mc.has_flow_lipschitz
    growth = math.exp(Cl * Ct)
    lip1, lip2, lipstar, lip = (np.zeros(N + 1) for _ in range(4))
    lip1[N], lip2[N], lipstar[N], lip[N] = mc.lip_g_1, mc.lip_g_2, mc.lip_g_star, mc.lip_g_global
    for n in range(N - 1, -1, -1):
        lip1[n] = growth * (2.0 * lip1[n + 1] * dc.E2 + Cg * dc.E1 + Cg * dc.E4
                            + Cg * Ct * ll * (1.0 + Cl * Ct)) \
            + growth * max(mc.lip_g_1 + mc.lip_g_2 * lt, lipstar[n + 1] * lQ)
        lip2[n] = growth * (Cg * Cl * (4.0 + Cl * Ct) + mc.lip_g_2)
        lipstar[n] = lip1[n] + lip2[n] * lt
        lip[n] = lip1[n + 1] * dc.E2 + Cg * dc.E5 + max(dc.E6, lipstar[n + 1] * lQ + Cg * Ct * ll)
        if use_flow:
            lip1[n] = min(lip1[n], lip[n] * mc.flow_lip_1)
            lip2[n] = min(lip2[n], lip[n] * mc.flow_lip_2)
            lipstar[n] = min(lip1[n] + lip2[n] * lt, lip[n] * mc.flow_lip_star)
    return LipschitzLedger(lip1, lip2, lipstar, lip, use_flow)


# ================== B2 ==================

def _eta_term(Cg: float, Cl: float, X: float, min_delta: float):
    """
    2C_g(2C_λ η + X/η) terimi, η = (X/(2C_λ))^{1/2} seçimiyle γ√X'e eşit.

    η ≥ min_delta ise η, min_delta·(1−ETA_CLAMP) değerine çekilir.

    Returns:
        Tuple: (terim, kullanılan η, uygun mu)
    """
    eta = math.sqrt(max(X, 0.0) / (2.0 * Cl))
    if eta < min_delta:
        return 4.0 * Cg * math.sqrt(2.0 * Cl) * math.sqrt(max(X, 0.0)), eta, True
    eta = min_delta * (1.0 - config.ETA_CLAMP)
    if eta <= 0:
        return math.inf, eta, False
    return 2.0 * Cg * (2.0 * Cl * eta + X / eta), eta, False


@dataclass
class B2Part:
    """Değer hatası sınırı: aşama artışları, kuyruk toplamları, η ve uygunluk."""
    per_stage: np.ndarray
    partials: np.ndarray
    total: float
    eta: np.ndarray
    feasible: np.ndarray
    alpha: float
    gamma: float
    beta_n: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {"per_stage": self.per_stage.tolist(), "partials": self.partials.tolist(),
                "total": self.total, "eta": self.eta.tolist(),
                "feasible": [bool(f) for f in self.feasible], "alpha": self.alpha,
                "gamma": self.gamma, "beta_n": self.beta_n.tolist()}


def theorem5_bound(ledger: LipschitzLedger, mc: ModelConstants, dc: DerivedConstants,
                   errors: ErrorTable, delta_norms, min_deltas) -> B2Part:
    """
    ‖V_n − V̂_n‖ sınırını aşama N'den 0'a topla.

    Args:
        ledger: Lipschitz defteri
        mc: Model sabitleri
        dc: Türetilmiş sabitler
        errors: e_Z, e_S tablosu
        delta_norms: Aşama başına ‖Δ(Ẑ_n)‖_p (0..N−1)
        min_deltas: Aşama başına min Δ (0..N−1)

    Returns:
        B2Part: partials[n] aşama n'deki sınır, total = partials[0]
    """
    N = ledger.N
    Cl, Cg, lt = mc.C_lambda, mc.C_g, mc.lip_tstar
    e_Z, e_S = errors.e_Z, errors.e_S
    alpha = mc.lip_g_2 + 2.0 * Cg * Cl
    gamma = 4.0 * Cg * math.sqrt(2.0 * Cl)
    per_stage, eta, feasible, beta_n = np.zeros(N), np.zeros(N), np.zeros(N, dtype=bool), np.zeros(N)
    partials = np.zeros(N + 1)
    partials[N] = mc.lip_g_global * e_Z[N]
    for n in range(N - 1, -1, -1):
        beta_n[n] = ledger.lip[n] + ledger.lip1[n + 1] * dc.E2 + Cg * dc.E4 \
            + max(mc.lip_g_1 + mc.lip_g_2 * lt, ledger.lipstar[n + 1] * mc.lip_Q)
        X = lt * e_Z[n] + e_S[n + 1]
        root_term, eta[n], feasible[n] = _eta_term(Cg, Cl, X, float(min_deltas[n]))
        per_stage[n] = alpha * float(delta_norms[n]) + beta_n[n] * e_Z[n] \
            + 2.0 * ledger.lip[n + 1] * e_Z[n + 1] + root_term
        partials[n] = partials[n + 1] + per_stage[n]
    return B2Part(per_stage, partials, float(partials[0]), eta, feasible, alpha, gamma, beta_n)


# ================== B3 ==================

@dataclass
class B3Part:
    """Kural hatası sınırı: aşama artışları, birikimli toplam, β/a ve uygunluk."""
    per_stage: np.ndarray
    cumulative: np.ndarray
    total: float
    beta_over_a: np.ndarray
    feasible: np.ndarray
    a: float
    a_n: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {"per_stage": self.per_stage.tolist(), "cumulative": self.cumulative.tolist(),
                "total": self.total, "beta_over_a": self.beta_over_a.tolist(),
                "feasible": [bool(f) for f in self.feasible], "a": self.a,
                "a_n": self.a_n.tolist()}


def stopping_bound(ledger: LipschitzLedger, mc: ModelConstants, dc: DerivedConstants,
                   errors: ErrorTable, b2_partials, a: float, min_deltas) -> B3Part:
    """
    ‖V̄_n − V_n‖ sınırı: N−1 başlangıç terimi, sonra n = N−2..0 özyinelemesi.

    Args:
        ledger: Lipschitz defteri
        mc: Model sabitleri
        dc: Türetilmiş sabitler
        errors: e_Z, e_S tablosu
        b2_partials: theorem5_bound kuyruk toplamları (0..N)
        a: 0 < a < 1
        min_deltas: Aşama başına min Δ

    Returns:
        B3Part: total = aşama 0 birikimli değeri
    """
    if not 0 < a < 1:
        raise ConfigError(f"0 < a < 1 olmalı: {a}")
    N = ledger.N
    Cl, Cg, Ct, ll, lt, lQ = (mc.C_lambda, mc.C_g, mc.C_tstar, mc.lip_lambda,
                              mc.lip_tstar, mc.lip_Q)
    e_Z, e_S = errors.e_Z, errors.e_S
    per_stage, cumulative, a_n = np.zeros(N), np.zeros(N), np.zeros(N)
    beta_over_a, feasible = np.zeros(N), np.zeros(N, dtype=bool)
    common = 2.0 * Cg * Ct * ll * (2.0 + Ct * Cl)
    for n in range(N - 1, -1, -1):
        if n == N - 1:
            a_n[n] = 2.0 * mc.lip_g_1 * dc.E2 + common \
                + max(4.0 * Cg * Cl * lt + 2.0 * mc.lip_g_star * lQ, 3.0 * mc.lip_g_1)
        else:
            a_n[n] = 2.0 * ledger.lip1[n + 1] * dc.E2 + common \
                + max(4.0 * Cg * Cl * lt + 2.0 * ledger.lipstar[n + 1] * lQ, 3.0 * mc.lip_g_1)
        X = lt / (1.0 - a) * e_Z[n] + e_S[n + 1]
        root_term, beta_over_a[n], feasible[n] = _eta_term(Cg, Cl, X, float(min_deltas[n]))
        if n == N - 1:
            per_stage[n] = b2_partials[N - 1] + 3.0 * mc.lip_g_global * e_Z[N] \
                + a_n[n] * e_Z[n] + root_term
            cumulative[n] = per_stage[n]
        else:
            per_stage[n] = b2_partials[n + 1] + b2_partials[n] + 2.0 * ledger.lip[n + 1] * e_Z[n + 1] \
                + a_n[n] * e_Z[n] + root_term
            cumulative[n] = cumulative[n + 1] + per_stage[n]
    return B3Part(per_stage, cumulative, float(cumulative[0]), beta_over_a, feasible, float(a), a_n)


# ================== RAPOR ==================

@dataclass
class BoundReport:
    """Sabitler, defter, B2/B3 ve girdilerin yankısı."""
    constants: DerivedConstants
    ledger: LipschitzLedger
    b2: B2Part
    b3: Optional[B3Part]
    inputs: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        """Tüm min-Δ koşulları sağlanıyor mu?"""
        ok = bool(np.all(self.b2.feasible))
        if self.b3 is not None:
            ok = ok and bool(np.all(self.b3.feasible))
        return ok

    @property
    def B2(self) -> float:
        return self.b2.total

    @property
    def B3(self) -> float:
        return self.b3.total if self.b3 is not None else float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "constants": self.constants.to_dict(),
            "ledger": self.ledger.rows(),
            "ledger_sharpened": self.ledger.sharpened,
            "b2": self.b2.to_dict(),
            "b3": self.b3.to_dict() if self.b3 is not None else None,
            "certified": self.certified,
            "inputs": self.inputs,
            "extras": self.extras,
        }


def build_bound_report(mc: ModelConstants, errors: ErrorTable, delta_norms, min_deltas,
                       a: float, sharpen: bool = False, enable_b3: bool = True) -> BoundReport:
    """
    Sabitler → defter → B2 → B3 zincirini çalıştır.

    Returns:
        BoundReport: Uygun olmayan aşamalar işaretli rapor
    """
    N = len(errors.e_Z) - 1
    dc = derive_constants(mc)
    ledger = lipschitz_ledger(mc, dc, N, sharpen)
    b2 = theorem5_bound(ledger, mc, dc, errors, delta_norms, min_deltas)
    b3 = stopping_bound(ledger, mc, dc, errors, b2.partials, a, min_deltas) if enable_b3 else None
    extras = {
        "D_g": {case: list(d_constants(mc, mc.C_g, mc.lip_g_1, mc.lip_g_2, mc.lip_g_star, case))
                for case in D_CASES},
        "time_lipschitz_J": time_lipschitz_J(mc, mc.C_g),
    }
    inputs = {
        "model_constants": mc.to_dict(),
        "errors": errors.to_dict(),
        "delta_norms": [float(d) for d in delta_norms],
        "min_deltas": [float(d) for d in min_deltas],
        "a": float(a),
    }
    report = BoundReport(dc, ledger, b2, b3, inputs, extras)
    log(f"📏 B2 = {report.B2:.4g}, B3 = {report.B3:.4g}, sertifikalı: {report.certified}")
    if not report.certified:
        log("⚠️ bazı aşamalarda min Δ koşulu sağlanmadı; sınırlar sertifikasız")
    return report
