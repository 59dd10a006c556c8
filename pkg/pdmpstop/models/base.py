#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Temel PDMP model sınıfı. Tüm modeller bundan türer.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from .. import config
from ..exceptions import DomainError, UnsupportedModelError


@dataclass(frozen=True)
class ModelConstants:
    """
    Modelin sınır ve Lipschitz sabitleri.

    C_lambda: λ üst sınırı, lip_lambda: [λ]₁, C_tstar: t* üst sınırı,
    lip_tstar: [t*], lip_Q: [Q], C_g: |g| üst sınırı, lip_g_1/2/star:
    [g]₁, [g]₂, [g]_*. lip_g verilirse Ē üzerindeki [g] olarak kullanılır,
    verilmezse [g]₁. flow_lip_* alanları akış Lipschitz ise [φ]₁, [φ]₂, [φ]_*.
    """
    C_lambda: float
    lip_lambda: float
    C_tstar: float
    lip_tstar: float
    lip_Q: float
    C_g: float
    lip_g_1: float
    lip_g_2: float
    lip_g_star: float
    lip_g: Optional[float] = None
    flow_lip_1: Optional[float] = None
    flow_lip_2: Optional[float] = None
    flow_lip_star: Optional[float] = None

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value is None:
                continue
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"sabit {name} sonlu ve ≥ 0 olmalı: {value}")
        if self.C_lambda <= 0 or self.C_tstar <= 0:
            raise DomainError("C_lambda ve C_tstar pozitif olmalı")

    @property
    def lip_g_global(self) -> float:
        """Ē üzerindeki [g]; verilmemişse [g]₁ (her zaman geçerli üst sınır)."""
        return self.lip_g if self.lip_g is not None else self.lip_g_1

    @property
    def has_flow_lipschitz(self) -> bool:
        return None not in (self.flow_lip_1, self.flow_lip_2, self.flow_lip_star)

    def to_dict(self) -> Dict[str, Any]:
        """Dict'e dönüştür."""
        return asdict(self)


class PdmpModel(ABC):
    """
    Yerel karakteristikleriyle (φ, λ, Q, t*) belirlenen bir PDMP ve
    ödül fonksiyonu g.

    Tüm metodlar numpy dizileri üzerinde eleman bazında çalışır. Durum
    uzayı tek boyutludur: E = [state_low, state_high), ∂E = {state_high}.
    """

    state_dim = 1
    tag = "base"
    state_low = 0.0
    state_high = 1.0
    # Q(x,·) x'ten bağımsız mı (Qw skaler)?
    kernel_state_independent = False
    # g akış boyunca azalmayan mı (segment sup'u sağ uçta)?
    reward_monotone_along_flow = False

    @property
    @abstractmethod
    def constants(self) -> ModelConstants:
        """Modelin sabit paketi."""

    @abstractmethod
    def flow(self, x, t):
        """Deterministik hareket φ(x,t)."""

    @abstractmethod
    def jump_rate(self, x):
        """Sıçrama yoğunluğu λ(x) ≥ 0."""

    @abstractmethod
    def exit_time(self, x):
        """Sınıra varış süresi t*(x) > 0."""

    @abstractmethod
    def kernel_sample(self, x, u):
        """Q(x,·) çekilişi; u düzgün [0,1) çekilişi."""

    @abstractmethod
    def reward(self, x):
        """Ödül fonksiyonu g(x)."""

    def cumulative_hazard_exact(self, x, t) -> Optional[np.ndarray]:
        """Analitik Λ(x,t); yoksa None (kuadratür kullanılır)."""
        return None

    def hazard_inverse_exact(self, x, e) -> Optional[np.ndarray]:
        """Analitik Λ(x,·)⁻¹(e); yoksa None (kök bulma kullanılır)."""
        return None

    def kernel_expectation(self, w: Callable[[np.ndarray], np.ndarray], x=None,
                           tol: float = config.QUAD_TOL) -> float:
        """
        Qw(x). Durumdan bağımsız çekirdekte x yok sayılır.

        Args:
            w: Entegre edilecek fonksiyon
            x: Sıçrama öncesi durum
            tol: Kuadratür mutlak toleransı

        Returns:
            float: Qw(x)
        """
        raise UnsupportedModelError(f"{self.tag}: kernel_expectation desteklenmiyor")

    def in_domain(self, x) -> np.ndarray:
        """x ∈ E mi?"""
        x = np.asarray(x, dtype=np.float64)
        return (x >= self.state_low) & (x < self.state_high)

    def check_state(self, x: float):
        """x ∉ E ise DomainError."""
        if not bool(np.all(self.in_domain(x))):
            raise DomainError(f"{self.tag}: durum E dışında: {x}")

    @property
    def state_bounds(self) -> Tuple[float, float]:
        """Ē'nin uç noktaları."""
        return self.state_low, self.state_high

    def describe(self) -> Dict[str, Any]:
        """Manifest için model özeti."""
        return {"tag": self.tag, "constants": self.constants.to_dict()}
