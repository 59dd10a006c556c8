#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Deterministik sıfırlama modeli: λ ≡ 0, her sıçrama sınırda zorunlu ve
Q(x,·) tek noktalı (z̄). Testlerde ve dejenere durumlarda kullanılır.
"""

import numpy as np

from ..exceptions import DomainError
from .base import PdmpModel, ModelConstants


class DeterministicResetModel(PdmpModel):
    """
    E=[0,1), φ(x,t)=x+vt, λ ≡ 0, Q(x,·)=δ_{z̄}.

    reward_value verilirse g ≡ reward_value, verilmezse g(x)=x.
    """

    tag = "deterministic"
    kernel_state_independent = True
    reward_monotone_along_flow = True

    def __init__(self, reset_state: float = 0.0, v: float = 1.0, reward_value=None):
        """
        Args:
            reset_state: Sıçrama sonrası sabit durum z̄ ∈ E
            v: Hız (> 0)
            reward_value: Sabit ödül (None ise g(x)=x)
        """
        if not v > 0:
            raise DomainError(f"v > 0 olmalı: {v}")
        if not 0.0 <= reset_state < 1.0:
            raise DomainError(f"reset_state E içinde olmalı: {reset_state}")
        self.v = float(v)
        self.reset_state = float(reset_state)
        self.reward_value = None if reward_value is None else float(reward_value)
        constant = self.reward_value is not None
        c_g = abs(self.reward_value) if constant else 1.0
        self._constants = ModelConstants(
            C_lambda=1.0,  # λ ≡ 0 için herhangi bir pozitif üst sınır
            lip_lambda=0.0,
            C_tstar=1.0 / self.v,
            lip_tstar=1.0 / self.v,
            lip_Q=0.0,
            C_g=c_g,
            lip_g_1=0.0 if constant else 1.0,
            lip_g_2=0.0 if constant else self.v,
            lip_g_star=0.0,
            lip_g=0.0 if constant else 1.0,
            flow_lip_1=1.0,
            flow_lip_2=self.v,
            flow_lip_star=0.0,
        )

    @property
    def constants(self) -> ModelConstants:
        return self._constants

    def flow(self, x, t):
        return np.asarray(x, dtype=np.float64) + self.v * np.asarray(t, dtype=np.float64)

    def jump_rate(self, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def exit_time(self, x):
        return (1.0 - np.asarray(x, dtype=np.float64)) / self.v

    def kernel_sample(self, x, u):
        shape = np.broadcast(np.asarray(x), np.asarray(u)).shape
        return np.full(shape, self.reset_state)

    def reward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.reward_value is not None:
            return np.full(x.shape, self.reward_value)
        return x * 1.0

    def cumulative_hazard_exact(self, x, t):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)

    def kernel_expectation(self, w, x=None, tol: float = 0.0) -> float:
        return float(w(np.asarray(self.reset_state)))

    def describe(self):
        info = super().describe()
        info.update({"reset_state": self.reset_state, "v": self.v, "reward_value": self.reward_value})
        return info
