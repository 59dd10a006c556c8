#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Örnek model: E=[0,1), φ(x,t)=x+vt, λ(x)=βx^α, Q(x,·)=U[0,1/2], g(x)=x.
Süreç 1'e doğru sabit hızla ilerler; sınıra yaklaştıkça [0,1/2]
aralığına geri sıçrama olasılığı artar.
"""

import numpy as np
from scipy import integrate

from .. import config
from ..exceptions import DomainError
from .base import PdmpModel, ModelConstants


class ExampleModel(PdmpModel):
    """
    Sabit hızlı, geri sıçramalı örnek PDMP.
    """

    tag = "example"
    kernel_state_independent = True
    reward_monotone_along_flow = True

    def __init__(self, v: float = config.EXAMPLE_V, alpha: float = config.EXAMPLE_ALPHA,
                 rate_beta: float = config.EXAMPLE_RATE_BETA):
        """
        Args:
            v: Hız (> 0)
            alpha: Yoğunluk üssü (≥ 1)
            rate_beta: Yoğunluk ölçeği (> 0)
        """
        if not v > 0:
            raise DomainError(f"v > 0 olmalı: {v}")
        if not alpha >= 1:
            raise DomainError(f"alpha ≥ 1 olmalı: {alpha}")
        if not rate_beta > 0:
            raise DomainError(f"rate_beta > 0 olmalı: {rate_beta}")
        self.v = float(v)
        self.alpha = float(alpha)
        self.rate_beta = float(rate_beta)
        self._constants = ModelConstants(
            C_lambda=self.rate_beta,
            lip_lambda=self.rate_beta * self.alpha,
            C_tstar=1.0 / self.v,
            lip_tstar=1.0 / self.v,
            lip_Q=0.0,
            C_g=1.0,
            lip_g_1=1.0,
            lip_g_2=self.v,
            lip_g_star=0.0,
            lip_g=1.0,
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
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, None)
        return self.rate_beta * x ** self.alpha

    def exit_time(self, x):
        return (1.0 - np.asarray(x, dtype=np.float64)) / self.v

    def kernel_sample(self, x, u):
        u = np.asarray(u, dtype=np.float64)
        return np.broadcast_to(0.5 * u, np.broadcast(np.asarray(x), u).shape).copy()

    def reward(self, x):
        return np.asarray(x, dtype=np.float64) * 1.0

    def cumulative_hazard_exact(self, x, t):
        # Λ(x,t) = β/(v(α+1)) · ((x+vt)^{α+1} − x^{α+1})
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, None)
        a1 = self.alpha + 1.0
        end = np.clip(x + self.v * np.asarray(t, dtype=np.float64), 0.0, None)
        return self.rate_beta / (self.v * a1) * (end ** a1 - x ** a1)

    def hazard_inverse_exact(self, x, e):
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, None)
        a1 = self.alpha + 1.0
        inner = x ** a1 + np.asarray(e, dtype=np.float64) * self.v * a1 / self.rate_beta
        return (inner ** (1.0 / a1) - x) / self.v

    def kernel_expectation(self, w, x=None, tol: float = config.QUAD_TOL) -> float:
        # Qw = 2 ∫₀^{1/2} w(y) dy
        value, _ = integrate.quad(lambda y: float(w(np.asarray(y))), 0.0, 0.5,
                                  epsabs=tol, limit=config.QUAD_LIMIT)
        return 2.0 * value

    def describe(self):
        info = super().describe()
        info.update({"v": self.v, "alpha": self.alpha, "rate_beta": self.rate_beta})
        return info
