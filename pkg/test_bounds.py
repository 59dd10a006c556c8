#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Hata sınırı testleri: türetilmiş sabitler, Lipschitz defteri, B2 ve B3.
"""

import math

import numpy as np
import pytest

from pdmpstop.bounds import (build_bound_report, d_constants, derive_constants, lipschitz_ledger,
                             stopping_bound, theorem5_bound, time_lipschitz_J)
from pdmpstop.exceptions import ConfigError, DomainError
from pdmpstop.models import ExampleModel
from pdmpstop.quantizer import ErrorTable

E3 = math.exp(3.0)


@pytest.fixture(scope="module")
def mc():
    return ExampleModel().constants


@pytest.fixture(scope="module")
def dc(mc):
    return derive_constants(mc)


def test_derived_constants_of_example(dc):
    assert (dc.E1, dc.E2, dc.E3, dc.E4, dc.E5, dc.E6) == (15.0, 0.0, 8.0, 21.0, 18.0, 12.0)


def test_derived_constant_identity(mc, dc):
    assert dc.E4 == pytest.approx(dc.E5 + mc.C_tstar * mc.lip_lambda)
    assert dc.E5 == pytest.approx(dc.E1 + mc.C_lambda * mc.lip_tstar)


def test_ledger_of_example(mc, dc):
    ledger = lipschitz_ledger(mc, dc, 10)
    assert ledger.lip[10] == 1.0 and ledger.lip1[10] == 1.0 and ledger.lip2[10] == 1.0
    for n in range(10):
        assert ledger.lip2[n] == pytest.approx(22 * E3, abs=1e-10)
        assert ledger.lip1[n] == pytest.approx(50 * E3, abs=1e-10)
        assert ledger.lip[n] == pytest.approx(30.0, abs=1e-10)
    np.testing.assert_allclose(ledger.lipstar[:-1], ledger.lip1[:-1] + ledger.lip2[:-1] * mc.lip_tstar,
                               atol=1e-10)
    # son satır [g]_* ile tohumlanır, özdeşlik yalnızca önceki satırlarda geçerli
    assert ledger.lipstar[10] == mc.lip_g_star
    assert np.all(np.diff(ledger.lip1[:-1]) <= 1e-10)
    assert not ledger.sharpened


def test_sharpened_ledger(mc, dc):
    plain = lipschitz_ledger(mc, dc, 4)
    sharp = lipschitz_ledger(mc, dc, 4, sharpen=True)
    assert sharp.sharpened
    assert np.all(sharp.lip1 <= plain.lip1 + 1e-12)
    assert np.all(sharp.lip2 <= plain.lip2 + 1e-12)
    assert np.all(sharp.lipstar <= sharp.lip1 + sharp.lip2 * mc.lip_tstar + 1e-12)
    # [φ]₁ = 1, [φ]₂ = v = 1, [φ]_* = 0 ve [v_n] = 30
    assert sharp.lip1[0] == pytest.approx(30.0)
    assert sharp.lipstar[0] == 0.0


def test_ledger_rejects_empty_horizon(mc, dc):
    with pytest.raises(ConfigError):
        lipschitz_ledger(mc, dc, 0)


def test_d_constants_cases(mc):
    args = (mc.C_g, mc.lip_g_1, mc.lip_g_2, mc.lip_g_star)
    assert d_constants(mc, *args, "interior") == pytest.approx((4.0, 4.0))
    assert d_constants(mc, *args, "boundary") == pytest.approx((6.0, 0.0))
    assert d_constants(mc, *args, "mixed") == pytest.approx((8.0, 4.0))
    with pytest.raises(DomainError):
        d_constants(mc, *args, "corner")
    assert time_lipschitz_J(mc, 1.0) == pytest.approx(7.0)


def _one_stage():
    return ErrorTable([0.0, 0.01], [0.0, 0.01], [0.0, 0.02], 1000)


def test_value_bound_single_stage(mc, dc):
    ledger = lipschitz_ledger(mc, dc, 1)
    b2 = theorem5_bound(ledger, mc, dc, _one_stage(), [0.1], [0.1])
    # [g]e_Z(1) + α‖Δ‖ + 2[v_1]e_Z(1) + 4C_g√(2C_λ)·√e_S(1)
    expected = 0.01 + 7.0 * 0.1 + 2.0 * 0.01 + 4.0 * math.sqrt(6.0) * 0.1
    assert b2.total == pytest.approx(expected, rel=1e-12)
    assert b2.beta_n[0] == pytest.approx(53.0)
    assert b2.alpha == 7.0 and b2.gamma == pytest.approx(4.0 * math.sqrt(6.0))
    assert bool(b2.feasible[0])
    assert b2.partials[-1] == pytest.approx(0.01)


def test_stopping_bound_single_stage(mc, dc):
    ledger = lipschitz_ledger(mc, dc, 1)
    errors = _one_stage()
    b2 = theorem5_bound(ledger, mc, dc, errors, [0.1], [0.1])
    b3 = stopping_bound(ledger, mc, dc, errors, b2.partials, 0.5, [0.1])
    # a_0 = 2C_gC_t*[λ]₁(2+C_t*C_λ) + max(4C_gC_λ[t*], 3[g]₁) = 30 + 12
    assert b3.a_n[0] == pytest.approx(42.0)
    expected = b2.total + 3.0 * 0.01 + 4.0 * math.sqrt(6.0) * 0.1
    assert b3.total == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ConfigError):
        stopping_bound(ledger, mc, dc, errors, b2.partials, 1.5, [0.1])


def test_ten_stage_bound_at_equal_component_errors(mc, dc):
    # QE=0.0943 eşit bileşenlere bölünmüş, Δ=0.151 (Pt=10 satırı)
    e = 0.0943 / math.sqrt(2.0)
    errors = ErrorTable(np.r_[0.0, np.full(10, e)], np.r_[0.0, np.full(10, e)], np.r_[0.0, np.full(10, 0.0943)])
    b2 = theorem5_bound(lipschitz_ledger(mc, dc, 10), mc, dc, errors, np.full(10, 0.151), np.full(10, 0.151))
    assert b2.feasible.all()
    np.testing.assert_allclose(b2.beta_n, 53.0)
    # 10·α·Δ + (9·53 + 9·60 + 2 + 1)·e + γ(√e + 9√(2e))
    gamma = 4.0 * math.sqrt(6.0)
    expected = 10 * 7.0 * 0.151 + 1020.0 * e + gamma * (math.sqrt(e) + 9 * math.sqrt(2 * e))
    assert b2.total == pytest.approx(expected, rel=1e-12)
    assert b2.total == pytest.approx(113.3, abs=0.1)


def test_zero_errors_give_zero_bounds(mc):
    report = build_bound_report(mc, ErrorTable.zeros(5), np.zeros(5), np.full(5, 0.05), 0.5)
    assert report.B2 == 0.0
    assert report.B3 == 0.0
    assert report.certified


def test_bounds_grow_with_errors(mc):
    small = ErrorTable(np.full(4, 0.01), np.full(4, 0.01), np.full(4, 0.02))
    large = ErrorTable(np.full(4, 0.02), np.full(4, 0.02), np.full(4, 0.04))
    a = build_bound_report(mc, small, np.full(3, 0.08), np.full(3, 0.08), 0.5)
    b = build_bound_report(mc, large, np.full(3, 0.08), np.full(3, 0.08), 0.5)
    assert b.B2 > a.B2 and b.B3 > a.B3
    assert a.B3 >= a.B2
    assert np.all(np.diff(a.b2.partials) <= 0)


def test_infeasible_stage_is_clamped_and_flagged(mc, dc):
    ledger = lipschitz_ledger(mc, dc, 1)
    errors = _one_stage()
    ok = theorem5_bound(ledger, mc, dc, errors, [0.1], [0.1])
    clamped = theorem5_bound(ledger, mc, dc, errors, [0.1], [0.01])
    assert not bool(clamped.feasible[0])
    assert clamped.eta[0] < 0.01
    assert clamped.total > ok.total
    report = build_bound_report(mc, errors, [0.1], [0.01], 0.5)
    assert not report.certified


def test_report_dict_layout(mc):
    report = build_bound_report(mc, _one_stage(), [0.1], [0.1], 0.5)
    data = report.to_dict()
    assert set(data["constants"]) == {"E1", "E2", "E3", "E4", "E5", "E6"}
    assert [row["n"] for row in data["ledger"]] == [0, 1]
    assert {"per_stage", "total", "eta", "feasible"} <= set(data["b2"])
    assert {"per_stage", "total", "beta_over_a", "feasible"} <= set(data["b3"])
    assert data["extras"]["time_lipschitz_J"] == pytest.approx(7.0)


def test_b3_can_be_disabled(mc):
    report = build_bound_report(mc, _one_stage(), [0.1], [0.1], 0.5, enable_b3=False)
    assert report.b3 is None
    assert math.isnan(report.B3)
    assert report.to_dict()["b3"] is None
