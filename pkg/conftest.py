#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Ortak test fikstürleri: küçük örnek ızgaraları ve değer tablosu.
"""

import pytest

from pdmpstop.models import DeterministicResetModel, ExampleModel
from pdmpstop.quantizer import estimate_errors, estimate_transition_weights, train_grids
from pdmpstop.solver import backward_solve
from pdmpstop.streams import RngStream

SEED = 12345
SMALL_N = 3
SMALL_PT = 8
SMALL_DELTA = 0.083


@pytest.fixture(scope="session")
def example_model():
    return ExampleModel()


@pytest.fixture(scope="session")
def reset_model():
    return DeterministicResetModel()


@pytest.fixture(scope="session")
def small_grids(example_model):
    """N=3, Pt=8, hata tablosu dahil örnek ızgaraları."""
    grids = train_grids(example_model, 0.0, SMALL_N, SMALL_PT, 2000, 2.0, RngStream(SEED, "train"))
    grids = estimate_transition_weights(example_model, grids, 4000, RngStream(SEED, "weights"))
    return grids.with_errors(estimate_errors(example_model, grids, 2000, 2.0, RngStream(SEED, "eval")))


@pytest.fixture(scope="session")
def small_values(example_model, small_grids):
    return backward_solve(example_model, small_grids, SMALL_DELTA)


@pytest.fixture(scope="session")
def reset_grids(reset_model):
    """Deterministik modelde her aşama tek noktaya küçülür."""
    grids = train_grids(reset_model, 0.0, 2, 3, 300, 2.0, RngStream(SEED, "train"))
    grids = estimate_transition_weights(reset_model, grids, 500, RngStream(SEED, "weights"))
    return grids.with_errors(estimate_errors(reset_model, grids, 500, 2.0, RngStream(SEED, "eval")))
