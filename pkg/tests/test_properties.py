"""Structural invariants over random small models (K=2, every order at most 2)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmap_rel import measures
from mmap_rel.mmap_discrete import build

from conftest import RANDOM_SEEDS, random_model

MODES = [pytest.param(False, id="continuous"), pytest.param(True, id="discrete")]


@pytest.mark.parametrize("discrete", MODES)
@pytest.mark.parametrize("seed", RANDOM_SEEDS)
def test_row_sums(seed, discrete):
    p = build(random_model(seed, discrete))
    if discrete:
        np.testing.assert_allclose(p.transition.sum(axis=1), 1.0, atol=1e-9)
        assert p.transition.min() >= -1e-12
    else:
        np.testing.assert_allclose(p.generator.sum(axis=1), 0.0, atol=1e-9)
        off = p.generator - np.diag(np.diag(p.generator))
        assert off.min() >= -1e-12


@pytest.mark.parametrize("discrete", MODES)
@pytest.mark.parametrize("seed", RANDOM_SEEDS)
def test_stationary_methods_agree(seed, discrete):
    p = build(random_model(seed, discrete))
    a = measures.stationary_blocks(p)
    b = measures.stationary_direct(p)
    assert np.max(np.abs(a - b)) < 1e-9
    assert a.sum() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1000, 10**6), st.booleans())
def test_flow_balance_random(seed, discrete):
    p = build(random_model(seed, discrete))
    r = measures.event_rates_stationary(p, measures.stationary(p))
    assert r.RF == pytest.approx(r.CR, abs=1e-9)
    assert r.NRF == pytest.approx(r.NU, abs=1e-9)
