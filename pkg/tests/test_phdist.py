import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmap_rel import phdist
from mmap_rel.phdist import ContinuousPH, DiscretePH


def test_table_shock_clock_valid(base_model):
    assert phdist.validate(base_model.shocks.clock).ok


def test_positive_diagonal_flagged():
    rep = phdist.validate(ContinuousPH([1, 0], [[0.5, 0.0], [0.0, -1.0]]))
    assert not rep.ok
    assert any("diagonal" in v.rule and v.row == 0 for v in rep.violations)


def test_discrete_row_mass_flagged():
    rep = phdist.validate(DiscretePH([1, 0], [[0.6, 0.5], [0.0, 0.5]]))
    assert not rep.ok
    assert any("row mass" in v.rule and v.row == 0 for v in rep.violations)


def test_corrective_repair_mean(base_model):
    assert base_model.facility.corrective.mean() == pytest.approx(6.4384, abs=1e-3)


def test_preventive_repair_mean(base_model):
    assert base_model.facility.preventive.mean() == pytest.approx(1.1645, abs=1e-3)


def test_shock_interval_mean(base_model):
    assert base_model.shocks.clock.mean() == pytest.approx(5.0, abs=1e-9)


def test_exponential_mean():
    assert phdist.mean(ContinuousPH([1.0], [[-4.0]])) == pytest.approx(0.25)


def test_geometric_mean():
    assert phdist.mean(DiscretePH([1.0], [[0.75]])) == pytest.approx(4.0)


def test_unreachable_absorption():
    with pytest.raises(np.linalg.LinAlgError):
        phdist.mean(DiscretePH([1.0, 0.0], [[0.0, 1.0], [1.0, 0.0]]))


def test_survival_time_zero(base_model):
    assert phdist.survival(base_model.facility.corrective, 0.0) == pytest.approx(1.0)


def test_survival_exponential_half():
    assert phdist.survival(ContinuousPH([1.0], [[-1.0]]), math.log(2)) == pytest.approx(0.5)


def test_survival_monotone(base_model):
    ph = base_model.facility.corrective
    assert ph.survival(10.0) >= ph.survival(20.0)


def test_survival_negative_time():
    with pytest.raises(ValueError):
        phdist.survival(ContinuousPH([1.0], [[-1.0]]), -1.0)


def test_discrete_survival():
    ph = DiscretePH([1.0], [[0.5]])
    assert ph.survival(3) == pytest.approx(0.125)


def test_mean_matches_integrated_survival(base_model):
    ph = base_model.facility.corrective
    mu = ph.mean()
    grid = np.arange(0.0, 50 * mu, mu / 200)
    surv = np.array([ph.survival(t) for t in grid])
    integral = np.trapezoid(surv, grid) if hasattr(np, "trapezoid") else np.trapz(surv, grid)
    assert integral == pytest.approx(mu, rel=5e-3)


def test_embedded_stationary_symmetric():
    ph = ContinuousPH([0.5, 0.5], [[-2.0, 1.0], [1.0, -2.0]])
    np.testing.assert_allclose(phdist.embedded_stationary(ph), [0.5, 0.5], atol=1e-12)


def test_embedded_stationary_residual():
    rng = np.random.default_rng(3)
    a = rng.uniform(0.1, 1.0, (3, 3))
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, -(a.sum(axis=1) + rng.uniform(0.1, 1.0, 3)))
    ph = ContinuousPH([0.2, 0.3, 0.5], a)
    pi = phdist.embedded_stationary(ph)
    np.testing.assert_allclose(pi @ (a + np.outer(ph.exit, ph.init)), 0.0, atol=1e-12)


def test_embedded_stationary_discrete():
    ph = DiscretePH([1.0, 0.0], [[0.5, 0.3], [0.0, 0.6]])
    pi = phdist.embedded_stationary(ph)
    renewal = ph.sub_stoch + np.outer(ph.exit, ph.init)
    np.testing.assert_allclose(pi @ renewal, pi, atol=1e-12)
    assert pi.sum() == pytest.approx(1.0)


def test_exit_vectors_stored():
    c = ContinuousPH([1, 0], [[-3.0, 1.0], [0.5, -2.0]])
    np.testing.assert_array_equal(c.sub_gen.sum(axis=1) + c.exit, 0.0)
    d = DiscretePH([1, 0], [[0.3, 0.2], [0.1, 0.4]])
    np.testing.assert_allclose(d.sub_stoch.sum(axis=1) + d.exit, 1.0, atol=0)


def test_immutable():
    ph = ContinuousPH([1.0], [[-1.0]])
    with pytest.raises(ValueError):
        ph.sub_gen[0, 0] = 3.0


def test_shape_mismatch():
    with pytest.raises(ValueError):
        ContinuousPH([1.0, 0.0], [[-1.0]])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.05, 20.0), min_size=1, max_size=4))
def test_hypoexponential_mean(rates):
    # series of exponential stages: mean is the sum of stage means
    n = len(rates)
    a = np.diag([-r for r in rates]) + np.diag(rates[:-1], k=1)
    init = np.zeros(n)
    init[0] = 1.0
    assert phdist.mean(ContinuousPH(init, a)) == pytest.approx(sum(1 / r for r in rates), rel=1e-10)
