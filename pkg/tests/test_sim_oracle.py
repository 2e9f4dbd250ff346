import json

import numpy as np
import pytest

from mmap_rel import measures, sim_oracle
from mmap_rel._sim import BACKEND, LABELS, _fallback, build_tables
from mmap_rel.mmap_discrete import build
from mmap_rel.model import discretize, from_config
from mmap_rel.sim_oracle import SimConfig

from conftest import toy_config, toy_generator

try:
    from mmap_rel._sim import _kernel
except ImportError:  # extension not built
    _kernel = None

needs_kernel = pytest.mark.skipif(_kernel is None, reason="compiled kernel not built")

SHORT = SimConfig(horizon=2e3, replications=3, seed=11)


def _targets(model, econ=None):
    p = build(model)
    return sim_oracle.analytic_targets(p, measures.stationary(p), econ)


@needs_kernel
@pytest.mark.parametrize("discrete", [False, True])
def test_backends_identical(policy_models, econ, discrete):
    m = policy_models["model2"]
    if discrete:
        m = discretize(m, 0.05, "exact")
    a = sim_oracle.simulate(m, econ, SHORT, backend=_kernel)
    b = sim_oracle.simulate(m, econ, SHORT, backend=_fallback)
    assert (a.backend, b.backend) == ("cython", "python")
    np.testing.assert_array_equal(a.label_counts, b.label_counts)
    for k in a.samples:
        np.testing.assert_allclose(a.samples[k], b.samples[k], rtol=1e-12, atol=1e-12)


def test_default_backend_reported():
    assert BACKEND in ("cython", "python")


def test_seed_determinism(policy_models, econ):
    a = sim_oracle.simulate(policy_models["model1"], econ, SHORT)
    b = sim_oracle.simulate(policy_models["model1"], econ, SHORT)
    np.testing.assert_array_equal(a.label_counts, b.label_counts)
    c = sim_oracle.simulate(policy_models["model1"], econ, SimConfig(2e3, 3, seed=12))
    assert not np.array_equal(a.label_counts, c.label_counts)


def test_threads_do_not_change_results(policy_models, monkeypatch):
    a = sim_oracle.simulate(policy_models["model2"], None, SHORT)
    monkeypatch.setenv(sim_oracle.THREADS_ENV, "3")
    b = sim_oracle.simulate(policy_models["model2"], None, SHORT)
    np.testing.assert_array_equal(a.label_counts, b.label_counts)


def test_occupancies_sum_to_one(policy_models):
    est = sim_oracle.simulate(policy_models["model3"], None, SHORT)
    occ = sum(est.samples[f"occ_{s}"] for s in ("Ov", "Onv", "RF", "NRF", "CR", "PM"))
    np.testing.assert_allclose(occ, 1.0, atol=1e-9)
    np.testing.assert_allclose(est.samples["availability"], est.samples["occ_Ov"] + est.samples["occ_Onv"])


def test_no_nonrepairable_channel(base_model):
    cfg = base_model.to_config()
    cfg.update(
        p=[1.0, 1.0], omega0=0.0,
        T_r0=[0, 0, 0, 0.05, 0.18, 0.2, 2], T_nr0=[0] * 7,
        W_r0=[0, 0, 0, 0.1, 0.2, 0.3, 0.5], W_nr0=[0] * 7,
        C=[[0, 1, 0], [0, 0, 1], [0, 0, 1]],
    )
    m = from_config(cfg)
    for model in (m, discretize(m, 0.05, "exact")):
        est = sim_oracle.simulate(model, None, SimConfig(5e3, 2, seed=4))
        assert np.all(est.samples["rate_NRF"] == 0)
        assert np.all(est.samples["rate_NU"] == 0)
        assert np.all(est.samples["rate_RF"] > 0)


def test_exponential_model_matches_hand_ctmc():
    model = from_config(toy_config())
    cfg = SimConfig(horizon=2e4, replications=10, seed=2)
    est = sim_oracle.simulate(model, None, cfg)
    hand = np.linalg.lstsq(np.vstack([toy_generator().T, np.ones(7)]), np.r_[np.zeros(7), 1.0], rcond=None)[0]
    targets = {
        "occ_Ov": hand[0] + hand[1], "occ_Onv": hand[2], "occ_RF": hand[3],
        "occ_NRF": hand[4], "occ_CR": hand[5], "occ_PM": hand[6],
    }
    report = sim_oracle.compare(targets, est, names=list(targets))
    assert report.passed, str(report)


def test_flow_balance_in_simulation(policy_models):
    est = sim_oracle.simulate(policy_models["model2"], None, SimConfig(2e4, 10, seed=3))
    diff = est.samples["rate_RF"] - est.samples["rate_CR"]
    mean, hw = sim_oracle.mean_halfwidth(diff)
    assert abs(mean) <= hw + 1.0 / 2e4


def test_compare_passes_on_truth(policy_models, econ):
    m = policy_models["model2"]
    est = sim_oracle.simulate(m, econ, SimConfig(2e4, 10, seed=9))
    report = sim_oracle.compare(_targets(m, econ), est)
    assert report.passed, str(report)
    assert [r.name for r in report.rows] == sim_oracle.quantity_names()


def test_perturbed_availability_fails(policy_models):
    m = policy_models["model2"]
    est = sim_oracle.simulate(m, None, SimConfig(2e4, 10, seed=9))
    targets = _targets(m)
    targets["availability"] += 0.05
    report = sim_oracle.compare(targets, est, names=["availability"])
    assert not report.rows[0].covered
    assert not report.passed


def test_zero_replications():
    with pytest.raises(ValueError, match="replication"):
        SimConfig(horizon=100.0, replications=0)


def test_warmup_must_precede_horizon():
    with pytest.raises(ValueError):
        SimConfig(horizon=100.0, warmup=100.0)
    assert SimConfig(horizon=100.0).window_start == 1.0


def test_compare_needs_matching_names(policy_models):
    est = sim_oracle.simulate(policy_models["model2"], None, SHORT)
    with pytest.raises(KeyError):
        sim_oracle.compare({"availability": 0.9}, est, names=["availability", "occ_XX"])


def test_zero_spread_rule():
    samples = {"rate_PM": np.zeros(5)}
    est = sim_oracle.SimEstimates(samples, np.zeros((5, 12)), SimConfig(1e3, 5))
    # expected count over 5 runs of 990 time units: well under one event
    ok = sim_oracle.compare({"rate_PM": 1e-5}, est, names=["rate_PM"])
    assert ok.rows[0].covered
    bad = sim_oracle.compare({"rate_PM": 1e-2}, est, names=["rate_PM"])
    assert not bad.rows[0].covered


def test_profit_rate_estimate(policy_models, econ):
    m = policy_models["model1"]
    est = sim_oracle.simulate(m, econ, SimConfig(2e4, 10, seed=5))
    target = _targets(m, econ)["profit_rate"]
    mean, hw = sim_oracle.mean_halfwidth(est.samples["profit_rate"], 0.999)
    assert abs(mean - target) <= hw


def test_tables_come_from_raw_inputs(policy_models, econ):
    tab = build_tables(policy_models["model2"], econ)
    assert len(LABELS) == 12
    # continuous rows drop the diagonal and append the exit rates
    np.testing.assert_allclose(tab.T_tab[:, -1], -np.diag(policy_models["model2"].T))


def test_write_report(tmp_path, policy_models):
    m = policy_models["model2"]
    est = sim_oracle.simulate(m, None, SHORT)
    report = sim_oracle.compare(_targets(m), est)
    path = sim_oracle.write_report(tmp_path / "r.json", est, report)
    doc = json.loads(path.read_text())
    assert doc["replications"] == 3 and "comparison" in doc
    assert doc["comparison"]["per_quantity_level"] == pytest.approx(1 - 0.05 / 14)
