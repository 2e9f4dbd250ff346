import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmap_rel import example, measures, optimizer
from mmap_rel.mmap_discrete import build
from mmap_rel.optimizer import GAConfig, ParetoPoint, PolicyParams


def _pt(f1, f2, tag=1.0):
    return ParetoPoint(PolicyParams((tag, 0.0, 1.0, 0.0, 1.0), (0.5, 0.5)), f1, f2)


@pytest.fixture
def published():
    ref = example.published()
    pols = example.policies()
    return [ParetoPoint(pols[k], ref[k]["profit_rate"], ref[k]["availability"]) for k in example.POLICIES]


def test_instantiate_balanced_policy(base_model):
    params = PolicyParams((10.2026, 10.1463, 10.1936, 9.8266, 8.4319), (0.9153, 0.5088))
    m = optimizer.instantiate(base_model, params)
    np.testing.assert_allclose(m.V, params.sub_generator)
    np.testing.assert_array_equal(m.nu, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(m.T, base_model.T)


def test_invalid_coxian_rejected():
    with pytest.raises(ValueError, match="V2"):
        PolicyParams((1.0, 2.0, 1.0, 0.5, 1.0), (0.5, 0.5))
    with pytest.raises(ValueError, match="positive"):
        PolicyParams((0.0, 0.0, 1.0, 0.5, 1.0), (0.5, 0.5))
    with pytest.raises(ValueError, match="probabilities"):
        PolicyParams((1.0, 0.5, 1.0, 0.5, 1.0), (1.5, 0.5))


def test_wrong_number_of_probabilities(base_model):
    with pytest.raises(ValueError, match="p needs 2"):
        optimizer.instantiate(base_model, PolicyParams((1, 0.5, 1, 0.5, 1), (0.5,)))


def test_never_revacation_policy(base_model):
    m = optimizer.instantiate(base_model, PolicyParams((1, 0.5, 1, 0.5, 1), (0.0, 0.0)))
    assert not np.any(build(m).blocks["R+NVP"])


def test_evaluate_matches_measures(base_model, econ, policy_models):
    for name, params in example.policies().items():
        pt = optimizer.evaluate(base_model, econ, params)
        ref = example.compute(policy_models[name], econ, with_break_even=False)
        assert pt.availability == pytest.approx(ref["availability"], abs=1e-12)
        assert pt.profit_rate == pytest.approx(ref["profit_rate"], abs=1e-12)
    assert optimizer.evaluate(base_model, econ, example.policies()["model1"]).availability == pytest.approx(
        0.9089, abs=1e-3)
    assert optimizer.evaluate(base_model, econ, example.policies()["model3"]).availability == pytest.approx(
        0.9187, abs=1e-3)


def test_instant_vacations_limit(base_model):
    params = PolicyParams((1e6, 0.5e6, 1e6, 0.5e6, 1e6), (0.5, 0.5))
    pi = measures.stationary(build(optimizer.instantiate(base_model, params)))
    assert pi.occupancy("RF") + pi.occupancy("NRF") < 1e-4


def test_encode_decode_round_trip():
    params = example.policies()["model3"]
    back = optimizer.decode(optimizer.encode(params))
    np.testing.assert_allclose(back.V, params.V, rtol=1e-12)
    np.testing.assert_allclose(back.p, params.p)


def test_dominance():
    assert optimizer.dominates((1, 1), (0, 1))
    assert not optimizer.dominates((1, 0), (0, 1))
    assert not optimizer.dominates((1, 1), (1, 1))


def test_nondominated_sort_layers():
    f = np.array([[3, 1], [1, 3], [2, 2], [1, 1], [0, 0]], dtype=float)
    fronts = optimizer.nondominated_sort(f)
    assert sorted(fronts[0].tolist()) == [0, 1, 2]
    assert fronts[1].tolist() == [3]
    assert fronts[2].tolist() == [4]


def test_crowding_boundaries_infinite():
    d = optimizer.crowding_distance(np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]))
    assert np.isinf(d[0]) and np.isinf(d[2]) and np.isfinite(d[1])


def test_published_front_selection(published):
    assert optimizer.ideal_point(published) == (0.2734, 0.9187)
    pick = optimizer.select_closest(published)
    assert (pick.profit_rate, pick.availability) == (0.0164, 0.9168)
    assert optimizer.select_max_profit(published).objectives == (0.2734, 0.9089)
    assert optimizer.select_max_availability(published).objectives == (-0.1972, 0.9187)


def test_single_point_front():
    p = _pt(0.1, 0.9)
    assert optimizer.select_closest([p]) is p
    assert optimizer.select_max_profit([p]) is p
    assert optimizer.select_max_availability([p]) is p
    np.testing.assert_array_equal(optimizer.normalized([p]), [[1.0, 1.0]])


def test_symmetric_tie_prefers_profit():
    a, b = _pt(1.0, 0.0), _pt(0.0, 1.0)
    assert optimizer.select_closest([b, a]) is a


def test_empty_front():
    with pytest.raises(ValueError):
        optimizer.select_closest([])
    with pytest.raises(ValueError):
        optimizer.ideal_point([])


def test_normalization_range(published):
    n = optimizer.normalized(published)
    assert n.min() >= 0 and n.max() <= 1
    np.testing.assert_allclose(n.max(axis=0), [1.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(0, 1)), min_size=1, max_size=8, unique=True),
       st.floats(0.01, 100))
def test_max_profit_scale_invariant(objs, k):
    front = [_pt(f1, f2, tag=i + 1.0) for i, (f1, f2) in enumerate(objs)]
    scaled = [_pt(p.profit_rate * k, p.availability, tag=p.params.V[0]) for p in front]
    assert optimizer.select_max_profit(front).params == optimizer.select_max_profit(scaled).params


def test_single_individual_run(base_model, econ):
    front = optimizer.pareto_front(base_model, econ, GAConfig(population=1, generations=1, seed=3))
    assert len(front) == 1
    assert front[0] == optimizer.evaluate(base_model, econ, front[0].params)


@pytest.fixture(scope="module")
def small_front(base_model, econ):
    return optimizer.pareto_front(base_model, econ, GAConfig(population=12, generations=4, seed=5))


def test_small_run_nondominated(small_front):
    assert small_front
    assert optimizer.is_nondominated(small_front)
    f1 = [p.profit_rate for p in small_front]
    assert f1 == sorted(f1, reverse=True)


def test_run_is_deterministic(base_model, econ, small_front):
    again = optimizer.pareto_front(base_model, econ, GAConfig(population=12, generations=4, seed=5))
    assert [p.objectives for p in again] == [p.objectives for p in small_front]
    assert [p.params for p in again] == [p.params for p in small_front]


def test_parallel_matches_serial(base_model, econ, small_front):
    par = optimizer.pareto_front(base_model, econ, GAConfig(population=12, generations=4, seed=5, workers=2))
    assert [p.objectives for p in par] == [p.objectives for p in small_front]


def test_write_front(tmp_path, small_front):
    csv_path, sel_path = optimizer.write_front(small_front, tmp_path)
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "f1,f2,V1,V2,V3,V4,V5,p1,p2"
    assert len(rows) == len(small_front) + 1
    sel = json.loads(sel_path.read_text())
    assert set(sel) == {"ideal_point", "max_profit", "closest_to_ideal", "max_availability"}
