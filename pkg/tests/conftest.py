import numpy as np
import pytest

from mmap_rel import example
from mmap_rel.mmap_continuous import initial_distribution
from mmap_rel.mmap_discrete import build
from mmap_rel.model import discretize, from_config


def _subgen(rng, n, exit_rate):
    """Random sub-generator of order n whose rows leave at ``exit_rate``."""
    a = rng.uniform(0.1, 2.0, size=(n, n)) * (rng.random((n, n)) < 0.7)
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, -(a.sum(axis=1) + exit_rate))
    return a


def _prob(rng, n):
    x = rng.uniform(0.1, 1.0, n)
    return x / x.sum()


def random_config(seed: int) -> dict:
    """Conservation-respecting continuous model with K=2 and every order at most 2."""
    rng = np.random.default_rng(seed)
    m = 2  # one phase per level
    t, d, v, m1, m2 = (int(x) for x in rng.integers(1, 3, size=5))
    tr = rng.uniform(0.0, 0.5, m)
    tnr = rng.uniform(0.05, 0.5, m)
    T = np.array([[0.0, rng.uniform(0.1, 1.0)], [0.0, 0.0]])
    np.fill_diagonal(T, -(T.sum(axis=1) + tr + tnr))
    w = rng.uniform(0.1, 1.0, (m, m + 2))
    w /= w.sum(axis=1, keepdims=True)
    C = rng.uniform(0.0, 1.0, (d, d))
    C *= rng.uniform(0.2, 0.9) / C.sum(axis=1, keepdims=True)
    L = _subgen(rng, t, rng.uniform(0.2, 1.5, t))
    V = _subgen(rng, v, rng.uniform(0.5, 5.0, v))
    S1 = _subgen(rng, m1, rng.uniform(0.2, 2.0, m1))
    S2 = _subgen(rng, m2, rng.uniform(0.2, 2.0, m2))
    return {
        "time_mode": "continuous",
        "levels": [1, 1],
        "alpha": [1.0, 0.0],
        "T": T.tolist(), "T_r0": tr.tolist(), "T_nr0": tnr.tolist(),
        "gamma": _prob(rng, t).tolist(), "L": L.tolist(),
        "W": w[:, :m].tolist(), "W_r0": w[:, m].tolist(), "W_nr0": w[:, m + 1].tolist(),
        "omega0": float(rng.uniform(0.0, 0.5)),
        "C": C.tolist(), "omega": _prob(rng, d).tolist(),
        "beta1": _prob(rng, m1).tolist(), "S1": S1.tolist(),
        "beta2": _prob(rng, m2).tolist(), "S2": S2.tolist(),
        "nu": _prob(rng, v).tolist(), "V": V.tolist(),
        "p": [float(rng.uniform(0.0, 0.95))],
    }


def random_model(seed: int, discrete: bool = False):
    m = from_config(random_config(seed))
    if discrete:
        step = float(np.random.default_rng(seed + 1000).uniform(0.05, 0.5))
        m = discretize(m, step, "exact")
    return m


RANDOM_SEEDS = list(range(50))


@pytest.fixture(scope="session")
def base_model():
    return example.model()


@pytest.fixture(scope="session")
def econ():
    return example.econ()


@pytest.fixture(scope="session")
def policy_models(base_model):
    return {name: example.policy_model(name, base_model) for name in example.POLICIES}


@pytest.fixture(scope="session")
def process(base_model):
    return build(base_model)


@pytest.fixture(scope="session")
def theta(base_model):
    return initial_distribution(base_model)


@pytest.fixture(scope="session")
def discrete_model(base_model):
    return discretize(base_model, 0.05, "exact")


@pytest.fixture(scope="session")
def discrete_process(discrete_model):
    return build(discrete_model)


# ---------------------------------------------------------------- exponential toy

TOY = dict(a=0.5, T_r0=(0.3, 0.5), T_nr0=(0.2, 1.5), lam=0.4, w=((0.5, 0.3), (0.0, 0.6)),
           W_r0=(0.1, 0.3), W_nr0=(0.1, 0.1), omega0=0.1, c=0.6, mu1=0.8, mu2=2.5, eta=3.0, p=0.4)


def toy_config(**overrides) -> dict:
    """Two levels of one phase each and every other component exponential."""
    k = dict(TOY, **overrides)
    r0, n0 = k["T_r0"], k["T_nr0"]
    T = [[-(k["a"] + r0[0] + n0[0]), k["a"]], [0.0, -(r0[1] + n0[1])]]
    return {
        "time_mode": "continuous", "levels": [1, 1], "alpha": [1, 0],
        "T": T, "T_r0": list(r0), "T_nr0": list(n0),
        "gamma": [1], "L": [[-k["lam"]]],
        "W": [list(r) for r in k["w"]], "W_r0": list(k["W_r0"]), "W_nr0": list(k["W_nr0"]),
        "omega0": k["omega0"], "C": [[k["c"]]], "omega": [1],
        "beta1": [1], "S1": [[-k["mu1"]]], "beta2": [1], "S2": [[-k["mu2"]]],
        "nu": [1], "V": [[-k["eta"]]], "p": [k["p"]],
    }


def toy_generator(**overrides) -> np.ndarray:
    """Generator written from the system rules, states (Ov0, Ov1, Onv0, RF, NRF, CR, PM)."""
    k = dict(TOY, **overrides)
    lam, w0, c = k["lam"], k["omega0"], k["c"]
    harm = lam * (1 - w0) * c  # shock that neither kills nor wrecks the damage chain
    fatal = lam * w0 + lam * (1 - w0) * (1 - c)
    OV0, OV1, ONV, RF, NRF, CR, PM = range(7)
    Q = np.zeros((7, 7))

    def rf(i):
        return k["T_r0"][i] + harm * k["W_r0"][i]

    def nrf(i):
        return k["T_nr0"][i] + fatal + harm * k["W_nr0"][i]

    up = k["a"] + harm * k["w"][0][1]  # level 1 -> level 2
    Q[OV0, OV1] += up
    Q[OV0, RF] += rf(0)
    Q[OV0, NRF] += nrf(0)
    Q[OV0, ONV] += k["eta"] * (1 - k["p"])  # return and stay; revacation is a self-loop
    Q[OV1, RF] += rf(1)
    Q[OV1, NRF] += nrf(1)
    Q[OV1, PM] += k["eta"]
    Q[ONV, PM] += up
    Q[ONV, CR] += rf(0)
    Q[ONV, OV0] += nrf(0)
    Q[RF, CR] += k["eta"]
    Q[NRF, OV0] += k["eta"]
    Q[CR, OV0] += k["mu1"]
    Q[PM, OV0] += k["mu2"]
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q
