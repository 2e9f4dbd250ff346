"""Acceptance criteria 1-7, each at its stated tolerance.

Every test prints one ``criterion N: pass|fail ...`` line to the terminal.
Run directly with ``python3 tests/test_acceptance.py`` for the summary alone.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmap_rel import example, measures, optimizer, sim_oracle  # noqa: E402
from mmap_rel.measures import EVENTS  # noqa: E402
from mmap_rel.mmap_continuous import initial_distribution  # noqa: E402
from mmap_rel.mmap_discrete import build  # noqa: E402
from mmap_rel.model import discretize  # noqa: E402
from mmap_rel.optimizer import GAConfig, ParetoPoint  # noqa: E402
from mmap_rel.phdist import ContinuousPH  # noqa: E402

from conftest import RANDOM_SEEDS, random_model  # noqa: E402


# ---------------------------------------------------------------- checks

def check_1():
    m = example.model()
    got = {
        "corrective": m.facility.corrective.mean(),
        "preventive": m.facility.preventive.mean(),
        "shock": m.shocks.clock.mean(),
    }
    want = {"corrective": 6.4384, "preventive": 1.1645, "shock": 5.0}
    start = np.cumsum((0,) + tuple(m.levels))
    for k, (a, b) in enumerate(zip(start[:-1], start[1:])):
        sub = m.T[a:b, a:b]
        init = np.zeros(b - a)
        init[0] = 1.0
        got[f"level{k + 1}"] = ContinuousPH(init, sub).mean()
    want.update(level1=100.0, level2=11.375, level3=1.4)
    err = {k: abs(got[k] - want[k]) for k in want}
    worst = max(err, key=err.get)
    return all(e < 1e-3 for e in err.values()), f"worst {worst} |err|={err[worst]:.2e}"


def check_2():
    worst = 0.0
    p = build(example.model())
    worst = max(worst, np.max(np.abs(p.generator.sum(axis=1))))
    pd = build(discretize(example.model(), 0.05, "exact"))
    worst = max(worst, np.max(np.abs(pd.transition.sum(axis=1) - 1.0)))
    for seed in RANDOM_SEEDS:
        worst = max(worst, np.max(np.abs(build(random_model(seed)).generator.sum(axis=1))))
        D = build(random_model(seed, True)).transition
        worst = max(worst, np.max(np.abs(D.sum(axis=1) - 1.0)))
    return worst < 1e-9, f"max row-sum residual {worst:.2e} over example + 2x50 random models"


def check_3():
    worst = 0.0
    models = [example.model(), discretize(example.model(), 0.05, "exact")]
    models += [random_model(s, d) for s in RANDOM_SEEDS for d in (False, True)]
    for m in models:
        p = build(m)
        worst = max(worst, np.max(np.abs(measures.stationary_blocks(p) - measures.stationary_direct(p))))
    return worst < 1e-9, f"max |block - direct| {worst:.2e} over {len(models)} models"


def check_4():
    cells = example.reproduce()
    misses = [f"{c.policy}/{c.quantity} {c.computed:.4g} vs {c.reported:.4g}"
              if not isinstance(c.computed, str) else f"{c.policy}/{c.quantity}"
              for c in cells if not c.ok]
    detail = f"{len(cells) - len(misses)}/{len(cells)} figures within tolerance"
    if misses:
        detail += "; misses: " + ", ".join(misses)
    return not misses, detail


def _sim_cases():
    base, e = example.model(), example.econ()
    for name in example.POLICIES:
        m = example.policy_model(name, base)
        yield name, "continuous", m, e
        # discrete horizon and warm-up are counted in periods
        yield name, "discrete", discretize(m, 0.05, "exact"), e.per_period(0.05)


def check_5():
    cfg = sim_oracle.SimConfig(horizon=2e5, replications=20, seed=1)
    failed, total, uncovered = [], 0, 0
    for name, mode, m, e in _sim_cases():
        p = build(m)
        targets = sim_oracle.analytic_targets(p, measures.stationary(p), e)
        report = sim_oracle.compare(targets, sim_oracle.simulate(m, e, cfg))
        total += len(report.rows)
        miss = [r.name for r in report.rows if not r.covered]
        uncovered += len(miss)
        if miss:
            failed.append(f"{name}/{mode}: {','.join(miss)}")
    detail = f"{total - uncovered}/{total} quantities covered"
    if failed:
        detail += "; uncovered " + "; ".join(failed)
    return not failed, detail


def check_6():
    base, e = example.model(), example.econ()
    front = optimizer.pareto_front(base, e, GAConfig(seed=1))
    f1 = max(p.profit_rate for p in front)
    f2 = max(p.availability for p in front)
    ref, pols = example.published(), example.policies()
    pub = [ParetoPoint(pols[k], ref[k]["profit_rate"], ref[k]["availability"]) for k in example.POLICIES]
    pick = optimizer.select_closest(pub)
    picked = [k for k, pt in zip(example.POLICIES, pub) if pt is pick][0]
    ok = optimizer.is_nondominated(front) and f1 >= 0.26 and f2 >= 0.915 and picked == "model2"
    return ok, (f"{len(front)} nondominated points, max f1={f1:.4f}, max f2={f2:.4f}, "
                f"ideal-point pick on published front={picked}")


def check_7():
    m = example.model()
    p, theta = build(m), initial_distribution(m)
    pi = measures.stationary(p)
    t = 1e4
    a_err = abs(measures.transient(p, theta, t).availability - pi.availability)
    stat = measures.event_rates_stationary(p, pi).as_dict()
    counts = measures.event_counts(p, theta, t).as_dict()
    err = {ev: abs(counts[ev] / t - stat[ev]) for ev in EVENTS}
    bad = {ev: e for ev, e in err.items() if e >= 1e-4}
    ok = a_err < 1e-6 and not bad
    detail = f"|A(t)-A|={a_err:.1e}, max event gap {max(err.values()):.1e}"
    if bad:
        detail += " (over 1e-4: " + ", ".join(f"{k} {v:.1e}" for k, v in bad.items()) + ")"
    return ok, detail


CHECKS = {1: check_1, 2: check_2, 3: check_3, 4: check_4, 5: check_5, 6: check_6, 7: check_7}


def run(n):
    ok, detail = CHECKS[n]()
    return ok, f"criterion {n}: {'pass' if ok else 'fail'} ({detail})"


# ---------------------------------------------------------------- pytest

def _assert(n, capsys):
    ok, line = run(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_1_ph_means(capsys):
    _assert(1, capsys)


def test_criterion_2_row_sums(capsys):
    _assert(2, capsys)


def test_criterion_3_stationary_methods(capsys):
    _assert(3, capsys)


def test_criterion_4_reported_figures(capsys):
    _assert(4, capsys)


@pytest.mark.slow
def test_criterion_5_simulation_oracle(capsys):
    _assert(5, capsys)


@pytest.mark.slow
def test_criterion_6_pareto_front(capsys):
    _assert(6, capsys)


def test_criterion_7_transient_limits(capsys):
    _assert(7, capsys)


if __name__ == "__main__":
    results = [run(n) for n in CHECKS]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
