"""Monte Carlo oracle: simulates the unit, the shocks and the vacationing
repairperson directly from the model inputs, never from the assembled blocks."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ._sim import BACKEND, LABELS, build_tables, kernel
from .measures import EVENT_LABELS_D, EVENTS, MacroDistribution, availability, event_rates_stationary
from .model import MACRO_STATES, SystemModel

THREADS_ENV = "MMAP_REL_THREADS"


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 2e5
    replications: int = 20
    seed: int = 1
    warmup: float | None = None  # default: 1% of the horizon

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if not 0 <= self.window_start < self.horizon:
            raise ValueError("need horizon > warmup >= 0")

    @property
    def window_start(self) -> float:
        return 0.01 * self.horizon if self.warmup is None else float(self.warmup)


@dataclass
class SimEstimates:
    """Per-replication samples of every estimated quantity plus 95% t-intervals."""

    samples: dict[str, np.ndarray]
    label_counts: np.ndarray  # replications x labels
    config: SimConfig
    backend: str = BACKEND
    level: float = 0.95
    intervals: dict[str, tuple[float, float]] = field(init=False)

    def __post_init__(self):
        self.intervals = {k: mean_halfwidth(v, self.level) for k, v in self.samples.items()}

    @property
    def replications(self) -> int:
        return self.config.replications

    def mean(self, key: str) -> float:
        return self.intervals[key][0]

    def halfwidth(self, key: str) -> float:
        return self.intervals[key][1]

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "horizon": self.config.horizon,
            "warmup": self.config.window_start,
            "replications": self.config.replications,
            "seed": self.config.seed,
            "confidence": self.level,
            "estimates": {k: {"mean": m, "halfwidth": h} for k, (m, h) in self.intervals.items()},
        }


def mean_halfwidth(x, level: float = 0.95) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), float("inf")
    q = stats.t.ppf(0.5 + level / 2, x.size - 1)
    return float(x.mean()), float(q * x.std(ddof=1) / np.sqrt(x.size))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def quantity_names() -> list[str]:
    return ["availability"] + [f"occ_{s}" for s in MACRO_STATES] + [f"rate_{e}" for e in EVENTS]


def simulate(model: SystemModel, econ=None, config: SimConfig | None = None,
             onv_charge: str = "H", backend=None) -> SimEstimates:
    """Independent replications; estimates are merged in replication order."""
    config = config or SimConfig()
    kern = backend or kernel
    tables = build_tables(model, econ, onv_charge)
    children = np.random.SeedSequence(config.seed).spawn(config.replications)
    start, horizon = config.window_start, float(config.horizon)
    window = horizon - start
    if model.discrete:
        # periods observed are start, start+1, ..., horizon-1
        window = float(np.ceil(horizon) - np.ceil(start))

    def one(child):
        return kern.simulate_one(tables, horizon, start, np.random.Philox(child))

    n_threads = _threads()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            runs = list(pool.map(one, children))
    else:
        runs = [one(c) for c in children]

    occ = np.array([r[0] for r in runs]) / window
    counts = np.array([r[1] for r in runs], dtype=np.int64)
    reward = np.array([r[2] for r in runs])
    if np.any(np.abs(occ.sum(axis=1) - 1.0) > 1e-9):
        raise ArithmeticError("occupancy fractions do not sum to 1")

    idx = {lab: k for k, lab in enumerate(LABELS)}
    samples = {"availability": occ[:, 0] + occ[:, 1]}
    for k, name in enumerate(MACRO_STATES):
        samples[f"occ_{name}"] = occ[:, k]
    event_counts = {}
    for ev, labs in EVENT_LABELS_D.items():
        event_counts[ev] = counts[:, [idx[lab] for lab in labs]].sum(axis=1)
        samples[f"rate_{ev}"] = event_counts[ev] / window
    for lab in LABELS:
        samples[f"label_{lab}"] = counts[:, idx[lab]] / window
    if econ is not None:
        fixed = (event_counts["NU"] * econ.fnu + event_counts["CR"] * econ.fcr
                 + event_counts["PM"] * econ.fpm + event_counts["R"] * econ.G)
        samples["profit_rate"] = (reward - fixed) / window
    return SimEstimates(samples, counts, config, getattr(kern, "BACKEND", "custom"))


def analytic_targets(process, pi: MacroDistribution, econ=None, onv_charge: str = "H") -> dict[str, float]:
    """Analytic values of every quantity the simulator estimates."""
    out = {"availability": availability(pi)}
    out.update({f"occ_{k}": v for k, v in pi.occupancies().items()})
    out.update({f"rate_{k}": v for k, v in event_rates_stationary(process, pi).as_dict().items()})
    if econ is not None:
        from .economics import cost_vector, total_profit_rate

        out["profit_rate"] = total_profit_rate(process, pi, cost_vector(process.model, econ, onv_charge), econ)
    return out


@dataclass
class ComparisonRow:
    name: str
    analytic: float
    estimate: float
    halfwidth: float
    covered: bool

    @property
    def deviation(self) -> float:
        return self.estimate - self.analytic


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    alpha: float
    per_quantity_level: float
    required_fraction: float = 0.95

    @property
    def coverage(self) -> float:
        return sum(r.covered for r in self.rows) / len(self.rows)

    @property
    def passed(self) -> bool:
        return self.coverage >= self.required_fraction

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "per_quantity_level": self.per_quantity_level,
            "coverage": self.coverage,
            "passed": self.passed,
            "rows": [dict(r.__dict__, deviation=r.deviation) for r in self.rows],
        }

    def __str__(self) -> str:
        lines = [f"{'quantity':<16}{'analytic':>14}{'simulated':>14}{'half-width':>12}  covered"]
        for r in self.rows:
            lines.append(f"{r.name:<16}{r.analytic:>14.6g}{r.estimate:>14.6g}{r.halfwidth:>12.3g}  {r.covered}")
        lines.append(f"coverage {self.coverage:.3f} at per-quantity level {self.per_quantity_level:.5f}: "
                     f"{'pass' if self.passed else 'fail'}")
        return "\n".join(lines)


def compare(analytic: dict[str, float], empirical: SimEstimates, alpha: float = 0.05,
            names: list[str] | None = None) -> ComparisonReport:
    """Bonferroni-adjusted t-interval coverage of each analytic value.

    With ``q`` quantities each interval has level ``1 - alpha / q``. A quantity
    whose replications never saw the rare event (zero spread) is covered when
    the analytic mean count over the whole run is below one event, i.e. when
    seeing none is the expected outcome.
    """
    if empirical.replications < 1:
        raise ValueError("no replications")
    names = names or [k for k in quantity_names() if k in analytic]
    missing = [k for k in names if k not in empirical.samples or k not in analytic]
    if missing:
        raise KeyError(f"quantities without a match: {missing}")
    level = 1.0 - alpha / len(names)
    cfg = empirical.config
    window = cfg.horizon - cfg.window_start
    rows = []
    for k in names:
        x = empirical.samples[k]
        mean, hw = mean_halfwidth(x, level)
        target = analytic[k]
        if hw == 0.0:
            covered = abs(target - mean) * window * x.size < 1.0
        else:
            covered = abs(target - mean) <= hw
        rows.append(ComparisonRow(k, float(target), mean, hw, bool(covered)))
    return ComparisonReport(rows, alpha, level)


def write_report(path: str | Path, estimates: SimEstimates, report: ComparisonReport | None = None) -> Path:
    doc = estimates.to_dict()
    if report is not None:
        doc["comparison"] = report.to_dict()
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


__all__ = [
    "SimConfig", "SimEstimates", "simulate", "compare", "analytic_targets", "ComparisonReport",
    "ComparisonRow", "quantity_names", "write_report", "mean_halfwidth", "THREADS_ENV",
]
