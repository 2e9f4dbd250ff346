"""Vacation-policy search: order-3 Coxian vacation plus stay probabilities,
NSGA-II over (long-run profit rate, availability), and front selection rules."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .economics import EconomicParameters, cost_vector, total_profit_rate
from .measures import stationary
from .mmap_discrete import build
from .model import ModelError, SystemModel

log = logging.getLogger(__name__)

NU_COXIAN = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class PolicyParams:
    V: tuple[float, float, float, float, float]
    p: tuple[float, ...]

    def __post_init__(self):
        V = tuple(float(x) for x in self.V)
        p = tuple(float(x) for x in self.p)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "p", p)
        if len(V) != 5:
            raise ValueError("a Coxian of order 3 needs five rates V1..V5")
        V1, V2, V3, V4, V5 = V
        problems = []
        if min(V1, V3, V5) <= 0:
            problems.append("V1, V3 and V5 must be positive")
        if not 0 <= V2 <= V1:
            problems.append(f"need 0 <= V2 <= V1, got V2={V2}, V1={V1}")
        if not 0 <= V4 <= V3:
            problems.append(f"need 0 <= V4 <= V3, got V4={V4}, V3={V3}")
        if any(not 0 <= x <= 1 for x in p):
            problems.append(f"stay-or-leave probabilities must lie in [0, 1], got {p}")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def sub_generator(self) -> np.ndarray:
        V1, V2, V3, V4, V5 = self.V
        return np.array([[-V1, V2, 0.0], [0.0, -V3, V4], [0.0, 0.0, -V5]])

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyParams":
        return cls(tuple(d["V"]), tuple(d["p"]))

    def to_dict(self) -> dict:
        return {"V": list(self.V), "p": list(self.p)}


@dataclass(frozen=True)
class ParetoPoint:
    params: PolicyParams
    profit_rate: float
    availability: float

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.profit_rate, self.availability)

    def to_dict(self) -> dict:
        return {"f1": self.profit_rate, "f2": self.availability, **self.params.to_dict()}


@dataclass(frozen=True)
class Bounds:
    """Search box: log10-scaled V1, V3, V5 and [0, 1] for ratios and probabilities."""

    rate_min: float = 1e-2
    rate_max: float = 1e3

    @classmethod
    def from_dict(cls, d: dict) -> "Bounds":
        return cls(float(d.get("rate_min", 1e-2)), float(d.get("rate_max", 1e3)))


@dataclass(frozen=True)
class GAConfig:
    population: int = 80
    generations: int = 120
    seed: int = 1
    bounds: Bounds = field(default_factory=Bounds)
    crossover_prob: float = 0.9
    eta_crossover: float = 15.0
    eta_mutation: float = 20.0
    workers: int = 1


def instantiate(template: SystemModel, params: PolicyParams) -> SystemModel:
    if len(params.p) != template.K - 1:
        raise ValueError(f"model has {template.K} levels, so p needs {template.K - 1} entries")
    return template.with_vacation(NU_COXIAN, params.sub_generator, params.p)


def evaluate(template: SystemModel, econ: EconomicParameters, params: PolicyParams,
             onv_charge: str = "H") -> ParetoPoint:
    model = instantiate(template, params)
    process = build(model, check=False)
    pi = stationary(process, check=False)
    f1 = total_profit_rate(process, pi, cost_vector(model, econ, onv_charge), econ)
    f2 = pi.availability
    if not (np.isfinite(f1) and np.isfinite(f2)):
        raise ArithmeticError("non-finite objective")
    return ParetoPoint(params, f1, f2)


# ---------------------------------------------------------------- encoding

def _gene_bounds(bounds: Bounds, K: int) -> tuple[np.ndarray, np.ndarray]:
    lo_r, hi_r = np.log10(bounds.rate_min), np.log10(bounds.rate_max)
    lo = np.array([lo_r, 0.0, lo_r, 0.0, lo_r] + [0.0] * (K - 1))
    hi = np.array([hi_r, 1.0, hi_r, 1.0, hi_r] + [1.0] * (K - 1))
    return lo, hi


def decode(x: np.ndarray) -> PolicyParams:
    V1, V3, V5 = 10.0 ** x[0], 10.0 ** x[2], 10.0 ** x[4]
    return PolicyParams((V1, x[1] * V1, V3, x[3] * V3, V5), tuple(x[5:]))


def encode(params: PolicyParams) -> np.ndarray:
    V1, V2, V3, V4, V5 = params.V
    return np.array([np.log10(V1), V2 / V1, np.log10(V3), V4 / V3, np.log10(V5), *params.p])


# ---------------------------------------------------------------- NSGA-II pieces

def dominates(a, b) -> bool:
    """Maximization dominance."""
    return bool(np.all(np.asarray(a) >= np.asarray(b)) and np.any(np.asarray(a) > np.asarray(b)))


def nondominated_sort(f: np.ndarray) -> list[np.ndarray]:
    """Fast nondominated sorting of an (n, k) objective array, maximizing."""
    n = len(f)
    ge = np.all(f[:, None, :] >= f[None, :, :], axis=2)
    gt = np.any(f[:, None, :] > f[None, :, :], axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(count == 0)
    while current.size:
        fronts.append(current)
        count = count - dom[current].sum(axis=0)
        count[current] = -1
        current = np.flatnonzero(count == 0)
    assert sum(len(x) for x in fronts) == n
    return fronts


def crowding_distance(f: np.ndarray) -> np.ndarray:
    n, k = f.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(k):
        order = np.argsort(f[:, j], kind="stable")
        span = f[order[-1], j] - f[order[0], j]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (f[order[2:], j] - f[order[:-2], j]) / span
    return dist


def _rank_and_crowd(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rank = np.empty(len(f), dtype=int)
    crowd = np.empty(len(f))
    for r, idx in enumerate(nondominated_sort(f)):
        rank[idx] = r
        crowd[idx] = crowding_distance(f[idx])
    return rank, crowd


def _sbx(rng, a, b, lo, hi, eta, prob):
    """Simulated binary crossover with bounds."""
    c1, c2 = a.copy(), b.copy()
    if rng.random() > prob:
        return c1, c2
    for i in range(a.size):
        if rng.random() > 0.5 or abs(a[i] - b[i]) < 1e-14:
            continue
        y1, y2 = min(a[i], b[i]), max(a[i], b[i])
        u = rng.random()
        span = y2 - y1
        out = []
        for beta in (1.0 + 2.0 * (y1 - lo[i]) / span, 1.0 + 2.0 * (hi[i] - y2) / span):
            alpha = 2.0 - beta ** -(eta + 1.0)
            if u <= 1.0 / alpha:
                bq = (u * alpha) ** (1.0 / (eta + 1.0))
            else:
                bq = (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
            out.append(bq)
        x1 = 0.5 * ((y1 + y2) - out[0] * span)
        x2 = 0.5 * ((y1 + y2) + out[1] * span)
        x1, x2 = np.clip(x1, lo[i], hi[i]), np.clip(x2, lo[i], hi[i])
        if rng.random() < 0.5:
            x1, x2 = x2, x1
        c1[i], c2[i] = x1, x2
    return c1, c2


def _poly_mutation(rng, x, lo, hi, eta, prob):
    y = x.copy()
    for i in range(x.size):
        if rng.random() >= prob:
            continue
        span = hi[i] - lo[i]
        d1, d2 = (y[i] - lo[i]) / span, (hi[i] - y[i]) / span
        u = rng.random()
        power = 1.0 / (eta + 1.0)
        if u < 0.5:
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
            dq = val ** power - 1.0
        else:
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
            dq = 1.0 - val ** power
        y[i] = np.clip(y[i] + dq * span, lo[i], hi[i])
    return y


class _Evaluator:
    """Picklable objective wrapper; ``None`` marks an infeasible candidate."""

    def __init__(self, template, econ):
        self.template, self.econ = template, econ

    def __call__(self, x):
        try:
            return evaluate(self.template, self.econ, decode(x)).objectives
        except (ArithmeticError, ValueError, np.linalg.LinAlgError, ModelError) as exc:
            log.info("infeasible candidate %s: %s", np.round(x, 4).tolist(), exc)
            return None


def _evaluate_all(fn, xs, pool):
    return list(pool.map(fn, xs)) if pool is not None else [fn(x) for x in xs]


def _fill(fn, xs, rng, lo, hi, pool, max_redraws=50):
    """Evaluate ``xs``; infeasible rows are redrawn uniformly until they evaluate."""
    xs = np.array(xs)
    objs = _evaluate_all(fn, list(xs), pool)
    for _ in range(max_redraws):
        bad = [i for i, o in enumerate(objs) if o is None]
        if not bad:
            break
        for i in bad:
            xs[i] = rng.uniform(lo, hi)
        for i, o in zip(bad, _evaluate_all(fn, [xs[i] for i in bad], pool)):
            objs[i] = o
    else:
        raise RuntimeError("could not find feasible candidates")
    return xs, np.array(objs, dtype=float)


def pareto_front(template: SystemModel, econ: EconomicParameters,
                 config: GAConfig | None = None) -> list[ParetoPoint]:
    """NSGA-II run; returns the nondominated points of the final population."""
    config = config or GAConfig()
    rng = np.random.default_rng(config.seed)
    lo, hi = _gene_bounds(config.bounds, template.K)
    n = config.population
    fn = _Evaluator(template, econ)
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        pop, obj = _fill(fn, rng.uniform(lo, hi, size=(n, lo.size)), rng, lo, hi, pool)
        pm = 1.0 / lo.size
        for gen in range(config.generations - 1):
            rank, crowd = _rank_and_crowd(obj)

            def tournament():
                i, j = rng.integers(n, size=2)
                if rank[i] != rank[j]:
                    return i if rank[i] < rank[j] else j
                return i if crowd[i] >= crowd[j] else j

            kids = []
            while len(kids) < n:
                a, b = pop[tournament()], pop[tournament()]
                c1, c2 = _sbx(rng, a, b, lo, hi, config.eta_crossover, config.crossover_prob)
                kids.append(_poly_mutation(rng, c1, lo, hi, config.eta_mutation, pm))
                kids.append(_poly_mutation(rng, c2, lo, hi, config.eta_mutation, pm))
            kids, kid_obj = _fill(fn, kids[:n], rng, lo, hi, pool)
            allx, allf = np.vstack([pop, kids]), np.vstack([obj, kid_obj])
            keep = []
            for front in nondominated_sort(allf):
                if len(keep) + len(front) <= n:
                    keep.extend(front)
                    continue
                crowd_f = crowding_distance(allf[front])
                order = np.argsort(-crowd_f, kind="stable")
                keep.extend(front[order[: n - len(keep)]])
                break
            keep = np.array(keep)
            pop, obj = allx[keep], allf[keep]
            log.debug("generation %d: best f1 %.4f, best f2 %.4f", gen + 1, obj[:, 0].max(), obj[:, 1].max())
    finally:
        if pool is not None:
            pool.shutdown()
    first = nondominated_sort(obj)[0]
    seen, points = set(), []
    for i in sorted(first, key=lambda i: (-obj[i, 0], -obj[i, 1])):
        key = (obj[i, 0], obj[i, 1])
        if key in seen:
            continue
        seen.add(key)
        points.append(ParetoPoint(decode(pop[i]), float(obj[i, 0]), float(obj[i, 1])))
    return points


# ---------------------------------------------------------------- selection

def _require(front):
    if not front:
        raise ValueError("empty front")


def ideal_point(front) -> tuple[float, float]:
    _require(front)
    return (max(p.profit_rate for p in front), max(p.availability for p in front))


def normalized(front) -> np.ndarray:
    """Min-max normalized objectives; a constant objective maps to 1."""
    f = np.array([p.objectives for p in front], dtype=float)
    lo, hi = f.min(axis=0), f.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    out = (f - lo) / span
    out[:, hi == lo] = 1.0
    return out


def select_closest(front) -> ParetoPoint:
    """Point nearest the ideal point after normalization; ties favor larger f1, then f2."""
    _require(front)
    dist = np.linalg.norm(normalized(front) - 1.0, axis=1)
    best = min(range(len(front)),
               key=lambda i: (round(dist[i], 12), -front[i].profit_rate, -front[i].availability))
    return front[best]


def select_max_profit(front) -> ParetoPoint:
    _require(front)
    return max(front, key=lambda p: (p.profit_rate, p.availability))


def select_max_availability(front) -> ParetoPoint:
    _require(front)
    return max(front, key=lambda p: (p.availability, p.profit_rate))


def is_nondominated(front) -> bool:
    f = [p.objectives for p in front]
    return not any(dominates(a, b) for i, a in enumerate(f) for j, b in enumerate(f) if i != j)


def write_front(front, directory: str | Path) -> tuple[Path, Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, sel_path = out / "pareto.csv", out / "selection.json"
    n_p = len(front[0].params.p) if front else 0
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f1", "f2", "V1", "V2", "V3", "V4", "V5"] + [f"p{k + 1}" for k in range(n_p)])
        for pt in front:
            w.writerow([repr(x) for x in (pt.profit_rate, pt.availability, *pt.params.V, *pt.params.p)])
    selection = {
        "ideal_point": list(ideal_point(front)),
        "max_profit": select_max_profit(front).to_dict(),
        "closest_to_ideal": select_closest(front).to_dict(),
        "max_availability": select_max_availability(front).to_dict(),
    }
    sel_path.write_text(json.dumps(selection, indent=2) + "\n")
    return csv_path, sel_path


__all__ = [
    "PolicyParams", "ParetoPoint", "Bounds", "GAConfig", "instantiate", "evaluate", "encode",
    "decode", "pareto_front", "ideal_point", "select_closest", "select_max_profit",
    "select_max_availability", "is_nondominated", "nondominated_sort", "crowding_distance",
    "dominates", "normalized", "write_front",
]
