"""Net reward vector, cumulative and long-run profit, and the break-even time."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import matkit
from .measures import event_columns, occupancy_integral
from .mmap_continuous import MarkedProcess
from .model import SystemModel, layout

BREAK_EVEN_CAP = 1e6
NEVER = "never"

# Per-unit-time charge while the repairperson waits in the facility with a working unit
ONV_CHARGES = ("H", "F")


@dataclass(frozen=True)
class EconomicParameters:
    B: float
    C: float
    c0: tuple[float, ...]
    cd: tuple[float, ...]
    cr1: tuple[float, ...]
    cr2: tuple[float, ...]
    H: float
    F: float
    G: float
    fcr: float
    fpm: float
    fnu: float

    def __post_init__(self):
        for name in ("c0", "cd", "cr1", "cr2"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        bad = [n for n in ("G", "fcr", "fpm", "fnu") if getattr(self, n) < 0]
        if bad:
            raise ValueError(f"fixed costs must be nonnegative: {', '.join(bad)}")

    @classmethod
    def from_dict(cls, cfg: dict) -> "EconomicParameters":
        cfg = {k: v for k, v in cfg.items() if not k.startswith("_")}
        if "fmu" in cfg and "fnu" not in cfg:
            cfg["fnu"] = cfg.pop("fmu")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(cfg) - names)
        missing = sorted(names - set(cfg))
        if unknown or missing:
            raise ValueError(f"economics config: unknown keys {unknown}, missing keys {missing}")
        return cls(**cfg)

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in fields(self)}

    def per_period(self, step: float) -> "EconomicParameters":
        """Copy with every per-unit-time charge scaled to a period of length ``step``."""
        d = self.to_dict()
        for k in ("B", "C", "H", "F"):
            d[k] = d[k] * step
        for k in ("c0", "cd", "cr1", "cr2"):
            d[k] = [x * step for x in d[k]]
        return EconomicParameters(**d)

    def check_dimensions(self, model: SystemModel) -> None:
        want = {"c0": model.m, "cd": model.shocks.d, "cr1": model.beta1.size, "cr2": model.beta2.size}
        wrong = [f"{k} has length {len(getattr(self, k))}, expected {n}"
                 for k, n in want.items() if len(getattr(self, k)) != n]
        if wrong:
            raise ValueError("; ".join(wrong))


def load(path: str | Path) -> EconomicParameters:
    return EconomicParameters.from_dict(json.loads(Path(path).read_text()))


def cost_vector(model: SystemModel, econ: EconomicParameters, onv_charge: str = "H") -> np.ndarray:
    """Net reward per unit time in every phase.

    ``onv_charge`` picks the staffing charge in ``Onv``, where the unit works and
    the repairperson is on site: ``"H"`` (presence cost) or ``"F"`` (vacation
    cost, the printed block).
    """
    if onv_charge not in ONV_CHARGES:
        raise ValueError(f"onv_charge must be one of {ONV_CHARGES}")
    econ.check_dimensions(model)
    lay = layout(model)
    t, d, v, m_op = lay.t, lay.d, lay.v, lay.m_op
    c0, cd = np.array(econ.c0), np.array(econ.cd)
    staff = econ.H if onv_charge == "H" else econ.F
    ov = (econ.B - econ.F) - np.kron(c0, np.ones(t * d * v)) - matkit.kron(np.ones(model.m * t), cd, np.ones(v)).ravel()
    onv = (econ.B - staff) - np.kron(c0[:m_op], np.ones(t * d)) - np.kron(np.ones(m_op * t), cd)
    broken = np.full(t * v, -(econ.C + econ.F))
    cr = -(econ.C + econ.H) - np.kron(np.ones(t), econ.cr1)
    pm = -(econ.C + econ.H) - np.kron(np.ones(t), econ.cr2)
    return np.concatenate([ov, onv, broken, broken, cr, pm])


def fixed_cost_rates(process: MarkedProcess, econ: EconomicParameters) -> np.ndarray:
    """Per-phase expected fixed cost per unit time (or per period) from events."""
    cols = event_columns(process)
    return cols["NU"] * econ.fnu + cols["CR"] * econ.fcr + cols["PM"] * econ.fpm + cols["R"] * econ.G


def profit_transient(process: MarkedProcess, theta, c, t) -> float:
    """Accumulated net reward ``Phi`` up to ``t`` (or through period ``nu``)."""
    return float(occupancy_integral(process, theta, t) @ np.asarray(c, dtype=float))


def total_profit(process: MarkedProcess, theta, c, econ: EconomicParameters, t) -> float:
    """Net total profit up to ``t``, charging the initial unit."""
    occ = occupancy_integral(process, theta, t)
    net = np.asarray(c, dtype=float) - fixed_cost_rates(process, econ)
    return float(occ @ net) - econ.fnu


def total_profit_rate(process: MarkedProcess, pi, c, econ: EconomicParameters) -> float:
    vec = getattr(pi, "vector", pi)
    return float(np.asarray(vec) @ (np.asarray(c, dtype=float) - fixed_cost_rates(process, econ)))


def total_profit_series(process: MarkedProcess, theta, c, econ: EconomicParameters, grid) -> np.ndarray:
    return np.array([total_profit(process, theta, c, econ, t) for t in grid])


def break_even(process: MarkedProcess, theta, c, econ: EconomicParameters, pi=None,
               cap: float = BREAK_EVEN_CAP) -> float | str:
    """First time the cumulative profit turns positive, or ``"never"``.

    Doubling grid from 1 up to ``cap`` brackets the first sign change, which
    is then refined by Brent's method (continuous) or integer bisection
    (discrete periods).
    """
    from .measures import stationary

    pi = stationary(process) if pi is None else pi
    if total_profit_rate(process, pi, c, econ) <= 0:
        return NEVER

    def f(x):
        return total_profit(process, theta, c, econ, x)

    lo, f_lo = 0, f(0)
    if f_lo > 0:
        return 0.0
    hi = 1.0
    while hi <= cap:
        f_hi = f(hi)
        if f_hi > 0:
            break
        lo, f_lo = hi, f_hi
        hi *= 2
    else:
        return NEVER
    if process.discrete:
        a, b = int(lo), int(hi)
        while b - a > 1:
            mid = (a + b) // 2
            a, b = (mid, b) if f(mid) <= 0 else (a, mid)
        return float(b)
    if f_lo == 0:
        return float(lo)
    return float(brentq(f, lo, hi, xtol=1e-9 * hi, rtol=1e-12))


__all__ = [
    "EconomicParameters", "load", "cost_vector", "fixed_cost_rates", "profit_transient",
    "total_profit", "total_profit_rate", "total_profit_series", "break_even", "NEVER",
    "BREAK_EVEN_CAP",
]
