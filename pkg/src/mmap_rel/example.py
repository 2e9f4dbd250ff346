"""Bundled worked example: inputs, the three reported vacation policies and
the reported figures, plus a side-by-side reproduction."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from . import economics, measures
from .mmap_continuous import initial_distribution
from .mmap_discrete import build
from .model import SystemModel, from_config
from .optimizer import PolicyParams, instantiate

POLICIES = ("model1", "model2", "model3")

# Tolerances for each reported figure: (kind, value)
TOLERANCES = {
    "availability": ("abs", 0.01),
    "profit_rate": ("abs", 0.01),
    "occupancy": ("abs", 0.01),
    "mean_first_failure": ("rel", 0.02),
    "break_even": ("rel", 0.02),
}


def _data(name: str) -> dict:
    return json.loads(resources.files("mmap_rel").joinpath("data", name).read_text())


def data_path(name: str):
    return resources.files("mmap_rel").joinpath("data", name)


def model() -> SystemModel:
    return from_config(_data("paper_example.json"))


def econ() -> economics.EconomicParameters:
    return economics.EconomicParameters.from_dict(_data("paper_economics.json"))


def policies() -> dict[str, PolicyParams]:
    return {k: PolicyParams.from_dict(v) for k, v in _data("policies.json").items()}


def published() -> dict:
    return {k: v for k, v in _data("published.json").items() if not k.startswith("_")}


def policy_model(name: str, template: SystemModel | None = None) -> SystemModel:
    return instantiate(template or model(), policies()[name])


def compute(m: SystemModel, e: economics.EconomicParameters, onv_charge: str = "H",
            with_break_even: bool = True) -> dict:
    """Every figure reported for one policy."""
    process = build(m)
    pi = measures.stationary(process)
    c = economics.cost_vector(m, e, onv_charge)
    theta = initial_distribution(m)
    out = {
        "availability": pi.availability,
        "profit_rate": economics.total_profit_rate(process, pi, c, e),
        "occupancy": pi.occupancies(),
        "mean_first_failure": measures.reliability(process, theta).mean(),
        "event_rates": measures.event_rates_stationary(process, pi).as_dict(),
    }
    if with_break_even:
        out["break_even"] = economics.break_even(process, theta, c, e, pi)
    return out


@dataclass
class Cell:
    policy: str
    quantity: str
    computed: float | str
    reported: float | str
    ok: bool

    @property
    def deviation(self):
        if isinstance(self.computed, str) or isinstance(self.reported, str):
            return None
        return self.computed - self.reported


def _within(kind: str, tol: float, got, want) -> bool:
    if isinstance(got, str) or isinstance(want, str):
        return got == want
    if kind == "abs":
        return abs(got - want) <= tol
    return abs(got - want) <= tol * abs(want)


def reproduce(onv_charge: str = "H") -> list[Cell]:
    """Compare computed figures with the reported ones for all three policies."""
    base, e, ref = model(), econ(), published()
    cells = []
    for name in POLICIES:
        got = compute(policy_model(name, base), e, onv_charge)
        want = ref[name]
        for q, (kind, tol) in TOLERANCES.items():
            if q == "occupancy":
                for s, w in want[q].items():
                    g = got[q][s]
                    cells.append(Cell(name, f"occupancy_{s}", g, w, _within(kind, tol, g, w)))
            else:
                cells.append(Cell(name, q, got[q], want[q], _within(kind, tol, got[q], want[q])))
    return cells


def format_cells(cells: list[Cell]) -> str:
    lines = [f"{'policy':<8}{'quantity':<22}{'computed':>14}{'reported':>14}{'deviation':>12}  ok"]
    for c in cells:
        fmt = lambda x: f"{x:>14.6g}" if not isinstance(x, str) else f"{x:>14}"  # noqa: E731
        dev = c.deviation
        lines.append(f"{c.policy:<8}{c.quantity:<22}{fmt(c.computed)}{fmt(c.reported)}"
                     f"{'' if dev is None else f'{dev:+.4g}':>12}  {'yes' if c.ok else 'NO'}")
    return "\n".join(lines)
