"""Distributions, availability, reliability and event counts of a marked process."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import matkit
from .mmap_continuous import MarkedProcess
from .model import MACRO_STATES, StateLayout
from .phdist import ContinuousPH, DiscretePH, make_ph

# Label sums behind each event count
EVENT_LABELS = {
    "RF": ("RF", "RF+CR"),
    "NRF": ("NRF", "NRF+NU"),
    "CR": ("RF+CR", "R+CR"),
    "PM": ("PM", "R+PM"),
    "R": ("R", "R+CR", "R+PM", "R+NU", "R+NVP"),
    "NU": ("NRF+NU", "R+NU"),
    "NVP": ("R+NVP",),
}

EVENT_LABELS_D = {
    "RF": ("RF", "RF+CR", "R+RF+CR"),
    "NRF": ("NRF", "NRF+NU", "R+NRF+NU"),
    "CR": ("RF+CR", "R+RF+CR", "R+CR"),
    "PM": ("PM", "R+PM"),
    "R": ("R", "R+CR", "R+PM", "R+NU", "R+NVP", "R+RF+CR", "R+NRF+NU"),
    "NU": ("NRF+NU", "R+NRF+NU", "R+NU"),
    "NVP": ("R+NVP",),
}

EVENTS = tuple(EVENT_LABELS)

# Agreement demanded between the block-reduction and the direct stationary solves
TWO_METHOD_TOL = 1e-9


class StationaryMismatch(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class MacroDistribution:
    """Probability row over every phase, sliceable by macro-state."""

    vector: np.ndarray
    layout: StateLayout

    def block(self, macro: str | int) -> np.ndarray:
        return self.vector[self.layout.slice(macro)]

    def occupancy(self, macro: str | int) -> float:
        return float(self.block(macro).sum())

    def occupancies(self) -> dict[str, float]:
        return {name: self.occupancy(name) for name in MACRO_STATES}

    @property
    def availability(self) -> float:
        return availability(self)


@dataclass(frozen=True)
class EventRates:
    """Mean event counts (transient) or counts per unit time (stationary)."""

    RF: float
    NRF: float
    CR: float
    PM: float
    R: float
    NU: float
    NVP: float

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in EVENTS}

    def scaled(self, factor: float) -> "EventRates":
        return EventRates(**{k: v * factor for k, v in self.as_dict().items()})


def event_labels(process: MarkedProcess) -> dict[str, tuple[str, ...]]:
    return EVENT_LABELS_D if process.discrete else EVENT_LABELS


def event_columns(process: MarkedProcess) -> dict[str, np.ndarray]:
    """Per-phase event intensities ``(sum of label blocks) e`` for each count."""
    return {ev: sum(process.blocks[lab] for lab in labs).sum(axis=1)
            for ev, labs in event_labels(process).items()}


def _check_theta(process: MarkedProcess, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != process.layout.total:
        raise ValueError(f"initial row has length {theta.size}, expected {process.layout.total}")
    return theta


def transient(process: MarkedProcess, theta, t) -> MacroDistribution:
    """``theta exp(Q t)`` or ``theta D^nu``."""
    theta = _check_theta(process, theta)
    if process.discrete:
        power, _ = matkit.matrix_power_sum(process.matrix, _steps(t))
        vec = theta @ power
    else:
        vec = theta @ matkit.expm(process.matrix, t)
    return MacroDistribution(vec, process.layout)


def occupancy_integral(process: MarkedProcess, theta, t) -> np.ndarray:
    """``int_0^t p(u) du`` or ``sum_{n=0}^{nu} p^n``."""
    theta = _check_theta(process, theta)
    if process.discrete:
        _, total = matkit.matrix_power_sum(process.matrix, _steps(t) + 1)
        return theta @ total
    return theta @ matkit.expm_integral(process.matrix, t)


def _steps(nu) -> int:
    n = int(nu)
    if n != nu or n < 0:
        raise ValueError(f"discrete time must be a nonnegative integer, got {nu!r}")
    return n


def stationary_direct(process: MarkedProcess) -> np.ndarray:
    m = process.balance_matrix()
    return matkit.solve_normalized(m, np.ones(m.shape[0]))


def stationary_blocks(process: MarkedProcess) -> np.ndarray:
    """Eliminate every macro-state except ``Ov`` and solve the reduced system.

    Each of ``Onv``, ``RF``, ``NRF``, ``CR`` and ``PM`` is entered only from
    ``Ov`` (or from a state entered only from ``Ov``), so ``pi_j = pi_1 H_1j``
    with ``H_1j = -(M_1j + sum_i H_1i M_ij) M_jj^{-1}`` taken in topological order.
    """
    m = process.balance_matrix()
    lay = process.layout
    sl = [lay.slice(k) for k in range(len(MACRO_STATES))]
    # RF feeds CR and Onv feeds CR/PM, so those two come first
    order = (1, 2, 3, 4, 5)
    H: dict[int, np.ndarray] = {}
    for j in order:
        acc = m[sl[0], sl[j]].copy()
        for i, hi in H.items():
            acc += hi @ m[sl[i], sl[j]]
        mjj = m[sl[j], sl[j]]
        H[j] = -np.linalg.solve(mjj.T, acc.T).T
    reduced = m[sl[0], sl[0]].copy()
    mass = np.ones(lay.sizes[0])
    for j, hj in H.items():
        reduced += hj @ m[sl[j], sl[0]]
        mass += hj.sum(axis=1)
    pi1 = matkit.solve_normalized(reduced, mass)
    return np.concatenate([pi1] + [pi1 @ H[j] for j in order])


def stationary(process: MarkedProcess, check: bool = True) -> MacroDistribution:
    """Stationary distribution by block reduction, cross-checked by a full solve."""
    pi = stationary_blocks(process)
    if check:
        full = stationary_direct(process)
        gap = float(np.max(np.abs(pi - full)))
        if gap > TWO_METHOD_TOL:
            raise StationaryMismatch(f"block reduction and direct solve differ by {gap:.3g}")
    return MacroDistribution(pi, process.layout)


def availability(dist: MacroDistribution) -> float:
    return dist.occupancy("Ov") + dist.occupancy("Onv")


def availability_transient(process: MarkedProcess, theta, grid) -> np.ndarray:
    up = np.zeros(process.layout.total)
    up[process.layout.slice("Ov")] = 1.0
    up[process.layout.slice("Onv")] = 1.0
    return np.array([transient(process, theta, t).vector @ up for t in grid])


def _operational(process: MarkedProcess) -> slice:
    lay = process.layout
    return slice(0, lay.sizes[0] + lay.sizes[1])


def reliability(process: MarkedProcess, theta=None) -> ContinuousPH | DiscretePH:
    """Time to first exit from the operational macro-states as a PH distribution."""
    from .mmap_continuous import initial_distribution

    theta = initial_distribution(process.model) if theta is None else _check_theta(process, theta)
    op = _operational(process)
    return make_ph(theta[op], process.matrix[op, op], process.discrete)


def event_counts(process: MarkedProcess, theta, t) -> EventRates:
    """Mean number of each event up to ``t`` (or through period ``nu``)."""
    occ = occupancy_integral(process, theta, t)
    return EventRates(**{ev: float(occ @ col) for ev, col in event_columns(process).items()})


def event_rates_stationary(process: MarkedProcess, pi: MacroDistribution | np.ndarray) -> EventRates:
    vec = pi.vector if isinstance(pi, MacroDistribution) else np.asarray(pi, dtype=float)
    return EventRates(**{ev: float(vec @ col) for ev, col in event_columns(process).items()})


def write_series(path: str | Path, header: list[str], rows) -> Path:
    """Write a CSV time-series table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in row])
    return path


def transient_table(process: MarkedProcess, theta, grid) -> tuple[list[str], list[list]]:
    """Columns ``t, A, R, Psi_Y/t`` for every event on a time grid."""
    rel = reliability(process, theta)
    cols = event_columns(process)
    up = np.zeros(process.layout.total)
    up[: process.layout.sizes[0] + process.layout.sizes[1]] = 1.0
    header = ["t", "availability", "reliability"] + [f"{ev}_per_time" for ev in EVENTS]
    rows = []
    for t in grid:
        if process.discrete:
            p = transient(process, theta, t).vector
            occ = occupancy_integral(process, theta, t)
            horizon = t + 1
        else:
            e_qt, integ = matkit.expm_with_integral(process.matrix, t)
            p, occ, horizon = theta @ e_qt, theta @ integ, t
        rate = [float(occ @ cols[ev]) / horizon if horizon > 0 else float("nan") for ev in EVENTS]
        rows.append([float(t), float(p @ up), rel.survival(t)] + rate)
    return header, rows


__all__ = [
    "EVENTS", "EVENT_LABELS", "EVENT_LABELS_D", "MacroDistribution", "EventRates",
    "StationaryMismatch", "transient", "occupancy_integral", "stationary", "stationary_blocks",
    "stationary_direct", "availability", "availability_transient", "reliability", "event_counts",
    "event_rates_stationary", "event_columns", "write_series", "transient_table",
]
