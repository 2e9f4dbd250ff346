"""Declarative system model: inputs, validation, level selectors and state layout."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import matkit
from .phdist import PH, ValidationReport, Violation, make_ph

CONSERVATION_TOL = 1e-9

MACRO_STATES = ("Ov", "Onv", "RF", "NRF", "CR", "PM")

CONFIG_KEYS = (
    "time_mode", "levels", "alpha", "T", "T_r0", "T_nr0", "gamma", "L", "W", "W_r0",
    "W_nr0", "omega0", "C", "omega", "beta1", "S1", "beta2", "S2", "nu", "V", "p",
)


class ModelError(ValueError):
    """A config or model failed validation; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = [str(e) for e in errors]
        super().__init__("; ".join(self.errors))


def _col(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class InternalWear:
    levels: tuple[int, ...]
    ph: PH
    repairable_exit: np.ndarray
    nonrepairable_exit: np.ndarray

    @property
    def m(self) -> int:
        return self.ph.order

    @property
    def K(self) -> int:
        return len(self.levels)


@dataclass(frozen=True, eq=False)
class ShockStructure:
    clock: PH
    internal_effect: np.ndarray
    effect_repairable: np.ndarray
    effect_nonrepairable: np.ndarray
    kill_prob: float
    damage_chain: np.ndarray
    damage_init: np.ndarray

    @property
    def t(self) -> int:
        return self.clock.order

    @property
    def d(self) -> int:
        return self.damage_init.size

    @property
    def damage_exit(self) -> np.ndarray:
        return 1.0 - self.damage_chain.sum(axis=1)


@dataclass(frozen=True, eq=False)
class RepairFacility:
    corrective: PH
    preventive: PH
    vacation: PH
    stay_probs: np.ndarray


@dataclass(frozen=True)
class StateLayout:
    """Sizes and offsets of the six macro-states in the global phase vector."""

    sizes: tuple[int, ...]
    m: int
    m_op: int
    t: int
    d: int
    v: int
    m1: int
    m2: int

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.sizes)[:-1]]))

    @property
    def total(self) -> int:
        return int(sum(self.sizes))

    def slice(self, macro: int | str) -> slice:
        k = MACRO_STATES.index(macro) if isinstance(macro, str) else macro
        start = self.offsets[k]
        return slice(start, start + self.sizes[k])

    def factor_shapes(self, macro: int | str) -> tuple[int, ...]:
        k = MACRO_STATES.index(macro) if isinstance(macro, str) else macro
        return (
            (self.m, self.t, self.d, self.v),
            (self.m_op, self.t, self.d),
            (self.t, self.v),
            (self.t, self.v),
            (self.t, self.m1),
            (self.t, self.m2),
        )[k]

    def index(self, macro: int | str, phases: tuple[int, ...]) -> int:
        """Global index of a factor-phase tuple (leftmost factor slowest)."""
        k = MACRO_STATES.index(macro) if isinstance(macro, str) else macro
        local = int(np.ravel_multi_index(tuple(phases), self.factor_shapes(k)))
        return self.offsets[k] + local

    def locate(self, index: int) -> tuple[str, tuple[int, ...]]:
        """Inverse of :meth:`index`."""
        if not 0 <= index < self.total:
            raise IndexError(index)
        k = int(np.searchsorted(np.cumsum(self.sizes), index, side="right"))
        local = index - self.offsets[k]
        phases = np.unravel_index(local, self.factor_shapes(k))
        return MACRO_STATES[k], tuple(int(p) for p in phases)


@dataclass(frozen=True, eq=False)
class SystemModel:
    wear: InternalWear
    shocks: ShockStructure
    facility: RepairFacility
    time_mode: str = "continuous"

    @property
    def discrete(self) -> bool:
        return self.time_mode == "discrete"

    # short aliases for the raw matrices
    @property
    def levels(self) -> tuple[int, ...]:
        return self.wear.levels

    @property
    def K(self) -> int:
        return self.wear.K

    @property
    def m(self) -> int:
        return self.wear.m

    @property
    def m_op(self) -> int:
        return self.m - self.levels[-1]

    @property
    def alpha(self) -> np.ndarray:
        return self.wear.ph.init

    @property
    def T(self) -> np.ndarray:
        return self.wear.ph.matrix

    @property
    def T_r0(self) -> np.ndarray:
        return self.wear.repairable_exit

    @property
    def T_nr0(self) -> np.ndarray:
        return self.wear.nonrepairable_exit

    @property
    def gamma(self) -> np.ndarray:
        return self.shocks.clock.init

    @property
    def L(self) -> np.ndarray:
        return self.shocks.clock.matrix

    @property
    def L0(self) -> np.ndarray:
        return self.shocks.clock.exit

    @property
    def W(self) -> np.ndarray:
        return self.shocks.internal_effect

    @property
    def W_r0(self) -> np.ndarray:
        return self.shocks.effect_repairable

    @property
    def W_nr0(self) -> np.ndarray:
        return self.shocks.effect_nonrepairable

    @property
    def omega0(self) -> float:
        return self.shocks.kill_prob

    @property
    def C(self) -> np.ndarray:
        return self.shocks.damage_chain

    @property
    def C0(self) -> np.ndarray:
        return self.shocks.damage_exit

    @property
    def omega(self) -> np.ndarray:
        return self.shocks.damage_init

    @property
    def beta1(self) -> np.ndarray:
        return self.facility.corrective.init

    @property
    def S1(self) -> np.ndarray:
        return self.facility.corrective.matrix

    @property
    def beta2(self) -> np.ndarray:
        return self.facility.preventive.init

    @property
    def S2(self) -> np.ndarray:
        return self.facility.preventive.matrix

    @property
    def nu(self) -> np.ndarray:
        return self.facility.vacation.init

    @property
    def V(self) -> np.ndarray:
        return self.facility.vacation.matrix

    @property
    def V0(self) -> np.ndarray:
        return self.facility.vacation.exit

    @property
    def p(self) -> np.ndarray:
        return self.facility.stay_probs

    @property
    def level_of_phase(self) -> np.ndarray:
        """0-based level index of every internal phase."""
        return np.repeat(np.arange(self.K), self.levels)

    def to_config(self) -> dict[str, Any]:
        def mat(a):
            return np.asarray(a, dtype=float).tolist()

        return {
            "time_mode": self.time_mode,
            "levels": list(self.levels),
            "alpha": mat(self.alpha),
            "T": mat(self.T),
            "T_r0": mat(self.T_r0),
            "T_nr0": mat(self.T_nr0),
            "gamma": mat(self.gamma),
            "L": mat(self.L),
            "W": mat(self.W),
            "W_r0": mat(self.W_r0),
            "W_nr0": mat(self.W_nr0),
            "omega0": float(self.omega0),
            "C": mat(self.C),
            "omega": mat(self.omega),
            "beta1": mat(self.beta1),
            "S1": mat(self.S1),
            "beta2": mat(self.beta2),
            "S2": mat(self.S2),
            "nu": mat(self.nu),
            "V": mat(self.V),
            "p": mat(self.p),
        }

    def with_vacation(self, nu, V, p) -> "SystemModel":
        """Copy with the vacation PH and stay-probabilities replaced, then revalidated."""
        cfg = self.to_config()
        cfg.update(nu=_col(nu).tolist(), V=matkit.as_matrix(V).tolist(), p=_col(p).tolist())
        return from_config(cfg)


def _check_ph(name: str, ph: PH, errors: list, full_mass: bool = True) -> None:
    rep = ph.validate(CONSERVATION_TOL)
    errors.extend(f"{name}: {v}" for v in rep.violations)
    if full_mass and abs(ph.init.sum() - 1.0) > CONSERVATION_TOL:
        errors.append(f"{name}: initial vector must sum to 1 (sum {ph.init.sum():.6g})")


def _check_probability_row(name: str, x: np.ndarray, errors: list) -> None:
    if x.min() < -CONSERVATION_TOL or abs(x.sum() - 1.0) > CONSERVATION_TOL:
        errors.append(f"{name}: must be a probability vector (sum {x.sum():.6g})")


def _conservation(name: str, residual: np.ndarray, errors: list) -> None:
    for i, r in enumerate(residual):
        if abs(r) > CONSERVATION_TOL:
            errors.append(f"{name}: conservation violated at row {i + 1} (residual {r:+.6g})")


def validate_model(model: SystemModel) -> ValidationReport:
    """Collect every violated invariant of an assembled model."""
    errors: list[str] = []
    _validate_into(model, errors)
    return ValidationReport(tuple(Violation(e, None, 0.0) for e in errors))


def _validate_into(model: SystemModel, errors: list) -> None:
    discrete = model.discrete
    wear, sh, fac = model.wear, model.shocks, model.facility
    levels = wear.levels
    if len(levels) < 2:
        errors.append("levels: at least two degradation levels are required (K >= 2)")
    if any(n < 1 for n in levels):
        errors.append("levels: every level needs at least one phase")
    m = wear.m
    if sum(levels) != m:
        errors.append(f"levels: phase counts sum to {sum(levels)} but T has order {m}")
    _check_ph("alpha/T", wear.ph, errors)
    for name, vec in (("T_r0", wear.repairable_exit), ("T_nr0", wear.nonrepairable_exit)):
        if vec.size != m:
            errors.append(f"{name}: length {vec.size}, expected {m}")
        elif vec.min() < -CONSERVATION_TOL:
            errors.append(f"{name}: negative entry at row {int(vec.argmin()) + 1}")
    if wear.repairable_exit.size == m and wear.nonrepairable_exit.size == m:
        target = 1.0 if discrete else 0.0
        resid = wear.ph.matrix.sum(axis=1) + wear.repairable_exit + wear.nonrepairable_exit - target
        _conservation("T", resid, errors)

    _check_ph("gamma/L", sh.clock, errors)
    W = sh.internal_effect
    if W.shape != (m, m):
        errors.append(f"W: shape {W.shape}, expected {(m, m)}")
    for name, vec in (("W_r0", sh.effect_repairable), ("W_nr0", sh.effect_nonrepairable)):
        if vec.size != m:
            errors.append(f"{name}: length {vec.size}, expected {m}")
    if W.shape == (m, m) and sh.effect_repairable.size == m and sh.effect_nonrepairable.size == m:
        if min(W.min(), sh.effect_repairable.min(), sh.effect_nonrepairable.min()) < -CONSERVATION_TOL:
            errors.append("W, W_r0, W_nr0: entries must be nonnegative")
        resid = W.sum(axis=1) + sh.effect_repairable + sh.effect_nonrepairable - 1.0
        _conservation("W", resid, errors)
    if not 0.0 <= sh.kill_prob <= 1.0:
        errors.append(f"omega0: {sh.kill_prob} is outside [0, 1]")
    d = sh.d
    C = sh.damage_chain
    if C.shape != (d, d):
        errors.append(f"C: shape {C.shape}, expected {(d, d)}")
    else:
        if C.min() < -CONSERVATION_TOL:
            errors.append("C: entries must be nonnegative")
        c0 = 1.0 - C.sum(axis=1)
        for i, r in enumerate(c0):
            if r < -CONSERVATION_TOL:
                errors.append(f"C: row {i + 1} mass exceeds 1 (excess {-r:.6g})")
    _check_probability_row("omega", sh.damage_init, errors)

    _check_ph("beta1/S1", fac.corrective, errors)
    _check_ph("beta2/S2", fac.preventive, errors)
    _check_ph("nu/V", fac.vacation, errors)
    p = fac.stay_probs
    if p.size != len(levels) - 1:
        errors.append(f"p: length {p.size}, expected K-1 = {len(levels) - 1}")
    for k, pk in enumerate(p):
        if not 0.0 <= pk <= 1.0:
            errors.append(f"p: p_{k + 1} = {pk} is outside [0, 1]")
    for name, ph in (("alpha/T", wear.ph), ("gamma/L", sh.clock), ("beta1/S1", fac.corrective),
                     ("beta2/S2", fac.preventive), ("nu/V", fac.vacation)):
        if ph.discrete != discrete:
            errors.append(f"{name}: time mode does not match model time_mode {model.time_mode}")


def from_config(cfg: dict[str, Any]) -> SystemModel:
    """Build and validate a model from a config mapping; raises :class:`ModelError`."""
    errors: list[str] = []
    missing = [k for k in CONFIG_KEYS if k not in cfg]
    unknown = [k for k in cfg if k not in CONFIG_KEYS and not k.startswith("_")]
    if missing:
        errors.append(f"schema: missing keys {missing}")
    if unknown:
        errors.append(f"schema: unknown keys {unknown}")
    if errors:
        raise ModelError(errors)
    mode = cfg["time_mode"]
    if mode not in ("continuous", "discrete"):
        raise ModelError([f"time_mode: expected 'continuous' or 'discrete', got {mode!r}"])
    discrete = mode == "discrete"
    try:
        levels = tuple(int(n) for n in cfg["levels"])
        wear = InternalWear(levels, make_ph(cfg["alpha"], cfg["T"], discrete),
                            _col(cfg["T_r0"]), _col(cfg["T_nr0"]))
        shocks = ShockStructure(
            clock=make_ph(cfg["gamma"], cfg["L"], discrete),
            internal_effect=matkit.as_matrix(cfg["W"]),
            effect_repairable=_col(cfg["W_r0"]),
            effect_nonrepairable=_col(cfg["W_nr0"]),
            kill_prob=float(cfg["omega0"]),
            damage_chain=matkit.as_matrix(cfg["C"]),
            damage_init=_col(cfg["omega"]),
        )
        facility = RepairFacility(
            corrective=make_ph(cfg["beta1"], cfg["S1"], discrete),
            preventive=make_ph(cfg["beta2"], cfg["S2"], discrete),
            vacation=make_ph(cfg["nu"], cfg["V"], discrete),
            stay_probs=_col(cfg["p"]),
        )
    except (TypeError, ValueError) as exc:
        raise ModelError([f"schema: {exc}"]) from exc
    model = SystemModel(wear, shocks, facility, mode)
    _validate_into(model, errors)
    if errors:
        raise ModelError(errors)
    return model


def load(path: str | Path) -> SystemModel:
    with open(path) as fh:
        return from_config(json.load(fh))


def level_selector(model: SystemModel, k: int) -> np.ndarray:
    """Diagonal 0/1 matrix selecting the phases of level ``k`` (1-based)."""
    if not 1 <= k <= model.K:
        raise ValueError(f"level {k} outside 1..{model.K}")
    return np.diag((model.level_of_phase == k - 1).astype(float))


def noncritical_selectors(model: SystemModel) -> tuple[np.ndarray, np.ndarray]:
    """``(I | 0)`` restricting to levels below the critical one, and its transpose."""
    u = np.eye(model.m)[: model.m_op]
    return u, u.T.copy()


def layout(model: SystemModel) -> StateLayout:
    m, t, d = model.m, model.shocks.t, model.shocks.d
    v = model.facility.vacation.order
    m1, m2 = model.facility.corrective.order, model.facility.preventive.order
    m_op = model.m_op
    sizes = (m * t * d * v, m_op * t * d, t * v, t * v, t * m1, t * m2)
    return StateLayout(sizes, m, m_op, t, d, v, m1, m2)


def scaled(model: SystemModel, factor: float) -> SystemModel:
    """Continuous model with every rate matrix multiplied by ``factor``."""
    if model.discrete:
        raise ValueError("rate scaling only applies to continuous models")
    cfg = model.to_config()
    for key in ("T", "T_r0", "T_nr0", "L", "S1", "S2", "V"):
        cfg[key] = (np.asarray(cfg[key]) * factor).tolist()
    return from_config(cfg)


def _exact_step(sub_gen: np.ndarray, exits: list[np.ndarray], h: float):
    """One-step probabilities of a PH observed every ``h`` time units."""
    n = sub_gen.shape[0]
    k = len(exits)
    aug = np.zeros((n + k, n + k))
    aug[:n, :n] = sub_gen
    for j, ex in enumerate(exits):
        aug[:n, n + j] = ex
    big = matkit.expm(aug, h)
    return big[:n, :n], [big[:n, n + j] for j in range(k)]


def discretize(model: SystemModel, step: float = 0.05, method: str = "euler") -> SystemModel:
    """Discrete-time variant of a continuous model with period ``step``.

    ``euler`` uses ``I + step A`` (valid only while ``step * max rate <= 1``);
    ``exact`` uses the ``step``-skeleton of each PH component, valid for any rates.
    Probability inputs (W, C, omega0, initial vectors, p) are kept as they are.
    """
    if model.discrete:
        raise ValueError("model is already discrete")
    cfg = model.to_config()
    cfg["time_mode"] = "discrete"
    comps = {
        "T": [model.T_r0, model.T_nr0],
        "L": [],
        "S1": [],
        "S2": [],
        "V": [],
    }
    for key, exits in comps.items():
        a = np.asarray(cfg[key])
        if method == "euler":
            if step * np.max(-np.diag(a)) > 1 + 1e-12:
                raise ValueError(
                    f"euler step {step} too large for {key} (max rate {np.max(-np.diag(a)):.6g}); "
                    "use method='exact'"
                )
            cfg[key] = (np.eye(a.shape[0]) + step * a).tolist()
            new_exits = [step * e for e in exits]
        elif method == "exact":
            sub, new_exits = _exact_step(a, exits if exits else [-a.sum(axis=1)], step)
            cfg[key] = sub.tolist()
        else:
            raise ValueError(f"unknown discretization method {method!r}")
        if key == "T":
            cfg["T_r0"], cfg["T_nr0"] = (e.tolist() for e in new_exits)
    return from_config(cfg)
