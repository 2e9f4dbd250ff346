"""Flat sampling tables for the simulation kernels.

Each table row holds cumulative weights over the possible targets, with exits
appended as extra columns. Continuous rows hold rates (diagonal dropped),
discrete rows hold one-period probabilities (diagonal kept), so both kernels
sample a target the same way: scale a uniform by the row total and scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Macro-state codes shared by both kernels
OV, ONV, RF, NRF, CR, PM = range(6)

# Event label codes
LABELS = ("RF", "NRF", "R", "PM", "RF+CR", "NRF+NU", "R+CR", "R+NU", "R+PM", "R+NVP",
          "R+RF+CR", "R+NRF+NU")


@dataclass(frozen=True, eq=False)
class Tables:
    discrete: int
    K: int
    level: np.ndarray       # int32, 0-based level per internal phase
    stay_p: np.ndarray      # leave-again probability per level (length K)
    omega0: float
    T_tab: np.ndarray       # m x (m + 2): targets, then repairable, nonrepairable
    L_tab: np.ndarray       # t x (t + 1): targets, then shock
    V_tab: np.ndarray       # v x (v + 1): targets, then return
    S1_tab: np.ndarray      # z1 x (z1 + 1): targets, then completion
    S2_tab: np.ndarray
    W_tab: np.ndarray       # m x (m + 2), probabilities
    C_tab: np.ndarray       # d x (d + 1): damage targets, then destruction
    alpha_cum: np.ndarray
    gamma_cum: np.ndarray
    clock0_cum: np.ndarray  # clock phase at time zero
    omega_cum: np.ndarray
    nu_cum: np.ndarray
    beta1_cum: np.ndarray
    beta2_cum: np.ndarray
    rew_ov: np.ndarray      # m * d, indexed i * d + u
    rew_onv: np.ndarray
    rew_broken: float
    rew_cr: np.ndarray
    rew_pm: np.ndarray


def _table(matrix, exits, discrete: bool) -> np.ndarray:
    a = np.array(matrix, dtype=float)
    if not discrete:
        np.fill_diagonal(a, 0.0)
    full = np.column_stack([a] + [np.asarray(e, dtype=float).reshape(-1) for e in exits])
    full = np.clip(full, 0.0, None)
    return np.ascontiguousarray(np.cumsum(full, axis=1))


def _cum(x) -> np.ndarray:
    return np.ascontiguousarray(np.cumsum(np.clip(np.asarray(x, dtype=float).reshape(-1), 0.0, None)))


def _stationary_clock(model) -> np.ndarray:
    from ..phdist import embedded_stationary

    return embedded_stationary(model.shocks.clock)


def build_tables(model, econ=None, onv_charge: str = "H") -> Tables:
    """Sampling tables from the raw model inputs (never from the assembled blocks)."""
    disc = bool(model.discrete)
    m, d = model.m, model.shocks.d
    z1, z2 = model.beta1.size, model.beta2.size
    stay = np.zeros(model.K)
    stay[: model.K - 1] = model.p
    if econ is None:
        rew_ov = rew_onv = np.zeros(m * d)
        broken, rcr, rpm = 0.0, np.zeros(z1), np.zeros(z2)
    else:
        c0, cd = np.asarray(econ.c0), np.asarray(econ.cd)
        base = -(c0[:, None] + cd[None, :]).reshape(-1)
        staff = econ.H if onv_charge == "H" else econ.F
        rew_ov = econ.B - econ.F + base
        rew_onv = econ.B - staff + base
        broken = -(econ.C + econ.F)
        rcr = -(econ.C + econ.H) - np.asarray(econ.cr1, dtype=float)
        rpm = -(econ.C + econ.H) - np.asarray(econ.cr2, dtype=float)
    return Tables(
        discrete=int(disc),
        K=model.K,
        level=np.ascontiguousarray(model.level_of_phase, dtype=np.int32),
        stay_p=stay,
        omega0=float(model.omega0),
        T_tab=_table(model.T, [model.T_r0, model.T_nr0], disc),
        L_tab=_table(model.L, [model.L0], disc),
        V_tab=_table(model.V, [model.V0], disc),
        S1_tab=_table(model.S1, [model.facility.corrective.exit], disc),
        S2_tab=_table(model.S2, [model.facility.preventive.exit], disc),
        W_tab=_table(model.W, [model.W_r0, model.W_nr0], True),
        C_tab=_table(model.C, [model.C0], True),
        alpha_cum=_cum(model.alpha),
        gamma_cum=_cum(model.gamma),
        clock0_cum=_cum(_stationary_clock(model)),
        omega_cum=_cum(model.omega),
        nu_cum=_cum(model.nu),
        beta1_cum=_cum(model.beta1),
        beta2_cum=_cum(model.beta2),
        rew_ov=np.ascontiguousarray(rew_ov, dtype=float),
        rew_onv=np.ascontiguousarray(rew_onv, dtype=float),
        rew_broken=float(broken),
        rew_cr=np.ascontiguousarray(rcr, dtype=float),
        rew_pm=np.ascontiguousarray(rpm, dtype=float),
    )
