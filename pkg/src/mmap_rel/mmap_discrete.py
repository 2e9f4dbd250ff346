"""Discrete-time marked Markovian arrival process of the maintained unit.

Within one period the internal wear step, the shock clock step and the
vacation step all happen, so several events can coincide (for instance a
failure and the repairperson's return, labelled ``R+RF+CR``).
"""

from __future__ import annotations

from types import MappingProxyType

import numpy as np

from . import matkit
from .matkit import kron
from .mmap_continuous import (
    MarkedProcess,
    _Assembler,
    _col,
    _frozen,
    _one,
    _shock_restart,
    check_row_sums,
    initial_distribution,
)
from .model import SystemModel, level_selector, noncritical_selectors

LABELS_D = ("O", "RF", "NRF", "R", "PM", "RF+CR", "NRF+NU", "R+CR", "R+NU", "R+PM",
            "R+RF+CR", "R+NRF+NU", "R+NVP")

CELLS_D = {
    "O": {("Ov", "Ov"), ("Onv", "Onv"), ("RF", "RF"), ("NRF", "NRF"), ("CR", "CR"),
          ("PM", "PM"), ("CR", "Ov"), ("PM", "Ov")},
    "RF": {("Ov", "RF")},
    "NRF": {("Ov", "NRF")},
    "R": {("Ov", "Onv")},
    "PM": {("Onv", "PM")},
    "RF+CR": {("Onv", "CR")},
    "NRF+NU": {("Onv", "Ov")},
    "R+CR": {("RF", "CR")},
    "R+NU": {("NRF", "Ov")},
    "R+PM": {("Ov", "PM")},
    "R+RF+CR": {("Ov", "CR")},
    "R+NRF+NU": {("Ov", "Ov")},
    "R+NVP": {("Ov", "Ov")},
}


def h_rf_d(model: SystemModel, U) -> np.ndarray:
    """One-period probabilities of a repairable failure from the phases picked by ``U``."""
    U = matkit.as_matrix(U)
    d = model.shocks.d
    lg = _shock_restart(model) * (1.0 - model.omega0)
    ce = model.C.sum(axis=1, keepdims=True)
    return (kron(U @ _col(model.T_r0), model.L, np.ones((d, 1)))
            + kron(U @ (_col(model.T_r0) + model.T @ _col(model.W_r0)), lg, ce))


def h_nrf_d(model: SystemModel, U, R=None, A=None) -> np.ndarray:
    """One-period probabilities of a non-repairable failure (``None`` = scalar 1)."""
    U, R, A = matkit.as_matrix(U), _one(R), _one(A)
    d = model.shocks.d
    shock = _shock_restart(model)
    e_m, e_d = np.ones((model.m, 1)), np.ones((d, 1))
    ce = model.C.sum(axis=1, keepdims=True)
    internal = _col(model.T_nr0) + model.T @ _col(model.W_nr0)
    return (kron(U @ _col(model.T_nr0) @ R, model.L, e_d @ A)
            + kron(U @ internal @ R, shock * (1.0 - model.omega0), ce @ A)
            + kron(U @ e_m @ R, shock * model.omega0, e_d @ A)
            + kron(U @ e_m @ R, shock * (1.0 - model.omega0), _col(model.C0) @ A))


def h_o_d(model: SystemModel, U, R, A) -> np.ndarray:
    """One-period probabilities of staying operational without any event."""
    U, R, A = matkit.as_matrix(U), matkit.as_matrix(R), matkit.as_matrix(A)
    lg = _shock_restart(model) * (1.0 - model.omega0)
    return kron(U @ model.T @ R, model.L, A) + kron(U @ model.T @ model.W @ R, lg, model.C @ A)


def build_blocks_d(model: SystemModel, check: bool = True) -> MarkedProcess:
    """Assemble the thirteen labelled blocks and the one-step transition matrix."""
    if not model.discrete:
        raise ValueError("build_blocks_d needs a discrete model")
    asm = _Assembler(model, LABELS_D)
    K = model.K
    d = model.shocks.d
    I_m, I_d = np.eye(model.m), np.eye(d)
    e_m, e_d = np.ones((model.m, 1)), np.ones((d, 1))
    U_op, U_op_t = noncritical_selectors(model)
    U_K_e = level_selector(model, K) @ e_m
    V, V0, nu = model.V, _col(model.V0), matkit.as_matrix(model.nu)
    beta1, beta2 = matkit.as_matrix(model.beta1), matkit.as_matrix(model.beta2)
    alpha, omega = matkit.as_matrix(model.alpha), matkit.as_matrix(model.omega)
    clock = model.L + _shock_restart(model)
    S1, S2 = model.S1, model.S2
    S1_0, S2_0 = 1.0 - S1.sum(axis=1, keepdims=True), 1.0 - S2.sum(axis=1, keepdims=True)

    asm.put("PM", "Onv", "PM", kron(h_o_d(model, U_op, U_K_e, e_d), beta2))
    asm.put("RF+CR", "Onv", "CR", kron(h_rf_d(model, U_op), beta1))
    asm.put("NRF+NU", "Onv", "Ov", kron(h_nrf_d(model, U_op, alpha, omega), nu))
    asm.put("RF", "Ov", "RF", kron(h_rf_d(model, I_m), V))
    asm.put("NRF", "Ov", "NRF", kron(h_nrf_d(model, I_m), V))
    # the level the returning repairperson sees is the one reached at the end of the period
    stay = sum(kron(h_o_d(model, I_m, level_selector(model, k) @ U_op_t, I_d), (1.0 - model.p[k - 1]) * V0)
               for k in range(1, K))
    asm.put("R", "Ov", "Onv", stay)
    asm.put("R+PM", "Ov", "PM", kron(h_o_d(model, I_m, U_K_e, e_d), V0, beta2))
    leave = sum(kron(h_o_d(model, I_m, level_selector(model, k), I_d), model.p[k - 1] * V0 @ nu)
                for k in range(1, K))
    asm.put("R+NVP", "Ov", "Ov", leave)
    asm.put("R+CR", "RF", "CR", kron(clock, V0, beta1))
    asm.put("R+NU", "NRF", "Ov", kron(alpha, clock, omega, V0 @ nu))
    asm.put("R+RF+CR", "Ov", "CR", kron(h_rf_d(model, I_m), V0, beta1))
    asm.put("R+NRF+NU", "Ov", "Ov", kron(h_nrf_d(model, I_m, alpha, omega), V0 @ nu))

    asm.put("O", "Ov", "Ov", kron(h_o_d(model, I_m, I_m, I_d), V))
    asm.put("O", "Onv", "Onv", h_o_d(model, U_op, U_op_t, I_d))
    for broken in ("RF", "NRF"):
        asm.put("O", broken, broken, kron(clock, V))
    asm.put("O", "CR", "CR", kron(clock, S1))
    asm.put("O", "PM", "PM", kron(clock, S2))
    asm.put("O", "CR", "Ov", kron(alpha, clock, omega, S1_0, nu))
    asm.put("O", "PM", "Ov", kron(alpha, clock, omega, S2_0, nu))

    trans = sum(asm.blocks.values())
    if check:
        check_row_sums(trans, 1.0, asm.lay)
    blocks = {k: _frozen(b) for k, b in asm.blocks.items()}
    return MarkedProcess(asm.lay, MappingProxyType(blocks), _frozen(trans), True, model)


def build(model: SystemModel, check: bool = True) -> MarkedProcess:
    """Build the process matching the model's time mode."""
    from .mmap_continuous import build_blocks

    return build_blocks_d(model, check) if model.discrete else build_blocks(model, check)


__all__ = ["LABELS_D", "CELLS_D", "h_rf_d", "h_nrf_d", "h_o_d", "build_blocks_d", "build",
           "initial_distribution"]
