"""Continuous-time marked Markovian arrival process of the maintained unit."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from . import matkit
from .matkit import kron
from .model import MACRO_STATES, StateLayout, SystemModel, layout, level_selector, noncritical_selectors
from .phdist import embedded_stationary

LABELS = ("O", "RF", "NRF", "R", "PM", "RF+CR", "NRF+NU", "R+CR", "R+NU", "R+PM", "R+NVP")

# (source, target) macro-state cells each label may occupy
CELLS = {
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
    "R+NVP": {("Ov", "Ov")},
}


class ConservationError(ValueError):
    def __init__(self, message: str, state: int, residual: float):
        self.state = state
        self.residual = residual
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class MarkedProcess:
    """Labelled event blocks plus their sum (generator or transition matrix)."""

    layout: StateLayout
    blocks: MappingProxyType
    matrix: np.ndarray
    discrete: bool
    model: SystemModel

    @property
    def generator(self) -> np.ndarray:
        if self.discrete:
            raise AttributeError("discrete processes have a transition matrix, not a generator")
        return self.matrix

    @property
    def transition(self) -> np.ndarray:
        if not self.discrete:
            raise AttributeError("continuous processes have a generator, not a transition matrix")
        return self.matrix

    def cell(self, src: str | int, dst: str | int, label: str | None = None) -> np.ndarray:
        """Sub-block of the assembled matrix (or of one label) between two macro-states."""
        a = self.matrix if label is None else self.blocks[label]
        return a[self.layout.slice(src), self.layout.slice(dst)]

    def balance_matrix(self) -> np.ndarray:
        """``Q`` for continuous, ``D - I`` for discrete: the matrix with ``pi M = 0``."""
        if self.discrete:
            return self.matrix - np.eye(self.matrix.shape[0])
        return self.matrix


def _one(x) -> np.ndarray:
    return np.ones((1, 1)) if x is None else matkit.as_matrix(x)


def _col(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(-1, 1)


def _shock_restart(model: SystemModel) -> np.ndarray:
    """``L0 gamma``: rate (or probability) of a shock followed by a clock restart."""
    return np.outer(model.L0, model.gamma)


def h_rf(model: SystemModel, U) -> np.ndarray:
    """Repairable-failure flows out of the working phases picked by ``U``."""
    U = matkit.as_matrix(U)
    t, d = model.shocks.t, model.shocks.d
    lg = _shock_restart(model) * (1.0 - model.omega0)
    ce = model.C.sum(axis=1, keepdims=True)
    return (kron(U @ _col(model.T_r0), np.eye(t), np.ones((d, 1)))
            + kron(U @ _col(model.W_r0), lg, ce))


def h_nrf(model: SystemModel, U, R=None, A=None) -> np.ndarray:
    """Non-repairable failure flows; ``R``/``A`` redistribute internal/damage phases.

    ``None`` for ``R`` or ``A`` stands for the scalar 1 (that factor collapses).
    """
    U, R, A = matkit.as_matrix(U), _one(R), _one(A)
    t, d = model.shocks.t, model.shocks.d
    shock = _shock_restart(model)
    e_m = np.ones((model.m, 1))
    e_d = np.ones((d, 1))
    ce = model.C.sum(axis=1, keepdims=True)
    return (kron(U @ _col(model.T_nr0) @ R, np.eye(t), e_d @ A)
            + kron(U @ _col(model.W_nr0) @ R, shock * (1.0 - model.omega0), ce @ A)
            + kron(U @ e_m @ R, shock * model.omega0, e_d @ A)
            + kron(U @ e_m @ R, shock * (1.0 - model.omega0), _col(model.C0) @ A))


def h_o(model: SystemModel, U, R, A) -> np.ndarray:
    """Event-free flows: internal moves, clock moves and harmless shocks."""
    U, R, A = matkit.as_matrix(U), matkit.as_matrix(R), matkit.as_matrix(A)
    t = model.shocks.t
    lg = _shock_restart(model) * (1.0 - model.omega0)
    return (kron(U @ model.T @ R, np.eye(t), A)
            + kron(U @ R, model.L, A)
            + kron(U @ model.W @ R, lg, model.C @ A))


def initial_distribution(model: SystemModel) -> np.ndarray:
    """New unit, stationary shock clock, vacation just started; zero outside O^v."""
    lay = layout(model)
    theta = np.zeros(lay.total)
    theta[lay.slice("Ov")] = kron(model.alpha, embedded_stationary(model.shocks.clock),
                                  model.omega, model.nu).ravel()
    return theta


class _Assembler:
    def __init__(self, model: SystemModel, labels):
        self.lay = layout(model)
        n = self.lay.total
        self.blocks = {lab: np.zeros((n, n)) for lab in labels}

    def put(self, label: str, src: str, dst: str, block: np.ndarray) -> None:
        rows, cols = self.lay.slice(src), self.lay.slice(dst)
        target = self.blocks[label][rows, cols]
        if block.shape != target.shape:
            raise ValueError(f"{label} block {src}->{dst} has shape {block.shape}, expected {target.shape}")
        target += block


def check_row_sums(matrix: np.ndarray, target: float, lay: StateLayout, tol: float = 1e-9) -> None:
    resid = matrix.sum(axis=1) - target
    worst = int(np.argmax(np.abs(resid)))
    if abs(resid[worst]) > tol:
        macro, phases = lay.locate(worst)
        raise ConservationError(
            f"row {worst} ({macro} {phases}) sums to {target + resid[worst]:.12g}, expected {target}",
            worst, float(resid[worst]),
        )


def build_blocks(model: SystemModel, check: bool = True) -> MarkedProcess:
    """Assemble the eleven labelled blocks and the generator."""
    if model.discrete:
        raise ValueError("build_blocks needs a continuous model; use mmap_discrete.build_blocks_d")
    asm = _Assembler(model, LABELS)
    K = model.K
    t, d = model.shocks.t, model.shocks.d
    v = model.facility.vacation.order
    I_m, I_t, I_d, I_v = np.eye(model.m), np.eye(t), np.eye(d), np.eye(v)
    e_d, e_m = np.ones((d, 1)), np.ones((model.m, 1))
    U_op, U_op_t = noncritical_selectors(model)
    U_K_e = level_selector(model, K) @ e_m
    V, V0, nu = model.V, _col(model.V0), matkit.as_matrix(model.nu)
    beta1, beta2 = matkit.as_matrix(model.beta1), matkit.as_matrix(model.beta2)
    alpha, omega = matkit.as_matrix(model.alpha), matkit.as_matrix(model.omega)
    clock = model.L + _shock_restart(model)
    S1, S2 = model.S1, model.S2
    S1_0, S2_0 = -S1.sum(axis=1, keepdims=True), -S2.sum(axis=1, keepdims=True)

    asm.put("PM", "Onv", "PM", kron(h_o(model, U_op, U_K_e, np.ones((d, 1))), beta2))
    asm.put("RF+CR", "Onv", "CR", kron(h_rf(model, U_op), beta1))
    asm.put("NRF+NU", "Onv", "Ov", kron(h_nrf(model, U_op, alpha, omega), nu))
    asm.put("RF", "Ov", "RF", kron(h_rf(model, I_m), I_v))
    asm.put("NRF", "Ov", "NRF", kron(h_nrf(model, I_m), I_v))
    stay = sum(kron(level_selector(model, k) @ U_op_t, I_t, I_d, V0 * (1.0 - model.p[k - 1]))
               for k in range(1, K))
    asm.put("R", "Ov", "Onv", stay)
    asm.put("R+PM", "Ov", "PM", kron(U_K_e, I_t, e_d, V0, beta2))
    leave = sum(kron(level_selector(model, k), I_t, I_d, model.p[k - 1] * V0 @ nu)
                for k in range(1, K))
    asm.put("R+NVP", "Ov", "Ov", leave)
    asm.put("R+CR", "RF", "CR", kron(I_t, V0, beta1))
    asm.put("R+NU", "NRF", "Ov", kron(alpha, I_t, omega, V0 @ nu))

    asm.put("O", "Ov", "Ov", kron(h_o(model, I_m, I_m, I_d), I_v) + kron(I_m, I_t, I_d, V))
    asm.put("O", "Onv", "Onv", h_o(model, U_op, U_op_t, I_d))
    for broken in ("RF", "NRF"):
        asm.put("O", broken, broken, kron(I_t, V) + kron(clock, I_v))
    asm.put("O", "CR", "CR", kron(I_t, S1) + kron(clock, np.eye(S1.shape[0])))
    asm.put("O", "PM", "PM", kron(I_t, S2) + kron(clock, np.eye(S2.shape[0])))
    asm.put("O", "CR", "Ov", kron(alpha, I_t, omega, S1_0, nu))
    asm.put("O", "PM", "Ov", kron(alpha, I_t, omega, S2_0, nu))

    gen = sum(asm.blocks.values())
    if check:
        check_row_sums(gen, 0.0, asm.lay)
    blocks = {k: _frozen(b) for k, b in asm.blocks.items()}
    return MarkedProcess(asm.lay, MappingProxyType(blocks), _frozen(gen), False, model)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def cell_mask(lay: StateLayout, cells) -> np.ndarray:
    """Boolean mask of the union of the given (source, target) macro cells."""
    mask = np.zeros((lay.total, lay.total), dtype=bool)
    for src, dst in cells:
        mask[lay.slice(src), lay.slice(dst)] = True
    return mask


def dump_blocks(process: MarkedProcess, directory, prefix: str | None = None) -> list:
    """Write every block as ``<prefix>_<label>.csv``; returns the written paths."""
    from pathlib import Path

    prefix = prefix or ("D" if process.discrete else "Q")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for label, block in process.blocks.items():
        path = out / f"{prefix}_{label}.csv"
        np.savetxt(path, block, delimiter=",", fmt="%.17g")
        paths.append(path)
    return paths


__all__ = [
    "LABELS", "CELLS", "MACRO_STATES", "MarkedProcess", "ConservationError", "h_rf", "h_nrf",
    "h_o", "build_blocks", "initial_distribution", "cell_mask", "dump_blocks", "check_row_sums",
]
