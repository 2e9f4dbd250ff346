"""Phase-type distributions in continuous and discrete time."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matkit


@dataclass(frozen=True)
class Violation:
    """One failed invariant: what, where (0-based row or None) and by how much."""

    rule: str
    row: int | None
    magnitude: float

    def __str__(self) -> str:
        where = "" if self.row is None else f" at row {self.row + 1}"
        return f"{self.rule}{where} (violation {self.magnitude:.3g})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return "fail: " + "; ".join(str(v) for v in self.violations)


def _row(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class ContinuousPH:
    """PH distribution with initial row ``init`` and sub-generator ``sub_gen``."""

    init: np.ndarray
    sub_gen: np.ndarray
    exit: np.ndarray = field(init=False, repr=False)

    discrete = False

    def __post_init__(self):
        init = _row(self.init)
        sub = matkit.as_matrix(self.sub_gen).copy()
        if sub.shape != (init.size, init.size):
            raise ValueError(f"init has length {init.size} but sub_gen has shape {sub.shape}")
        init.flags.writeable = False
        sub.flags.writeable = False
        object.__setattr__(self, "init", init)
        object.__setattr__(self, "sub_gen", sub)
        ex = -sub.sum(axis=1)
        ex.flags.writeable = False
        object.__setattr__(self, "exit", ex)

    @property
    def order(self) -> int:
        return self.init.size

    @property
    def matrix(self) -> np.ndarray:
        return self.sub_gen

    def validate(self, tol: float = matkit.EPS) -> ValidationReport:
        return validate(self, tol)

    def mean(self) -> float:
        return mean(self)

    def survival(self, t: float) -> float:
        return survival(self, t)

    def scaled(self, factor: float) -> "ContinuousPH":
        return ContinuousPH(self.init, self.sub_gen * factor)


@dataclass(frozen=True, eq=False)
class DiscretePH:
    """Discrete PH distribution on {1, 2, ...} with sub-stochastic ``sub_stoch``."""

    init: np.ndarray
    sub_stoch: np.ndarray
    exit: np.ndarray = field(init=False, repr=False)

    discrete = True

    def __post_init__(self):
        init = _row(self.init)
        sub = matkit.as_matrix(self.sub_stoch).copy()
        if sub.shape != (init.size, init.size):
            raise ValueError(f"init has length {init.size} but sub_stoch has shape {sub.shape}")
        init.flags.writeable = False
        sub.flags.writeable = False
        object.__setattr__(self, "init", init)
        object.__setattr__(self, "sub_stoch", sub)
        ex = 1.0 - sub.sum(axis=1)
        ex.flags.writeable = False
        object.__setattr__(self, "exit", ex)

    @property
    def order(self) -> int:
        return self.init.size

    @property
    def matrix(self) -> np.ndarray:
        return self.sub_stoch

    def validate(self, tol: float = matkit.EPS) -> ValidationReport:
        return validate(self, tol)

    def mean(self) -> float:
        return mean(self)

    def survival(self, t: int) -> float:
        return survival(self, t)


PH = ContinuousPH | DiscretePH


def make_ph(init, matrix, discrete: bool) -> PH:
    return DiscretePH(init, matrix) if discrete else ContinuousPH(init, matrix)


def validate(ph: PH, tol: float = matkit.EPS) -> ValidationReport:
    """Check sign, range and mass invariants; never raises."""
    out: list[Violation] = []
    init, a = ph.init, ph.matrix
    if not (np.all(np.isfinite(init)) and np.all(np.isfinite(a))):
        out.append(Violation("non-finite entries", None, float("inf")))
        return ValidationReport(tuple(out))
    if init.min() < -tol:
        out.append(Violation("negative initial probability", int(init.argmin()), float(-init.min())))
    if init.sum() > 1 + tol:
        out.append(Violation("initial mass exceeds 1", None, float(init.sum() - 1)))
    n = ph.order
    off = a - np.diag(np.diag(a))
    for i in range(n):
        if off[i].min() < -tol:
            out.append(Violation("negative off-diagonal entry", i, float(-off[i].min())))
    if ph.discrete:
        for i in range(n):
            if a[i, i] < -tol:
                out.append(Violation("negative diagonal probability", i, float(-a[i, i])))
            if a[i].max() > 1 + tol:
                out.append(Violation("probability above 1", i, float(a[i].max() - 1)))
            if a[i].sum() > 1 + tol:
                out.append(Violation("row mass exceeds 1", i, float(a[i].sum() - 1)))
    else:
        for i in range(n):
            if a[i, i] >= 0:
                out.append(Violation("diagonal rate not negative", i, float(a[i, i])))
            if a[i].sum() > tol:
                out.append(Violation("row sum positive", i, float(a[i].sum())))
    return ValidationReport(tuple(out))


def _fundamental(ph: PH) -> np.ndarray:
    n = ph.order
    return np.eye(n) - ph.sub_stoch if ph.discrete else -ph.sub_gen


def mean(ph: PH) -> float:
    """Mean time to absorption: ``init (-A)^{-1} e`` or ``init (I - A)^{-1} e``."""
    m = _fundamental(ph)
    try:
        x = np.linalg.solve(m, np.ones(ph.order))
    except np.linalg.LinAlgError as exc:
        raise matkit.SingularSystemError("absorption is unreachable from some phase") from exc
    return float(ph.init @ x)


def survival(ph: PH, t) -> float:
    """P(X > t)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if ph.discrete:
        power, _ = matkit.matrix_power_sum(ph.sub_stoch, int(t))
        return float(ph.init @ power.sum(axis=1))
    return float(ph.init @ matkit.expm(ph.sub_gen, t).sum(axis=1))


def embedded_stationary(ph: PH) -> np.ndarray:
    """Stationary phase vector of the renewal chain ``A + A0 init``."""
    a = ph.matrix + np.outer(ph.exit, ph.init)
    if ph.discrete:
        a = a - np.eye(ph.order)
    return matkit.solve_normalized(a, np.ones(ph.order))
