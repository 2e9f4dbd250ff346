"""Dense matrix kernels shared by the model builders and solvers."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import linalg

EPS = 1e-9


class SingularSystemError(np.linalg.LinAlgError):
    """Raised when a normalized balance system cannot be solved."""


def as_matrix(a) -> np.ndarray:
    """Coerce scalars, vectors and nested lists to a 2-D float array."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(1, -1)
    return arr


def ones(n: int) -> np.ndarray:
    """Column vector of ones."""
    return np.ones((n, 1))


def kron(*factors) -> np.ndarray:
    """Kronecker product of one or more factors, left to right."""
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def _check_square(q: np.ndarray) -> np.ndarray:
    q = as_matrix(q)
    if q.shape[0] != q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    return q


def expm(q, t: float = 1.0) -> np.ndarray:
    """``exp(q t)`` by scaling and squaring with a Pade approximant."""
    q = _check_square(q)
    if t < 0:
        raise ValueError("t must be nonnegative")
    return linalg.expm(q * t)


def expm_integral(q, t: float) -> np.ndarray:
    """Integral of ``exp(q u)`` over ``[0, t]``.

    Read off the upper-right block of ``exp([[q, I], [0, 0]] t)``, which avoids
    inverting ``q`` (singular for a conservative generator).
    """
    q = _check_square(q)
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = q.shape[0]
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = q
    aug[:n, n:] = np.eye(n)
    return linalg.expm(aug * t)[:n, n:]


def expm_with_integral(q, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(exp(q t), integral of exp(q u) over [0, t])`` from one exponential."""
    q = _check_square(q)
    n = q.shape[0]
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = q
    aug[:n, n:] = np.eye(n)
    big = linalg.expm(aug * t)
    return big[:n, :n], big[:n, n:]


def matrix_power_sum(d, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(d**n, sum_{k=0}^{n-1} d**k)`` with O(log n) products.

    Uses the halving recursion ``S(2k) = S(k) (I + d**k)`` and
    ``S(k+1) = I + d S(k)``.
    """
    d = _check_square(d)
    if n < 0:
        raise ValueError("n must be nonnegative")
    size = d.shape[0]
    eye = np.eye(size)
    if n == 0:
        return eye.copy(), np.zeros_like(d)
    power, total = d.copy(), eye.copy()  # n = 1
    for bit in bin(n)[3:]:
        total = total + total @ power
        power = power @ power
        if bit == "1":
            total = eye + d @ total
            power = power @ d
    return power, total


def solve_normalized(a, mass) -> np.ndarray:
    """Solve ``x a = 0`` with ``x mass = 1``.

    The first balance equation is dropped and replaced by the normalization
    column: ``x = (1, 0, ..., 0) [mass | a without its first column]^{-1}``.
    """
    a = _check_square(a)
    mass = np.asarray(mass, dtype=float).reshape(-1)
    n = a.shape[0]
    if mass.shape[0] != n:
        raise ValueError(f"mass has length {mass.shape[0]}, expected {n}")
    system = np.empty((n, n))
    system[:, 0] = mass
    system[:, 1:] = a[:, 1:]
    rhs = np.zeros(n)
    rhs[0] = 1.0
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        try:
            lu, piv = linalg.lu_factor(system.T, check_finite=True)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SingularSystemError(str(exc)) from exc
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or pivots.min() <= 1e-13 * max(pivots.max(), 1.0):
        raise SingularSystemError("replaced balance system is singular; model may be reducible")
    return linalg.lu_solve((lu, piv), rhs)
