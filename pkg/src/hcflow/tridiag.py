"""Cyclic (periodic) tridiagonal linear systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .errors import NotDiagonallyDominant, SingularSystem


@dataclass(frozen=True)
class CyclicTridiagonalSystem:
    """Row ``j`` reads ``lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j]``.

    Indices wrap, so ``lower[0]`` is the corner entry ``A[0, J-1]`` and
    ``upper[J-1]`` is ``A[J-1, 0]``. ``rhs`` may carry several columns.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    @property
    def J(self) -> int:
        return self.diag.shape[0]

    def dominance_margin(self) -> np.ndarray:
        return self.diag - np.abs(self.lower) - np.abs(self.upper)

    def dense(self) -> np.ndarray:
        J = self.J
        A = np.diag(self.diag).astype(float)
        idx = np.arange(J)
        A[idx, (idx - 1) % J] += self.lower
        A[idx, (idx + 1) % J] += self.upper
        return A

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = (-1,) + (1,) * (x.ndim - 1)
        return (
            self.lower.reshape(shape) * np.roll(x, 1, axis=0)
            + self.diag.reshape(shape) * x
            + self.upper.reshape(shape) * np.roll(x, -1, axis=0)
        )


def check_diagonal_dominance(system: CyclicTridiagonalSystem) -> None:
    margin = system.dominance_margin()
    bad = np.flatnonzero(~(margin > 0))
    if bad.size:
        j = int(bad[0])
        raise NotDiagonallyDominant(j, float(margin[j]))


def solve_cyclic_tridiagonal(system: CyclicTridiagonalSystem, check: bool = True) -> np.ndarray:
    """Solve a strictly diagonally dominant cyclic tridiagonal system.

    The corner couplings are removed by a rank-one Sherman-Morrison update,
    leaving an ordinary tridiagonal matrix that is factored once for all
    right-hand side columns together with the correction vector.
    """
    if check:
        check_diagonal_dominance(system)
    J = system.J
    if J < 3:
        raise ValueError("cyclic tridiagonal solve needs J >= 3")
    rhs = np.asarray(system.rhs, dtype=float)
    squeeze = rhs.ndim == 1
    if squeeze:
        rhs = rhs[:, None]

    gamma = -system.diag[0]
    corner_low = system.upper[-1]  # A[J-1, 0]
    corner_up = system.lower[0]  # A[0, J-1]

    ab = np.empty((3, J))
    ab[0, 0] = 0.0
    ab[0, 1:] = system.upper[:-1]
    ab[1] = system.diag
    ab[1, 0] -= gamma
    ab[1, -1] -= corner_low * corner_up / gamma
    ab[2, :-1] = system.lower[1:]
    ab[2, -1] = 0.0

    u = np.zeros(J)
    u[0] = gamma
    u[-1] = corner_low
    try:
        sol = solve_banded((1, 1), ab, np.column_stack([rhs, u]), check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from None
    y, z = sol[:, :-1], sol[:, -1]

    denom = 1.0 + z[0] + corner_up * z[-1] / gamma
    if not np.isfinite(denom) or abs(denom) < np.finfo(float).tiny:
        raise SingularSystem("Sherman-Morrison denominator vanished")
    x = y - np.outer(z, (y[0] + corner_up * y[-1] / gamma) / denom)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("non-finite solution")
    return x[:, 0] if squeeze else x
