"""
Quadratic vector equation solver: -1/m = z*ones + a + S m on the upper
half-plane, for real a and entrywise-nonnegative S.

Solved through the auxiliary iteration x <- z*ones + a - S (1/x), which is a
d_s contraction with factor at most 1 - Im(z)/kappa where
kappa = max((Im(z) I + S/Im(z)) ones); the solution is m = -1/x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .fixedpoint import NonConvergenceError, SolverOptions

__all__ = ["QveProblem", "solve_qve", "qve_residual"]


@dataclass(frozen=True)
class QveProblem:
    z: complex
    a: NDArray[np.float64]
    S: NDArray[np.float64]

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=np.float64).ravel()
        S = np.asarray(self.S, dtype=np.float64)
        if S.shape != (a.size, a.size):
            raise ValueError("S must be square with side len(a)")
        if S.min() < 0.0:
            raise ValueError("S entries must be nonnegative")
        if not complex(self.z).imag > 0.0:
            raise ValueError("z must lie in the upper half-plane")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "z", complex(self.z))


def qve_residual(prob: QveProblem, m: NDArray[np.complex128]) -> float:
    """Infinity norm of -1/m - (z*ones + a + S m)."""
    return float(np.max(np.abs(-1.0 / m - (prob.z + prob.a + prob.S @ m))))


def solve_qve(prob: QveProblem, opts: SolverOptions | None = None) -> NDArray[np.complex128]:
    """Unique solution m with Im(m_i) > 0 for all i."""
    opts = opts or SolverOptions()
    z, a, S = prob.z, prob.a, prob.S
    x = z + a + 0j  # always in the upper half-plane since a is real
    residual = np.inf
    for _ in range(opts.max_iter):
        x_new = z + a - S @ (1.0 / x)
        residual = float(
            np.max(np.abs(x_new - x) / np.sqrt(x_new.imag * x.imag))
        )
        x = x_new
        if residual < opts.tol_ds:
            return -1.0 / x
    raise NonConvergenceError(opts.max_iter, residual)
