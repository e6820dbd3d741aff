"""
Fixed-point machinery for the deterministic-equivalent diagonal.

The map takes a diagonal L (with Im L > 0 and Im(L/z) > 0) to
``z - diag((1/n) tr(Sigma_i Q(L)))`` with
``Q(L) = (I_p - (1/n) sum_j Sigma_j / L_j)^{-1}``.  It is a contraction for
the semi-metric d_s, which gives existence and uniqueness of the fixed point
and justifies the Picard iteration used here.  Anderson acceleration is
layered on top with a domain guard, because plain iteration slows down
drastically near the real axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .model import EnsembleModel
from .semimetric import UpperDiagonal, d_s, in_solver_domain

__all__ = [
    "SolverOptions",
    "FixedPointResult",
    "DomainError",
    "NonConvergenceError",
    "q_tilde",
    "apply_Iz",
    "contraction_factor",
    "solve_lambda",
    "continuation_solve",
    "psi_matrix",
    "lambda_derivative",
]


class DomainError(ValueError):
    """Input diagonal outside the solver domain."""


class NonConvergenceError(RuntimeError):
    """Picard iteration exhausted max_iter without reaching tolerance."""

    def __init__(self, iterations: int, last_residual: float, index: int | None = None):
        self.iterations = iterations
        self.last_residual = last_residual
        self.index = index
        where = "" if index is None else f" at path index {index}"
        super().__init__(
            f"no convergence after {iterations} iterations{where} "
            f"(last residual {last_residual:.3e})"
        )


@dataclass(frozen=True)
class SolverOptions:
    tol_ds: float = 1e-12
    max_iter: int = 50_000
    acceleration: str = "anderson"  # "anderson" | "none"
    anderson_window: int = 5
    damping: float = 1.0

    def __post_init__(self) -> None:
        if not self.tol_ds > 0.0:
            raise ValueError("tol_ds must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.acceleration not in ("anderson", "none"):
            raise ValueError("acceleration must be 'anderson' or 'none'")


@dataclass(frozen=True)
class FixedPointResult:
    lam: UpperDiagonal
    iterations: int
    residual_ds: float
    contraction_estimate: float
    phi: float


def _raw_iz(model: EnsembleModel, z: complex, values: NDArray) -> NDArray:
    Q = _raw_q_tilde(model, values)
    return z - model.traces_against_all(Q) / model.n


def _raw_q_tilde(model: EnsembleModel, values: NDArray) -> NDArray:
    A = np.eye(model.p, dtype=np.complex128) - model.mixture_matrix(1.0 / values)
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"singular resolvent factor: {exc}") from exc


def q_tilde(model: EnsembleModel, L: UpperDiagonal) -> NDArray[np.complex128]:
    """(I_p - (1/n) sum_i Sigma_i / L_i)^{-1}."""
    if len(L) != model.n:
        raise DomainError(f"diagonal length {len(L)} != n={model.n}")
    return _raw_q_tilde(model, L.values)


def apply_Iz(model: EnsembleModel, z: complex, L: UpperDiagonal) -> UpperDiagonal:
    """One application of the fixed-point map; stays in the solver domain."""
    if len(L) != model.n:
        raise DomainError(f"diagonal length {len(L)} != n={model.n}")
    if not in_solver_domain(L, z):
        raise DomainError("L is outside the solver domain for this z")
    return UpperDiagonal(_raw_iz(model, z, L.values))


def _phi(model: EnsembleModel, z: complex, L: UpperDiagonal) -> float:
    mapped = _raw_iz(model, z, L.values)
    return z.imag / float(mapped.imag.max())


def contraction_factor(
    model: EnsembleModel, z: complex, L: UpperDiagonal, Lp: UpperDiagonal
) -> float:
    """sqrt((1 - phi(z, L)) (1 - phi(z, L'))) with phi = Im z / max Im(map(L))."""
    for D in (L, Lp):
        if not in_solver_domain(D, z):
            raise DomainError("diagonal outside the solver domain")
    pL, pLp = _phi(model, z, L), _phi(model, z, Lp)
    return float(np.sqrt(max(1.0 - pL, 0.0) * max(1.0 - pLp, 0.0)))


def _in_domain_raw(values: NDArray, z: complex) -> bool:
    return bool(np.all(values.imag > 0.0) and np.all((values / z).imag > 0.0))


def _ds_raw(a: NDArray, b: NDArray) -> float:
    return float(np.max(np.abs(a - b) / (np.sqrt(a.imag) * np.sqrt(b.imag))))


def solve_lambda(
    model: EnsembleModel,
    z: complex,
    opts: SolverOptions | None = None,
    warm: UpperDiagonal | None = None,
) -> FixedPointResult:
    """Solve the fixed-point equation at z (Im z > 0).

    Starts from one application of the map at the boundary point z*ones
    (which lands strictly inside the domain), or from a warm start.  Stops
    when consecutive iterates are closer than tol_ds in the d_s semi-metric.
    """
    if not complex(z).imag > 0.0:
        raise DomainError("z must lie in the upper half-plane")
    z = complex(z)
    opts = opts or SolverOptions()

    if warm is not None:
        if len(warm) != model.n:
            raise DomainError("warm start has wrong length")
        x = warm.values.copy()
        if not _in_domain_raw(x, z):
            raise DomainError("warm start outside the solver domain")
    else:
        x = _raw_iz(model, z, np.full(model.n, z, dtype=np.complex128))

    damping = opts.damping
    use_aa = opts.acceleration == "anderson"
    window = opts.anderson_window
    g_hist: list[NDArray] = []
    f_hist: list[NDArray] = []

    residual = np.inf
    prev_residual = np.inf
    contraction = 1.0
    for k in range(1, opts.max_iter + 1):
        gx = _raw_iz(model, z, x)
        if damping < 1.0:
            gx = (1.0 - damping) * x + damping * gx
        f = gx - x
        prev_residual, residual = residual, _ds_raw(gx, x)
        contraction = residual / prev_residual if np.isfinite(prev_residual) else 1.0
        if residual < opts.tol_ds:
            x = gx
            return FixedPointResult(
                lam=UpperDiagonal(x),
                iterations=k,
                residual_ds=residual,
                contraction_estimate=min(contraction, 1.0 - 1e-16),
                phi=z.imag / float(x.imag.max()),
            )

        x_next = gx
        if use_aa:
            g_hist.append(gx)
            f_hist.append(f)
            if len(f_hist) > window + 1:
                g_hist.pop(0)
                f_hist.pop(0)
            m = len(f_hist) - 1
            if m >= 1:
                dF = np.stack([f_hist[j + 1] - f_hist[j] for j in range(m)], axis=1)
                dG = np.stack([g_hist[j + 1] - g_hist[j] for j in range(m)], axis=1)
                gamma, *_ = np.linalg.lstsq(dF, f, rcond=None)
                candidate = gx - dG @ gamma
                # any accelerated step leaving the domain falls back to Picard
                if _in_domain_raw(candidate, z):
                    x_next = candidate
        x = x_next

    raise NonConvergenceError(opts.max_iter, residual)


def continuation_solve(
    model: EnsembleModel,
    zs: Sequence[complex],
    opts: SolverOptions | None = None,
) -> list[FixedPointResult]:
    """Solve along an ordered z-path, warm-starting each point from the
    previous solution (imaginary part floored at Im(z_next) if needed)."""
    if len(zs) == 0:
        raise ValueError("empty z path")
    opts = opts or SolverOptions()
    results: list[FixedPointResult] = []
    warm: UpperDiagonal | None = None
    for idx, z in enumerate(zs):
        z = complex(z)
        if warm is not None:
            v = warm.values.copy()
            lift = z.imag - v.imag
            v[lift > 0] += 1j * lift[lift > 0]
            warm = UpperDiagonal(v) if _in_domain_raw(v, z) else None
        try:
            res = solve_lambda(model, z, opts, warm=warm)
        except NonConvergenceError as exc:
            raise NonConvergenceError(exc.iterations, exc.last_residual, index=idx) from exc
        results.append(res)
        warm = res.lam
    return results


def psi_matrix(
    model: EnsembleModel, D: UpperDiagonal, Dp: UpperDiagonal
) -> NDArray[np.complex128]:
    """Stability matrix: entry (i, j) is
    (1/n^2) tr(Sigma_i Q(D) Sigma_j Q(D')) / (D_j D'_j).

    This is the transfer matrix of the fixed-point map: at a solved point,
    d(lambda)/dz = (I - Psi)^{-1} ones and ||Psi|| < 1."""
    n = model.n
    if len(D) != n or len(Dp) != n:
        raise DomainError("diagonal length mismatch")
    Q = q_tilde(model, D)
    Qp = q_tilde(model, Dp)
    psi = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        Mj = Q @ model.realize_sigma(j).astype(np.complex128) @ Qp
        psi[:, j] = model.traces_against_all(Mj) / (n * n * D.values[j] * Dp.values[j])
    return psi


def lambda_derivative(
    model: EnsembleModel, z: complex, lam: UpperDiagonal
) -> NDArray[np.complex128]:
    """d(lambda)/dz at a converged fixed point: solves (I - Psi) x = ones."""
    psi = psi_matrix(model, lam, lam)
    A = np.eye(model.n, dtype=np.complex128) - psi
    try:
        return np.linalg.solve(A, np.ones(model.n, dtype=np.complex128))
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "I - Psi is singular; input is not a converged fixed point"
        ) from exc
