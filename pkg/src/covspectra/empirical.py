"""
Monte Carlo ground truth for the deterministic predictions.

Samples Gaussian-column random matrices matching a model, computes empirical
spectra, Stieltjes transforms and eigenspace projections, and aggregates them
into comparison reports against the solver's predictions.

RNG contract: Philox (counter-based).  Column i of trial t is drawn from the
generator keyed by (seed, t * 2^32 + i), Gaussians via numpy's ziggurat.
Identical seed and config give bit-identical draws.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .contour import ContourSpec, project_functionals
from .equivalent import DensityGrid, density_grid, stieltjes_g
from .fixedpoint import SolverOptions, solve_lambda
from .model import EnsembleModel

__all__ = [
    "RNG_NAME",
    "SampleBatch",
    "FunctionalSpec",
    "FunctionalRow",
    "ComparisonReport",
    "sample_matrix",
    "spectrum",
    "empirical_stieltjes",
    "empirical_projection",
    "resolvent_identity_check",
    "compare",
]

RNG_NAME = "philox4x64+numpy-ziggurat"


def _column_rng(seed: int, trial: int, i: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64((trial << 32) + i)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_matrix(model: EnsembleModel, seed: int, trial: int = 0) -> NDArray[np.float64]:
    """One p x n draw: column i is mu_i + C_i^{1/2} g with g standard normal."""
    X = np.empty((model.p, model.n))
    for i in range(model.n):
        g = _column_rng(seed, trial, i).standard_normal(model.p)
        X[:, i] = model.column_mean(i) + model.column_root_matvec(i, g)
    return X


def spectrum(X: NDArray[np.float64]) -> NDArray[np.float64]:
    """Eigenvalues of (1/n) X X^T, nonincreasing, clamped at zero."""
    p, n = X.shape
    eigs = np.linalg.eigvalsh(X @ X.T / n)
    return np.clip(eigs[::-1], 0.0, None)


@dataclass(frozen=True)
class SampleBatch:
    seed: int
    trials: int
    eigenvalue_sets: NDArray[np.float64]  # (trials, p), rows nonincreasing


def sample_batch(model: EnsembleModel, trials: int, seed: int, jobs: int = 1) -> SampleBatch:
    """Independent trials; aggregation ordered by trial index so parallelism
    cannot change results."""
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def one(t: int) -> NDArray[np.float64]:
        return spectrum(sample_matrix(model, seed, trial=t))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            sets = list(pool.map(one, range(trials)))
    else:
        sets = [one(t) for t in range(trials)]
    return SampleBatch(seed=seed, trials=trials, eigenvalue_sets=np.stack(sets))


def empirical_stieltjes(eigs: NDArray[np.float64], z: complex) -> complex:
    """(1/p) sum_k 1/(lambda_k - z)."""
    eigs = np.asarray(eigs, dtype=np.float64)
    if np.min(np.abs(eigs - z)) < 1e-12:
        raise ValueError("z is too close to an eigenvalue")
    return complex(np.mean(1.0 / (eigs - z)))


def empirical_projection(
    X: NDArray[np.float64], A: NDArray, interval: tuple[float, float]
) -> float:
    """tr(Pi A) with Pi the projector on eigenvectors of (1/n) X X^T whose
    eigenvalue lies in the interval."""
    p, n = X.shape
    w, v = np.linalg.eigh(X @ X.T / n)
    lo, hi = interval
    sel = (w >= lo) & (w <= hi)
    if not np.any(sel):
        return 0.0
    V = v[:, sel]
    return float(np.einsum("ij,ik,kj->", V.conj(), np.asarray(A), V).real)


def resolvent_identity_check(X: NDArray[np.float64], z: complex) -> float:
    """max_i |z / Lambda_i - (Qcheck)_{ii}| for the leave-one-out diagonal
    Lambda_i = z - (1/n) x_i^T Q_{-i} x_i and Qcheck = (I_n - X^T X/(zn))^{-1}.

    An exact algebraic identity: expected below 1e-8 up to roundoff.
    Leave-one-out resolvents are computed naively; this is a correctness
    oracle, not a performance path.
    """
    p, n = X.shape
    z = complex(z)
    Qcheck = np.linalg.inv(np.eye(n) - X.T @ X / (z * n))
    worst = 0.0
    for i in range(n):
        Xi = X.copy()
        Xi[:, i] = 0.0
        Qmi = np.linalg.inv(np.eye(p) - Xi @ Xi.T / (z * n))
        lam_i = z - X[:, i] @ Qmi @ X[:, i] / n
        worst = max(worst, abs(z / lam_i - Qcheck[i, i]))
    return worst


@dataclass(frozen=True)
class FunctionalSpec:
    """A functional to compare: predicted by contour integration, measured by
    empirical eigenprojection over a real interval."""

    name: str
    matrix: NDArray
    contour: ContourSpec
    interval: tuple[float, float]


@dataclass(frozen=True)
class FunctionalRow:
    name: str
    predicted: float
    empirical_mean: float
    empirical_std: float | None
    contour: ContourSpec | None = None


@dataclass(frozen=True)
class ComparisonReport:
    grid: DensityGrid
    bin_edges: NDArray[np.float64]
    frequencies: NDArray[np.float64]  # empirical probability mass per bin
    predicted_mass: NDArray[np.float64]
    sup_g_error: float
    l1_density_error: float
    functionals: list[FunctionalRow]
    seed: int
    trials: int
    rng_name: str = RNG_NAME

    def write(self, out_dir: str) -> None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "histogram.csv"), "w") as fh:
            fh.write("bin_lo,bin_hi,frequency\n")
            for lo, hi, f in zip(self.bin_edges[:-1], self.bin_edges[1:], self.frequencies):
                fh.write(f"{lo:.17g},{hi:.17g},{f:.17g}\n")
        with open(os.path.join(out_dir, "functionals.csv"), "w") as fh:
            fh.write(
                "functional,contour_a,contour_b,contour_h,nodes,value,"
                "empirical_mean,empirical_std,trials\n"
            )
            for row in self.functionals:
                std = "" if row.empirical_std is None else f"{row.empirical_std:.17g}"
                c = row.contour
                cfields = (
                    f"{c.a:.17g},{c.b:.17g},{c.h:.17g},{c.nodes_per_side}"
                    if c is not None
                    else ",,,"
                )
                fh.write(
                    f"{row.name},{cfields},{row.predicted:.17g},"
                    f"{row.empirical_mean:.17g},{std},{self.trials}\n"
                )
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(
                {
                    "sup_g_error": self.sup_g_error,
                    "l1_density_error": self.l1_density_error,
                    "seed": self.seed,
                    "rng_name": self.rng_name,
                    "trials": self.trials,
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")


def _bin_masses(grid: DensityGrid, edges: NDArray[np.float64]) -> NDArray[np.float64]:
    """Predicted probability mass per bin: trapezoid integral of the density
    plus the explicit Dirac mass at zero."""
    masses = np.zeros(len(edges) - 1)
    for k, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        sel = (grid.xs >= lo) & (grid.xs <= hi)
        if sel.sum() >= 2:
            masses[k] = np.trapezoid(grid.density[sel], grid.xs[sel])
        if lo <= 0.0 < hi:
            masses[k] += grid.dirac_at_zero
    return masses


def compare(
    model: EnsembleModel,
    trials: int,
    seed: int,
    bin_width: float = 0.5,
    functionals: list[FunctionalSpec] | None = None,
    y: float = 1e-3,
    opts: SolverOptions | None = None,
    grid_points_per_bin: int = 8,
    g_probes: list[complex] | None = None,
    jobs: int = 1,
) -> ComparisonReport:
    """Monte Carlo draws pooled into a histogram, compared bin-by-bin with the
    predicted density, plus Stieltjes sup-error and functional rows."""
    batch = sample_batch(model, trials, seed, jobs=jobs)
    pooled = batch.eigenvalue_sets.ravel()
    x_max = float(pooled.max()) + bin_width
    edges = np.arange(0.0, x_max + bin_width, bin_width)
    counts, _ = np.histogram(pooled, bins=edges)
    freq = counts / pooled.size

    count = max(int(grid_points_per_bin * (len(edges) - 1)), 2)
    grid = density_grid(model, 1e-12, float(edges[-1]), count, y, opts)
    predicted = _bin_masses(grid, edges)
    l1 = float(np.abs(freq - predicted).sum())

    if g_probes is None:
        span = edges[-1]
        g_probes = [complex(x, 0.5) for x in np.linspace(0.2 * span, 1.2 * span, 7)]
    sup_err = 0.0
    for z in g_probes:
        g_emp = np.mean(
            [empirical_stieltjes(ev, z) for ev in batch.eigenvalue_sets]
        )
        g_pred = stieltjes_g(model, z, solve_lambda(model, z, opts).lam)
        sup_err = max(sup_err, abs(g_emp - g_pred))

    rows: list[FunctionalRow] = []
    for spec in functionals or []:
        pred = project_functionals(model, [spec.matrix], spec.contour, opts)[0].value
        vals = [
            empirical_projection(sample_matrix(model, seed, trial=t), spec.matrix, spec.interval)
            for t in range(trials)
        ]
        rows.append(
            FunctionalRow(
                name=spec.name,
                predicted=pred,
                empirical_mean=float(np.mean(vals)),
                empirical_std=float(np.std(vals, ddof=1)) if trials > 1 else None,
                contour=spec.contour,
            )
        )

    return ComparisonReport(
        grid=grid,
        bin_edges=edges,
        frequencies=freq,
        predicted_mass=predicted,
        sup_g_error=float(sup_err),
        l1_density_error=l1,
        functionals=rows,
        seed=seed,
        trials=trials,
    )
