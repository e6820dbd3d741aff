"""
Covariance ensemble models: per-column means and structured covariances.

A model describes ``n`` independent columns of dimension ``p``, column ``i``
having mean ``mu_i`` and centered covariance ``C_i``, so that the second
moment is ``Sigma_i = C_i + mu_i mu_i^T``.  Structured covariance kinds keep
the per-iteration trace costs of the fixed-point solver low (O(p) instead of
O(p^2) for diagonal families).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "ModelError",
    "Dense",
    "Diagonal",
    "ScaledIdentity",
    "RotatedFamily",
    "LowRankPlusIdentity",
    "Column",
    "EnsembleModel",
    "load_model",
    "random_orthogonal",
]

_PSD_TOL = 1e-10


class ModelError(ValueError):
    """Fatal model configuration problem (parse error, non-PSD covariance...)."""


def random_orthogonal(p: int, seed: int) -> NDArray[np.float64]:
    """Seeded random orthogonal matrix: QR of a standard Gaussian matrix,
    sign-fixed so R has positive diagonal (bit-reproducible)."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class Dense:
    """Arbitrary real symmetric PSD covariance."""

    matrix: NDArray[np.float64]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ModelError("dense covariance must be a square matrix")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ModelError("dense covariance must be symmetric")
        if np.linalg.eigvalsh(m).min() < -_PSD_TOL:
            raise ModelError("dense covariance is not positive semidefinite")
        object.__setattr__(self, "matrix", m)

    def dim(self) -> int:
        return self.matrix.shape[0]

    def realize(self, p: int) -> NDArray[np.float64]:
        return self.matrix.copy()

    def min_eig(self, p: int) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def root_matvec(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        w, v = np.linalg.eigh(self.matrix)
        w = np.clip(w, 0.0, None)
        return v @ (np.sqrt(w) * (v.T @ g))


@dataclass(frozen=True)
class Diagonal:
    """Diagonal covariance with nonnegative entries."""

    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        d = np.asarray(self.entries, dtype=np.float64).ravel()
        if d.size == 0:
            raise ModelError("diagonal covariance needs at least one entry")
        if d.min() < 0.0:
            raise ModelError("diagonal covariance entries must be nonnegative")
        object.__setattr__(self, "entries", d)

    def dim(self) -> int:
        return self.entries.size

    def realize(self, p: int) -> NDArray[np.float64]:
        return np.diag(self.entries)

    def min_eig(self, p: int) -> float:
        return float(self.entries.min())

    def root_matvec(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.sqrt(self.entries) * g


@dataclass(frozen=True)
class ScaledIdentity:
    """sigma^2 * I_p with sigma^2 > 0."""

    sigma2: float

    def __post_init__(self) -> None:
        if not self.sigma2 > 0.0:
            raise ModelError("scaled identity requires sigma2 > 0")

    def dim(self) -> int | None:
        return None

    def realize(self, p: int) -> NDArray[np.float64]:
        return self.sigma2 * np.eye(p)

    def min_eig(self, p: int) -> float:
        return float(self.sigma2)

    def root_matvec(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.sqrt(self.sigma2) * g


@dataclass(frozen=True)
class RotatedFamily:
    """(P^k)^T diag(d) P^k for a base diagonal d and an orthogonal P."""

    base: NDArray[np.float64]
    orthogonal: NDArray[np.float64]
    rotations: int = 0

    def __post_init__(self) -> None:
        d = np.asarray(self.base, dtype=np.float64).ravel()
        if d.min() < 0.0:
            raise ModelError("rotated family base entries must be nonnegative")
        P = np.asarray(self.orthogonal, dtype=np.float64)
        if P.shape != (d.size, d.size):
            raise ModelError("rotated family orthogonal matrix has wrong shape")
        if not np.allclose(P @ P.T, np.eye(d.size), atol=1e-10):
            raise ModelError("rotated family matrix is not orthogonal")
        if self.rotations < 0:
            raise ModelError("rotation count must be nonnegative")
        object.__setattr__(self, "base", d)
        object.__setattr__(self, "orthogonal", P)

    def dim(self) -> int:
        return self.base.size

    def _rotation(self) -> NDArray[np.float64]:
        return np.linalg.matrix_power(self.orthogonal, self.rotations)

    def realize(self, p: int) -> NDArray[np.float64]:
        if self.rotations == 0:
            return np.diag(self.base)
        R = self._rotation()
        return R.T @ (self.base[:, None] * R)

    def min_eig(self, p: int) -> float:
        return float(self.base.min())

    def root_matvec(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.rotations == 0:
            return np.sqrt(self.base) * g
        R = self._rotation()
        return R.T @ (np.sqrt(self.base) * g)


@dataclass(frozen=True)
class LowRankPlusIdentity:
    """sigma^2 * I_p + u u^T.

    The vector u plays the role of a deterministic signal: sampling draws
    sigma*g and adds u as a mean, which realizes exactly this second moment.
    """

    u: NDArray[np.float64]
    sigma2: float

    def __post_init__(self) -> None:
        if not self.sigma2 > 0.0:
            raise ModelError("low-rank-plus-identity requires sigma2 > 0")
        object.__setattr__(self, "u", np.asarray(self.u, dtype=np.float64).ravel())

    def dim(self) -> int:
        return self.u.size

    def realize(self, p: int) -> NDArray[np.float64]:
        return self.sigma2 * np.eye(p) + np.outer(self.u, self.u)

    def min_eig(self, p: int) -> float:
        return float(self.sigma2)

    def root_matvec(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        # the u u^T part is carried by the sampling mean, not the root
        return np.sqrt(self.sigma2) * g


CovarianceSpec = Dense | Diagonal | ScaledIdentity | RotatedFamily | LowRankPlusIdentity


@dataclass(frozen=True)
class Column:
    """One column of the ensemble: optional mean and centered covariance."""

    cov: CovarianceSpec
    mean: NDArray[np.float64] | None = None


class EnsembleModel:
    """Immutable ensemble of n columns in dimension p.

    Internally the per-column second moments are decomposed as
    ``Sigma_i = diag(d_i) + Dense_i + sum_r v v^T`` so that the two hot
    operations of the solver (weighted mixtures and traces against a fixed
    matrix) run vectorized over columns.
    """

    def __init__(
        self,
        p: int,
        n: int,
        columns: Sequence[Column],
        *,
        mean_norm_bound: float = 10.0,
        min_eig_floor: float = 1e-8,
    ) -> None:
        if p < 1 or n < 1:
            raise ModelError("p and n must be positive")
        if len(columns) != n:
            raise ModelError(f"expected {n} columns, got {len(columns)}")
        self.p = int(p)
        self.n = int(n)
        self.columns = tuple(columns)
        self.warnings: list[str] = []

        diag = np.zeros((n, p))
        dense_idx: list[int] = []
        dense_mats: list[NDArray[np.float64]] = []
        vecs: list[NDArray[np.float64]] = []
        vec_col: list[int] = []
        means = np.zeros((n, p))
        extra_means = np.zeros((n, p))

        for i, col in enumerate(self.columns):
            spec = col.cov
            d = spec.dim()
            if d is not None and d != p:
                raise ModelError(f"column {i}: covariance dimension {d} != p={p}")
            if col.mean is not None:
                mu = np.asarray(col.mean, dtype=np.float64).ravel()
                if mu.size != p:
                    raise ModelError(f"column {i}: mean has wrong length")
                means[i] = mu
                if np.any(mu):
                    vecs.append(mu)
                    vec_col.append(i)
            if isinstance(spec, Diagonal):
                diag[i] = spec.entries
            elif isinstance(spec, ScaledIdentity):
                diag[i] = spec.sigma2
            elif isinstance(spec, LowRankPlusIdentity):
                diag[i] = spec.sigma2
                vecs.append(spec.u)
                vec_col.append(i)
                extra_means[i] = spec.u
            elif isinstance(spec, RotatedFamily) and spec.rotations == 0:
                diag[i] = spec.base
            else:
                dense_idx.append(i)
                dense_mats.append(spec.realize(p))

        self._diag = diag
        self._dense_idx = np.asarray(dense_idx, dtype=np.intp)
        self._dense = np.stack(dense_mats) if dense_mats else np.zeros((0, p, p))
        self._V = np.stack(vecs, axis=1) if vecs else np.zeros((p, 0))
        self._vec_col = np.asarray(vec_col, dtype=np.intp)
        self._means = means
        self._extra_means = extra_means
        self._check_assumptions(mean_norm_bound, min_eig_floor)

    # -- validation ------------------------------------------------------

    def _check_assumptions(self, mean_norm_bound: float, min_eig_floor: float) -> None:
        for i, col in enumerate(self.columns):
            total_mean = self._means[i] + self._extra_means[i]
            norm = float(np.linalg.norm(total_mean))
            if norm > mean_norm_bound:
                self.warnings.append(
                    f"column {i}: mean norm {norm:.3g} exceeds bound "
                    f"{mean_norm_bound:.3g} (bounded-mean assumption)"
                )
            if col.cov.min_eig(self.p) < min_eig_floor:
                self.warnings.append(
                    f"column {i}: covariance smallest eigenvalue below floor "
                    f"{min_eig_floor:.3g} (lower-bounded-covariance assumption)"
                )

    # -- core operations --------------------------------------------------

    def realize_sigma(self, i: int) -> NDArray[np.float64]:
        """Dense Sigma_i = C_i + mu_i mu_i^T."""
        if not 0 <= i < self.n:
            raise IndexError(f"column index {i} out of range [0, {self.n})")
        sigma = self.columns[i].cov.realize(self.p)
        mu = self._means[i]
        if np.any(mu):
            sigma = sigma + np.outer(mu, mu)
        return sigma

    def mixture_matrix(self, w: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """(1/n) sum_i w_i Sigma_i, exploiting column structure."""
        w = np.asarray(w).ravel()
        if w.size != self.n:
            raise ModelError(f"weight vector has length {w.size}, expected {self.n}")
        out = np.zeros((self.p, self.p), dtype=np.complex128)
        np.fill_diagonal(out, w @ self._diag)
        if self._dense_idx.size:
            out += np.einsum("i,ijk->jk", w[self._dense_idx], self._dense)
        if self._vec_col.size:
            wv = w[self._vec_col]
            out += (self._V * wv) @ self._V.T
        out /= self.n
        return out

    def traces_against_all(self, M: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """tr(Sigma_i M) for every column at once."""
        if M.shape != (self.p, self.p):
            raise ModelError("matrix dimension mismatch")
        t = self._diag @ np.diagonal(M).astype(np.complex128)
        if self._dense_idx.size:
            t[self._dense_idx] += np.einsum("ijk,kj->i", self._dense, M)
        if self._vec_col.size:
            quad = np.einsum("ji,jk,ki->i", self._V, M, self._V)
            np.add.at(t, self._vec_col, quad)
        return t

    def trace_against(self, i: int, M: NDArray[np.complex128]) -> complex:
        """tr(Sigma_i M), computed from the column's structure."""
        if not 0 <= i < self.n:
            raise IndexError(f"column index {i} out of range [0, {self.n})")
        M = np.asarray(M)
        if M.shape != (self.p, self.p):
            raise ModelError("matrix dimension mismatch")
        t = complex(self._diag[i] @ np.diagonal(M))
        col = self.columns[i].cov
        if isinstance(col, Dense) or (isinstance(col, RotatedFamily) and col.rotations):
            t += complex(np.einsum("jk,kj->", col.realize(self.p), M))
        for v in (self._means[i], self._extra_means[i]):
            if np.any(v):
                t += complex(v @ M @ v)
        return t

    # -- sampling support --------------------------------------------------

    def column_mean(self, i: int) -> NDArray[np.float64]:
        """Total deterministic offset of column i (declared mean plus any
        low-rank signal vector)."""
        return self._means[i] + self._extra_means[i]

    def column_root_matvec(self, i: int, g: NDArray[np.float64]) -> NDArray[np.float64]:
        """C_i^{1/2} g, per the column's structured root."""
        return self.columns[i].cov.root_matvec(g)

    # -- derived scalars ---------------------------------------------------

    def nu_hat(self) -> float:
        """Deterministic proxy ||(1/n) sum Sigma_i|| (spectral norm)."""
        avg = self.mixture_matrix(np.ones(self.n)).real
        return float(np.linalg.eigvalsh((avg + avg.T) / 2).max())

    def max_trace(self) -> float:
        """max_i tr(Sigma_i)."""
        return float(self.traces_against_all(np.eye(self.p)).real.max())


# -- configuration loading --------------------------------------------------


def _parse_cov(spec: dict, p: int) -> CovarianceSpec:
    kind = spec.get("kind")
    if kind == "dense":
        return Dense(np.asarray(spec["matrix"], dtype=np.float64))
    if kind == "diagonal":
        return Diagonal(np.asarray(spec["entries"], dtype=np.float64))
    if kind == "scaled_identity":
        return ScaledIdentity(float(spec["sigma2"]))
    if kind == "rotated_family":
        orth = spec["orthogonal"]
        if isinstance(orth, dict):
            P = random_orthogonal(p, int(orth["seed"]))
        else:
            P = np.asarray(orth, dtype=np.float64)
        return RotatedFamily(
            base=np.asarray(spec["base"], dtype=np.float64),
            orthogonal=P,
            rotations=int(spec.get("rotations", 0)),
        )
    if kind == "low_rank_plus_identity":
        return LowRankPlusIdentity(
            u=np.asarray(spec["u"], dtype=np.float64), sigma2=float(spec["sigma2"])
        )
    raise ModelError(f"unknown covariance kind: {kind!r}")


def model_from_config(config: dict) -> EnsembleModel:
    """Build a model from a parsed JSON configuration document."""
    try:
        p = int(config["p"])
        n = int(config["n"])
        entries = config["columns"]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"invalid model config: {exc}") from exc

    columns: list[Column] = []
    for entry in entries:
        repeat = int(entry.get("repeat", 1))
        if repeat < 1:
            raise ModelError("repeat must be >= 1")
        mean = entry.get("mean")
        mu = None if mean is None else np.asarray(mean, dtype=np.float64)
        cov_spec = entry.get("cov")
        if not isinstance(cov_spec, dict):
            raise ModelError("each column entry needs a 'cov' object")
        base_cov = _parse_cov(cov_spec, p)
        step = int(cov_spec.get("rotation_step", 0))
        for j in range(repeat):
            cov = base_cov
            if isinstance(base_cov, RotatedFamily) and step and j:
                cov = RotatedFamily(
                    base=base_cov.base,
                    orthogonal=base_cov.orthogonal,
                    rotations=base_cov.rotations + step * j,
                )
            columns.append(Column(cov=cov, mean=mu))
    if len(columns) != n:
        raise ModelError(f"config declares n={n} but expands to {len(columns)} columns")
    return EnsembleModel(p, n, columns)


def load_model(path: str) -> EnsembleModel:
    """Load and validate a JSON model configuration file."""
    try:
        with open(path) as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file {path} is not valid JSON: {exc}") from exc
    return model_from_config(config)
