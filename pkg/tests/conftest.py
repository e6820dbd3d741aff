import numpy as np
import pytest

from covspectra import Column, Dense, Diagonal, EnsembleModel, ScaledIdentity


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240817))


def mp_model(p: int, n: int, sigma2: float = 1.0) -> EnsembleModel:
    """All columns share sigma2 * I: the Marchenko-Pastur setting."""
    return EnsembleModel(p, n, [Column(ScaledIdentity(sigma2))] * n)


def random_model(p: int, n: int, rng: np.random.Generator) -> EnsembleModel:
    """Small random model mixing covariance kinds."""
    cols = []
    for i in range(n):
        kind = rng.integers(3)
        if kind == 0:
            cols.append(Column(Diagonal(rng.uniform(0.2, 3.0, p))))
        elif kind == 1:
            cols.append(Column(ScaledIdentity(float(rng.uniform(0.5, 2.0)))))
        else:
            B = rng.standard_normal((p, p))
            cols.append(Column(Dense(B @ B.T / p + 0.1 * np.eye(p))))
    return EnsembleModel(p, n, cols)


def mp_stieltjes(z: complex, c: float) -> complex:
    """Closed-form Marchenko-Pastur Stieltjes transform, branch with Im > 0."""
    s = np.sqrt(complex((1 - c - z) ** 2 - 4 * c * z))
    for sign in (1.0, -1.0):
        m = (1 - c - z + sign * s) / (2 * c * z)
        if m.imag > 0:
            return m
    raise AssertionError("no upper-half-plane branch")


@pytest.fixture
def report_line(pytestconfig):
    """Emit a line on the real terminal, bypassing pytest's fd-level capture."""
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")

    def emit(line: str) -> None:
        if capman is not None:
            with capman.global_and_fixture_disabled():
                print(line, flush=True)
        else:
            print(line, flush=True)

    return emit
