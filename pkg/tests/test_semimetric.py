import numpy as np
import pytest

from conftest import mp_model

from covspectra import (
    Column,
    EnsembleModel,
    ScaledIdentity,
    UpperDiagonal,
    d_s,
    in_solver_domain,
    solve_lambda,
    stieltjes_lipschitz_check,
    stieltjes_g,
)


def test_ds_identical_points_is_zero():
    D = UpperDiagonal(np.array([1.0 + 1.0j, 2.0 + 0.5j]))
    assert d_s(D, D) == 0.0


def test_ds_symmetry(rng):
    a = rng.standard_normal(6) + 1j * rng.exponential(1.0, 6)
    b = rng.standard_normal(6) + 1j * rng.exponential(1.0, 6)
    D, E = UpperDiagonal(a), UpperDiagonal(b)
    assert d_s(D, E) == pytest.approx(d_s(E, D), rel=1e-15)


def test_ds_known_value():
    # [DERIVED] |2i - i| / sqrt(2 * 1) = 1/sqrt(2)
    D = UpperDiagonal(np.array([2.0j]))
    E = UpperDiagonal(np.array([1.0j]))
    assert d_s(D, E) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-15)


def test_ds_real_shift_scales_inverse_imag():
    # [DERIVED] entries i and 1 + i: |1| / sqrt(1*1) = 1
    D = UpperDiagonal(np.array([1.0j]))
    E = UpperDiagonal(np.array([1.0 + 1.0j]))
    assert d_s(D, E) == pytest.approx(1.0, abs=1e-15)


def test_ds_max_over_entries():
    D = UpperDiagonal(np.array([1.0j, 4.0j]))
    E = UpperDiagonal(np.array([1.0j, 1.0j]))
    # second entry: |4i - i| / sqrt(4*1) = 1.5
    assert d_s(D, E) == pytest.approx(1.5, abs=1e-15)


def test_ds_no_overflow_tiny_imag():
    D = UpperDiagonal(np.array([1e-300j]))
    E = UpperDiagonal(np.array([1.0 + 1e-300j]))
    val = d_s(D, E)
    assert np.isfinite(val)
    assert val == pytest.approx(1e300, rel=1e-10)


def test_rejects_nonpositive_imag():
    with pytest.raises(ValueError):
        UpperDiagonal(np.array([1.0 + 0.0j]))
    with pytest.raises(ValueError):
        UpperDiagonal(np.array([1.0 - 1.0j]))


def test_in_solver_domain():
    z = 1.0 + 1.0j
    good = UpperDiagonal(np.array([1.0 + 2.0j]))
    assert in_solver_domain(good, z)
    # arg(5 + 0.1i) < arg(1 + i) so Im(D/z) < 0
    bad = UpperDiagonal(np.array([5.0 + 0.1j]))
    assert not in_solver_domain(bad, z)


def test_fixed_points_lie_in_domain(rng):
    m = mp_model(20, 40)
    for z in (1.0 + 1.0j, -2.0 + 0.5j, 3.0j):
        res = solve_lambda(m, z)
        assert in_solver_domain(res.lam, z)


def test_stieltjes_lipschitz_bound(rng):
    # [DERIVED] for any Stieltjes transform g of a positive measure,
    # |g(z) - g(z')| <= sqrt(Im g(z) Im g(z')) * d_s(z, z'); checked on
    # random discrete measures.
    for _ in range(200):
        locs = rng.uniform(-5, 5, 6)
        masses = rng.exponential(1.0, 6)
        atoms = list(zip(locs.tolist(), masses.tolist()))
        z1 = complex(rng.uniform(-3, 3), rng.uniform(0.05, 2.0))
        z2 = complex(rng.uniform(-3, 3), rng.uniform(0.05, 2.0))
        lhs, rhs = stieltjes_lipschitz_check(atoms, z1, z2)
        assert lhs <= rhs * (1.0 + 1e-12)


def test_lipschitz_check_rejects_bad_input():
    with pytest.raises(ValueError):
        stieltjes_lipschitz_check([], 1j, 2j)
    with pytest.raises(ValueError):
        stieltjes_lipschitz_check([(0.0, 1.0)], 1j, 1.0 - 1j)
    with pytest.raises(ValueError):
        stieltjes_lipschitz_check([(0.0, -1.0)], 1j, 2j)


def test_solver_stieltjes_obeys_lipschitz(rng):
    # the deterministic-equivalent g inherits the same bound
    m = mp_model(15, 30)
    for _ in range(10):
        z1 = complex(rng.uniform(-3, 3), rng.uniform(0.3, 2.0))
        z2 = complex(rng.uniform(-3, 3), rng.uniform(0.3, 2.0))
        g1 = stieltjes_g(m, z1, solve_lambda(m, z1).lam)
        g2 = stieltjes_g(m, z2, solve_lambda(m, z2).lam)
        ds_zz = abs(z1 - z2) / np.sqrt(z1.imag * z2.imag)
        assert abs(g1 - g2) <= np.sqrt(g1.imag * g2.imag) * ds_zz * (1 + 1e-9)
