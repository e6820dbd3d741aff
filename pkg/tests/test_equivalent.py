import numpy as np
import pytest

from conftest import mp_model, mp_stieltjes, random_model

from covspectra import (
    Column,
    Diagonal,
    EnsembleModel,
    ScaledIdentity,
    density_grid,
    linear_functional,
    per_column_stieltjes,
    r_tilde,
    solve_lambda,
    stieltjes_g,
    support_scan,
)


def test_r_tilde_is_scaled_q_tilde(rng):
    from covspectra import q_tilde

    m = random_model(5, 8, rng)
    z = 1.0 + 0.7j
    lam = solve_lambda(m, z).lam
    np.testing.assert_allclose(
        r_tilde(m, z, lam), -q_tilde(m, lam) / z, atol=1e-12
    )


def test_g_equals_normalized_trace_of_r(rng):
    m = random_model(6, 9, rng)
    z = -0.5 + 0.9j
    lam = solve_lambda(m, z).lam
    g = stieltjes_g(m, z, lam)
    tr_form = np.trace(r_tilde(m, z, lam)) / m.p
    assert abs(g - tr_form) < 1e-9


def test_g_matches_mp_closed_form():
    p, n = 120, 240
    m = mp_model(p, n)
    for x in np.linspace(-2.0, 5.0, 9):
        z = complex(x, 0.7)
        g = stieltjes_g(m, z, solve_lambda(m, z).lam)
        assert abs(g - mp_stieltjes(z, p / n)) < 1e-9


def test_g_stieltjes_axioms(rng):
    m = random_model(8, 12, rng)
    for _ in range(20):
        z = complex(rng.uniform(-4, 4), rng.uniform(0.05, 3.0))
        g = stieltjes_g(m, z, solve_lambda(m, z).lam)
        assert g.imag > 0.0
        assert (z * g).imag > -1e-12  # measure supported on [0, inf)


def test_g_total_mass_is_one(rng):
    m = random_model(8, 12, rng)
    y = 1e4
    g = stieltjes_g(m, 1j * y, solve_lambda(m, 1j * y).lam)
    assert abs(-1j * y * g - 1.0) < 1e-3


def test_per_column_stieltjes():
    m = mp_model(4, 8)
    z = 2.0j
    lam = solve_lambda(m, z).lam
    assert per_column_stieltjes(lam, 3) == pytest.approx(-1.0 / lam.values[3])
    with pytest.raises(IndexError):
        per_column_stieltjes(lam, 8)


def test_density_grid_mp_shape():
    # [DERIVED] MP density with c = 1/2 is supported on [(1-sqrt(.5))^2, (1+sqrt(.5))^2]
    p, n = 100, 200
    m = mp_model(p, n)
    grid = density_grid(m, 0.01, 4.0, 120, 1e-3)
    assert grid.dirac_at_zero == 0.0
    lo, hi = (1 - np.sqrt(0.5)) ** 2, (1 + np.sqrt(0.5)) ** 2
    inside = (grid.xs > lo + 0.15) & (grid.xs < hi - 0.15)
    outside = (grid.xs < lo - 0.15) | (grid.xs > hi + 0.15)
    assert np.all(grid.density[inside] > 0.01)
    assert np.all(grid.density[outside] < 0.01)
    # and the closed form matches pointwise
    mp_dens = np.sqrt(np.maximum((hi - grid.xs) * (grid.xs - lo), 0.0)) / (
        2 * np.pi * 0.5 * grid.xs
    )
    assert np.max(np.abs(grid.density - mp_dens)[inside]) < 0.02


def test_density_integrates_to_one():
    m = mp_model(80, 160)
    grid = density_grid(m, 1e-4, 4.0, 400, 1e-4)
    mass = np.trapezoid(grid.density, grid.xs) + grid.dirac_at_zero
    assert mass == pytest.approx(1.0, abs=0.02)


def test_dirac_at_zero_when_p_exceeds_n():
    m = mp_model(40, 20)
    grid = density_grid(m, 0.1, 10.0, 30, 1e-2)
    assert grid.dirac_at_zero == pytest.approx(0.5)


def test_density_grid_validates_input():
    m = mp_model(2, 2)
    with pytest.raises(ValueError):
        density_grid(m, 2.0, 1.0, 10, 1e-3)
    with pytest.raises(ValueError):
        density_grid(m, 0.0, 1.0, 1, 1e-3)
    with pytest.raises(ValueError):
        density_grid(m, 0.0, 1.0, 10, 0.0)


def test_density_csv_roundtrip(tmp_path):
    m = mp_model(10, 20)
    grid = density_grid(m, 0.1, 3.0, 16, 1e-2)
    path = tmp_path / "density.csv"
    grid.write_csv(str(path))
    text = path.read_text().splitlines()
    assert text[0].startswith("#")
    assert "dirac_at_zero" in text[0]
    assert text[1] == "x,density"
    data = np.loadtxt(str(path), delimiter=",", skiprows=2)
    np.testing.assert_allclose(data[:, 0], grid.xs, rtol=1e-15)
    np.testing.assert_allclose(data[:, 1], grid.density, rtol=1e-15)


def test_support_scan_mp():
    p, n = 60, 120
    m = mp_model(p, n)
    est = support_scan(m, y=1e-3, threshold=1e-2)
    lo, hi = (1 - np.sqrt(0.5)) ** 2, (1 + np.sqrt(0.5)) ** 2
    assert len(est.intervals) == 1
    a, b = est.intervals[0]
    assert a == pytest.approx(lo, abs=0.15)
    assert b == pytest.approx(hi, abs=0.15)
    assert est.upper_bound_x0 >= hi


def test_support_scan_detects_two_bulks():
    # shared diagonal covariance with eigenvalues {8 (x20), 1 (x60)} at
    # p = 80, n = 160 has a spectral gap between roughly 2.3 and 4
    p, n = 80, 160
    d = np.array([8.0] * 20 + [1.0] * 60)
    m = EnsembleModel(p, n, [Column(Diagonal(d))] * n)
    est = support_scan(m, y=1e-3, threshold=1e-2)
    assert len(est.intervals) == 2
    (a1, b1), (a2, b2) = est.intervals
    assert b1 < 2.6
    assert 3.5 < a2 < 4.2
    assert 13.0 < b2 < 15.0


def test_linear_functional_identity(rng):
    m = random_model(5, 8, rng)
    z = 1.0 + 0.4j
    R = r_tilde(m, z, solve_lambda(m, z).lam)
    assert linear_functional(np.eye(5), R) == pytest.approx(np.trace(R))
    v = rng.standard_normal(5)
    # [TRIVIAL] tr(vv^T R) = v^T R v
    assert linear_functional(np.outer(v, v), R) == pytest.approx(v @ R @ v)
