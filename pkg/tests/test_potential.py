"""Stenzel potential: ODE tabulation, derivatives in r^2 and the Kaehler form."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stenzel_slag.hyperbolic import F_factor, f_over_r2, sinhc
from stenzel_slag.potential import (
    DomainError,
    PotentialRangeError,
    PotentialTable,
    build_potential,
    hermitian_matrix,
    kahler_form,
    metric,
    metric_matrix,
    omega_matrix,
)
from stenzel_slag.quadric import random_quadric_point, tangent_basis

T = np.linspace(0.0, 10.0, 1237)  # deliberately off the tabulation grid


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_uprime_closed_form_n1(c):
    table = build_potential(1, c)
    assert np.max(np.abs(table.Uprime(T) - c * T)) < 1e-10


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_uprime_closed_form_n2(c):
    table = build_potential(2, c)
    exact = np.sqrt(2 * c * (np.cosh(T) - 1))
    assert np.max(np.abs(table.Uprime(T) - exact)) < 1e-10


def test_uprime_closed_form_n3():
    # int_0^t sinh^2 = (sinh t cosh t - t) / 2
    table = build_potential(3, 1.5)
    t = T[T > 0.5]
    exact = (3 * 1.5 * (np.sinh(t) * np.cosh(t) - t) / 2) ** (1 / 3)
    assert np.max(np.abs(table.Uprime(t) / exact - 1)) < 1e-11


@pytest.mark.parametrize("n", [2, 5, 6])
def test_second_derivative_matches_finite_difference(n):
    table = build_potential(n, 1.0)
    t = np.linspace(0.3, 9.0, 50)
    h = 1e-4
    fd = (table.Uprime(t + h) - table.Uprime(t - h)) / (2 * h)
    assert np.max(np.abs(fd / table.Udoubleprime(t) - 1)) < 1e-6


@pytest.mark.parametrize("n,c", [(2, 1.0), (5, 0.5), (5, 1.0), (6, 2.0)])
def test_u_prime_at_zero_section(n, c):
    table = build_potential(n, c)
    up, upp = table.u_derivatives(1.0)
    assert up == pytest.approx(c ** (1 / n), abs=1e-14)
    # differentiating (s^2 - 1) y' + s y = y^{1-n} at s = 1 gives y'(1) = -1/(n+2)
    assert upp == pytest.approx(-(c ** (1 / n)) / (n + 2), rel=1e-12)


@pytest.mark.parametrize("n", [2, 5, 6])
def test_series_and_table_branches_agree(n):
    table = build_potential(n, 1.0)
    # evaluate both branches right at the switch
    from stenzel_slag import potential as mod

    x = mod._SERIES_SWITCH * (1 + 1e-9)
    series = table.c_root * np.polynomial.polynomial.polyval(x, table._series)
    up_table, _ = table.u_from_excess(x)
    assert series == pytest.approx(up_table, rel=1e-11)


@given(st.floats(0.0, 40.0))
def test_u_prime_positive_and_u_double_prime_negative(x):
    table = build_potential(5, 1.0)
    up, upp = table.u_from_excess(x)
    assert up > 0 and upp < 0


def test_range_and_domain_errors():
    table = build_potential(5, 1.0, t_max=8.0)
    with pytest.raises(PotentialRangeError):
        table.Uprime(9.0)
    with pytest.raises(DomainError):
        table.u_derivatives(0.5)
    with pytest.raises(PotentialRangeError):
        build_potential(6, 1.0, t_max=200.0)
    with pytest.raises(ValueError):
        build_potential(5, -1.0)


def test_json_round_trip(tmp_path):
    table = build_potential(5, 1.0, t_max=12.0, grid_size=2001)
    path = tmp_path / "pot.json"
    table.to_json(path)
    back = PotentialTable.from_json(path)
    assert back.n == 5 and back.t_max == 12.0
    t = np.linspace(0, 12, 333)
    assert np.array_equal(back.Uprime(t), table.Uprime(t))


def test_hyperbolic_helpers_continuous():
    r = np.array([1e-9, 1e-7, 1e-3, 0.49, 0.51, 2.0])
    assert np.allclose(sinhc(r), np.sinh(r) / r, rtol=1e-15)
    big = r[r > 0.1]
    assert np.allclose(F_factor(big), np.cosh(big) - np.sinh(big) / big, rtol=1e-13)
    assert f_over_r2(0.0) == pytest.approx(1 / 3)


@pytest.mark.parametrize("n", [2, 5, 6])
def test_kahler_form_structure(n, rng):
    table = build_potential(n, 1.0)
    for _ in range(10):
        z = random_quadric_point(n, rng, 3.0)
        frame = tangent_basis(z).vectors
        om = omega_matrix(table, z, frame)
        g = metric_matrix(table, z, frame)
        assert np.max(np.abs(om + om.T)) < 1e-12 * np.max(np.abs(om))
        assert np.max(np.abs(g - g.T)) < 1e-12 * np.max(np.abs(g))
        assert np.min(np.linalg.eigvalsh(g)) > 0
        # complex structure is compatible: omega(Iv, Iw) = omega(v, w)
        assert np.allclose(omega_matrix(table, z, 1j * frame), om, atol=1e-12 * np.max(np.abs(om)))


def test_hermitian_matrix_is_hermitian(pot5, rng):
    z = random_quadric_point(5, rng)
    h = hermitian_matrix(pot5, z)
    assert np.allclose(h, h.conj().T)


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_metric_on_zero_section(c, rng):
    # at real z, g(v, v) = 2 u'(1) |v|^2 = 2 c^{1/5} |v|^2
    table = build_potential(5, c)
    x = rng.standard_normal(6)
    x /= np.linalg.norm(x)
    for v in tangent_basis(x.astype(complex)).vectors:
        assert metric(table, x, v, v) == pytest.approx(2 * c ** 0.2 * np.vdot(v, v).real, rel=1e-13)
        assert kahler_form(table, x, v, v) == pytest.approx(0.0, abs=1e-15)
