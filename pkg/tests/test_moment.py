"""Moment map: Hamiltonian identity, equivariance and the closed forms on conormal charts."""

import numpy as np
import pytest

from stenzel_slag.construct import CONORMALS, conormal_point
from stenzel_slag.lie import basis_xi, builtin_subgroup
from stenzel_slag.moment import (
    equivariance_residual,
    hamiltonian_identity_check,
    moment_covector,
    moment_differential,
    moment_pair,
    mu_eta_closed,
    mu_ij_closed,
    orbit_omega_matrix,
    retract_to_quadric,
)
from stenzel_slag.potential import K_factor
from stenzel_slag.quadric import CotangentPoint, PreconditionError, szoke_map

SO6 = builtin_subgroup("so223")
U1 = builtin_subgroup("u1diag6")


@pytest.mark.parametrize("spec,fixture", [(U1, "pot5"), (SO6, "pot6")])
def test_hamiltonian_identity(spec, fixture, request):
    pot = request.getfixturevalue(fixture)
    assert hamiltonian_identity_check(pot, spec, trials=20) < 1e-8


def test_hamiltonian_identity_has_second_order_truncation(pot5):
    # plain central differences: halving the step quarters the residual
    r1 = hamiltonian_identity_check(pot5, U1, trials=5, step=1e-2, richardson=False)
    r2 = hamiltonian_identity_check(pot5, U1, trials=5, step=5e-3, richardson=False)
    assert 3.5 < r1 / r2 < 4.5


@pytest.mark.parametrize("spec,fixture", [(U1, "pot5"), (SO6, "pot6")])
def test_equivariance(spec, fixture, request):
    assert equivariance_residual(request.getfixturevalue(fixture), spec) < 1e-11


def test_moment_examples(pot5):
    # zero section: mu vanishes
    z = np.eye(6)[0].astype(complex)
    assert moment_pair(pot5, z, U1.basis[0]) == 0.0
    # Phi(e1, t e2) paired with xi12 is -K(t) t
    t = 0.7
    p = CotangentPoint(np.eye(6)[0], t * np.eye(6)[1])
    assert moment_pair(pot5, szoke_map(p), basis_xi(1, 2, 6)) == pytest.approx(-K_factor(pot5, t) * t, rel=1e-13)


def test_K_factor_limits(pot5):
    assert K_factor(pot5, 0.0) == pytest.approx(2.0, rel=1e-14)  # 2 u'(1), c = 1
    r = 2.5
    assert K_factor(pot5, r) == pytest.approx(pot5.Uprime(2 * r) / r, rel=1e-12)


def test_closed_forms_L1_L2(pot5, rng):
    for variant, name in (("L1", "L1"), ("L2", "L2")):
        spec = CONORMALS[name]
        for _ in range(30):
            p = conormal_point(spec, rng.uniform(0, 2 * np.pi, spec.sphere_dim), rng.uniform(-3, 3, len(spec.fiber)))
            direct = moment_pair(pot5, szoke_map(p), U1.basis[0])
            assert mu_eta_closed(pot5, p, variant) == pytest.approx(direct, abs=1e-10)
    with pytest.raises(PreconditionError):
        mu_eta_closed(pot5, conormal_point(CONORMALS["L2"], [0.3], [1, 1, 1, 1]), "L1")


def test_closed_form_so223(pot6, rng):
    spec = CONORMALS["L"]
    for _ in range(30):
        p = conormal_point(spec, rng.uniform(0, 2 * np.pi, 2), rng.uniform(-3, 3, 4))
        direct = moment_covector(pot6, SO6, szoke_map(p))
        closed = mu_ij_closed(pot6, p)
        assert np.max(np.abs(direct - closed)) < 1e-10
        assert abs(direct[4]) < 1e-12


def test_orbit_isotropic_iff_central_level(pot6):
    # central level (so(3) part zero) on hat L: orbit isotropic
    p = conormal_point(CONORMALS["Lhat"], [0.4, 1.1], [0.8, -0.6, 0, 0])
    om = orbit_omega_matrix(pot6, SO6, szoke_map(p))
    assert np.max(np.abs(om)) < 1e-10
    # mu57 != 0: omega(xi56#, xi67#) = +-mu57
    q = conormal_point(CONORMALS["L"], [0.4, 1.1], [0.8, -0.6, 0.5, 0.9])
    z = szoke_map(q)
    om = orbit_omega_matrix(pot6, SO6, z)
    mu = moment_covector(pot6, SO6, z)
    assert abs(om[2, 4]) == pytest.approx(abs(mu[3]), rel=1e-10)


def test_moment_differential_matches_pairing(pot6, rng):
    z = szoke_map(conormal_point(CONORMALS["L"], [0.2, 0.9], [0.3, 0.1, -0.4, 0.5]))
    v = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    v -= (z @ v) / (z @ z.conj()) * z.conj()  # make sum z_i v_i = 0
    h = 1e-5
    d = moment_differential(pot6, SO6.basis, z, v)[:, 0]
    fd = [(moment_pair(pot6, retract_to_quadric(z + h * v), X) - moment_pair(pot6, retract_to_quadric(z - h * v), X)) / (2 * h) for X in SO6.basis]
    assert np.allclose(d, fd, atol=1e-6)
