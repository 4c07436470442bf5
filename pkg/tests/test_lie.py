"""Block subgroups of SO(n+1): exponentials, stabilizers, centrality and the volume-form factor."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stenzel_slag.lie import (
    SubgroupSpec,
    a_H_estimate,
    basis_xi,
    builtin_subgroup,
    check_group_element,
    exp_element,
    f_h_modulus_check,
    fundamental_vector,
    is_central,
    isotropy_constant_check,
    random_group_element,
    stabilizer_algebra,
    subgroup_from_blocks,
)


def test_basis_xi_convention():
    xi = basis_xi(1, 2, 3)
    assert xi[1, 0] == 1.0 and xi[0, 1] == -1.0
    # exp(t xi12) rotates e1 towards e2
    assert np.allclose(exp_element(xi, np.pi / 2) @ np.eye(3)[0], np.eye(3)[1])
    with pytest.raises(IndexError):
        basis_xi(2, 2, 3)
    with pytest.raises(IndexError):
        basis_xi(1, 4, 3)


pairs = st.lists(st.integers(1, 7), min_size=2, max_size=2, unique=True).map(sorted)


@given(st.floats(-10, 10), pairs)
def test_exp_is_a_rotation(t, pair):
    i, j = pair
    g = exp_element(basis_xi(i, j, 7), t)
    check_group_element(g)
    # closed form of a plane rotation (scaling-and-squaring keeps ~1e-13)
    assert g[i - 1, i - 1] == pytest.approx(np.cos(t), abs=1e-12)
    assert g[j - 1, i - 1] == pytest.approx(np.sin(t), abs=1e-12)


def test_builtin_subgroups():
    u1 = builtin_subgroup("u1diag6")
    assert u1.algebra_dim == 1 and u1.is_abelian
    so = builtin_subgroup("so223")
    assert so.algebra_dim == 5 and not so.is_abelian
    assert so.labels == ("xi12", "xi34", "xi56", "xi57", "xi67")
    with pytest.raises(ValueError):
        builtin_subgroup("nope")
    with pytest.raises(ValueError):
        SubgroupSpec("bad", 3, (basis_xi(1, 2, 3), 2 * basis_xi(1, 2, 3)), ("a", "b"))
    assert subgroup_from_blocks("x", [[1, 2, 3, 4]]).algebra_dim == 6


def test_stabilizer_examples():
    so = builtin_subgroup("so223")
    # x = e5: xi56, xi57 move it, xi67 fixes it, xi12 and xi34 fix it too
    z = np.eye(7)[4].astype(complex)
    stab = stabilizer_algebra(so, z)
    assert len(stab) == 3
    # generic point in the span of e1, e3, e5: only xi67 fixes it
    z = np.array([0.5, 0, 0.5, 0, np.sqrt(0.5), 0, 0], dtype=complex)
    stab = stabilizer_algebra(so, z)
    assert len(stab) == 1 and np.allclose(np.abs(stab[0]), np.abs(basis_xi(6, 7, 7)))
    ok, rep = isotropy_constant_check(so, [basis_xi(6, 7, 7)], [z])
    assert ok and rep["max_fix_residual"] < 1e-14


def test_fundamental_vector_is_derivative():
    xi = basis_xi(2, 4, 5)
    z = np.array([0.3, 1.0 + 0.2j, 0.1, -0.5j, 0.0])
    h = 1e-6
    fd = (exp_element(xi, h) @ z - exp_element(xi, -h) @ z) / (2 * h)
    assert np.allclose(fundamental_vector(xi, z), fd, atol=1e-9)


def test_centrality():
    u1 = builtin_subgroup("u1diag6")
    assert is_central(u1, np.array([0.7]))
    so = builtin_subgroup("so223")
    assert is_central(so, np.array([0.2, -0.1, 0, 0, 0]))
    assert not is_central(so, np.array([0.2, -0.1, 0.3, 0, 0]))
    with pytest.raises(ValueError):
        is_central(so, np.zeros(3))


@pytest.mark.parametrize("name", ["u1diag6", "so223"])
def test_volume_factor_is_unimodular(name):
    spec = builtin_subgroup(name)
    rng = np.random.default_rng(3)
    for _ in range(5):
        h = random_group_element(spec, rng)
        dev, _ = f_h_modulus_check(h, samples=10)
        assert dev < 1e-10
    assert np.max(np.abs(a_H_estimate(spec))) < 1e-6


def test_volume_factor_detects_reflection():
    # an orientation-reversing orthogonal map has f_h = -1 up to conjugation: modulus still 1, phase pi
    h = np.diag([1, 1, 1, 1, 1, -1.0])
    dev, spread = f_h_modulus_check(h, samples=5)
    assert dev < 1e-12 and spread < 1e-12
