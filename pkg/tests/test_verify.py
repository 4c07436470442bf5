"""Isotropy, perpendicularity, Lagrangian angle, phase prediction and the negative controls."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stenzel_slag.construct import (
    CONORMALS,
    conormal_point,
    conormal_tangent_frame,
    get_example,
    quotient_basis,
    solve_level_set,
    sweep,
)
from stenzel_slag.lie import builtin_subgroup
from stenzel_slag.quadric import RealFrame, calibrate_volume_constant
from stenzel_slag.verify import (
    IsotropyError,
    angle_gradient_norm,
    check_angle_constancy,
    check_isotropic,
    check_perpendicular_generalized,
    check_perpendicular_strict,
    check_phase_shift,
    circular_distance_mod_pi,
    adapted_frame,
    g_orthonormalize,
    lagrangian_angle,
    representatives_near_mean,
)
from stenzel_slag.potential import metric_matrix
from stenzel_slag.witness import (
    ShearedConormal,
    conormal_curve,
    non_lagrangian_frame,
    noncentral_orbit_witness,
    tangential_orbit_point,
)

ETA = builtin_subgroup("u1diag6").basis[0]
SO = builtin_subgroup("so223")


def _L1_point(rng, norm=None):
    spec = CONORMALS["L1"]
    fib = rng.standard_normal(3)
    if norm is not None:
        fib *= norm / np.linalg.norm(fib) if norm > 0 else 0.0
    return conormal_point(spec, rng.uniform(0, 2 * np.pi, 2), fib)


@pytest.fixture(scope="module")
def levels(pot5, pot6):
    out = {}
    for name, level, pot in (("u1-l1", [0.3], pot5), ("u1-l2", [-0.5], pot5), ("so223", [0.2, -0.1], pot6)):
        ex = get_example(name)
        out[name] = (ex, pot, solve_level_set(ex, pot, level, 6, seed=2))
    return out


def test_isotropy_examples(pot5, rng):
    frame = conormal_tangent_frame(CONORMALS["L1"], _L1_point(rng))
    assert check_isotropic(pot5, frame) < 1e-10
    assert check_isotropic(pot5, non_lagrangian_frame(frame)) > 1e-2


def test_isotropy_of_swept_frames(levels):
    ex, pot, pts = levels["u1-l1"]
    assert max(check_isotropic(pot, s.frame) for s in sweep(ex, pts, per_point=5)) < 1e-8


def test_g_orthonormalize(pot5, rng):
    frame = conormal_tangent_frame(CONORMALS["L1"], _L1_point(rng))
    ortho = g_orthonormalize(pot5, frame)
    assert np.allclose(metric_matrix(pot5, ortho.base, ortho.vectors), np.eye(5), atol=1e-12)


@pytest.mark.parametrize("norm", [0.0, 1e-4, 1.0, 3.0])
def test_strict_perpendicularity_on_L1(pot5, norm):
    rng = np.random.default_rng(int(norm * 1e4) + 1)
    for _ in range(10):
        frame = conormal_tangent_frame(CONORMALS["L1"], _L1_point(rng, norm))
        assert check_perpendicular_strict(pot5, [ETA], frame) < 1e-8


@pytest.mark.parametrize("norm", [0.0, 1e-6, 0.5, 2.0])
def test_strict_perpendicularity_on_hat_L(pot6, norm):
    rng = np.random.default_rng(3)
    for _ in range(10):
        fib = rng.standard_normal(2)
        fib *= norm / np.linalg.norm(fib)
        p = conormal_point(CONORMALS["L"], rng.uniform(0, 2 * np.pi, 2), np.concatenate([fib, [0, 0]]))
        frame = conormal_tangent_frame(CONORMALS["L"], p)
        assert check_perpendicular_strict(pot6, SO.basis, frame) < 1e-8


def test_strict_fails_and_generalized_holds_on_L2(levels):
    ex, pot, pts = levels["u1-l2"]
    strict = max(check_perpendicular_strict(pot, [ETA], lp.L_frame) for lp in pts)
    assert strict > 1e-3
    for lp in pts:
        res, flag = check_perpendicular_generalized(pot, [ETA], lp)
        assert res < 1e-8 and flag


def test_strict_implies_generalized(levels):
    for name in ("u1-l1", "so223"):
        ex, pot, pts = levels[name]
        for lp in pts:
            res, flag = check_perpendicular_generalized(pot, ex.group.basis, lp)
            assert res < 1e-8 and flag
            adapted = adapted_frame(pot, lp, quotient_basis(ex.group, ex.K_basis))
            assert np.max(np.abs(adapted.w)) < 1e-8


def test_generalized_flags_tangential_orbit(pot5):
    res, flag = check_perpendicular_generalized(pot5, [ETA], tangential_orbit_point(5, ETA))
    assert res < 1e-8 and not flag


def test_angle_examples(pot5, rng):
    z = np.eye(6)[0].astype(complex)
    kappa = calibrate_volume_constant(pot5).kappa
    zero = RealFrame(z, np.eye(6)[1:].astype(complex))
    sample = lagrangian_angle(pot5, zero, kappa)
    assert circular_distance_mod_pi(sample.theta_mod_pi, 0.0) < 1e-14
    assert sample.modulus == pytest.approx(1.0, rel=1e-12)
    frame = conormal_tangent_frame(CONORMALS["L1"], _L1_point(rng))
    base = lagrangian_angle(pot5, frame).theta_mod_pi
    swapped = RealFrame(frame.base, frame.vectors[[1, 0, 2, 3, 4]])
    assert circular_distance_mod_pi(lagrangian_angle(pot5, swapped).theta_mod_pi, base) < 1e-12
    with pytest.raises(IsotropyError):
        lagrangian_angle(pot5, non_lagrangian_frame(frame))


@given(st.lists(st.floats(0.01, 100.0), min_size=5, max_size=5))
def test_angle_invariant_under_positive_scaling(pot5, scales):
    frame = conormal_tangent_frame(CONORMALS["L1"], conormal_point(CONORMALS["L1"], [0.2, 0.7], [0.5, -1.0, 0.3]))
    scaled = RealFrame(frame.base, frame.vectors * np.array(scales)[:, None])
    d = circular_distance_mod_pi(lagrangian_angle(pot5, scaled).theta_mod_pi, lagrangian_angle(pot5, frame).theta_mod_pi)
    assert d < 1e-11


def test_angle_constancy_statistics():
    mean, std = check_angle_constancy([0.1, 0.1, 0.1])
    assert mean == pytest.approx(0.1) and std < 1e-15
    # wrap-around at 0 = pi is not a spread
    mean, std = check_angle_constancy([1e-9, np.pi - 1e-9])
    assert std < 2e-9
    rng = np.random.default_rng(0)
    _, std = check_angle_constancy(np.mod(0.5 + 1e-3 * rng.standard_normal(5000), np.pi))
    assert std == pytest.approx(1e-3, rel=0.05)
    assert np.ptp(representatives_near_mean([1e-12, np.pi - 1e-12])) < 1e-11


def test_conormal_angles_constant(pot5, rng):
    frames = [conormal_tangent_frame(CONORMALS["L1"], _L1_point(rng, 3 * rng.random())) for _ in range(40)]
    _, std = check_angle_constancy([lagrangian_angle(pot5, f) for f in frames])
    assert std < 1e-8


def test_swept_angles_constant(levels):
    ex, pot, pts = levels["u1-l2"]
    _, std = check_angle_constancy([lagrangian_angle(pot, s.frame) for s in sweep(ex, pts, per_point=10)])
    assert std < 1e-8


def test_phase_examples(levels):
    for name, shift in (("u1-l1", np.pi / 2), ("so223", 0.0)):
        ex, pot, pts = levels[name]
        theta_L = check_angle_constancy([lagrangian_angle(pot, lp.L_frame) for lp in pts])[0]
        swept = [lagrangian_angle(pot, s.frame) for s in sweep(ex, pts, per_point=5)]
        res = check_phase_shift(theta_L, swept, ex.dim_HK)
        assert res.passed and res.predicted_shift == pytest.approx(shift)
    res = check_phase_shift(0.7, [0.7, 0.7], 0)
    assert res.passed and res.distance < 1e-15


def test_mean_curvature_proxy(pot5, rng):
    p = _L1_point(rng, 1.0)
    frame = conormal_tangent_frame(CONORMALS["L1"], p)
    assert angle_gradient_norm(pot5, frame, conormal_curve(CONORMALS["L1"], p)) < 1e-5
    sheared = ShearedConormal(pot5)
    grads = [angle_gradient_norm(pot5, sheared.frame(q), sheared.curve(q)) for q in (_L1_point(rng, 1.0) for _ in range(5))]
    assert max(grads) > 1e-2


def test_sheared_witness_is_lagrangian_but_not_special(pot5, rng):
    sheared = ShearedConormal(pot5)
    frames = [sheared.frame(_L1_point(rng, 1.5 * rng.random())) for _ in range(40)]
    assert max(check_isotropic(pot5, f) for f in frames) < 1e-8
    _, std = check_angle_constancy([lagrangian_angle(pot5, f) for f in frames])
    assert std > 1e-2


def test_adapted_frame(levels):
    for name in ("u1-l1", "u1-l2", "so223"):
        ex, pot, pts = levels[name]
        gens = quotient_basis(ex.group, ex.K_basis)
        for lp in pts:
            adapted = adapted_frame(pot, lp, gens)
            assert max(adapted.residuals.values()) < 1e-8
            assert adapted.normals.shape[0] == len(gens)
        if name == "u1-l2":
            assert np.max(np.abs(adapted.w)) > 1e-3


def test_noncentral_witness(pot6):
    w = noncentral_orbit_witness(pot6)
    assert not w.central
    assert w.max_orbit_omega > 1e-4
    assert abs(w.level[3]) > 1e-4  # mu57
