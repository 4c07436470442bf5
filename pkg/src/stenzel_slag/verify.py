"""Residual checks certifying that a swept manifold is special Lagrangian."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import sqrtm

from .construct import LevelSetPoint
from .potential import PotentialTable, metric_matrix, omega_matrix
from .quadric import PreconditionError, RealFrame, holomorphic_volume

__all__ = [
    "IsotropyError",
    "g_normalize",
    "g_orthonormalize",
    "check_isotropic",
    "check_perpendicular_strict",
    "check_perpendicular_generalized",
    "AngleSample",
    "lagrangian_angle",
    "wrap_mod_pi",
    "circular_distance_mod_pi",
    "check_angle_constancy",
    "representatives_near_mean",
    "PhaseResult",
    "check_phase_shift",
    "angle_gradient_norm",
    "mean_curvature_proxy",
    "AdaptedFrame",
    "adapted_frame",
    "check_theorem_phase",
    "frame_from_lemma",
]


class IsotropyError(PreconditionError):
    """Frame handed to the angle computation does not span a Lagrangian plane."""


def g_normalize(potential: PotentialTable, frame: RealFrame) -> RealFrame:
    lengths = np.sqrt(np.real(np.diag(metric_matrix(potential, frame.base, frame.vectors))))
    return RealFrame(frame.base, frame.vectors / lengths[:, None])


def g_orthonormalize(potential: PotentialTable, frame: RealFrame) -> RealFrame:
    """Modified Gram-Schmidt in the Kahler metric g."""
    z = frame.base
    out = []
    for v in frame.vectors:
        w = v.copy()
        for e in out:
            w = w - metric_matrix(potential, z, w, e)[0, 0] * e
        norm = np.sqrt(metric_matrix(potential, z, w)[0, 0])
        if not norm > 0:
            raise PreconditionError("frame vectors are linearly dependent")
        out.append(w / norm)
    return RealFrame(z, np.array(out))


def check_isotropic(potential: PotentialTable, frame: RealFrame) -> float:
    """max |omega(e_a, e_b)| over pairs of the g-normalized frame."""
    if len(frame) < 2:
        return 0.0
    unit = g_normalize(potential, frame)
    return float(np.max(np.abs(omega_matrix(potential, unit.base, unit.vectors))))


def _projection_norms(potential, z, frame_vectors, targets):
    """g-lengths of the g-orthogonal projections of targets onto span(frame_vectors), and of targets."""
    gram = metric_matrix(potential, z, frame_vectors)
    cross = metric_matrix(potential, z, frame_vectors, targets)  # frame x targets
    coeffs = np.linalg.solve(gram, cross)
    proj_sq = np.einsum("ij,ij->j", cross, coeffs)
    full_sq = np.real(np.diag(metric_matrix(potential, z, targets)))
    return np.sqrt(np.maximum(proj_sq, 0.0)), np.sqrt(full_sq), coeffs


def check_perpendicular_strict(potential: PotentialTable, generators, L_frame: RealFrame, zero_tol: float = 1e-12) -> float:
    """max over generators of |P_L xi#| / |xi#| (g-orthogonal projection onto span(L_frame)).

    Generators with vanishing xi# at the point are skipped.
    """
    z = L_frame.base
    fund = np.array([X @ z for X in generators])
    proj, full, _ = _projection_norms(potential, z, L_frame.vectors, fund)
    scale = np.max(np.abs(z))
    keep = full > zero_tol * scale
    return float(np.max(proj[keep] / full[keep], initial=0.0))


def check_perpendicular_generalized(
    potential: PotentialTable,
    generators,
    point: LevelSetPoint,
    L_frame: RealFrame | None = None,
    zero_tol: float = 1e-12,
) -> tuple[float, bool]:
    """Decompose xi# = u + w with u g-normal to L and w in T_pV_c.

    Since T_pV_c lies in T_pL, w must equal the g-projection of xi# onto T_pL;
    the residual is the part of that projection outside T_pV_c, relative to
    |xi#|. The flag is True iff |u| > 1e-8 |xi#| for every non-vanishing xi#.
    """
    L_frame = L_frame if L_frame is not None else point.L_frame
    z = L_frame.base
    fund = np.array([X @ z for X in generators])
    _, full, coeffs = _projection_norms(potential, z, L_frame.vectors, fund)
    w_L = coeffs.T @ L_frame.vectors  # P_L xi#, one row per generator
    scale = np.max(np.abs(z))
    keep = full > zero_tol * scale
    if len(point.v_tangent):
        proj_v, _, cv = _projection_norms(potential, z, point.v_tangent.vectors, w_L)
        w = cv.T @ point.v_tangent.vectors
    else:
        w = np.zeros_like(w_L)
    off = np.sqrt(np.maximum(np.real(np.diag(metric_matrix(potential, z, w_L - w))), 0.0))
    u_norm = np.sqrt(np.maximum(np.real(np.diag(metric_matrix(potential, z, fund - w))), 0.0))
    residual = float(np.max(off[keep] / full[keep], initial=0.0))
    flag = bool(np.all(u_norm[keep] > 1e-8 * full[keep]))
    return residual, flag


@dataclass(frozen=True)
class AngleSample:
    theta_mod_pi: float
    gram_det: float
    modulus: float
    at: object = None


def wrap_mod_pi(theta) -> np.ndarray | float:
    return np.mod(theta, np.pi)


def circular_distance_mod_pi(a, b) -> float:
    d = np.mod(np.asarray(a) - np.asarray(b), np.pi)
    return float(np.minimum(d, np.pi - d))


def lagrangian_angle(
    potential: PotentialTable,
    frame: RealFrame,
    kappa: float = 1.0,
    isotropy_tol: float = 1e-8,
    at=None,
) -> AngleSample:
    """theta mod pi with Omega = e^{i theta} vol on a g-orthonormal frame of a Lagrangian plane."""
    if len(frame) != frame.base.size - 1:
        raise PreconditionError("the angle needs n vectors")
    iso = check_isotropic(potential, frame)
    if iso > isotropy_tol:
        raise IsotropyError(f"frame is not Lagrangian (isotropy residual {iso:.3g})")
    ortho = g_orthonormalize(potential, frame)
    gram = metric_matrix(potential, ortho.base, ortho.vectors)
    vol = holomorphic_volume(ortho, kappa)
    return AngleSample(float(wrap_mod_pi(np.angle(vol))), float(np.linalg.det(gram)), float(abs(vol)), at)


def _thetas(samples) -> np.ndarray:
    return np.array([s.theta_mod_pi if isinstance(s, AngleSample) else float(s) for s in samples])


def check_angle_constancy(samples) -> tuple[float, float]:
    """Circular mean (mod pi) and circular standard deviation, computed on 2 theta.

    1 - R is accumulated from deviations about a provisional mean so that
    spreads far below sqrt(machine epsilon) are resolved.
    """
    theta = _thetas(samples)
    if theta.size < 2:
        raise PreconditionError("need at least two angle samples")
    ref = np.angle(np.mean(np.exp(2j * theta)))
    d = np.mod(2 * theta - ref + np.pi, 2 * np.pi) - np.pi
    one_minus_c = np.mean(2.0 * np.sin(d / 2) ** 2)
    s = np.mean(np.sin(d))
    one_minus_r2 = one_minus_c * (2.0 - one_minus_c) - s * s
    r = np.sqrt(max(1.0 - one_minus_r2, 0.0))
    one_minus_r = max(one_minus_r2, 0.0) / (1.0 + r)
    std = np.sqrt(-2.0 * np.log1p(-one_minus_r)) / 2.0 if one_minus_r < 1.0 else np.inf
    mean = ref + np.arctan2(s, 1.0 - one_minus_c)
    return float(wrap_mod_pi(mean / 2.0)), float(std)


def representatives_near_mean(samples) -> np.ndarray:
    """Each angle's representative mod pi closest to the circular mean (so a constant angle prints constant)."""
    theta = _thetas(samples)
    mean, _ = check_angle_constancy(theta) if theta.size > 1 else (float(theta[0]), 0.0)
    return mean + np.mod(theta - mean + np.pi / 2, np.pi) - np.pi / 2


@dataclass(frozen=True)
class PhaseResult:
    passed: bool
    predicted_shift: float
    observed_shift: float
    distance: float


def check_phase_shift(theta_L: float, swept, dim_HK: int, tol: float = 1e-6) -> PhaseResult:
    """Compare the swept angle with theta_L - (pi/2) dim(H/K), mod pi."""
    mean, _ = check_angle_constancy(list(swept) * (2 if len(swept) == 1 else 1))
    predicted = float(wrap_mod_pi(-0.5 * np.pi * dim_HK))
    observed = float(wrap_mod_pi(mean - theta_L))
    dist = circular_distance_mod_pi(observed, predicted)
    return PhaseResult(dist < tol, predicted, observed, dist)


def angle_gradient_norm(
    potential: PotentialTable,
    frame: RealFrame,
    curve: Callable[[int, float], RealFrame],
    step: float = 1e-3,
) -> float:
    """|grad theta| for the induced metric, from central differences.

    ``curve(a, s)`` returns a tangent frame at the point reached by moving a
    parameter distance s along a curve whose velocity at s = 0 is
    ``frame.vectors[a]``.
    """
    diffs = np.empty(len(frame))
    for a in range(len(frame)):
        plus = lagrangian_angle(potential, curve(a, step)).theta_mod_pi
        minus = lagrangian_angle(potential, curve(a, -step)).theta_mod_pi
        d = np.mod(plus - minus + np.pi / 2, np.pi) - np.pi / 2
        diffs[a] = d / (2 * step)
    gram = metric_matrix(potential, frame.base, frame.vectors)
    return float(np.sqrt(max(diffs @ np.linalg.solve(gram, diffs), 0.0)))


def mean_curvature_proxy(potential: PotentialTable, items, step: float = 1e-3) -> float:
    """max |grad theta| over (frame, curve) pairs; zero for a special Lagrangian."""
    return max(angle_gradient_norm(potential, frame, curve, step) for frame, curve in items)


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal T_pL frame (I n_1, ..., I n_m, v_1, ..., v_k) from the generalized decomposition.

    ``A`` changes the algebra basis so that n_j = (sum_i A_ij xi_i)# + w_j are
    g-orthonormal normals; w_j lie in T_pV_c.
    """

    A: np.ndarray
    normals: np.ndarray
    w: np.ndarray
    v: np.ndarray
    frame: RealFrame
    residuals: dict


def adapted_frame(potential: PotentialTable, point: LevelSetPoint, generators, L_frame: RealFrame | None = None, tol: float = 1e-8) -> AdaptedFrame:
    L_frame = L_frame if L_frame is not None else point.L_frame
    z = L_frame.base
    resid, _ = check_perpendicular_generalized(potential, generators, point, L_frame)
    if resid > tol:
        raise PreconditionError(f"generalized perpendicularity fails (residual {resid:.3g})")
    v = g_orthonormalize(potential, point.v_tangent).vectors if len(point.v_tangent) else np.zeros((0, z.size), complex)
    fund = np.array([X @ z for X in generators])
    if len(v):
        zpart = metric_matrix(potential, z, fund, v) @ v  # g-projection onto T_pV (v orthonormal)
    else:
        zpart = np.zeros_like(fund)
    u = fund - zpart
    gu = metric_matrix(potential, z, u)
    A = np.real(np.linalg.inv(sqrtm(gu)))
    normals = A.T @ u
    w = -(A.T @ zpart)
    frame = RealFrame(z, np.vstack([1j * normals, v]) if len(v) else 1j * normals)
    gram = metric_matrix(potential, z, frame.vectors)
    normal_res = np.abs(metric_matrix(potential, z, L_frame.vectors, normals))
    L_unit = np.sqrt(np.real(np.diag(metric_matrix(potential, z, L_frame.vectors))))
    inl = 1j * normals
    _, _, ci = _projection_norms(potential, z, L_frame.vectors, inl)
    tang = inl - ci.T @ L_frame.vectors
    residuals = {
        "orthonormality": float(np.max(np.abs(gram - np.eye(len(frame))))),
        "normality": float(np.max(normal_res / L_unit[:, None])),
        "tangency": float(np.max(np.sqrt(np.abs(np.real(np.diag(metric_matrix(potential, z, tang)))))))
        if len(tang)
        else 0.0,
    }
    return AdaptedFrame(A, normals, w, v, frame, residuals)


# names used by the operation catalogue
check_theorem_phase = check_phase_shift
frame_from_lemma = adapted_frame
