"""Block-embedded matrix subgroups of SO(n+1) and their action on the quadric."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import expm, null_space

from .quadric import RealFrame, complex_tangent_basis, holomorphic_volume, random_quadric_point

__all__ = [
    "basis_xi",
    "check_skew",
    "check_group_element",
    "exp_element",
    "fundamental_vector",
    "SubgroupSpec",
    "subgroup_from_blocks",
    "builtin_subgroup",
    "BUILTIN_SUBGROUPS",
    "stabilizer_algebra",
    "isotropy_constant_check",
    "random_group_element",
    "algebra_coordinates",
    "is_central",
    "f_h_modulus_check",
    "a_H_estimate",
]


def basis_xi(i: int, j: int, dim: int) -> np.ndarray:
    """xi_ij = E_ji - E_ij with 1-based indices."""
    if not 1 <= i < j <= dim:
        raise IndexError(f"need 1 <= i < j <= dim, got i={i}, j={j}, dim={dim}")
    m = np.zeros((dim, dim))
    m[j - 1, i - 1] = 1.0
    m[i - 1, j - 1] = -1.0
    return m


def check_skew(m: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.max(np.abs(m + m.T), initial=0.0) > tol:
        raise ValueError("matrix is not skew-symmetric")
    return m


def check_group_element(h: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if np.max(np.abs(h.T @ h - np.eye(h.shape[0]))) > tol or abs(np.linalg.det(h) - 1.0) > tol:
        raise ValueError("matrix is not in SO(n+1)")
    return h


def exp_element(xi: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(t xi) via scaling and squaring with a Pade core."""
    return expm(t * check_skew(xi))


def fundamental_vector(xi: np.ndarray, z) -> np.ndarray:
    """xi#_z = d/dt exp(t xi) z at t = 0, i.e. the matrix product xi z."""
    return np.asarray(xi) @ np.asarray(z, dtype=complex)


@dataclass(frozen=True)
class SubgroupSpec:
    """A connected subgroup of SO(dim) given by a basis of its Lie algebra."""

    name: str
    dim: int
    basis: tuple
    labels: tuple
    blocks: tuple = field(default=())

    def __post_init__(self):
        basis = tuple(check_skew(b) for b in self.basis)
        object.__setattr__(self, "basis", basis)
        if len(self.labels) != len(basis):
            raise ValueError("one label per basis element")
        flat = np.array([b.ravel() for b in basis])
        if np.linalg.matrix_rank(flat) != len(basis):
            raise ValueError("algebra basis is linearly dependent")
        used = [i for blk in self.blocks for i in blk]
        if len(used) != len(set(used)):
            raise ValueError("blocks overlap")

    @property
    def algebra_dim(self) -> int:
        return len(self.basis)

    def element(self, coeffs) -> np.ndarray:
        return sum(c * b for c, b in zip(coeffs, self.basis))

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @property
    def is_abelian(self) -> bool:
        return all(np.allclose(a @ b, b @ a) for a, b in combinations(self.basis, 2))


def subgroup_from_blocks(name: str, blocks, dim: int | None = None) -> SubgroupSpec:
    """Product of SO(k) factors, one per block of 1-based coordinate indices."""
    blocks = tuple(tuple(int(i) for i in blk) for blk in blocks)
    dim = dim or max(i for blk in blocks for i in blk)
    basis, labels = [], []
    for blk in blocks:
        for i, j in combinations(sorted(blk), 2):
            basis.append(basis_xi(i, j, dim))
            labels.append(f"xi{i}{j}")
    return SubgroupSpec(name=name, dim=dim, basis=tuple(basis), labels=tuple(labels), blocks=blocks)


def _u1diag6() -> SubgroupSpec:
    eta = basis_xi(1, 2, 6) + basis_xi(3, 4, 6) + basis_xi(5, 6, 6)
    return SubgroupSpec(name="u1diag6", dim=6, basis=(eta,), labels=("eta",))


BUILTIN_SUBGROUPS = {
    "u1diag6": _u1diag6,
    "so223": lambda: subgroup_from_blocks("so223", [[1, 2], [3, 4], [5, 6, 7]], 7),
}


def builtin_subgroup(name: str) -> SubgroupSpec:
    try:
        return BUILTIN_SUBGROUPS[name]()
    except KeyError:
        raise ValueError(f"unknown subgroup {name!r}; known: {sorted(BUILTIN_SUBGROUPS)}") from None


def _action_matrix(spec: SubgroupSpec, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    cols = np.array([b @ z for b in spec.basis]).T
    return np.vstack([cols.real, cols.imag])


def stabilizer_algebra(spec: SubgroupSpec, z, rtol: float = 1e-10) -> list[np.ndarray]:
    """Basis of {xi in h : xi z = 0}, from the null space of coefficients -> xi z."""
    a = _action_matrix(spec, z)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return list(spec.basis)
    ker = null_space(a, rcond=rtol)
    return [spec.element(col) for col in ker.T]


def algebra_coordinates(spec: SubgroupSpec, x: np.ndarray) -> np.ndarray:
    """Coordinates of x in the subgroup basis (least squares over matrix entries)."""
    flat = np.array([b.ravel() for b in spec.basis]).T
    coeffs, *_ = np.linalg.lstsq(flat, np.asarray(x).ravel(), rcond=None)
    return coeffs


def _projector(spec: SubgroupSpec, mats) -> np.ndarray:
    d = spec.algebra_dim
    if len(mats) == 0:
        return np.zeros((d, d))
    coords = np.array([algebra_coordinates(spec, m) for m in mats]).T
    q, _ = np.linalg.qr(coords)
    return q @ q.T


def isotropy_constant_check(spec: SubgroupSpec, K_basis, points, times=(0.1, 1.0, 2.0)) -> tuple[bool, dict]:
    """Check that the stabilizer algebra equals span(K_basis) and that exp(t k) fixes each point."""
    target = _projector(spec, K_basis)
    worst_dist, worst_fix, bad = 0.0, 0.0, []
    for idx, z in enumerate(points):
        z = np.asarray(z, dtype=complex)
        stab = stabilizer_algebra(spec, z)
        dist = float(np.linalg.norm(_projector(spec, stab) - target, 2))
        fix = max((float(np.max(np.abs(exp_element(k, t) @ z - z))) for k in K_basis for t in times), default=0.0)
        worst_dist, worst_fix = max(worst_dist, dist), max(worst_fix, fix)
        if dist >= 1e-8 or fix >= 1e-10:
            bad.append({"index": idx, "stabilizer_dim": len(stab), "subspace_distance": dist, "fix_residual": fix})
    report = {"points": len(points), "max_subspace_distance": worst_dist, "max_fix_residual": worst_fix, "failures": bad}
    return not bad, report


def random_group_element(spec: SubgroupSpec, rng: np.random.Generator, factors: int = 3) -> np.ndarray:
    """Product of ``factors`` basis exponentials with angles uniform in (-pi, pi]."""
    h = np.eye(spec.dim)
    for _ in range(factors):
        k = rng.integers(spec.algebra_dim)
        angle = np.pi - rng.uniform(0.0, 2 * np.pi)
        h = h @ exp_element(spec.basis[k], angle)
    return h


def is_central(spec: SubgroupSpec, c, trials: int = 20, seed: int = 0, tol: float = 1e-10) -> bool:
    """True iff <c, Ad_{h^-1} xi> = <c, xi> for sampled h in H and every basis xi."""
    c = np.asarray(c, dtype=float)
    if c.size != spec.algebra_dim:
        raise ValueError("covector length must equal the algebra dimension")
    for k in range(trials):
        h = random_group_element(spec, np.random.default_rng([seed, k]))
        for i, xi in enumerate(spec.basis):
            moved = algebra_coordinates(spec, h.T @ xi @ h)
            if abs(c @ moved - c[i]) > tol:
                return False
    return True


def _random_frame(z, rng) -> RealFrame:
    basis = complex_tangent_basis(z)
    n = basis.shape[0]
    mix = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return RealFrame(z, mix @ basis)


def _pullback_ratio(h, z, frame: RealFrame) -> complex:
    # (L_h^* Omega)_z(frame) / Omega_z(frame)
    return holomorphic_volume(frame.transformed(h)) / holomorphic_volume(frame)


def f_h_modulus_check(h: np.ndarray, samples: int = 50, seed: int = 0, max_norm: float = 3.0) -> tuple[float, float]:
    """Max | |f_h| - 1 | and the spread of f_h over random points and frames."""
    n = h.shape[0] - 1
    ratios = []
    for k in range(samples):
        rng = np.random.default_rng([seed, k])
        z = random_quadric_point(n, rng, max_norm)
        ratios.append(_pullback_ratio(h, z, _random_frame(z, rng)))
    ratios = np.array(ratios)
    return float(np.max(np.abs(np.abs(ratios) - 1.0))), float(np.std(ratios))


def _phase_of_f(h, rng, max_norm) -> float:
    n = h.shape[0] - 1
    z = random_quadric_point(n, rng, max_norm)
    return float(np.angle(_pullback_ratio(h, z, _random_frame(z, rng))))


def a_H_estimate(spec: SubgroupSpec, step: float = 1e-5, seed: int = 0, max_norm: float = 3.0) -> np.ndarray:
    """Phase derivative of f_{exp(t xi)} at t = 0 for each basis xi (central differences)."""
    out = np.empty(spec.algebra_dim)
    for i, xi in enumerate(spec.basis):
        plus = _phase_of_f(exp_element(xi, step), np.random.default_rng([seed, i, 1]), max_norm)
        minus = _phase_of_f(exp_element(xi, -step), np.random.default_rng([seed, i, 2]), max_norm)
        out[i] = (plus - minus) / (2 * step)
    return out
