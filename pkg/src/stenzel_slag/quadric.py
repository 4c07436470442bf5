"""T*S^n, the complex quadric Q^n and the Szoke identification between them.

Quadric points and tangent vectors are plain complex numpy arrays of length
n + 1; a tangent vector ``v`` at ``z`` satisfies ``sum(z * v) == 0``.  The
real inner product on C^{n+1} is ``Re(sum(a * conj(b)))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .hyperbolic import sinhc

__all__ = [
    "PreconditionError",
    "InconsistencyError",
    "CalibrationError",
    "CotangentPoint",
    "RealFrame",
    "check_quadric",
    "szoke_map",
    "szoke_inverse",
    "tangent_basis",
    "complex_tangent_basis",
    "apply_complex_structure",
    "holomorphic_volume",
    "pfaffian",
    "random_cotangent_point",
    "random_quadric_point",
    "Calibration",
    "calibrate_volume_constant",
    "real_inner",
]

POINT_TOL = 1e-12
TANGENT_TOL = 1e-10


class PreconditionError(ValueError):
    """An input violates the invariants of its type."""


class InconsistencyError(ValueError):
    """A quadric point that is not in the image of the Szoke map."""


class CalibrationError(RuntimeError):
    """The Calabi-Yau ratio is not constant across sample points."""


def real_inner(a, b) -> float:
    return float(np.real(np.vdot(b, a)))


@dataclass(frozen=True)
class CotangentPoint:
    """(x, xi) in T*S^n with |x| = 1 and x . xi = 0."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        if x.shape != xi.shape or x.ndim != 1:
            raise PreconditionError("x and xi must be vectors of equal length")
        if abs(np.linalg.norm(x) - 1.0) > POINT_TOL:
            raise PreconditionError(f"|x| = {np.linalg.norm(x)!r} is not 1")
        if abs(x @ xi) > POINT_TOL * max(1.0, np.linalg.norm(xi)):
            raise PreconditionError(f"x . xi = {x @ xi!r} is not 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return self.x.size - 1

    @property
    def norm_xi(self) -> float:
        return float(np.linalg.norm(self.xi))


@dataclass(frozen=True)
class RealFrame:
    """Ordered real tangent vectors (rows of ``vectors``) at the quadric point ``base``."""

    base: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=complex))
        vecs = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if vecs.size == 0:
            vecs = np.zeros((0, self.base.size), dtype=complex)
        object.__setattr__(self, "vectors", vecs)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def real_matrix(self) -> np.ndarray:
        """Rows are the vectors in R^{2n+2} = (Re, Im)."""
        return np.hstack([self.vectors.real, self.vectors.imag])

    def tangency_residual(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.max(np.abs(self.vectors @ self.base)))

    def min_singular_value(self) -> float:
        """Smallest singular value after normalizing each vector to unit length."""
        if len(self) == 0:
            return np.inf
        m = self.real_matrix()
        m = m / np.linalg.norm(m, axis=1, keepdims=True)
        return float(np.linalg.svd(m, compute_uv=False)[-1])

    def validate(self, tangent_tol: float = TANGENT_TOL, independence_tol: float = 1e-10) -> None:
        if self.tangency_residual() > tangent_tol:
            raise PreconditionError(f"frame vector not tangent to the quadric ({self.tangency_residual():.3g})")
        if self.min_singular_value() <= independence_tol:
            raise PreconditionError("frame vectors are linearly dependent")

    def transformed(self, h: np.ndarray) -> "RealFrame":
        """Push forward by the linear map h (acting on base and vectors)."""
        return RealFrame(h @ self.base, self.vectors @ h.T)


def check_quadric(z, tol: float = POINT_TOL) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if abs(np.sum(z * z) - 1.0) >= tol * max(1.0, float(np.vdot(z, z).real)):
        raise PreconditionError(f"sum z_i^2 = {np.sum(z * z)!r} is not 1")
    return z


def szoke_map(p: CotangentPoint) -> np.ndarray:
    """Phi(x, xi) = cosh|xi| x + i sinh|xi|/|xi| xi."""
    r = p.norm_xi
    return np.cosh(r) * p.x + 1j * sinhc(r) * p.xi


def szoke_inverse(z) -> CotangentPoint:
    """Inverse of :func:`szoke_map`.

    |xi| is recovered as arcsinh|Im z|, which equals arccosh|Re z| on the
    image but keeps full precision close to the zero section.
    """
    z = check_quadric(z, tol=1e-10)
    re, im = z.real, z.imag
    nre, nim = np.linalg.norm(re), np.linalg.norm(im)
    if nre < 1.0 - 1e-12:
        raise InconsistencyError(f"|Re z| = {nre!r} < 1: not on the image of the Szoke map")
    x = re / nre
    if nim > 1e-12:
        xi = np.arcsinh(nim) * im / nim
    else:
        xi = im.copy()  # sinh r / r = 1 to first order
    xi = xi - (xi @ x) * x
    return CotangentPoint(x, xi)


def tangent_basis(z) -> RealFrame:
    """Real orthonormal basis (2n vectors) of T_z Q^n = {v : sum z_i v_i = 0}."""
    z = check_quadric(z)
    a, b = z.real, z.imag
    # Re(z.v) = a.p - b.q,  Im(z.v) = b.p + a.q  for v = p + i q
    system = np.vstack([np.concatenate([a, -b]), np.concatenate([b, a])])
    ker = null_space(system)
    m = z.size
    vecs = (ker[:m] + 1j * ker[m:]).T
    return RealFrame(z, vecs)


def complex_tangent_basis(z) -> np.ndarray:
    """Hermitian-orthonormal complex basis (n rows) of T_z Q^n."""
    z = np.asarray(z, dtype=complex)
    return null_space(z[None, :]).T


def apply_complex_structure(v):
    """The complex structure of Q^n induced from C^{n+1}: v -> i v."""
    return 1j * np.asarray(v, dtype=complex)


def holomorphic_volume(frame: RealFrame, kappa: float = 1.0) -> complex:
    """Omega(v_1, ..., v_n) = kappa * det[z | v_1 | ... | v_n]."""
    n = frame.base.size - 1
    if len(frame) != n:
        raise PreconditionError(f"holomorphic volume needs exactly {n} vectors, got {len(frame)}")
    mat = np.column_stack([frame.base, frame.vectors.T])
    return complex(kappa * np.linalg.det(mat))


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix (Parlett-Reid elimination with pivoting)."""
    a = np.array(a, dtype=float)
    m = a.shape[0]
    if m % 2:
        return 0.0
    pf = 1.0
    for k in range(0, m - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1 :, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < m:
            tau = a[k, k + 2 :] / a[k, k + 1]
            col = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def random_cotangent_point(n: int, rng: np.random.Generator, max_norm: float = 3.0) -> CotangentPoint:
    x = rng.standard_normal(n + 1)
    x /= np.linalg.norm(x)
    xi = rng.standard_normal(n + 1)
    xi -= (xi @ x) * x
    xi *= rng.uniform(0.0, max_norm) / np.linalg.norm(xi)
    return CotangentPoint(x, xi)


def random_quadric_point(n: int, rng: np.random.Generator, max_norm: float = 3.0) -> np.ndarray:
    return szoke_map(random_cotangent_point(n, rng, max_norm))


@dataclass(frozen=True)
class Calibration:
    kappa: float
    rel_std: float
    ratios: np.ndarray


def _cy_ratio(potential, z, frame: RealFrame) -> float:
    """omega^n/n! divided by (-1)^{n(n-1)/2} (i/2)^n Omega ^ conj(Omega) at kappa = 1.

    Both top forms are evaluated on the same real 2n-frame: the left side as a
    Pfaffian, the right side as |det[z|B]|^2 times the determinant of the
    complex coordinates of the frame in a complex basis B and their conjugates.
    """
    from .potential import omega_matrix

    n = z.size - 1
    top_omega = pfaffian(omega_matrix(potential, z, frame.vectors))
    basis = complex_tangent_basis(z)
    coords = basis.conj() @ frame.vectors.T  # n x 2n
    big = np.vstack([coords, coords.conj()])
    vol = np.linalg.det(np.column_stack([z, basis.T]))
    top_omega_bar = abs(vol) ** 2 * np.linalg.det(big)
    prefactor = (-1) ** (n * (n - 1) // 2) * (0.5j) ** n
    rhs = prefactor * top_omega_bar
    if abs(rhs.imag) > 1e-8 * abs(rhs):
        raise CalibrationError("Omega ^ conj(Omega) term is not real: convention mismatch")
    return top_omega / rhs.real


def calibrate_volume_constant(potential, samples: int = 50, seed: int = 0, max_norm: float | None = None) -> Calibration:
    """Fix kappa_n > 0 so that omega^n/n! = (-1)^{n(n-1)/2} (i/2)^n Omega ^ conj(Omega).

    The ratio of the two sides is evaluated at ``samples`` random quadric
    points on random real frames.  kappa comes from the metric used
    everywhere else; the reported spread uses the metric whose u'' is
    differentiated from the table, so it measures how far the tabulated
    potential is from Ricci-flat.
    """
    n = potential.n
    if max_norm is None:
        max_norm = min(3.0, 0.45 * potential.t_max)
    check = potential.independent() if hasattr(potential, "independent") else potential
    ratios = np.empty(samples)
    spread = np.empty(samples)
    for k in range(samples):
        rng = np.random.default_rng([seed, k])
        z = random_quadric_point(n, rng, max_norm)
        frame = tangent_basis(z)
        mix = rng.standard_normal((2 * n, 2 * n))
        frame = RealFrame(z, mix @ frame.vectors)
        ratios[k] = _cy_ratio(potential, z, frame)
        spread[k] = _cy_ratio(check, z, frame)
    mean = float(np.mean(ratios))
    rel_std = float(np.std(spread) / abs(np.mean(spread)))
    if not mean > 0 or rel_std >= 1e-6:
        raise CalibrationError(f"Calabi-Yau ratio not constant: mean {mean:.6g}, relative std {rel_std:.3g}")
    return Calibration(kappa=float(np.sqrt(mean)), rel_std=rel_std, ratios=spread / np.mean(spread))
