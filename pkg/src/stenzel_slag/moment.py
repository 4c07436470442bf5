"""Moment map of the SO(n+1) action on (Q^n, omega_Stz) and its closed forms on conormal bundles."""

from __future__ import annotations

import numpy as np

from .lie import SubgroupSpec, basis_xi, random_group_element
from .potential import K_factor, PotentialTable, omega_matrix
from .quadric import CotangentPoint, PreconditionError, complex_tangent_basis, random_quadric_point, real_inner

__all__ = [
    "moment_pair",
    "moment_covector",
    "moment_differential",
    "orbit_omega_matrix",
    "retract_to_quadric",
    "mu_eta_closed",
    "mu_ij_closed",
    "hamiltonian_identity_check",
    "equivariance_residual",
]


def moment_pair(potential: PotentialTable, z, X: np.ndarray) -> float:
    """<mu(z), X> = u'(r^2) (i z) . (X z)."""
    z = np.asarray(z, dtype=complex)
    up, _ = potential.u_from_excess(float(np.vdot(z, z).real) - 1.0)
    return up * real_inner(1j * z, X @ z)


def moment_covector(potential: PotentialTable, spec: SubgroupSpec, z) -> np.ndarray:
    """Components of mu(z) on the basis of spec's Lie algebra."""
    z = np.asarray(z, dtype=complex)
    up, _ = potential.u_from_excess(float(np.vdot(z, z).real) - 1.0)
    iz = 1j * z
    return np.array([up * real_inner(iz, b @ z) for b in spec.basis])


def moment_differential(potential: PotentialTable, generators, z, vectors) -> np.ndarray:
    """Matrix d<mu, X_a>(v_b) = -omega(X_a z, v_b).

    Relies on the Hamiltonian identity, which the test-suite verifies
    against finite differences of :func:`moment_pair`.
    """
    z = np.asarray(z, dtype=complex)
    fund = np.array([X @ z for X in generators])
    return -omega_matrix(potential, z, fund, np.atleast_2d(vectors))


def orbit_omega_matrix(potential: PotentialTable, spec: SubgroupSpec, z) -> np.ndarray:
    """omega(xi_a#, xi_b#) over pairs of basis elements; zero iff the orbit through z is isotropic."""
    z = np.asarray(z, dtype=complex)
    fund = np.array([b @ z for b in spec.basis])
    return omega_matrix(potential, z, fund)


def retract_to_quadric(w, iterations: int = 8) -> np.ndarray:
    """Move w back onto sum z_i^2 = 1 along its Hermitian normal conj(w)."""
    w = np.asarray(w, dtype=complex).copy()
    for _ in range(iterations):
        defect = 1.0 - np.sum(w * w)
        if abs(defect) < 1e-16:
            break
        w = w + defect / (2.0 * np.vdot(w, w).real) * w.conj()
    return w


def _chart_check(p: CotangentPoint, zero_x, zero_xi):
    if np.any(np.abs(p.x[list(zero_x)]) > 1e-12) or np.any(np.abs(p.xi[list(zero_xi)]) > 1e-12):
        raise PreconditionError("point is not in the conormal chart")


def mu_eta_closed(potential: PotentialTable, p: CotangentPoint, variant: str = "L1") -> float:
    """<mu, xi12 + xi34 + xi56> on Phi(L1) or Phi(L2) in T*S^5.

    L1: -K(|xi|) (x1 xi2 + x3 xi4 + x5 xi6)
    L2: -K(|xi|) (x1 xi2 + x3 xi4)
    with x1 = cos(phi1) cos(phi2), x3 = cos(phi1) sin(phi2), x5 = sin(phi1)
    (resp. x1 = cos(phi), x3 = sin(phi)).
    """
    x, xi = p.x, p.xi
    if x.size != 6:
        raise PreconditionError("the U(1) examples live in T*S^5")
    if variant == "L1":
        _chart_check(p, (1, 3, 5), (0, 2, 4))
        pairing = x[0] * xi[1] + x[2] * xi[3] + x[4] * xi[5]
    elif variant == "L2":
        _chart_check(p, (1, 3, 4, 5), (0, 2))
        pairing = x[0] * xi[1] + x[2] * xi[3]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if p.norm_xi == 0.0:
        return 0.0
    return float(-K_factor(potential, p.norm_xi) * pairing)


def mu_ij_closed(potential: PotentialTable, p: CotangentPoint) -> np.ndarray:
    """(mu12, mu34, mu56, mu57, mu67) on Phi(T^perp S^2) in T*S^6."""
    x, xi = p.x, p.xi
    if x.size != 7:
        raise PreconditionError("the SO(2)xSO(2)xSO(3) example lives in T*S^6")
    _chart_check(p, (1, 3, 5, 6), (0, 2, 4))
    k = float(K_factor(potential, p.norm_xi)) if p.norm_xi > 0 else 0.0
    return np.array([
        -k * x[0] * xi[1],
        -k * x[2] * xi[3],
        -k * x[4] * xi[5],
        -k * x[4] * xi[6],
        0.0,
    ])


def _richardson_derivative(f, step: float) -> float:
    def central(h):
        return (f(h) - f(-h)) / (2.0 * h)

    return (4.0 * central(step / 2.0) - central(step)) / 3.0


def hamiltonian_identity_check(
    potential: PotentialTable,
    spec: SubgroupSpec,
    trials: int = 100,
    step: float = 1e-4,
    seed: int = 0,
    max_norm: float = 2.5,
    richardson: bool = True,
) -> float:
    """Max | -omega(xi#, v) - d/dt <mu(gamma(t)), xi> | over random z, v and basis xi.

    gamma(t) = retraction of z + t v onto the quadric.
    """
    n = potential.n
    worst = 0.0
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        z = random_quadric_point(n, rng, max_norm)
        basis = complex_tangent_basis(z)
        v = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) @ basis
        v /= np.linalg.norm(v)
        for X in spec.basis:
            lhs = -float(omega_matrix(potential, z, X @ z, v)[0, 0])

            def f(t, X=X):
                return moment_pair(potential, retract_to_quadric(z + t * v), X)

            rhs = _richardson_derivative(f, step) if richardson else (f(step) - f(-step)) / (2 * step)
            worst = max(worst, abs(lhs - rhs))
    return worst


def equivariance_residual(potential: PotentialTable, spec: SubgroupSpec, trials: int = 20, seed: int = 0) -> float:
    """Max |<mu(h z), xi> - <mu(z), h^-1 xi h>| for random h in SO(n+1)."""
    n = potential.n
    full = [basis_xi(i, j, n + 1) for i in range(1, n + 2) for j in range(i + 1, n + 2)]
    big = SubgroupSpec(name="so", dim=n + 1, basis=tuple(full), labels=tuple(str(i) for i in range(len(full))))
    worst = 0.0
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        z = random_quadric_point(n, rng, 2.5)
        h = random_group_element(big, rng, factors=6)
        for X in spec.basis:
            worst = max(worst, abs(moment_pair(potential, h @ z, X) - moment_pair(potential, z, h.T @ X @ h)))
    return worst
