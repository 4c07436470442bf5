"""Negative controls: configurations on which the certification checks must fail."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .construct import (
    CONORMALS,
    ConormalSpec,
    LevelSetPoint,
    base_tangents,
    conormal_point,
    conormal_tangent_frame,
)
from .lie import builtin_subgroup, exp_element, is_central
from .moment import moment_covector, moment_differential, moment_pair, orbit_omega_matrix
from .potential import PotentialTable
from .quadric import CotangentPoint, RealFrame, szoke_map

__all__ = [
    "conormal_curve",
    "ShearedConormal",
    "non_lagrangian_frame",
    "tangential_orbit_point",
    "NonCentralWitness",
    "noncentral_orbit_witness",
]


def _displace(spec: ConormalSpec, p: CotangentPoint, a: int, s: float) -> CotangentPoint:
    """Move along chart direction a: base directions retract x, fiber directions shift xi_j."""
    tang = base_tangents(spec, p.x)
    k = tang.shape[0]
    if a < k:
        x = p.x + s * tang[a]
        return CotangentPoint(x / np.linalg.norm(x), p.xi)
    xi = p.xi.copy()
    xi[spec.fiber[a - k] - 1] += s
    return CotangentPoint(p.x, xi)


def conormal_curve(spec: ConormalSpec, p: CotangentPoint):
    """Curves for :func:`angle_gradient_norm` on Phi(L) whose velocities are the conormal frame at p."""

    def curve(a: int, s: float) -> RealFrame:
        return conormal_tangent_frame(spec, _displace(spec, p, a, s))

    return curve


@dataclass(frozen=True)
class ShearedConormal:
    """Lagrangian p -> exp(lam mu_eta(p) eta) p obtained by flowing Phi(L1) along eta non-uniformly.

    A Hamiltonian deformation, hence Lagrangian, but its angle is not constant.
    """

    potential: PotentialTable
    lam: float = 1.0
    spec: ConormalSpec = CONORMALS["L1"]

    @property
    def eta(self) -> np.ndarray:
        return builtin_subgroup("u1diag6").basis[0]

    def _shear(self, z):
        return exp_element(self.eta, self.lam * moment_pair(self.potential, z, self.eta))

    def frame(self, p: CotangentPoint) -> RealFrame:
        base = conormal_tangent_frame(self.spec, p)
        z = base.base
        dmu = moment_differential(self.potential, [self.eta], z, base.vectors)[0]
        vecs = base.vectors + self.lam * dmu[:, None] * (self.eta @ z)[None, :]
        return RealFrame(z, vecs).transformed(self._shear(z))

    def curve(self, p: CotangentPoint):
        def curve(a: int, s: float) -> RealFrame:
            return self.frame(_displace(self.spec, p, a, s))

        return curve


def non_lagrangian_frame(L_frame: RealFrame, mix: float = 1.0) -> RealFrame:
    """Replace the second vector by v_2 + mix * I v_1, so omega(v_1, v_2') = mix * g(v_1, v_1) != 0."""
    vecs = L_frame.vectors.copy()
    vecs[1] = vecs[1] + mix * 1j * vecs[0]
    return RealFrame(L_frame.base, vecs)


def tangential_orbit_point(n: int, generator: np.ndarray, seed: int = 0) -> LevelSetPoint:
    """Point of the zero section (a Lagrangian) where xi# is tangent to it, with a V frame containing xi#.

    Used as a generalized-perpendicularity witness: the decomposition has
    u = 0, so condition (ii) must be flagged as failing.
    """
    rng = np.random.default_rng([seed, 0])
    x = rng.standard_normal(n + 1)
    x /= np.linalg.norm(x)
    z = x.astype(complex)
    L = RealFrame(z, null_space(x[None, :]).T.astype(complex))
    fund = generator @ x
    rest = null_space(np.vstack([x, fund])).T[: n - 2]
    v = RealFrame(z, np.vstack([fund, rest]).astype(complex))
    return LevelSetPoint(point=CotangentPoint(x, np.zeros(n + 1)), quadric=z, L_frame=L, v_tangent=v, level=np.zeros(1), residual=0.0)


@dataclass(frozen=True)
class NonCentralWitness:
    point: CotangentPoint
    level: np.ndarray
    central: bool
    max_orbit_omega: float
    pair: tuple


def noncentral_orbit_witness(potential: PotentialTable, seed: int = 0) -> NonCentralWitness:
    """so223 orbit through a point of Phi(L) with mu_57 != 0: the level is not central and the orbit not isotropic."""
    group = builtin_subgroup("so223")
    rng = np.random.default_rng([seed, 1])
    angles = rng.uniform(0.3, 1.2, 2)  # keeps x5 = sin(phi1) away from 0
    fiber = rng.uniform(0.5, 1.5, 4)  # xi7 != 0
    p = conormal_point(CONORMALS["L"], angles, fiber)
    z = szoke_map(p)
    level = moment_covector(potential, group, z)
    om = orbit_omega_matrix(potential, group, z)
    i, j = np.unravel_index(np.argmax(np.abs(om)), om.shape)
    return NonCentralWitness(p, level, is_central(group, level), float(np.abs(om[i, j])), (group.labels[i], group.labels[j]))
