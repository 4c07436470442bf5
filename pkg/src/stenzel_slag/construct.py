"""Conormal Lagrangians, moment level sets inside them and their sweeps by the group.

Index conventions are 1-based wherever a coordinate index is exposed, to
match ``xi_ij`` and the coordinate names x1, xi2, ... used for the examples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.spatial import Delaunay

from .hyperbolic import f_over_r2, sinhc
from .lie import SubgroupSpec, builtin_subgroup, exp_element, stabilizer_algebra
from .moment import moment_covector, moment_differential
from .potential import DomainError, PotentialRangeError, PotentialTable
from .quadric import CotangentPoint, PreconditionError, RealFrame, szoke_map

__all__ = [
    "ConormalSpec",
    "CONORMALS",
    "SlagExample",
    "EXAMPLES",
    "get_example",
    "sphere_point",
    "conormal_point",
    "chart_point",
    "base_tangents",
    "fiber_derivative",
    "conormal_tangent_frame",
    "polar_tangent_frame",
    "LevelSetPoint",
    "InsufficientSeedsError",
    "make_level_point",
    "attainability",
    "solve_level_set",
    "level_set_neighbor",
    "quotient_basis",
    "SweepSample",
    "sweep_frame",
    "sweep",
    "matrix_A",
    "PIECES",
    "hatV00_pieces",
    "piece_point",
    "piece_level_points",
    "h_grid",
    "ImmersionError",
]


@dataclass(frozen=True)
class ConormalSpec:
    """Conormal bundle of the great sphere S^n cap span(e_i : i in base).

    ``fiber`` lists the fiber coordinates of the bundle; ``active_fiber`` the
    subset that is allowed to be non-zero on the sub-bundle where level sets
    are solved (the remaining fiber coordinates are pinned to zero).
    """

    name: str
    n: int
    base: tuple
    fiber: tuple
    active_fiber: tuple | None = None

    def __post_init__(self):
        base, fiber = tuple(self.base), tuple(self.fiber)
        active = tuple(self.active_fiber) if self.active_fiber is not None else fiber
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "fiber", fiber)
        object.__setattr__(self, "active_fiber", active)
        if set(base) & set(fiber):
            raise ValueError("base and fiber indices overlap")
        if not set(active) <= set(fiber):
            raise ValueError("active fiber must be a subset of the fiber")
        if len(base) + len(fiber) != self.n + 1:
            raise ValueError("a conormal bundle of a great sphere uses every coordinate once")
        if self.dim != self.n:
            raise ValueError("conormal bundle must be n-dimensional")

    @property
    def sphere_dim(self) -> int:
        return len(self.base) - 1

    @property
    def dim(self) -> int:
        return self.sphere_dim + len(self.fiber)

    @property
    def chart_dim(self) -> int:
        return self.sphere_dim + len(self.active_fiber)


CONORMALS = {
    "L1": ConormalSpec("L1", 5, (1, 3, 5), (2, 4, 6)),
    "L2": ConormalSpec("L2", 5, (1, 3), (2, 4, 5, 6)),
    "L": ConormalSpec("L", 6, (1, 3, 5), (2, 4, 6, 7)),
    "Lhat": ConormalSpec("Lhat", 6, (1, 3, 5), (2, 4, 6, 7), active_fiber=(2, 4)),
}


@dataclass(frozen=True)
class SlagExample:
    """A (Lagrangian, group, level-set) configuration of the sweep construction."""

    name: str
    conormal: ConormalSpec
    group: SubgroupSpec
    constrained: tuple  # labels whose moment components are prescribed
    K_labels: tuple = ()
    perpendicularity: str = "strict"  # or "generalized"

    @property
    def n(self) -> int:
        return self.conormal.n

    @property
    def constrained_idx(self) -> list[int]:
        return [self.group.index(lbl) for lbl in self.constrained]

    @property
    def K_basis(self) -> list[np.ndarray]:
        return [self.group.basis[self.group.index(lbl)] for lbl in self.K_labels]

    @property
    def dim_HK(self) -> int:
        return self.group.algebra_dim - len(self.K_labels)

    def full_level(self, level) -> np.ndarray:
        """Covector on the whole algebra from the prescribed components (others 0).

        A full-length covector is accepted too, provided its unconstrained
        components vanish.
        """
        level = np.atleast_1d(np.asarray(level, dtype=float))
        if level.size == self.group.algebra_dim and level.size != len(self.constrained):
            free = np.delete(level, self.constrained_idx)
            if np.any(free != 0.0):
                raise PreconditionError(f"{self.name}: unconstrained level components must be 0, got {free}")
            return level.copy()
        if level.size != len(self.constrained):
            raise PreconditionError(f"{self.name} expects {len(self.constrained)} level component(s)")
        out = np.zeros(self.group.algebra_dim)
        out[self.constrained_idx] = level
        return out

    def active_level(self, level) -> np.ndarray:
        return self.full_level(level)[self.constrained_idx]


def _examples() -> dict:
    u1 = builtin_subgroup("u1diag6")
    so223 = builtin_subgroup("so223")
    return {
        "u1-l1": SlagExample("u1-l1", CONORMALS["L1"], u1, ("eta",)),
        "u1-l2": SlagExample("u1-l2", CONORMALS["L2"], u1, ("eta",), perpendicularity="generalized"),
        "so223": SlagExample("so223", CONORMALS["Lhat"], so223, ("xi12", "xi34"), K_labels=("xi67",)),
    }


EXAMPLES = _examples()


def get_example(name: str) -> SlagExample:
    try:
        return EXAMPLES[name]
    except KeyError:
        raise ValueError(f"unknown example {name!r}; known: {sorted(EXAMPLES)}") from None


# --- charts ------------------------------------------------------------------


def sphere_point(angles) -> np.ndarray:
    """Unit vector from polar angles: (cos p, sin p) and, recursively,
    (cos p1 * sphere_point(p2, ...), sin p1)."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size == 0:
        return np.array([1.0])
    head, rest = angles[0], angles[1:]
    if rest.size == 0:
        return np.array([np.cos(head), np.sin(head)])
    return np.concatenate([np.cos(head) * sphere_point(rest), [np.sin(head)]])


def _sphere_point_derivatives(angles) -> np.ndarray:
    """Rows: d sphere_point / d angle_a."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    head, rest = angles[0], angles[1:]
    if rest.size == 0:
        return np.array([[-np.sin(head), np.cos(head)]])
    inner = sphere_point(rest)
    first = np.concatenate([-np.sin(head) * inner, [np.cos(head)]])
    others = [np.concatenate([np.cos(head) * row, [0.0]]) for row in _sphere_point_derivatives(rest)]
    return np.vstack([first] + others)


def _embed(indices, values, size) -> np.ndarray:
    out = np.zeros(size)
    out[[i - 1 for i in indices]] = values
    return out


def conormal_point(spec: ConormalSpec, angles, fiber_coords) -> CotangentPoint:
    """(x, xi) with x = sphere_point(angles) on the base coordinates and xi on the fiber coordinates."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    fiber_coords = np.atleast_1d(np.asarray(fiber_coords, dtype=float))
    if angles.size != spec.sphere_dim or fiber_coords.size != len(spec.fiber):
        raise PreconditionError("chart coordinates have the wrong length")
    size = spec.n + 1
    return CotangentPoint(_embed(spec.base, sphere_point(angles), size), _embed(spec.fiber, fiber_coords, size))


def chart_point(spec: ConormalSpec, x_base, active_coords) -> CotangentPoint:
    """Point of the active sub-bundle from base-sphere coordinates and active fiber values."""
    size = spec.n + 1
    x = _embed(spec.base, np.asarray(x_base, dtype=float), size)
    x /= np.linalg.norm(x)
    xi = _embed(spec.active_fiber, np.asarray(active_coords, dtype=float), size)
    return CotangentPoint(x, xi)


def _in_chart(spec: ConormalSpec, p: CotangentPoint, active_only: bool = False, tol: float = 1e-12) -> None:
    fiber = spec.active_fiber if active_only else spec.fiber
    off_x = [i - 1 for i in range(1, spec.n + 2) if i not in spec.base]
    off_xi = [i - 1 for i in range(1, spec.n + 2) if i not in fiber]
    if np.any(np.abs(p.x[off_x]) > tol) or np.any(np.abs(p.xi[off_xi]) > tol):
        raise PreconditionError(f"point is not in the chart of {spec.name}")


def base_tangents(spec: ConormalSpec, x) -> np.ndarray:
    """Orthonormal basis (rows) of T_x of the base great sphere."""
    idx = [i - 1 for i in spec.base]
    ker = null_space(np.asarray(x)[idx][None, :])
    out = np.zeros((ker.shape[1], spec.n + 1))
    out[:, idx] = ker.T
    return out


def fiber_derivative(p: CotangentPoint, j: int) -> np.ndarray:
    """d Phi / d xi_j = S xi_j x + i (xi_j F/|xi|^2 xi + S e_j), S = sinh|xi|/|xi|.

    Tends to i e_j at the zero section.
    """
    r = p.norm_xi
    s = sinhc(r)
    e = np.zeros(p.x.size)
    e[j - 1] = 1.0
    xj = p.xi[j - 1]
    return s * xj * p.x + 1j * (xj * f_over_r2(r) * p.xi + s * e)


def conormal_tangent_frame(spec: ConormalSpec, p: CotangentPoint, active_only: bool = False) -> RealFrame:
    """Frame of T Phi(L) at Phi(p): cosh|xi| times base tangents, then d/dxi_j per fiber index."""
    _in_chart(spec, p, active_only)
    z = szoke_map(p)
    base = np.cosh(p.norm_xi) * base_tangents(spec, p.x)
    fiber = spec.active_fiber if active_only else spec.fiber
    fib = [fiber_derivative(p, j) for j in fiber]
    return RealFrame(z, np.vstack([base.astype(complex)] + [np.array(fib).reshape(len(fib), -1)]))


def polar_tangent_frame(spec: ConormalSpec, angles, fiber_coords) -> RealFrame:
    """(d/dphi_a, d/dxi_j) of Phi composed with the polar chart."""
    p = conormal_point(spec, angles, fiber_coords)
    z = szoke_map(p)
    size = spec.n + 1
    dphi = [np.cosh(p.norm_xi) * _embed(spec.base, row, size) for row in _sphere_point_derivatives(angles)]
    fib = [fiber_derivative(p, j) for j in spec.fiber]
    return RealFrame(z, np.vstack([np.array(dphi, dtype=complex)] + [np.array(fib)]))


# --- level sets ----------------------------------------------------------------


class InsufficientSeedsError(RuntimeError):
    """Newton iteration converged from fewer seeds than requested."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class LevelSetPoint:
    """A point of V_c with T_p Phi(L) and T_p V_c."""

    point: CotangentPoint
    quadric: np.ndarray
    L_frame: RealFrame
    v_tangent: RealFrame
    level: np.ndarray
    residual: float
    kernel_residual: float = 0.0
    iterations: int = 0
    chart_frame: RealFrame | None = field(default=None, repr=False)
    chart_kernel: np.ndarray | None = field(default=None, repr=False)


def _active_generators(example: SlagExample):
    return [example.group.basis[i] for i in example.constrained_idx]


def _relative_kernel(jac: np.ndarray, rtol: float):
    u, s, vt = np.linalg.svd(jac)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > rtol * scale))
    return vt[rank:].T, rank, s


def make_level_point(
    example: SlagExample,
    potential: PotentialTable,
    p: CotangentPoint,
    level,
    rtol: float = 1e-9,
    iterations: int = 0,
) -> LevelSetPoint:
    """Assemble a LevelSetPoint at p: T_p V_c is the kernel of d(mu_active) on the chart frame."""
    spec = example.conormal
    full = example.full_level(level)
    z = szoke_map(p)
    chart = conormal_tangent_frame(spec, p, active_only=True)
    gens = _active_generators(example)
    jac = moment_differential(potential, gens, z, chart.vectors)
    ker, rank, _ = _relative_kernel(jac, rtol)
    v = RealFrame(z, ker.T @ chart.vectors)
    mu = moment_covector(potential, example.group, z)
    kres = 0.0
    if len(v):
        dmu = moment_differential(potential, example.group.basis, z, v.vectors)
        kres = float(np.max(np.abs(dmu) / np.linalg.norm(v.vectors, axis=1)))
    return LevelSetPoint(
        point=p,
        quadric=z,
        L_frame=conormal_tangent_frame(spec, p),
        v_tangent=v,
        level=full,
        residual=float(np.max(np.abs(mu - full))),
        kernel_residual=kres,
        iterations=iterations,
        chart_frame=chart,
        chart_kernel=ker,
    )


def _newton(example, potential, x, xi_act, target, max_iter=50, tol=1e-12, t_limit=np.inf):
    spec = example.conormal
    gens = _active_generators(example)
    size = spec.n + 1
    act = [i - 1 for i in spec.active_fiber]
    for it in range(max_iter + 1):
        xi = np.zeros(size)
        xi[act] = xi_act
        p = CotangentPoint(x, xi)
        if 2.0 * p.norm_xi > t_limit:
            return None, it
        z = szoke_map(p)
        mu = moment_covector(potential, example.group, z)[example.constrained_idx]
        res = mu - target
        scale = 1.0 + float(np.max(np.abs(mu)))
        if np.max(np.abs(res)) < tol * scale:
            return p, it
        if it == max_iter:
            break
        tang = base_tangents(spec, x)
        chart = np.vstack([np.cosh(p.norm_xi) * tang.astype(complex)] + [fiber_derivative(p, j)[None, :] for j in spec.active_fiber])
        jac = moment_differential(potential, gens, z, chart)
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        norm = np.linalg.norm(step)
        if norm > 0.5:
            step *= 0.5 / norm
        k = tang.shape[0]
        x = x + step[:k] @ tang
        x /= np.linalg.norm(x)
        xi_act = xi_act + step[k:]
    return None, max_iter


def level_set_neighbor(example, potential, lp: LevelSetPoint, direction, step: float) -> LevelSetPoint:
    """Move from lp along ``direction`` (coefficients on lp.v_tangent) and project back onto V_c.

    The first-order move is taken in chart coordinates (base retraction plus
    fiber shift); Newton then restores the moment constraints.
    """
    spec = example.conormal
    coeffs = lp.chart_kernel @ np.asarray(direction, dtype=float)
    p = lp.point
    tang = base_tangents(spec, p.x)
    k = tang.shape[0]
    x = p.x + step * coeffs[:k] @ tang
    x /= np.linalg.norm(x)
    act = [i - 1 for i in spec.active_fiber]
    xi_act = p.xi[act] + step * coeffs[k:]
    target = lp.level[example.constrained_idx]
    q, it = _newton(example, potential, x, xi_act, target)
    if q is None:
        raise RuntimeError("projection back onto the level set failed")
    return make_level_point(example, potential, q, lp.level, iterations=it)


def _chart_samples(example, rng, count, box):
    spec = example.conormal
    for _ in range(count):
        angles = rng.uniform(0.0, 2 * np.pi, spec.sphere_dim)
        x_base = sphere_point(angles)
        yield x_base, rng.uniform(-box, box, len(spec.active_fiber))


def _check_box(example: SlagExample, potential: PotentialTable, box: float) -> None:
    # the corners of the chart box must lie inside the table, t = 2 |xi|
    t_corner = 2 * box * np.sqrt(len(example.conormal.active_fiber))
    if t_corner > 0.95 * potential.t_max:
        raise PotentialRangeError(f"chart box needs t up to {t_corner:.3g}; increase t_max above {t_corner / 0.95:.3g}")


def attainability(example: SlagExample, potential: PotentialTable, level, samples: int = 4000, seed: int = 0, box: float = 3.0) -> bool:
    """Whether the prescribed level lies inside the range of the active moment components over the chart box."""
    level = example.active_level(level)
    rng = np.random.default_rng([seed, 10**6])
    spec = example.conormal
    _check_box(example, potential, box)
    vals = []
    for x_base, act in _chart_samples(example, rng, samples, box):
        p = chart_point(spec, x_base, act)
        vals.append(moment_covector(potential, example.group, szoke_map(p))[example.constrained_idx])
    vals = np.array(vals)
    if level.size == 1:
        return bool(vals.min() <= level[0] <= vals.max())
    return bool(Delaunay(vals).find_simplex(level) >= 0)


def quotient_basis(spec: SubgroupSpec, K_basis) -> list[np.ndarray]:
    """Basis elements of h completing span(K) to h, chosen greedily in basis order."""
    chosen = [np.asarray(k).ravel() for k in K_basis]
    out = []
    for b in spec.basis:
        cand = chosen + [b.ravel()]
        if np.linalg.matrix_rank(np.array(cand), tol=1e-10) == len(cand):
            chosen.append(b.ravel())
            out.append(b)
    return out


def _principal(example, z) -> bool:
    stab = stabilizer_algebra(example.group, z)
    if len(stab) != len(example.K_labels):
        return False
    if not stab:
        return True
    kvecs = np.array([k.ravel() for k in example.K_basis])
    return np.linalg.matrix_rank(np.vstack([kvecs] + [s.ravel() for s in stab]), tol=1e-8) == len(stab)


def _well_conditioned(example, lp: LevelSetPoint, threshold: float) -> bool:
    orbit = np.array([q @ lp.quadric for q in quotient_basis(example.group, example.K_basis)])
    frame = RealFrame(lp.quadric, np.vstack([orbit, lp.v_tangent.vectors]) if len(lp.v_tangent) else orbit)
    return frame.min_singular_value() > threshold


def solve_level_set(
    example: SlagExample,
    potential: PotentialTable,
    level,
    count: int,
    seed: int = 0,
    max_seeds: int | None = None,
    box: float = 3.0,
    condition_threshold: float = 1e-3,
    stats: dict | None = None,
) -> list[LevelSetPoint]:
    """Sample ``count`` points of V_c by Newton iteration from random chart seeds.

    Returns an empty list when the level is not attained (V_c empty); raises
    InsufficientSeedsError when it is attained but too few seeds converge.
    Seed ``k`` draws from ``default_rng([seed, k])`` so results do not depend
    on evaluation order.
    """
    full = example.full_level(level)
    level = full[example.constrained_idx]
    if not attainability(example, potential, level, seed=seed, box=box):
        if stats is not None:
            stats.update(attainable=False, seeds=0, rejected=0)
        return []
    spec = example.conormal
    max_seeds = max_seeds or 20 * count + 50
    t_limit = 0.95 * potential.t_max
    points, rejected = [], {"diverged": 0, "singular": 0, "non_principal": 0, "ill_conditioned": 0}
    k = 0
    while len(points) < count and k < max_seeds:
        rng = np.random.default_rng([seed, k])
        k += 1
        (x_base, act), = _chart_samples(example, rng, 1, box)
        x0 = _embed(spec.base, x_base, spec.n + 1)
        p, it = _newton(example, potential, x0, act, level, t_limit=t_limit)
        if p is None:
            rejected["diverged"] += 1
            continue
        lp = make_level_point(example, potential, p, full, iterations=it)
        if spec.chart_dim - len(lp.v_tangent) != len(example.constrained):
            rejected["singular"] += 1
            continue
        if not _principal(example, lp.quadric):
            rejected["non_principal"] += 1
            continue
        if not _well_conditioned(example, lp, condition_threshold):
            rejected["ill_conditioned"] += 1
            continue
        points.append(lp)
    if stats is not None:
        stats.update(attainable=True, seeds=k, rejected=sum(rejected.values()), rejected_by_reason=rejected)
    if len(points) < count:
        raise InsufficientSeedsError(
            f"only {len(points)} of {count} seeds converged to the level set", {"seeds": k, "rejected": rejected}
        )
    return points


# --- sweeps ----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSample:
    group_coords: np.ndarray
    h: np.ndarray
    base: LevelSetPoint
    ambient: np.ndarray
    frame: RealFrame
    rank: int


def _group_element(generators, coords) -> np.ndarray:
    h = np.eye(generators[0].shape[0])
    for g, s in zip(generators, coords):
        h = h @ exp_element(g, s)
    return h


def sweep_frame(generators, lp: LevelSetPoint, h: np.ndarray) -> RealFrame:
    """(L_h)_* of (xi_j#_p) followed by (L_h)_* of the V_c tangent vectors."""
    orbit = np.array([g @ lp.quadric for g in generators]).reshape(len(generators), -1)
    vecs = np.vstack([orbit, lp.v_tangent.vectors]) if len(lp.v_tangent) else orbit
    return RealFrame(lp.quadric, vecs).transformed(h)


def _real_rank(frame: RealFrame, rtol: float = 1e-9) -> int:
    m = frame.real_matrix()
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > rtol * s[0]))


class ImmersionError(RuntimeError):
    """Swept frame lost rank: some xi#_p lies in T_p V_c \\ {0}."""


def h_grid(dim: int, per_axis: int) -> np.ndarray:
    """Product grid of angles in (-pi, pi] with ``per_axis`` values per generator."""
    axis = np.pi - 2 * np.pi * (np.arange(per_axis) + 0.5) / per_axis
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sweep(example: SlagExample, points, per_point: int = 20, seed: int = 0, group_coords=None) -> list[SweepSample]:
    """Sample H . V_c: for each level point, ``per_point`` group elements h = prod exp(s_j xi_j).

    The xi_j span h modulo the isotropy algebra; the s_j are uniform in
    (-pi, pi] unless explicit ``group_coords`` (one row per sample) are given.
    """
    gens = quotient_basis(example.group, example.K_basis)
    expected = len(gens) + (len(points[0].v_tangent) if points else 0)
    out = []
    for i, lp in enumerate(points):
        rng = np.random.default_rng([seed, 7, i])
        rows = group_coords if group_coords is not None else np.pi - rng.uniform(0.0, 2 * np.pi, (per_point, len(gens)))
        for coords in np.atleast_2d(rows):
            h = _group_element(gens, coords)
            frame = sweep_frame(gens, lp, h)
            rank = _real_rank(frame)
            if rank != expected:
                raise ImmersionError(f"swept frame rank {rank} != {expected} (xi#_p in T_pV_c \\ {{0}})")
            out.append(SweepSample(np.asarray(coords), h, lp, h @ lp.quadric, frame, rank))
    return out


# --- matrix A and the pieces of hat V_(0,0) -------------------------------------


def matrix_A(xi) -> tuple[np.ndarray, float]:
    """A = (F(|xi|)/|xi|^2) xi xi^T + (sinh|xi|/|xi|) Id and its smallest singular value."""
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(xi))
    if r == 0.0:
        raise DomainError("matrix A needs a non-zero fiber vector")
    a = f_over_r2(r) * np.outer(xi, xi) + sinhc(r) * np.eye(xi.size)
    return a, float(np.linalg.svd(a, compute_uv=False)[-1])


PIECES = ("S2", "S1xR(1)", "S1xR(3)", "R2(+1)", "R2(-1)")


def hatV00_pieces(p: CotangentPoint, tol: float = 1e-10) -> frozenset:
    """Labels of the pieces of hat V_(0,0) containing p (a point of hat L in T*S^6).

    Also checks that membership in hat V_(0,0) (x1 xi2 = x3 xi4 = 0) agrees
    with membership in the union of the five pieces.
    """
    _in_chart(CONORMALS["Lhat"], p, active_only=True)
    x, xi = p.x, p.xi
    labels = set()
    if np.all(np.abs(xi) < tol):
        labels.add("S2")
    if abs(x[0]) < tol and abs(xi[3]) < tol:
        labels.add("S1xR(1)")
    if abs(x[2]) < tol and abs(xi[1]) < tol:
        labels.add("S1xR(3)")
    if np.linalg.norm(x - np.eye(7)[4]) < tol:
        labels.add("R2(+1)")
    if np.linalg.norm(x + np.eye(7)[4]) < tol:
        labels.add("R2(-1)")
    in_v00 = abs(x[0] * xi[1]) < tol and abs(x[2] * xi[3]) < tol
    if in_v00 != bool(labels):
        raise AssertionError(f"hat V_(0,0) membership {in_v00} disagrees with pieces {sorted(labels)}")
    return frozenset(labels)


def piece_point(label: str, rng: np.random.Generator, box: float = 3.0) -> CotangentPoint:
    """Generic point of one of the five pieces of hat V_(0,0)."""
    x = np.zeros(7)
    xi = np.zeros(7)
    if label == "S2":
        x[[0, 2, 4]] = sphere_point(rng.uniform(0, 2 * np.pi, 2))
    elif label == "S1xR(1)":
        x[[2, 4]] = sphere_point(rng.uniform(0, 2 * np.pi, 1))
        xi[1] = rng.uniform(-box, box)
    elif label == "S1xR(3)":
        x[[0, 4]] = sphere_point(rng.uniform(0, 2 * np.pi, 1))
        xi[3] = rng.uniform(-box, box)
    elif label in ("R2(+1)", "R2(-1)"):
        x[4] = 1.0 if label == "R2(+1)" else -1.0
        xi[[1, 3]] = rng.uniform(-box, box, 2)
    else:
        raise ValueError(f"unknown piece {label!r}")
    return CotangentPoint(x, xi)


def piece_level_points(
    example: SlagExample,
    potential: PotentialTable,
    label: str,
    count: int,
    seed: int = 0,
    condition_threshold: float = 1e-3,
    max_seeds: int | None = None,
) -> list[LevelSetPoint]:
    """Generic points of one piece of hat V_(0,0), as level points of the so223 example at level (0, 0)."""
    if example.name != "so223":
        raise PreconditionError("the five pieces belong to the so223 example")
    max_seeds = max_seeds or 20 * count + 50
    out, k = [], 0
    while len(out) < count and k < max_seeds:
        rng = np.random.default_rng([seed, PIECES.index(label), k])
        k += 1
        lp = make_level_point(example, potential, piece_point(label, rng), [0.0, 0.0])
        if len(lp.v_tangent) != 2 or not _principal(example, lp.quadric):
            continue
        if not _well_conditioned(example, lp, condition_threshold):
            continue
        out.append(lp)
    if len(out) < count:
        raise InsufficientSeedsError(f"only {len(out)} generic points on piece {label}", {"seeds": k})
    return out
