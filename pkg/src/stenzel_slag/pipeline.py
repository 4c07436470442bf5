"""End-to-end verification runs, level scans and sample export."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .construct import (
    CONORMALS,
    PIECES,
    InsufficientSeedsError,
    LevelSetPoint,
    SlagExample,
    conormal_point,
    conormal_tangent_frame,
    get_example,
    level_set_neighbor,
    piece_level_points,
    quotient_basis,
    solve_level_set,
    sweep,
    sweep_frame,
)
from .lie import a_H_estimate, exp_element, f_h_modulus_check, isotropy_constant_check, is_central, random_group_element
from .moment import moment_covector
from .potential import build_potential
from .quadric import calibrate_volume_constant
from .verify import (
    angle_gradient_norm,
    check_angle_constancy,
    check_isotropic,
    check_perpendicular_generalized,
    check_perpendicular_strict,
    check_phase_shift,
    adapted_frame,
    lagrangian_angle,
    representatives_near_mean,
)
from .witness import conormal_curve

__all__ = [
    "EXAMPLE_IDS",
    "OdeConfig",
    "Tolerances",
    "Sampling",
    "RunConfig",
    "Check",
    "VerificationReport",
    "EmptyLevelSet",
    "verify_example",
    "verify_pieces",
    "verify_conormal",
    "scan_levels",
    "parse_levels",
    "sweep_samples_for",
    "export_samples",
    "export_angle_series",
]

EXAMPLE_IDS = ("u1-l1", "u1-l2", "so223", "conormal")
EXAMPLE_DIM = {"u1-l1": 5, "u1-l2": 5, "so223": 6}


@dataclass(frozen=True)
class OdeConfig:
    c: float = 1.0
    t_max: float = 16.0
    tol: float = 1e-12
    grid_size: int = 8001


@dataclass(frozen=True)
class Tolerances:
    omega: float = 1e-8
    perp: float = 1e-8
    angle: float = 1e-7
    phase: float = 1e-6


@dataclass(frozen=True)
class Sampling:
    h_grid: int = 20  # group samples per level-set point
    v_count: int = 20  # level-set points
    seed: int = 0
    curvature_samples: int = 2


@dataclass(frozen=True)
class RunConfig:
    example: str = "u1-l1"
    n: int | None = None
    ode: OdeConfig = field(default_factory=OdeConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    sampling: Sampling = field(default_factory=Sampling)
    levels: tuple = ((0.3,),)
    conormal: str = "L1"

    def __post_init__(self):
        if self.example not in EXAMPLE_IDS:
            raise ValueError(f"example must be one of {EXAMPLE_IDS}")
        dim = CONORMALS[self.conormal].n if self.example == "conormal" else EXAMPLE_DIM[self.example]
        if self.n is None:
            object.__setattr__(self, "n", dim)
        elif self.n != dim:
            raise ValueError(f"example {self.example} lives in dimension n = {dim}, got n = {self.n}")
        if not self.ode.c > 0:
            raise ValueError("c must be positive")
        if not self.ode.t_max > 0 or self.ode.grid_size < 3:
            raise ValueError("t_max must be positive and grid_size at least 3")
        for name, tol in asdict(self.tolerances).items():
            if not 0 < tol < 1:
                raise ValueError(f"tolerance {name} must lie in (0, 1)")
        if self.ode.tol <= 0 or self.ode.tol >= 1:
            raise ValueError("ODE tolerance must lie in (0, 1)")
        if self.sampling.h_grid < 1 or self.sampling.v_count < 1:
            raise ValueError("sample sizes must be positive")
        object.__setattr__(self, "levels", tuple(tuple(float(c) for c in np.atleast_1d(lv)) for lv in self.levels))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["levels"] = [list(lv) for lv in self.levels]
        return d

    def with_level(self, level) -> "RunConfig":
        return replace(self, levels=(tuple(np.atleast_1d(level)),))


@dataclass
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": _finite(self.residual), "tol": self.tol, "pass": self.passed}


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class VerificationReport:
    example: str
    config: dict
    checks: list = field(default_factory=list)
    angle: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    status: str = "ok"  # "ok" or "empty"
    pieces: list = field(default_factory=list)
    level: list | None = None

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(c.passed for c in self.checks) and all(p.passed for p in self.pieces)

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        out = {
            "example": self.example,
            "config": self.config,
            "level": self.level,
            "status": self.status,
            "checks": [c.to_dict() for c in self.checks],
            "angle": {k: _finite(v) for k, v in self.angle.items()},
            "counts": self.counts,
            "pass": self.passed,
        }
        if self.pieces:
            out["pieces"] = [p.to_dict() for p in self.pieces]
        return out

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return text


class EmptyLevelSet(RuntimeError):
    """The requested level is not attained on the chart box."""


def _potential(cfg: RunConfig):
    return build_potential(cfg.n, cfg.ode.c, cfg.ode.t_max, cfg.ode.tol, cfg.ode.grid_size)


def _swept_curve(example: SlagExample, potential, gens, sample):
    lp = sample.base

    def curve(a: int, s: float):
        if a < len(gens):
            return sweep_frame(gens, lp, sample.h @ exp_element(gens[a], s))
        direction = np.zeros(len(lp.v_tangent))
        direction[a - len(gens)] = 1.0
        return sweep_frame(gens, level_set_neighbor(example, potential, lp, direction, s), sample.h)

    return curve


def _certify(example: SlagExample, potential, kappa, points: list[LevelSetPoint], cfg: RunConfig, report: VerificationReport):
    """Checks shared by level-set runs and piece runs; appends to ``report``."""
    tol = cfg.tolerances
    samp = cfg.sampling
    group = example.group
    gens = quotient_basis(group, example.K_basis)
    n = example.n
    report.checks += [
        Check("moment_level", max(p.residual for p in points), 1e-10),
        Check("v_tangent_kernel", max(p.kernel_residual for p in points), 1e-8),
        Check("lag_dim", float(max(abs(example.dim_HK + len(p.v_tangent) - n) for p in points)), 0.5),
        Check("centrality", 0.0 if is_central(group, points[0].level, seed=samp.seed) else 1.0, 0.5),
    ]
    ok, iso_report = isotropy_constant_check(group, example.K_basis, [p.quadric for p in points])
    report.checks.append(Check("isotropy_constant", max(iso_report["max_subspace_distance"], iso_report["max_fix_residual"]), 1e-8))
    if example.perpendicularity == "strict":
        perp = max(check_perpendicular_strict(potential, group.basis, p.L_frame) for p in points)
        report.checks.append(Check("perpendicular_strict", perp, tol.perp))
    else:
        gen = [check_perpendicular_generalized(potential, group.basis, p) for p in points]
        report.checks.append(Check("perpendicular_generalized", max(g[0] for g in gen), tol.perp))
        report.checks.append(Check("normal_component_nonzero", 0.0 if all(g[1] for g in gen) else 1.0, 0.5))
    adapted = [adapted_frame(potential, p, gens).residuals for p in points]
    report.checks.append(Check("adapted_frame", max(max(r.values()) for r in adapted), 1e-8))

    samples = sweep(example, points, per_point=samp.h_grid, seed=samp.seed)
    report.checks.append(Check("frame_rank", float(max(abs(s.rank - n) for s in samples)), 0.5))
    report.checks.append(Check("isotropy_swept", max(check_isotropic(potential, s.frame) for s in samples), tol.omega))
    theta_L = [lagrangian_angle(potential, p.L_frame, kappa) for p in points]
    swept = [lagrangian_angle(potential, s.frame, kappa) for s in samples]
    mean_L, std_L = check_angle_constancy(theta_L * (2 if len(theta_L) == 1 else 1))
    mean, std = check_angle_constancy(swept)
    phase = check_phase_shift(mean_L, swept, example.dim_HK, tol.phase)
    report.checks += [
        Check("angle_constancy_L", std_L, tol.angle),
        Check("angle_constancy", std, tol.angle),
        Check("phase", phase.distance, tol.phase),
        Check("volume_modulus", max(abs(a.modulus - 1.0) for a in swept), 1e-6),
    ]
    ncurv = min(samp.curvature_samples, len(samples))
    if ncurv:
        step = len(samples) // ncurv
        picks = samples[::step][:ncurv]
        grad = max(angle_gradient_norm(potential, s.frame, _swept_curve(example, potential, gens, s), 1e-3) for s in picks)
        report.checks.append(Check("mean_curvature_proxy", grad, 1e-5))
    report.angle = {
        "mean_mod_pi": mean,
        "stddev": std,
        "theta_L": mean_L,
        "predicted_shift": phase.predicted_shift,
        "observed_shift": phase.observed_shift,
    }
    report.counts.update(samples=len(samples), level_points=len(points))
    return samples, swept


def _group_checks(potential, cfg: RunConfig, group, report: VerificationReport):
    seed = cfg.sampling.seed
    worst = 0.0
    for k in range(10):
        h = random_group_element(group, np.random.default_rng([seed, 99, k]))
        worst = max(worst, f_h_modulus_check(h, samples=5, seed=seed + k)[0])
    report.checks.append(Check("f_h_modulus", worst, 1e-10))
    report.checks.append(Check("a_H", float(np.max(np.abs(a_H_estimate(group, seed=seed)))), 1e-6))


def _start(cfg: RunConfig, name: str):
    potential = _potential(cfg)
    cal = calibrate_volume_constant(potential, seed=cfg.sampling.seed)
    report = VerificationReport(example=name, config=cfg.to_dict())
    report.checks.append(Check("calabi_yau_ratio", cal.rel_std, 1e-6))
    report.counts["kappa"] = cal.kappa
    return potential, cal.kappa, report


def verify_example(cfg: RunConfig, level=None) -> VerificationReport:
    """Full certification of H . V_c for one level; status 'empty' when V_c is empty."""
    if cfg.example == "conormal":
        return verify_conormal(cfg)
    example = get_example(cfg.example)
    level = cfg.levels[0] if level is None else level
    potential, kappa, report = _start(cfg, cfg.example)
    report.level = [float(c) for c in np.atleast_1d(level)]
    stats: dict = {}
    try:
        points = solve_level_set(example, potential, level, cfg.sampling.v_count, seed=cfg.sampling.seed, stats=stats)
    except InsufficientSeedsError as exc:
        report.counts.update(seeds=exc.diagnostics["seeds"], rejected=exc.diagnostics["rejected"])
        report.checks.append(Check("level_set_sampling", 1.0, 0.5))
        return report
    report.counts.update(seeds=stats.get("seeds", 0), rejected=stats.get("rejected", 0))
    if not points:
        report.status = "empty"
        return report
    _group_checks(potential, cfg, example.group, report)
    _certify(example, potential, kappa, points, cfg, report)
    return report


def verify_pieces(cfg: RunConfig) -> VerificationReport:
    """Certify each of the five pieces of hat V_(0,0) for so223 separately."""
    example = get_example("so223")
    potential, kappa, report = _start(replace(cfg, example="so223", levels=((0.0, 0.0),)), "so223")
    report.level = [0.0, 0.0]
    _group_checks(potential, cfg, example.group, report)
    for label in PIECES:
        sub = VerificationReport(example=f"so223:{label}", config=report.config, level=[0.0, 0.0])
        points = piece_level_points(example, potential, label, cfg.sampling.v_count, seed=cfg.sampling.seed)
        _certify(example, potential, kappa, points, cfg, sub)
        report.pieces.append(sub)
        report.checks.append(Check(f"piece {label}", 0.0 if sub.passed else 1.0, 0.5))
    report.counts["pieces"] = len(PIECES)
    return report


def verify_conormal(cfg: RunConfig) -> VerificationReport:
    """Certify Phi(conormal bundle) itself as special Lagrangian at random chart points."""
    spec = CONORMALS[cfg.conormal]
    potential, kappa, report = _start(cfg, "conormal")
    report.config["conormal"] = spec.name
    count = cfg.sampling.v_count * cfg.sampling.h_grid
    frames, points = [], []
    for k in range(count):
        rng = np.random.default_rng([cfg.sampling.seed, k])
        p = conormal_point(spec, rng.uniform(0, 2 * np.pi, spec.sphere_dim), rng.uniform(-2.0, 2.0, len(spec.fiber)))
        points.append(p)
        frames.append(conormal_tangent_frame(spec, p))
    angles = [lagrangian_angle(potential, f, kappa) for f in frames]
    mean, std = check_angle_constancy(angles)
    report.checks += [
        Check("isotropy", max(check_isotropic(potential, f) for f in frames), cfg.tolerances.omega),
        Check("angle_constancy", std, cfg.tolerances.angle),
        Check("volume_modulus", max(abs(a.modulus - 1.0) for a in angles), 1e-6),
    ]
    ncurv = min(cfg.sampling.curvature_samples, count)
    if ncurv:
        grad = max(angle_gradient_norm(potential, frames[k], conormal_curve(spec, points[k])) for k in range(ncurv))
        report.checks.append(Check("mean_curvature_proxy", grad, 1e-5))
    report.angle = {"mean_mod_pi": mean, "stddev": std}
    report.counts.update(samples=count)
    return report


def parse_levels(text: str) -> list[float]:
    """'lo:hi:step' inclusive of hi (up to rounding), e.g. '-1:1:0.25' -> 9 values."""
    try:
        lo, hi, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise ValueError(f"levels must look like lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise ValueError("levels need step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


SCAN_COLUMNS = ("level", "attainable", "pass", "isotropy", "perpendicularity", "angle_stddev", "phase_distance")


def scan_levels(cfg: RunConfig, levels, fixed_c2: float = 0.1) -> list[dict]:
    """Reduced verification per level; for so223 the scanned value is c1 with c2 fixed."""
    rows = []
    for value in levels:
        level = (value, fixed_c2) if cfg.example == "so223" else (value,)
        rep = verify_example(cfg, level)
        row = {"level": value, "attainable": rep.status != "empty", "pass": rep.passed if rep.status != "empty" else ""}
        if rep.status == "empty":
            row.update({k: "" for k in SCAN_COLUMNS[3:]})
            row["pass"] = "empty"
        else:
            perp = next((c for c in rep.checks if c.name.startswith("perpendicular")), None)
            row.update(
                isotropy=rep.check("isotropy_swept").residual,
                perpendicularity=perp.residual if perp else "",
                angle_stddev=rep.angle.get("stddev"),
                phase_distance=rep.check("phase").residual,
            )
        rows.append(row)
    return rows


def write_csv(target, header, rows) -> None:
    """Write CSV (comma, '.' decimal, LF) to a path or an open text stream."""
    if hasattr(target, "write"):
        _write_rows(target, header, rows)
        return
    with open(target, "w", encoding="utf-8", newline="") as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def sweep_samples_for(cfg: RunConfig, level=None):
    """(example, potential, kappa, sweep samples) for one level; raises EmptyLevelSet."""
    example = get_example(cfg.example)
    level = cfg.levels[0] if level is None else level
    potential = _potential(cfg)
    kappa = calibrate_volume_constant(potential, seed=cfg.sampling.seed).kappa
    points = solve_level_set(example, potential, level, cfg.sampling.v_count, seed=cfg.sampling.seed)
    if not points:
        raise EmptyLevelSet(f"level {level} is empty for {cfg.example}")
    return example, potential, kappa, sweep(example, points, per_point=cfg.sampling.h_grid, seed=cfg.sampling.seed)


def export_samples(cfg: RunConfig, path) -> int:
    """CSV dump: example, group coords, chart coords, Re z, Im z, moment components, theta.

    theta is written as the representative mod pi nearest the circular mean.
    """
    example, potential, kappa, samples = sweep_samples_for(cfg)
    spec = example.conormal
    m = len(samples[0].group_coords)
    size = example.n + 1
    header = (
        ["example"]
        + [f"h{j + 1}" for j in range(m)]
        + [f"x{i}" for i in spec.base]
        + [f"xi{i}" for i in spec.active_fiber]
        + [f"re_z{i + 1}" for i in range(size)]
        + [f"im_z{i + 1}" for i in range(size)]
        + [f"mu_{lbl}" for lbl in example.group.labels]
        + ["theta"]
    )
    thetas = representatives_near_mean([lagrangian_angle(potential, s.frame, kappa) for s in samples])
    rows = []
    for s, theta in zip(samples, thetas):
        p = s.base.point
        mu = moment_covector(potential, example.group, s.ambient)
        rows.append(
            [example.name]
            + list(s.group_coords)
            + [p.x[i - 1] for i in spec.base]
            + [p.xi[i - 1] for i in spec.active_fiber]
            + list(s.ambient.real)
            + list(s.ambient.imag)
            + list(mu)
            + [theta]
        )
    write_csv(path, header, rows)
    return len(rows)


def export_angle_series(cfg: RunConfig, path) -> int:
    """CSV of (index, theta_mod_pi) over the swept samples."""
    _, potential, kappa, samples = sweep_samples_for(cfg)
    thetas = representatives_near_mean([lagrangian_angle(potential, s.frame, kappa) for s in samples])
    rows = [[k, theta] for k, theta in enumerate(thetas)]
    write_csv(path, ["index", "theta_mod_pi"], rows)
    return len(rows)
