"""Declarative scenarios, figure presets and the end-to-end pipeline.

A scenario is a JSON document with the top-level keys ``physical``,
``grid``, ``stepper``, ``mode``, ``r_factor``, ``phi``, ``trajectory``,
``outputs`` and ``analysis``.  Missing keys take the defaults below;
unknown keys anywhere are errors.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, io
from .bohmian import (TrajectorySet, integrate_trajectories, left_quantiles, seed_positions,
                      velocity_matrix)
from .grid import Grid, effective_frequency, effective_width, harmonic_trap, lattice
from .propagator import FrameSeries, PropagationError, StepperConfig, propagate
from .states import Wavefunction, gaussian_superposition, overlap_ratio
from .units import PhysicalParams, ScaledParams, lattice_depth_scaled, rescale

log = logging.getLogger(__name__)

MODES = ("free_release", "trap")
ARTIFACTS = ("density", "velocity", "trajectories", "frames", "report", "pgm", "potential")


class ConfigError(ValueError):
    """Invalid scenario configuration; ``problems`` lists every violation."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid scenario config:\n  - " + "\n  - ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class TrajectorySpec:
    n_seeds: int = 50
    threshold_frac: float = 0.005


@dataclass(frozen=True)
class OutputSpec:
    artifacts: tuple[str, ...] = ("density", "velocity", "trajectories", "report", "pgm")
    density_clip: tuple[float, float] = (0.0, 0.12)
    velocity_clip: tuple[float, float] = (-1.0, 1.0)
    matrix_stride: int = 1
    frame_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class AnalysisSpec:
    envelope_window_um: float = 5.0
    min_contrast: float = 0.3
    flip_probe_um: float = 10.0
    snapshot_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    physical: PhysicalParams = field(default_factory=PhysicalParams)
    grid: Grid = field(default_factory=Grid)
    stepper: StepperConfig = field(default_factory=StepperConfig)
    mode: str = "free_release"
    r_factor: float = 1.0
    phi: float = 0.0
    trajectory: TrajectorySpec = field(default_factory=TrajectorySpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)

    @property
    def sigma_eff_um(self) -> float:
        p = self.physical
        return effective_width(effective_frequency(p), p.mass_kg)

    @property
    def sigma0_um(self) -> float:
        return self.r_factor * self.sigma_eff_um

    def scaled(self) -> ScaledParams:
        """Working constants used for propagation (trap removed in free release)."""
        s = rescale(self.physical)
        return s.free() if self.mode == "free_release" else s

    def physics_key(self) -> str:
        """Identity of the simulated dynamics, ignoring outputs and analysis."""
        d = self.to_dict()
        for k in ("outputs", "analysis", "trajectory"):
            d.pop(k)
        return json.dumps(d, sort_keys=True)

    def to_dict(self) -> dict:
        phys = dataclasses.asdict(self.physical)
        phys.pop("phi_rad")
        return {
            "physical": phys,
            "grid": dataclasses.asdict(self.grid),
            "stepper": dataclasses.asdict(self.stepper),
            "mode": self.mode,
            "r_factor": self.r_factor,
            "phi": self.phi,
            "trajectory": dataclasses.asdict(self.trajectory),
            "outputs": {k: list(v) if isinstance(v, tuple) else v
                        for k, v in dataclasses.asdict(self.outputs).items()},
            "analysis": {k: list(v) if isinstance(v, tuple) else v
                         for k, v in dataclasses.asdict(self.analysis).items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        problems: list[str] = []
        if not isinstance(data, dict):
            raise ConfigError(["top level must be a JSON object"])
        known = {f.name for f in dataclasses.fields(cls)}
        for key in sorted(set(data) - known):
            problems.append(f"unknown key {key!r}")

        def section(name, typ, tuples=()):
            raw = data.get(name, {})
            if not isinstance(raw, dict):
                problems.append(f"{name} must be an object")
                return typ()
            names = {f.name for f in dataclasses.fields(typ)}
            if typ is PhysicalParams:
                names.discard("phi_rad")
            for key in sorted(set(raw) - names):
                problems.append(f"unknown key {name}.{key!r}")
            kwargs = {k: (tuple(v) if k in tuples and isinstance(v, list) else v)
                      for k, v in raw.items() if k in names}
            try:
                return typ(**kwargs)
            except (TypeError, ValueError) as exc:
                problems.append(f"{name}: {exc}")
                return None

        physical = section("physical", PhysicalParams)
        grid = section("grid", Grid)
        stepper = section("stepper", StepperConfig)
        trajectory = section("trajectory", TrajectorySpec)
        outputs = section("outputs", OutputSpec, ("artifacts", "density_clip", "velocity_clip", "frame_times"))
        analysis_ = section("analysis", AnalysisSpec, ("snapshot_times",))
        if problems:
            raise ConfigError(problems)
        cfg = cls(
            physical=physical,
            grid=grid,
            stepper=stepper,
            mode=data.get("mode", "free_release"),
            r_factor=data.get("r_factor", 1.0),
            phi=data.get("phi", 0.0),
            trajectory=trajectory,
            outputs=outputs,
            analysis=analysis_,
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"{path}: {exc}"]) from None
        return cls.from_dict(data)

    def validate(self) -> None:
        """Raise :class:`ConfigError` listing every violated constraint."""
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES} (got {self.mode!r})")
        if not (isinstance(self.r_factor, (int, float)) and self.r_factor > 0):
            problems.append(f"r_factor must be > 0 (got {self.r_factor!r})")
        if not isinstance(self.phi, (int, float)) or not math.isfinite(self.phi):
            problems.append(f"phi must be a finite number (got {self.phi!r})")
        t = self.trajectory
        if int(t.n_seeds) != t.n_seeds or t.n_seeds < 1:
            problems.append("trajectory.n_seeds must be an integer >= 1")
        if not 0 < t.threshold_frac < 1:
            problems.append("trajectory.threshold_frac must lie in (0, 1)")
        o = self.outputs
        for a in o.artifacts:
            if a not in ARTIFACTS:
                problems.append(f"outputs.artifacts: unknown artifact {a!r}")
        for name in ("density_clip", "velocity_clip"):
            lo_hi = getattr(o, name)
            if len(lo_hi) != 2 or not lo_hi[0] < lo_hi[1]:
                problems.append(f"outputs.{name} must be [lo, hi] with lo < hi")
        if int(o.matrix_stride) != o.matrix_stride or o.matrix_stride < 1:
            problems.append("outputs.matrix_stride must be an integer >= 1")
        a = self.analysis
        if not a.envelope_window_um > 0:
            problems.append("analysis.envelope_window_um must be > 0")
        if not 0 <= a.min_contrast <= 1:
            problems.append("analysis.min_contrast must lie in [0, 1]")
        if not a.flip_probe_um > 0:
            problems.append("analysis.flip_probe_um must be > 0")
        if self.physical.v0_over_h_hz <= 0:
            problems.append("physical.v0_over_h_hz must be > 0 to fix the initial width")
        if self.mode == "trap" and self.physical.f_z_hz <= 0:
            problems.append("trap mode needs physical.f_z_hz > 0")
        if not problems:
            reach = self.physical.ell_um / 2 + 5 * self.sigma0_um
            if reach >= self.grid.z_max_um or -reach <= self.grid.z_min_um:
                problems.append(
                    f"clouds reach +-{reach:.3g} um, outside the grid "
                    f"[{self.grid.z_min_um}, {self.grid.z_max_um})"
                )
        if problems:
            raise ConfigError(problems)


@dataclass(eq=False)
class ScenarioResult:
    config: ScenarioConfig
    params: ScaledParams
    potential: np.ndarray
    series: FrameSeries
    velocity: np.ndarray
    trajectories: TrajectorySet | None
    report: dict


def initial_state(cfg: ScenarioConfig) -> Wavefunction:
    return gaussian_superposition(cfg.grid, cfg.physical.ell_um, cfg.sigma0_um, cfg.phi)


def external_potential(cfg: ScenarioConfig, s: ScaledParams | None = None) -> np.ndarray:
    """Potential used during propagation; the lattice is never switched on."""
    s = s or cfg.scaled()
    return harmonic_trap(cfg.grid, s)


def potential_table(cfg: ScenarioConfig) -> dict[str, np.ndarray]:
    """Trap, lattice and their sum on the grid, for plotting the preparation stage."""
    s = rescale(cfg.physical)
    trap = harmonic_trap(cfg.grid, s)
    latt = lattice(cfg.grid, lattice_depth_scaled(cfg.physical), cfg.physical.ell_um)
    return {"z_um": cfg.grid.z, "v_trap": trap, "v_latt": latt, "v_ext": trap + latt}


def simulate(cfg: ScenarioConfig) -> tuple[ScaledParams, np.ndarray, FrameSeries]:
    cfg.validate()
    s = cfg.scaled()
    pot = external_potential(cfg, s)
    series = propagate(initial_state(cfg), pot, s, cfg.stepper)
    return s, pot, series


def run_scenario(cfg: ScenarioConfig, series: FrameSeries | None = None,
                 trajectories: TrajectorySet | None = None) -> ScenarioResult:
    """Propagate, compute velocity fields and trajectories, and analyse.

    ``series`` and ``trajectories`` may be passed to reuse earlier results
    for the same physics.  No randomness is involved anywhere.
    """
    cfg.validate()
    s = cfg.scaled()
    pot = external_potential(cfg, s)
    if series is None:
        series = propagate(initial_state(cfg), pot, s, cfg.stepper)
    vel = velocity_matrix(series, s)
    traj = trajectories
    if traj is None:
        seeds = seed_positions(series.frames[0], cfg.trajectory.n_seeds, cfg.trajectory.threshold_frac)
        traj = integrate_trajectories(series, seeds, s, cfg.trajectory.threshold_frac)
    report = build_report(cfg, s, series, vel, traj)
    return ScenarioResult(cfg, s, pot, series, vel, traj, report)


def _snapshot_times(cfg: ScenarioConfig, series: FrameSeries) -> list[float]:
    want = cfg.analysis.snapshot_times or (float(series.times[-1]),)
    return [t for t in want if series.times[0] - 1e-9 <= t <= series.times[-1] + 1e-9]


def build_report(cfg: ScenarioConfig, s: ScaledParams, series: FrameSeries, vel: np.ndarray,
                 traj: TrajectorySet | None) -> dict:
    grid = cfg.grid
    a = cfg.analysis
    dens = series.densities()
    i0 = grid.index_of(0.0)

    snapshots = []
    for t in _snapshot_times(cfg, series):
        f = series.frame_at(t)
        n = dens[int(np.argmin(np.abs(series.times - t)))]
        dips = analysis.detect_dips(n, grid, a.envelope_window_um, a.min_contrast)
        snapshots.append({
            "t_ms": f.time_ms,
            "dips": dips.to_dict(),
            "central_fringe_width_um": analysis.central_fringe_width(dips),
            "center_to_max": float(n[i0] / n.max()),
        })

    flips = {}
    for direction in ("any", "outward", "inward"):
        flips[direction] = analysis.velocity_flip_times(
            vel, series.times, grid.z, a.flip_probe_um, dens, direction=direction
        ).tolist()

    report = {
        "scenario": {
            "mode": cfg.mode,
            "ell_um": cfg.physical.ell_um,
            "r_factor": cfg.r_factor,
            "phi": cfg.phi,
            "sigma0_um": cfg.sigma0_um,
            "f_eff_hz": effective_frequency(cfg.physical),
            "m_bar": s.m_bar,
            "g1d_bar": s.g1d_bar,
            "omega_z_bar": s.omega_z_bar,
            "overlap_ratio": overlap_ratio(series.frames[0]),
        },
        "diagnostics": {
            "n_frames": len(series),
            "final_norm": float(series.norms[-1]),
            "norm_drift": series.norm_drift(),
            "energy_drift": series.energy_drift(),
            "energy_initial": float(series.energies[0]),
            "center_to_max_peak": float(np.max(dens[:, i0] / dens.max(axis=1))),
            "boundary_to_max_peak": float(np.max(np.maximum(dens[:, 0], dens[:, -1]) / dens.max(axis=1))),
        },
        "snapshots": snapshots,
        "velocity_flips_ms": flips,
    }
    if traj is not None:
        stride = max(1, len(series) // 200)
        sub = FrameSeries(series.times[::stride], series.frames[::stride], series.norms[::stride],
                          series.energies[::stride], s, series.potential)
        sub_traj = TrajectorySet(traj.times[::stride], traj.positions[:, ::stride], traj.initial_band,
                                 traj.clamped)
        q = left_quantiles(sub, sub_traj)
        report["trajectories"] = {
            "n": traj.n_trajectories,
            "threshold_frac": traj.initial_band,
            "crossing_violations": traj.crossing_violations(grid.dz_um / 10),
            "sign_changes": traj.sign_changes(grid.dz_um / 10),
            "clamped": int(np.count_nonzero(traj.clamped)),
            "quantile_drift_max": float(np.max(np.abs(q - q[:, :1]))),
        }
    return report


def write_outputs(result: ScenarioResult, out_dir, extra: tuple[str, ...] = ()) -> Path:
    """Write the configured artifacts (plus ``extra`` ones) into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    o = cfg.outputs
    wanted = set(o.artifacts) | set(extra)
    series = result.series
    rows = slice(None, None, o.matrix_stride)
    times = series.times[rows]

    with open(out / "config.json", "w", newline="\n") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if "density" in wanted:
        dens = series.densities()[rows]
        io.write_spacetime(out / "density.csv", times, cfg.grid.z, dens)
        if "pgm" in wanted:
            io.render_heatmap(out / "density.pgm", dens, *o.density_clip)
    if "velocity" in wanted:
        vel = result.velocity[rows]
        io.write_spacetime(out / "velocity.csv", times, cfg.grid.z, vel)
        if "pgm" in wanted:
            io.render_heatmap(out / "velocity.pgm", vel, *o.velocity_clip)
    if "trajectories" in wanted and result.trajectories is not None:
        io.write_trajectories(out / "trajectories.csv", times, result.trajectories.positions[:, rows])
    if "frames" in wanted:
        fdir = out / "frames"
        fdir.mkdir(exist_ok=True)
        for t in o.frame_times or (series.times[0], series.times[-1]):
            f = series.frame_at(t)
            io.write_snapshot(fdir / f"frame_{f.time_ms:010.4f}ms.csv", f)
    if "potential" in wanted:
        tab = potential_table(cfg)
        io.write_table(out / "potential.csv", list(tab), list(tab.values()))
    if "report" in wanted:
        io.write_json(out / "report.json", result.report)
    return out


# --- presets -------------------------------------------------------------

R_VALUES = {"a": 1.0, "b": 2.5, "c": 3.2}
TRAP_ELLS = {"a": 5.7, "b": 15.0, "c": 26.0}
FIG7_TIMES = (5.0, 35.20, 55.37, 65.50, 75.62)
PHASES = {"phi0": 0.0, "phi_pi2": math.pi / 2, "phi_pi": math.pi, "phi_mpi2": -math.pi / 2}


def free_release(r: float, phi: float = 0.0, t_final: float = 5.0, ell: float = 5.7,
                 snapshot_times=(), **outputs) -> ScenarioConfig:
    return ScenarioConfig(
        physical=PhysicalParams(ell_um=ell),
        stepper=StepperConfig.for_duration(t_final),
        mode="free_release",
        r_factor=r,
        phi=phi,
        outputs=OutputSpec(**{"density_clip": (0.0, 0.12), "velocity_clip": (-1.0, 1.0), **outputs}),
        analysis=AnalysisSpec(snapshot_times=tuple(snapshot_times)),
    )


def in_trap(ell: float, t_final: float = 80.0, phi: float = 0.0, snapshot_times=FIG7_TIMES,
            **outputs) -> ScenarioConfig:
    return ScenarioConfig(
        physical=PhysicalParams(ell_um=ell),
        stepper=StepperConfig.for_duration(t_final),
        mode="trap",
        r_factor=1.0,
        phi=phi,
        outputs=OutputSpec(**{"density_clip": (0.0, 0.1), "velocity_clip": (-5.0, 5.0),
                              "matrix_stride": 10, **outputs}),
        analysis=AnalysisSpec(snapshot_times=tuple(snapshot_times)),
    )


def _build_presets() -> dict[str, dict[str, ScenarioConfig]]:
    p: dict[str, dict[str, ScenarioConfig]] = {}
    density_only = ("density", "trajectories", "report", "pgm")
    velocity_only = ("velocity", "trajectories", "report", "pgm")
    for panel, r in R_VALUES.items():
        p[f"fig2{panel}"] = {"": free_release(r, snapshot_times=(0.0, 2.0, 5.0),
                                              artifacts=("frames", "report"), frame_times=(0.0, 2.0, 5.0))}
        p[f"fig3{panel}"] = {"": free_release(r, t_final=3.0, artifacts=density_only)}
        p[f"fig3{chr(ord(panel) + 3)}"] = {"": free_release(r, t_final=3.0, artifacts=velocity_only)}
    for row, r in (("a", 1.0), ("d", 3.2)):
        p[f"fig4{row}"] = {
            label: free_release(r, phi, snapshot_times=(0.0, 5.0), artifacts=("frames", "report"),
                                frame_times=(5.0,))
            for label, phi in PHASES.items()
        }
    for panel, r in (("b", 1.0), ("e", 3.2)):
        p[f"fig4{panel}"] = {"": free_release(r, math.pi, snapshot_times=(0.0, 5.0), artifacts=density_only)}
        p[f"fig4{chr(ord(panel) + 1)}"] = {"": free_release(r, math.pi, snapshot_times=(0.0, 5.0),
                                                            artifacts=velocity_only)}
    for panel, ell in TRAP_ELLS.items():
        p[f"fig5{panel}"] = {"": in_trap(ell, artifacts=density_only)}
        p[f"fig6{panel}"] = {"": in_trap(ell, artifacts=velocity_only)}
    for panel, ell in (("a", 5.7), ("b", 26.0)):
        p[f"fig7{panel}"] = {"": in_trap(ell, artifacts=("frames", "report"), frame_times=FIG7_TIMES)}
    return p


PRESETS = _build_presets()


def preset(name: str) -> dict[str, ScenarioConfig]:
    """Named runs making up one figure panel; ``""`` labels a single-run preset."""
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None


def run_preset(name: str, out_dir=None, extra: tuple[str, ...] = (),
               cache: dict | None = None) -> dict[str, ScenarioResult]:
    """Run every sub-scenario of a preset, optionally writing outputs.

    ``cache`` is filled with frame series and trajectories keyed by the
    simulated physics, so panels sharing the same dynamics are only
    computed once.
    """
    results = {}
    cache = {} if cache is None else cache
    for label, cfg in preset(name).items():
        key = cfg.physics_key()
        tkey = (key, cfg.trajectory)
        try:
            res = run_scenario(cfg, cache.get(key), cache.get(tkey))
        except PropagationError as exc:
            if out_dir is not None and exc.last_good is not None:
                dump = Path(out_dir) / name / label
                dump.mkdir(parents=True, exist_ok=True)
                io.write_snapshot(dump / "last_good_frame.csv", exc.last_good)
            raise
        cache[key] = res.series
        cache[tkey] = res.trajectories
        if out_dir is not None:
            write_outputs(res, Path(out_dir) / name / label, extra)
        results[label] = res
    return results
