"""Scenario orchestration and the command-line interface.

A scenario is a JSON config naming a drive profile, an initial level, and
the engines to run (exact fluid solution, interlevel coefficients, grid
propagator).  Running a scenario writes deterministic CSV artifacts plus a
JSON manifest with a config echo, content hashes of every file, and the
pass/fail record of the built-in consistency checks.  There is no randomness
anywhere: two runs of the same config produce byte-identical output.

CLI verbs:

    landauflow run <config.json>   run a scenario from a config file
    landauflow preset <name>       run a built-in scenario
    landauflow list                list built-in scenarios
    landauflow validate <config>   check a config without running it

Exit codes: 0 success, 1 engine failure or failed check, 2 config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import energetics, levels, madelung, oracle
from .basis import Grid, WaveField, hermite_gauss, project_onto_basis, tail_radius
from .profiles import FieldProfile, ProfileError, profile_from_dict

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "parse_config",
    "run_scenario",
    "list_presets",
    "preset_config",
    "main",
]

ENGINES = ("madelung", "levels", "oracle")

DENSITY_AGREEMENT_TOL = 1e-4       # exact vs propagated density, L-inf
COEFFICIENT_AGREEMENT_TOL = 1e-5   # level ODE vs projected moduli
EXCESS_FLOOR = -1e-12
AUDIT_TOL = 1e-8
NORM_DRIFT_TOL = 1e-8
PARITY_TOL = 1e-12
STEP_NORM_TOL = 1e-12


class ConfigError(ValueError):
    """Malformed scenario configuration."""


_SCHEMA_REQUIRED = {"name", "n0", "profile", "t_end"}
_SCHEMA_OPTIONAL = {"sample_dt", "tol", "engines", "grid", "oracle_dt",
                    "snapshot_times", "fluxmap_dt", "n_max", "out_dir"}


@dataclass
class ScenarioConfig:
    name: str
    n0: int
    profile: FieldProfile
    t_end: float
    sample_dt: float = 0.01
    tol: float = 1e-10
    engines: tuple = ("madelung",)
    grid_half_width: float = None
    grid_count: int = None
    oracle_dt: float = oracle.DEFAULT_TIME_STEP
    snapshot_times: tuple = ()
    fluxmap_dt: float = None
    n_max: int = None
    out_dir: str = "out"
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def sample_times(self) -> np.ndarray:
        n = int(round(self.t_end / self.sample_dt))
        return np.arange(n + 1) * self.sample_dt

    def resolved_grid(self) -> Grid:
        """Configured grid, or one sized from a cheap pre-integration of the
        strain-rate oscillator: the half-width contains every level this
        scenario can populate at the lowest trap frequency actually reached,
        and the spacing resolves the shortest mode wavelength at the highest.
        """
        if self.grid_half_width is not None:
            return Grid(half_width=self.grid_half_width,
                        count=self.grid_count or 3073)
        scout = madelung.integrate_beta(self.profile, self.t_end, tol=1e-6,
                                        sample_times=np.linspace(0.0, self.t_end, 2049))
        gamma = scout.gamma
        gamma_min = 0.95 * float(gamma.min())
        gamma_max = 1.05 * float(gamma.max())
        # drive jumps spread population well beyond the initial level
        margin = 12 if self.profile.jump_times else 6
        n_top = max(self.n0 + margin, 13)
        half_width = float(math.ceil(tail_radius(n_top, gamma_min)))
        if self.grid_count is not None:
            return Grid(half_width=half_width, count=self.grid_count)
        # calibrated so the propagated density stays within ~1e-4 of exact
        # on ramp scenarios at the default time step
        spacing = 0.04 / math.sqrt(gamma_max * (2.0 * (self.n0 + 2) + 1.0))
        count = int(math.ceil(2.0 * half_width / spacing))
        count = min(max(count | 1, 1025), 16385)
        return Grid(half_width=half_width, count=count)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario config; unknown keys are rejected."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    unknown = raw.keys() - _SCHEMA_REQUIRED - _SCHEMA_OPTIONAL
    if unknown:
        raise ConfigError(
            f"unknown config keys {sorted(unknown)}; allowed keys are "
            f"{sorted(_SCHEMA_REQUIRED | _SCHEMA_OPTIONAL)}")
    missing = _SCHEMA_REQUIRED - raw.keys()
    if missing:
        raise ConfigError(f"config is missing required keys {sorted(missing)}")

    name = raw["name"]
    if not isinstance(name, str) or not name:
        raise ConfigError("'name' must be a non-empty string")
    n0 = raw["n0"]
    if not isinstance(n0, int) or isinstance(n0, bool) or n0 < 0:
        raise ConfigError(f"'n0' must be a non-negative integer, got {n0!r}")
    try:
        profile = profile_from_dict(raw["profile"])
    except ProfileError as exc:
        raise ConfigError(f"'profile' is invalid: {exc}") from exc

    t_end = raw["t_end"]
    if not isinstance(t_end, (int, float)) or t_end <= 0:
        raise ConfigError(f"'t_end' must be a positive number, got {t_end!r}")
    sample_dt = raw.get("sample_dt", 0.01)
    if not isinstance(sample_dt, (int, float)) or sample_dt <= 0:
        raise ConfigError(f"'sample_dt' must be a positive number, got {sample_dt!r}")
    n_samples = round(t_end / sample_dt)
    if n_samples < 1 or abs(n_samples * sample_dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ConfigError(
            f"'sample_dt' = {sample_dt} must divide t_end = {t_end} within rounding")
    tol = raw.get("tol", 1e-10)
    if not isinstance(tol, (int, float)) or not 1e-14 <= tol <= 1e-3:
        raise ConfigError(f"'tol' must lie in [1e-14, 1e-3], got {tol!r}")

    engines = raw.get("engines", ["madelung"])
    if (not isinstance(engines, list) or not engines
            or any(e not in ENGINES for e in engines)):
        raise ConfigError(f"'engines' must be a non-empty subset of {list(ENGINES)}")
    engines = tuple(dict.fromkeys(engines))
    if "levels" in engines and not profile.smooth:
        raise ConfigError(
            "'engines' includes 'levels' but the profile has jumps; the "
            "interlevel system needs a differentiable drive")

    grid_spec = raw.get("grid", {})
    if not isinstance(grid_spec, dict) or grid_spec.keys() - {"half_width", "count"}:
        raise ConfigError("'grid' accepts only the keys 'half_width' and 'count'")
    grid_half_width = grid_spec.get("half_width")
    grid_count = grid_spec.get("count")
    if grid_count is not None and (not isinstance(grid_count, int) or grid_count % 2 == 0):
        raise ConfigError(f"'grid.count' must be an odd integer, got {grid_count!r}")

    oracle_dt = raw.get("oracle_dt", oracle.DEFAULT_TIME_STEP)
    if not isinstance(oracle_dt, (int, float)) or oracle_dt <= 0:
        raise ConfigError(f"'oracle_dt' must be a positive number, got {oracle_dt!r}")

    snapshot_times = raw.get("snapshot_times", [])
    if (not isinstance(snapshot_times, list)
            or any(not isinstance(t, (int, float)) for t in snapshot_times)
            or any(t < 0 or t > t_end for t in snapshot_times)):
        raise ConfigError("'snapshot_times' must be numbers within [0, t_end]")

    fluxmap_dt = raw.get("fluxmap_dt")
    if fluxmap_dt is not None and (not isinstance(fluxmap_dt, (int, float))
                                   or fluxmap_dt <= 0):
        raise ConfigError(f"'fluxmap_dt' must be a positive number, got {fluxmap_dt!r}")

    n_max = raw.get("n_max")
    if n_max is not None and (not isinstance(n_max, int) or n_max < n0 + 8):
        raise ConfigError(f"'n_max' must be an integer >= n0 + 8, got {n_max!r}")

    out_dir = raw.get("out_dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("'out_dir' must be a non-empty string")

    return ScenarioConfig(
        name=name, n0=n0, profile=profile, t_end=float(t_end),
        sample_dt=float(sample_dt), tol=float(tol), engines=engines,
        grid_half_width=grid_half_width, grid_count=grid_count,
        oracle_dt=float(oracle_dt), snapshot_times=tuple(snapshot_times),
        fluxmap_dt=fluxmap_dt, n_max=n_max, out_dir=out_dir, raw=raw,
    )


# ---------------------------------------------------------------------------
# presets


def _preset_step_1_to_2() -> dict:
    b1 = 2.0
    t_end = 10.0 * math.pi / b1
    return {
        "name": "step_1_to_2",
        "n0": 0,
        "profile": {"kind": "step_sequence", "b0": 1.0, "steps": [[0.0, b1]]},
        "t_end": t_end,
        "sample_dt": t_end / 2048,
        "tol": 1e-12,
        "engines": ["madelung"],
    }


def _preset_fig4_cycle() -> dict:
    return {
        "name": "fig4_cycle",
        "n0": 2,
        "profile": {"kind": "tanh_cycle", "b0": 1.0, "b1": 2.0,
                    "t_up": 10.0, "t_down": 30.0, "width": 0.5},
        "t_end": 40.0,
        "sample_dt": 0.02,
        "tol": 1e-11,
        "engines": ["madelung"],
        "fluxmap_dt": 0.1,
    }


def _preset_fig5_marginal_cycle() -> dict:
    b1 = 2.0
    k = 2
    tau = k * math.pi / b1
    return {
        "name": "fig5_marginal_cycle",
        "n0": 2,
        "profile": {"kind": "step_sequence", "b0": 1.0,
                    "steps": [[0.0, b1], [tau, 1.0]]},
        "t_end": 8.0,
        "sample_dt": 8.0 / 1024,
        "tol": 1e-12,
        "engines": ["madelung"],
        "fluxmap_dt": 0.05,
    }


def _preset_adiabatic_ramp() -> dict:
    return {
        "name": "adiabatic_ramp",
        "n0": 0,
        "profile": {"kind": "tanh_ramp", "b0": 1.0, "b1": 1.2,
                    "t_center": 30.0, "width": 10.0},
        "t_end": 60.0,
        "sample_dt": 0.05,
        "tol": 1e-11,
        "engines": ["madelung", "levels"],
    }


def _preset_short_time_check() -> dict:
    return {
        "name": "appendixA_check",
        "n0": 0,
        "profile": {"kind": "tanh_ramp", "b0": 1.0, "b1": 2.0,
                    "t_center": 2.0, "width": 2.0},
        "t_end": 3.0,
        "sample_dt": 0.001,
        "tol": 1e-12,
        "engines": ["madelung", "levels"],
    }


_PRESETS = {
    "step_1_to_2": (_preset_step_1_to_2, "step drive 1 -> 2 at t = 0; exact sloshing"),
    "fig4_cycle": (_preset_fig4_cycle, "smooth up-hold-down drive cycle with hysteresis"),
    "fig5_marginal_cycle": (_preset_fig5_marginal_cycle,
                            "stepped cycle returning at tau = k pi / b1; no residual"),
    "adiabatic_ramp": (_preset_adiabatic_ramp, "slow ramp 1 -> 1.2; near-adiabatic"),
    "appendixA_check": (_preset_short_time_check,
                        "short-time consistency of the transition measures"),
}


def list_presets() -> dict:
    """Built-in scenario catalog: name -> one-line description."""
    return {name: desc for name, (_, desc) in _PRESETS.items()}


def preset_config(name: str) -> dict:
    """Config dict of a built-in scenario (parses through parse_config)."""
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(_PRESETS)}")
    return _PRESETS[name][0]()


# ---------------------------------------------------------------------------
# scenario execution


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


class _Run:
    def __init__(self, config: ScenarioConfig, out_dir: Path):
        self.config = config
        self.out_dir = out_dir
        self.files = []
        self.checks = []
        self.trajectory = None
        self.level_traj = None
        self.oracle_result = None
        self.grid = None

    def add_file(self, path: Path, kind: str):
        self.files.append({"path": path.name, "sha256": _sha256(path), "kind": kind})

    def add_check(self, name: str, value: float, tolerance: float, larger_ok=False):
        value = float(value)
        ok = value >= tolerance if larger_ok else value <= tolerance
        self.checks.append({"name": name, "value": value,
                            "tolerance": float(tolerance), "pass": bool(ok)})


def _run_madelung(run: _Run) -> None:
    cfg = run.config
    traj = madelung.integrate_beta(cfg.profile, cfg.t_end, tol=cfg.tol,
                                   sample_times=cfg.sample_times)
    run.trajectory = traj

    path = run.out_dir / "trajectory.csv"
    traj.to_csv(path)
    run.add_file(path, "trajectory")

    path = run.out_dir / "energy.csv"
    energetics.write_energy_csv(path, cfg.n0, traj)
    run.add_file(path, "energy")

    if cfg.fluxmap_dt is not None:
        path = run.out_dir / "fluxmap.csv"
        _write_fluxmap(path, cfg, traj)
        run.add_file(path, "fluxmap")

    run.add_check("gamma_redundancy", traj.gamma_redundancy_error(), 10.0 * cfg.tol)
    _, _, _, total, excess = energetics.energy_series(cfg.n0, traj)
    run.add_check("excess_energy_min", float(excess.min()), EXCESS_FLOOR, larger_ok=True)
    e0 = (cfg.n0 + 0.5) * traj.b0
    audit = np.max(np.abs((total - e0) - (cfg.n0 + 0.5) * traj.work))
    run.add_check("energy_audit", audit, AUDIT_TOL)


def _write_fluxmap(path: Path, cfg: ScenarioConfig, traj) -> None:
    grid = cfg.resolved_grid()
    stride = max(1, (grid.count - 1) // 256)
    n_times = int(round(cfg.t_end / cfg.fluxmap_dt))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,y,rho_v\n")
        for k in range(n_times + 1):
            t = k * cfg.fluxmap_dt
            state = traj.state_at(min(t, cfg.t_end))
            wf = madelung.exact_wavefunction(cfg.n0, state, grid)
            flux = madelung.fluid_fields(wf, state.b).mass_flux
            for y, f in zip(grid.points[::stride], flux[::stride]):
                fh.write(f"{t:.17g},{y:.17g},{f:.17g}\n")


def _run_levels(run: _Run) -> None:
    cfg = run.config
    ltraj = levels.integrate_level_odes(cfg.profile, cfg.n0, cfg.t_end,
                                        n_max=cfg.n_max, tol=cfg.tol,
                                        sample_times=cfg.sample_times)
    run.level_traj = ltraj
    path = run.out_dir / "coefficients.csv"
    ltraj.to_csv(path)
    run.add_file(path, "coefficients")

    run.add_check("level_norm_drift", ltraj.norm_drift,
                  NORM_DRIFT_TOL + ltraj.top_leakage)
    run.add_check("level_parity", ltraj.parity_violation, PARITY_TOL)
    run.add_check("level_truncation_leakage", ltraj.top_leakage, levels.LEAKAGE_WARN)


def _run_oracle(run: _Run) -> None:
    cfg = run.config
    grid = run.grid = cfg.resolved_grid()
    psi0 = hermite_gauss(cfg.n0, cfg.profile.initial_value, grid.points).astype(complex)
    initial = WaveField(grid=grid, amplitudes=psi0, t=0.0)
    # observables are recorded on a decimated sample set (propagation itself
    # still resolves every step); the final time is always kept
    samples = cfg.sample_times[::max(1, len(cfg.sample_times) // 256)]
    if samples[-1] != cfg.sample_times[-1]:
        samples = np.append(samples, cfg.sample_times[-1])
    result = oracle.propagate(initial, cfg.profile, cfg.t_end, dt=cfg.oracle_dt,
                              sample_times=samples,
                              snapshot_times=cfg.snapshot_times)
    run.oracle_result = result
    if cfg.snapshot_times:
        path = run.out_dir / "snapshots.csv"
        result.write_snapshots_csv(path)
        run.add_file(path, "snapshots")

    run.add_check("oracle_step_norm_drift", result.max_step_norm_drift, STEP_NORM_TOL)
    run.add_check("oracle_boundary_amplitude", result.max_boundary_amplitude,
                  oracle.BOUNDARY_THRESHOLD)


def _cross_checks(run: _Run) -> None:
    cfg = run.config
    if run.trajectory is not None and run.oracle_result is not None:
        state = run.trajectory.state_at(cfg.t_end)
        exact = madelung.exact_wavefunction(cfg.n0, state, run.grid)
        err = np.max(np.abs(exact.density() - run.oracle_result.final.density()))
        run.add_check("density_linf_exact_vs_oracle", err, DENSITY_AGREEMENT_TOL)

    if run.level_traj is not None and run.oracle_result is not None:
        b_end = float(cfg.profile.value(cfg.t_end))
        k = min(run.level_traj.n_max, 12)
        coeffs = project_onto_basis(run.oracle_result.final, b_end, k)
        err = np.max(np.abs(np.abs(coeffs) - np.abs(run.level_traj.phi[-1, :k + 1])))
        run.add_check("coefficients_levels_vs_oracle", err, COEFFICIENT_AGREEMENT_TOL)

    if (run.trajectory is not None and run.level_traj is not None
            and cfg.profile.smooth and abs(float(cfg.profile.derivative(0.0))) > 1e-9
            and cfg.sample_dt <= 1e-2 + 1e-15):
        amps = levels.transition_amplitude_series(cfg.profile, cfg.t_end, tol=cfg.tol,
                                                  sample_times=cfg.sample_times)
        report = levels.short_time_consistency(run.trajectory, amps)
        idx = int(np.argmin(np.abs(report.t - 1e-2)))
        errs = report.relative_errors()
        value = max(float(errs["amplitude_forward"][idx]),
                    float(errs["frequency_lag"][idx]))
        run.add_check("short_time_consistency_at_1e-2", value, 2e-2)


def run_scenario(config: ScenarioConfig, out_dir=None, quiet: bool = False) -> dict:
    """Execute the configured engines and write artifacts plus manifest.

    Returns the manifest dict; the manifest carries an ``error`` entry if an
    engine failed.  Output is deterministic: no randomness, fixed float
    formatting, stable key order.
    """
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(config, out)
    error = None
    try:
        if "madelung" in config.engines:
            if not quiet:
                print(f"[{config.name}] integrating exact fluid solution")
            _run_madelung(run)
        if "levels" in config.engines:
            if not quiet:
                print(f"[{config.name}] integrating interlevel coefficients")
            _run_levels(run)
        if "oracle" in config.engines:
            if not quiet:
                print(f"[{config.name}] propagating on the grid")
            _run_oracle(run)
        _cross_checks(run)
    except Exception as exc:  # recorded in the manifest, nonzero exit for CLI
        error = f"{type(exc).__name__}: {exc}"

    manifest = {"config": config.raw, "files": run.files, "checks": run.checks}
    if error is not None:
        manifest["error"] = error
    path = out / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not quiet:
        for check in run.checks:
            status = "pass" if check["pass"] else "FAIL"
            print(f"  {status}  {check['name']}: {check['value']:.3e} "
                  f"(tolerance {check['tolerance']:.1e})")
        if error:
            print(f"  ERROR  {error}")
        print(f"[{config.name}] manifest: {path}")
    return manifest


# ---------------------------------------------------------------------------
# CLI


def _load_config(path: str, overrides: argparse.Namespace) -> ScenarioConfig:
    text = Path(path).read_text(encoding="utf-8")
    return _apply_overrides(parse_config(text), overrides)


def _apply_overrides(config: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    if getattr(args, "tol", None) is not None:
        config.tol = args.tol
        config.raw["tol"] = args.tol
    if getattr(args, "out", None) is not None:
        config.out_dir = args.out
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="landauflow",
        description="Drive a trapped-particle eigenmode with a time-dependent "
                    "field and cross-validate the exact, interlevel, and grid "
                    "propagations.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario from a JSON config")
    run_p.add_argument("config", help="path to the scenario config")
    preset_p = sub.add_parser("preset", help="run a built-in scenario")
    preset_p.add_argument("name", help="preset name (see 'landauflow list')")
    for p in (run_p, preset_p):
        p.add_argument("--out", help="output directory (default: config out_dir)")
        p.add_argument("--tol", type=float, help="override integrator tolerance")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub.add_parser("list", help="list built-in scenarios")
    val_p = sub.add_parser("validate", help="validate a config without running")
    val_p.add_argument("config", help="path to the scenario config")

    args = parser.parse_args(argv)

    try:
        if args.command == "list":
            for name, desc in list_presets().items():
                print(f"{name:24s} {desc}")
            return 0
        if args.command == "validate":
            parse_config(Path(args.config).read_text(encoding="utf-8"))
            print("config ok")
            return 0
        if args.command == "run":
            config = _load_config(args.config, args)
        else:
            config = _apply_overrides(
                parse_config(json.dumps(preset_config(args.name))), args)
    except (ConfigError, ProfileError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    manifest = run_scenario(config, quiet=args.quiet)
    if "error" in manifest or any(not c["pass"] for c in manifest["checks"]):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
