"""Brute-force grid propagator used to cross-validate the other engines.

Crank-Nicolson stepping of

    i psi_t = -1/2 psi_yy + 1/2 b(t)^2 y^2 psi

in the Cayley form (I + i dt/2 H) psi_{k+1} = (I - i dt/2 H) psi_k, with the
Hamiltonian discretized by centred second differences and the potential
sampled at the step midpoint.  The rational form is exactly unitary for the
Hermitian tridiagonal H, so the discrete norm is conserved to solver
roundoff; each step costs one complex tridiagonal solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .basis import Grid, WaveField
from .profiles import FieldProfile

__all__ = [
    "BoundaryLeakError",
    "Observables",
    "OracleResult",
    "propagate",
    "observables",
    "SNAPSHOT_CSV_HEADER",
]

SNAPSHOT_CSV_HEADER = ("t", "y", "re_psi", "im_psi", "rho")

DEFAULT_TIME_STEP = 1e-3
BOUNDARY_THRESHOLD = 1e-10


class BoundaryLeakError(RuntimeError):
    """Probability reached the grid edge; results would be contaminated."""


@dataclass
class Observables:
    """Quadrature observables of one field sample."""

    t: float
    norm: float
    y_second_moment: float
    e_kx: float      # zonal kinetic = potential term, b^2 <y^2> / 2
    e_ky: float      # meridional kinetic carried by the phase gradient
    e_q: float       # quantum-potential energy (amplitude curvature)
    energy: float    # <H> = e_kx + e_ky + e_q


@dataclass
class OracleResult:
    """Propagation output: observables along the way plus selected fields."""

    times: np.ndarray
    norms: np.ndarray
    y_second_moments: np.ndarray
    e_kx: np.ndarray
    e_ky: np.ndarray
    e_q: np.ndarray
    energies: np.ndarray
    b_values: np.ndarray
    final: WaveField
    snapshots: dict = field(default_factory=dict)
    max_boundary_amplitude: float = 0.0
    max_step_norm_drift: float = 0.0

    @property
    def variances(self) -> np.ndarray:
        return self.y_second_moments

    def write_snapshots_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(SNAPSHOT_CSV_HEADER) + "\n")
            for t in sorted(self.snapshots):
                wf = self.snapshots[t]
                rho = wf.density()
                for y, a, r in zip(wf.grid.points, wf.amplitudes, rho):
                    fh.write(f"{t:.17g},{y:.17g},{a.real:.17g},{a.imag:.17g},{r:.17g}\n")


def observables(wavefield: WaveField, b: float) -> Observables:
    """Norm, <y^2> and the energy partition of a sampled field.

    The kinetic term uses centred differences of the smooth complex field;
    the meridional (flow) part is the thresholded flux-squared integral and
    the quantum-potential part is the remainder of the total kinetic energy,
    which avoids differentiating the kinked amplitude |psi| across nodes.
    """
    grid = wavefield.grid
    psi = wavefield.amplitudes
    y = grid.points
    rho = np.abs(psi) ** 2
    norm_sq = float(np.real(grid.integrate(rho)))
    y2 = float(np.real(grid.integrate(y * y * rho)))

    dpsi = np.gradient(psi, grid.spacing)
    dpsi[2:-2] = (-psi[4:] + 8.0 * psi[3:-1] - 8.0 * psi[1:-3] + psi[:-4]) / (12.0 * grid.spacing)
    kinetic_density = 0.5 * np.abs(dpsi) ** 2
    kinetic_total = float(np.real(grid.integrate(kinetic_density)))

    flux = np.imag(np.conjugate(psi) * dpsi)
    flow_density = np.zeros_like(rho)
    live = rho > 1e-14 * rho.max()
    flow_density[live] = 0.5 * flux[live] ** 2 / rho[live]
    e_ky = float(np.real(grid.integrate(flow_density)))

    e_kx = float(0.5 * b * b * y2)
    e_q = kinetic_total - e_ky
    return Observables(t=wavefield.t, norm=math.sqrt(norm_sq), y_second_moment=y2,
                       e_kx=e_kx, e_ky=e_ky, e_q=e_q,
                       energy=e_kx + kinetic_total)


def propagate(initial: WaveField, profile: FieldProfile, t_end: float,
              dt: float = DEFAULT_TIME_STEP, sample_times=None,
              snapshot_times=(), boundary_threshold: float = BOUNDARY_THRESHOLD,
              keep_fields: bool = False) -> OracleResult:
    """Crank-Nicolson propagation of ``initial`` under the drive profile.

    The time axis is split at every drive jump and at every requested sample
    or snapshot time; each span is tiled with uniform steps no longer than
    ``dt``, so the midpoint potential never straddles a jump and step
    profiles are handled without smoothing error.

    Aborts with grid-enlargement advice if the boundary amplitude ever
    exceeds ``boundary_threshold``.
    """
    grid = initial.grid
    y = grid.points
    n = grid.count
    h = grid.spacing

    if sample_times is None:
        sample_times = np.linspace(0.0, t_end, 201)
    sample_times = np.asarray(sample_times, dtype=float)
    snapshot_times = np.asarray(sorted(snapshot_times), dtype=float)

    events = {0.0, float(t_end)}
    events.update(float(t) for t in sample_times)
    events.update(float(t) for t in snapshot_times)
    events.update(float(tj) for tj in profile.jump_times if 0.0 < tj < t_end)
    event_times = np.array(sorted(events))
    if event_times[0] < 0.0 or event_times[-1] > t_end + 1e-12:
        raise ValueError("sample and snapshot times must lie within [0, t_end]")

    sample_set = {round(float(t), 12) for t in sample_times}
    snapshot_set = {round(float(t), 12) for t in snapshot_times}

    psi = initial.amplitudes.astype(complex, copy=True)
    y2 = y * y
    kin_diag = 1.0 / (h * h)
    ab = np.empty((3, n), dtype=complex)

    records = []
    snapshots = {}
    max_boundary = 0.0
    max_drift = 0.0
    t = 0.0

    def record(t_now):
        key = round(float(t_now), 12)
        b_now = float(profile.value(t_now))
        if key in sample_set:
            wf = WaveField(grid=grid, amplitudes=psi.copy(), t=float(t_now))
            obs = observables(wf, b_now)
            records.append((t_now, b_now, obs))
        if key in snapshot_set:
            snapshots[float(t_now)] = WaveField(grid=grid, amplitudes=psi.copy(),
                                                t=float(t_now))

    record(0.0)
    for t_lo, t_hi in zip(event_times[:-1], event_times[1:]):
        span = t_hi - t_lo
        if span <= 0.0:
            continue
        nsteps = max(1, int(math.ceil(span / dt - 1e-9)))
        dt_loc = span / nsteps
        off = -1j * dt_loc / (4.0 * h * h)      # off-diagonal of (I + i dt/2 H)
        ab[0, :] = off
        ab[2, :] = off
        for k in range(nsteps):
            t_mid = t_lo + (k + 0.5) * dt_loc
            b_mid = float(profile.value(t_mid))
            a_diag = 1.0 + 1j * (dt_loc / 2.0) * (kin_diag + 0.5 * b_mid * b_mid * y2)
            rhs = (2.0 - a_diag) * psi
            rhs[:-1] -= off * psi[1:]
            rhs[1:] -= off * psi[:-1]
            ab[1, :] = a_diag
            norm_before = float(np.vdot(psi, psi).real)
            psi = solve_banded((1, 1), ab, rhs, check_finite=False, overwrite_b=True)
            norm_after = float(np.vdot(psi, psi).real)
            max_drift = max(max_drift, abs(norm_after / norm_before - 1.0))
        t = t_hi
        edge = max(abs(psi[0]), abs(psi[-1]))
        max_boundary = max(max_boundary, edge)
        if edge > boundary_threshold:
            raise BoundaryLeakError(
                f"boundary amplitude {edge:.3e} exceeded {boundary_threshold:g} "
                f"at t = {t:.6g}; enlarge the grid half-width (currently "
                f"{grid.half_width:g}) so the field stays contained")
        record(t)

    times = np.array([r[0] for r in records])
    bs = np.array([r[1] for r in records])
    obs = [r[2] for r in records]
    return OracleResult(
        times=times,
        norms=np.array([o.norm for o in obs]),
        y_second_moments=np.array([o.y_second_moment for o in obs]),
        e_kx=np.array([o.e_kx for o in obs]),
        e_ky=np.array([o.e_ky for o in obs]),
        e_q=np.array([o.e_q for o in obs]),
        energies=np.array([o.energy for o in obs]),
        b_values=bs,
        final=WaveField(grid=grid, amplitudes=psi.copy(), t=float(t_end)),
        snapshots=snapshots,
        max_boundary_amplitude=float(max_boundary),
        max_step_norm_drift=float(max_drift),
    )
