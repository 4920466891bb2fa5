"""Interlevel coefficient dynamics in the drive-following mode basis.

Projecting the wave function on the instantaneous eigenmodes of the drive
b(t) turns the evolution into a coupled system for the coefficients phi_n:

    i phi_n' = b (n + 1/2) phi_n
               - i (b'/4b) [sqrt((n+2)(n+1)) phi_{n+2} - sqrt(n(n-1)) phi_{n-2}],

whose off-diagonal part encodes the non-adiabatic transitions between levels
of equal parity.  This module integrates a truncated version of that system,
accumulates the first-order transition amplitude

    zeta(t) = int_0^t (b'/4b) exp(2 i Theta) dt',   Theta = int_0^t b dt',

assembles the corresponding three-mode approximate wave function, and checks
the short-time consistency between the transition amplitude and the lag of
the exact trap frequency behind the drive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .basis import Grid, WaveField, hermite_gauss
from .madelung import MadelungTrajectory
from .profiles import FieldProfile

__all__ = [
    "LevelTrajectory",
    "TransitionAmplitudeSeries",
    "ConsistencyReport",
    "integrate_level_odes",
    "transition_amplitude_series",
    "first_order_wavefunction",
    "short_time_consistency",
    "coefficient_second_moment",
    "COEFFICIENT_CSV_COLUMNS",
]

COEFFICIENT_CSV_COLUMNS = 13  # populations p0..p12 in the coefficient export

LEAKAGE_WARN = 1e-6


def _require_smooth(profile: FieldProfile) -> None:
    if not profile.smooth:
        raise ValueError(
            "step profiles are not admissible here: the drive rate b' is a "
            "distribution at the jumps; use the exact fluid solution instead")


@dataclass
class LevelTrajectory:
    """Sampled coefficient vectors of the truncated interlevel system."""

    t: np.ndarray
    phi: np.ndarray  # shape (len(t), n_max + 1), complex
    n0: int
    n_max: int

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.phi) ** 2

    @property
    def norm_drift(self) -> float:
        """Max deviation of sum |phi_m|^2 from 1 over the samples."""
        return float(np.max(np.abs(self.populations.sum(axis=1) - 1.0)))

    @property
    def top_leakage(self) -> float:
        """Max population of the two topmost retained levels; the truncation
        is trustworthy only while this stays small."""
        return float(np.max(self.populations[:, -2:]))

    @property
    def parity_violation(self) -> float:
        """Max modulus over levels whose parity differs from the initial one
        (exactly conserved by the coupling structure)."""
        odd = (np.arange(self.n_max + 1) - self.n0) % 2 == 1
        if not np.any(odd):
            return 0.0
        return float(np.max(np.abs(self.phi[:, odd])))

    def interaction_picture(self, theta: np.ndarray) -> np.ndarray:
        """Coefficients with the dynamical phases removed,
        Phi_m = exp(i (m + 1/2) theta) phi_m."""
        m = np.arange(self.n_max + 1)
        return np.exp(1j * np.outer(theta, m + 0.5)) * self.phi

    def to_csv(self, path) -> None:
        k = min(self.n_max, COEFFICIENT_CSV_COLUMNS - 1)
        header = ["t"] + [f"p{m}" for m in range(k + 1)]
        pops = self.populations[:, :k + 1]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for ti, row in zip(self.t, pops):
                fh.write(f"{ti:.17g}," + ",".join(f"{p:.17g}" for p in row) + "\n")


def integrate_level_odes(profile: FieldProfile, n0: int, t_end: float,
                         n_max: int = None, tol: float = 1e-10,
                         sample_dt: float = None, sample_times=None) -> LevelTrajectory:
    """Integrate the truncated interlevel system from phi_m(0) = delta_{m,n0}.

    The truncation keeps levels 0..n_max (default n0 + 40; transitions
    populate +-2 neighbours sequentially, so the tail decays fast in the
    near-adiabatic regime).  Warns if the population of the two topmost
    retained levels ever exceeds 1e-6.
    """
    _require_smooth(profile)
    if n_max is None:
        n_max = n0 + 40
    if n_max < n0 + 8:
        raise ValueError(f"truncation n_max = {n_max} too tight; need >= n0 + 8 = {n0 + 8}")

    if sample_times is None:
        if sample_dt is None:
            sample_times = np.linspace(0.0, t_end, 501)
        else:
            n = int(math.floor(t_end / sample_dt + 1e-9))
            sample_times = np.arange(n + 1) * sample_dt
            if t_end - sample_times[-1] > 1e-9 * max(1.0, t_end):
                sample_times = np.append(sample_times, t_end)
            else:
                sample_times[-1] = min(sample_times[-1], t_end)
    sample_times = np.asarray(sample_times, dtype=float)

    m = np.arange(n_max + 1, dtype=float)
    half = m + 0.5
    up = np.sqrt((m + 2.0) * (m + 1.0))      # couples phi_{n+2} into phi_n
    down = np.sqrt(m * (m - 1.0))            # couples phi_{n-2} into phi_n

    def rhs(t, phi):
        b = float(profile.value(t))
        rate = float(profile.derivative(t)) / (4.0 * b)
        dphi = -1j * b * half * phi
        if rate != 0.0:
            dphi[:-2] -= rate * up[:-2] * phi[2:]
            dphi[2:] += rate * down[2:] * phi[:-2]
        return dphi

    phi0 = np.zeros(n_max + 1, dtype=complex)
    phi0[n0] = 1.0
    sol = solve_ivp(rhs, (0.0, float(t_end)), phi0, method="DOP853",
                    rtol=max(3e-14, 0.01 * tol), atol=max(1e-17, 1e-5 * tol),
                    t_eval=sample_times)
    if not sol.success:
        raise RuntimeError(f"level integration failed: {sol.message}")
    traj = LevelTrajectory(t=sol.t, phi=sol.y.T.copy(), n0=n0, n_max=n_max)
    if traj.top_leakage > LEAKAGE_WARN:
        warnings.warn(
            f"population {traj.top_leakage:.2e} reached the truncation edge "
            f"(n_max = {n_max}); raise n_max for trustworthy coefficients",
            stacklevel=2)
    return traj


def coefficient_second_moment(phi: np.ndarray, b: float) -> float:
    """<y^2> of the state with mode coefficients ``phi`` in the basis at
    drive b: (sum (2m+1)|phi_m|^2 + 2 Re sum sqrt((m+1)(m+2)) phi_m* phi_{m+2})
    divided by 2b."""
    phi = np.asarray(phi)
    m = np.arange(phi.shape[0], dtype=float)
    diag = float(np.sum((2.0 * m + 1.0) * np.abs(phi) ** 2))
    cross = np.sum(np.sqrt((m[:-2] + 1.0) * (m[:-2] + 2.0))
                   * np.conjugate(phi[:-2]) * phi[2:])
    return (diag + 2.0 * float(np.real(cross))) / (2.0 * b)


@dataclass
class TransitionAmplitudeSeries:
    """Accumulated dynamical phase Theta and transition amplitude zeta."""

    t: np.ndarray
    theta: np.ndarray
    zeta: np.ndarray  # complex

    def at(self, t: float) -> tuple:
        idx = int(np.argmin(np.abs(self.t - t)))
        if abs(float(self.t[idx]) - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not among the sampled times")
        return float(self.theta[idx]), complex(self.zeta[idx])


def transition_amplitude_series(profile: FieldProfile, t_end: float,
                                tol: float = 1e-10, sample_dt: float = None,
                                sample_times=None) -> TransitionAmplitudeSeries:
    """Accumulate Theta = int b and zeta = int (b'/4b) e^{2 i Theta} as ODEs."""
    _require_smooth(profile)
    if sample_times is None:
        if sample_dt is None:
            sample_times = np.linspace(0.0, t_end, 501)
        else:
            n = int(math.floor(t_end / sample_dt + 1e-9))
            sample_times = np.arange(n + 1) * sample_dt
            if t_end - sample_times[-1] > 1e-9 * max(1.0, t_end):
                sample_times = np.append(sample_times, t_end)
            else:
                sample_times[-1] = min(sample_times[-1], t_end)
    sample_times = np.asarray(sample_times, dtype=float)

    def rhs(t, y):
        b = float(profile.value(t))
        rate = float(profile.derivative(t)) / (4.0 * b)
        ph = rate * np.exp(2j * y[0])
        return (b, ph.real, ph.imag)

    sol = solve_ivp(rhs, (0.0, float(t_end)), np.zeros(3), method="DOP853",
                    rtol=max(3e-14, 0.01 * tol), atol=max(1e-17, 1e-5 * tol),
                    t_eval=sample_times)
    if not sol.success:
        raise RuntimeError(f"transition amplitude integration failed: {sol.message}")
    return TransitionAmplitudeSeries(t=sol.t, theta=sol.y[0],
                                     zeta=sol.y[1] + 1j * sol.y[2])


def first_order_wavefunction(n0: int, theta: float, zeta: complex, b: float,
                             grid: Grid) -> WaveField:
    """Three-mode approximation of the wave function at one instant:

        psi ~ e^{-i(n0+1/2)theta} Psi_{n0,b}
            + e^{-i(n0+5/2)theta} zeta sqrt((n0+2)(n0+1)) Psi_{n0+2,b}
            - e^{-i(n0-3/2)theta} conj(zeta) sqrt(n0(n0-1)) Psi_{n0-2,b}.

    Valid while |zeta| << 1; the norm is 1 + O(|zeta|^2) by construction
    (the field is intentionally left un-normalized).
    """
    if abs(zeta) > 0.1:
        warnings.warn(
            f"|zeta| = {abs(zeta):.3f} is not small; the first-order "
            "three-mode approximation is unreliable here", stacklevel=2)
    grid.require_mode(n0 + 2, b)
    y = grid.points
    psi = np.exp(-1j * (n0 + 0.5) * theta) * hermite_gauss(n0, b, y).astype(complex)
    psi += (np.exp(-1j * (n0 + 2.5) * theta) * zeta
            * math.sqrt((n0 + 2) * (n0 + 1)) * hermite_gauss(n0 + 2, b, y))
    if n0 >= 2:
        psi -= (np.exp(-1j * (n0 - 1.5) * theta) * np.conjugate(zeta)
                * math.sqrt(n0 * (n0 - 1)) * hermite_gauss(n0 - 2, b, y))
    return WaveField(grid=grid, amplitudes=psi)


@dataclass
class ConsistencyReport:
    """Short-time agreement of the three equivalent transition measures.

    ``amplitude_forward``  : e^{-2 i Theta} zeta
    ``amplitude_backward`` : e^{+2 i Theta} conj(zeta)  (its conjugate)
    ``frequency_lag``      : (b - Gamma) / (4 b)
    ``linear_reference``   : b'(0) t / (4 b(0))

    All four are equivalent to first order as t -> 0+.
    """

    t: np.ndarray
    amplitude_forward: np.ndarray
    amplitude_backward: np.ndarray
    frequency_lag: np.ndarray
    linear_reference: np.ndarray
    initial_rate: float

    def relative_errors(self) -> dict:
        """Max relative deviation of each measure from the linear reference,
        per sample time (safe only where the reference is nonzero)."""
        ref = self.linear_reference
        with np.errstate(divide="ignore", invalid="ignore"):
            return {
                "amplitude_forward": np.abs(self.amplitude_forward - ref) / np.abs(ref),
                "frequency_lag": np.abs(self.frequency_lag - ref) / np.abs(ref),
            }

    def pairwise_difference(self) -> np.ndarray:
        return np.abs(self.amplitude_forward - self.frequency_lag)


def short_time_consistency(trajectory: MadelungTrajectory,
                           amplitudes: TransitionAmplitudeSeries) -> ConsistencyReport:
    """Compare the transition amplitude against the trap-frequency lag.

    Both series must be sampled on the same time axis.  The comparison is a
    first-order statement: each quantity tends to b'(0) t / (4 b(0)), so the
    relative deviations shrink linearly as t -> 0.
    """
    if (trajectory.t.shape != amplitudes.t.shape
            or not np.allclose(trajectory.t, amplitudes.t, rtol=0, atol=1e-12)):
        raise ValueError("trajectory and amplitude series must share sample times")
    profile = trajectory.profile
    b0 = float(profile.value(0.0))
    d0 = float(profile.derivative(0.0))
    fwd = np.exp(-2j * amplitudes.theta) * amplitudes.zeta
    lag = (trajectory.b - trajectory.gamma) / (4.0 * trajectory.b)
    return ConsistencyReport(
        t=trajectory.t,
        amplitude_forward=fwd,
        amplitude_backward=np.conjugate(fwd),
        frequency_lag=lag,
        linear_reference=d0 * trajectory.t / (4.0 * b0),
        initial_rate=d0,
    )
