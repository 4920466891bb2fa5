"""Exact self-similar dynamics of the driven trap.

When the drive b(t) varies, the fluid picture of the wave function stays a
rescaled copy of its initial eigenmode.  The meridional velocity keeps the
linear form v = beta(t) y, with the strain rate obeying

    beta'' + 4 b^2 beta + 6 beta' beta + 4 beta^3 + 2 b b' = 0 ,

and the instantaneous trap frequency of the density profile is

    Gamma = sqrt(beta' + beta^2 + b^2) = b0 * exp(-2 * int beta dt) .

This module integrates the strain-rate oscillator (with the accumulated
phases needed to assemble the full wave function), provides the closed-form
solution valid once the drive is constant, and derives the fluid fields
(density, velocity, mass flux, quantum potential) from any sampled field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .basis import Grid, WaveField, hermite_gauss
from .profiles import FieldProfile

__all__ = [
    "GammaCollapseError",
    "MadelungState",
    "MadelungTrajectory",
    "PermanentRegime",
    "FluidFields",
    "integrate_beta",
    "fit_permanent_regime",
    "exact_wavefunction",
    "fluid_fields",
    "bohm_potential",
    "TRAJECTORY_CSV_HEADER",
]

TRAJECTORY_CSV_HEADER = ("t", "b", "beta", "beta_dot", "gamma", "int_beta", "int_gamma")

# Fraction of max density below which velocity and quantum potential are
# treated as undefined (both involve division by the vanishing amplitude).
NODE_THRESHOLD = 1e-10


class GammaCollapseError(RuntimeError):
    """Gamma^2 = beta' + beta^2 + b^2 became non-positive during integration.

    A valid trajectory keeps Gamma^2 > 0; hitting this signals an invalid
    state or a tolerance far too loose for the requested scenario.
    """


@dataclass(frozen=True)
class MadelungState:
    """One sample of the exact-solution state.

    ``int_beta`` and ``int_gamma`` are the accumulated integrals of beta and
    Gamma from t = 0 (stretching factor and dynamical phase); ``work`` is the
    accumulated energy injection integral of b b' / Gamma, which multiplied by
    (n0 + 1/2) gives the total energy absorbed so far.
    """

    t: float
    b: float
    beta: float
    beta_dot: float
    int_beta: float
    int_gamma: float
    work: float = 0.0

    @property
    def gamma(self) -> float:
        gamma_sq = self.beta_dot + self.beta**2 + self.b**2
        if gamma_sq <= 0.0:
            raise GammaCollapseError(f"Gamma^2 = {gamma_sq} <= 0 at t = {self.t}")
        return math.sqrt(gamma_sq)

    def ermakov_parameter(self, b0: float) -> float:
        """Scaling parameter sqrt(b0 / Gamma) of the equivalent invariant method."""
        return math.sqrt(b0 / self.gamma)


class MadelungTrajectory:
    """Sampled trajectory plus the dense piecewise solutions behind it."""

    def __init__(self, profile, t, states, segments, b0):
        self.profile = profile
        self.t = t
        self.b = states[:, 5]
        self.beta = states[:, 0]
        self.beta_dot = states[:, 1]
        self.int_beta = states[:, 2]
        self.int_gamma = states[:, 3]
        self.work = states[:, 4]
        self._segments = segments
        self.b0 = b0

    @property
    def gamma(self) -> np.ndarray:
        return np.sqrt(self.beta_dot + self.beta**2 + self.b**2)

    @property
    def ermakov_parameter(self) -> np.ndarray:
        return np.sqrt(self.b0 / self.gamma)

    def state_at(self, t: float) -> MadelungState:
        """Dense-output evaluation at an arbitrary time in [0, t_end].

        At a drive jump the returned state is the post-jump one, matching the
        right-continuity of the profile itself.
        """
        last = len(self._segments) - 1
        for k, (t_lo, t_hi, sol) in enumerate(self._segments):
            if t_lo <= t < t_hi or (k == last and t_lo <= t <= t_hi):
                y = sol(t)
                return MadelungState(t=float(t), b=float(self.profile.value(t)),
                                     beta=y[0], beta_dot=y[1], int_beta=y[2],
                                     int_gamma=y[3], work=y[4])
        raise ValueError(f"t = {t} outside the integrated range")

    def states(self):
        return [
            MadelungState(t=float(ti), b=float(bi), beta=float(be), beta_dot=float(bd),
                          int_beta=float(ib), int_gamma=float(ig), work=float(w))
            for ti, bi, be, bd, ib, ig, w in zip(
                self.t, self.b, self.beta, self.beta_dot,
                self.int_beta, self.int_gamma, self.work)
        ]

    def gamma_redundancy_error(self) -> float:
        """Max relative mismatch between Gamma from the state and the
        equivalent form b0 * exp(-2 int beta); an integration quality gauge."""
        gamma = self.gamma
        return float(np.max(np.abs(gamma - self.b0 * np.exp(-2.0 * self.int_beta)) / gamma))

    def to_csv(self, path) -> None:
        rows = np.column_stack([self.t, self.b, self.beta, self.beta_dot,
                                self.gamma, self.int_beta, self.int_gamma])
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(TRAJECTORY_CSV_HEADER) + "\n")
            for row in rows:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _segment_bounds(profile: FieldProfile, t_end: float):
    jumps = [tj for tj in profile.jump_times if 0.0 < tj < t_end]
    edges = [0.0] + jumps + [t_end]
    return list(zip(edges[:-1], edges[1:]))


def integrate_beta(profile: FieldProfile, t_end: float, tol: float = 1e-10,
                   sample_dt: float = None, sample_times=None) -> MadelungTrajectory:
    """Integrate the strain-rate oscillator driven by ``profile`` up to t_end.

    State vector: (beta, beta', int beta, int Gamma, int b b'/Gamma).  The
    integration runs segment-by-segment between drive jumps; across a jump
    beta and the integrals stay continuous while beta' drops by the jump of
    b^2, which keeps Gamma (hence the density) continuous.  Jump work
    b^2-jump / (2 Gamma) is credited to the work integral.
    """
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not 1e-14 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-14, 1e-3], got {tol}")

    if sample_times is None:
        if sample_dt is None:
            sample_times = np.linspace(0.0, t_end, 1001)
        else:
            n = int(math.floor(t_end / sample_dt + 1e-9))
            sample_times = np.arange(n + 1) * sample_dt
            if t_end - sample_times[-1] > 1e-9 * max(1.0, t_end):
                sample_times = np.append(sample_times, t_end)
            else:
                sample_times[-1] = min(sample_times[-1], t_end)
    sample_times = np.asarray(sample_times, dtype=float)
    if np.min(sample_times) < 0.0 or np.max(sample_times) > t_end * (1 + 1e-12):
        raise ValueError("sample times must lie within [0, t_end]")

    b0 = profile.initial_value
    y = np.array([0.0, 0.0, 0.0, 0.0, 0.0])

    # a drive jump right at t = 0 kicks beta' before integration starts
    if profile.jump_times and profile.jump_times[0] == 0.0:
        b_after = float(profile.value(0.0))
        y[1] -= b_after**2 - b0**2
        y[4] += (b_after**2 - b0**2) / (2.0 * b0)

    def make_rhs(bfun, bdot_fun):
        def rhs(t, y):
            beta, beta_dot = y[0], y[1]
            b = bfun(t)
            gamma_sq = beta_dot + beta * beta + b * b
            if gamma_sq <= 0.0:
                raise GammaCollapseError(
                    f"Gamma^2 = {gamma_sq} <= 0 at t = {t}; tolerance too loose "
                    "or invalid state")
            gamma = math.sqrt(gamma_sq)
            bdot = bdot_fun(t)
            beta_ddot = -(4.0 * b * b * beta + 6.0 * beta_dot * beta
                          + 4.0 * beta**3 + 2.0 * bdot * b)
            return (beta_dot, beta_ddot, beta, gamma, b * bdot / gamma)
        return rhs

    segments = []
    states = np.empty((sample_times.size, 6))
    filled = np.zeros(sample_times.size, dtype=bool)

    for t_lo, t_hi in _segment_bounds(profile, t_end):
        if profile.smooth:
            rhs = make_rhs(lambda t: float(profile.value(t)),
                           lambda t: float(profile.derivative(t)))
        else:
            b_seg = float(profile.value(0.5 * (t_lo + t_hi)))
            rhs = make_rhs(lambda t, b=b_seg: b, lambda t: 0.0)
        # run the integrator two decades tighter than the requested accuracy
        # so the delivered trajectory honours tol globally, not just per step
        sol = solve_ivp(rhs, (t_lo, t_hi), y, method="DOP853",
                        rtol=max(3e-14, 0.01 * tol), atol=max(1e-17, 1e-5 * tol),
                        dense_output=True)
        if not sol.success:
            raise RuntimeError(f"integration failed on [{t_lo}, {t_hi}]: {sol.message}")
        segments.append((t_lo, t_hi, sol.sol))

        # samples at a jump time belong to the next segment (post-jump state),
        # keeping b, beta_dot and Gamma mutually consistent
        final_segment = t_hi >= t_end
        in_seg = (sample_times >= t_lo - 1e-15) & ~filled
        in_seg &= (sample_times <= t_hi + 1e-15) if final_segment \
            else (sample_times < t_hi - 1e-15)
        if np.any(in_seg):
            ts = np.clip(sample_times[in_seg], t_lo, t_hi)
            vals = sol.sol(ts)
            states[in_seg, :5] = vals.T
            states[in_seg, 5] = profile.value(ts)
            filled |= in_seg

        y = sol.y[:, -1].copy()
        if t_hi < t_end:
            b_before = float(profile.value(0.5 * (t_lo + t_hi)))
            b_after = float(profile.value(t_hi))
            gamma_sq = y[1] + y[0] ** 2 + b_before**2
            if gamma_sq <= 0.0:
                raise GammaCollapseError(f"Gamma^2 = {gamma_sq} <= 0 at jump t = {t_hi}")
            y[1] -= b_after**2 - b_before**2
            y[4] += (b_after**2 - b_before**2) / (2.0 * math.sqrt(gamma_sq))

    if not np.all(filled):
        raise RuntimeError("internal error: some sample times were not covered")
    return MadelungTrajectory(profile, sample_times, states, segments, b0)


@dataclass(frozen=True)
class PermanentRegime:
    """Closed-form sloshing solution once the drive is constant at b1:

        beta(t)  = -b1 eps sin(2 b1 t + phi) / (1 + eps cos(2 b1 t + phi)),
        Gamma(t) =  b1 sqrt(1 - eps^2)      / (1 + eps cos(2 b1 t + phi)).

    ``epsilon`` in [0, 1) is the sloshing amplitude, ``phi`` the phase in
    (-pi, pi].
    """

    b1: float
    epsilon: float
    phi: float

    def __post_init__(self):
        if self.b1 <= 0.0:
            raise ValueError(f"drive must be positive, got b1={self.b1}")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"amplitude must lie in [0, 1), got {self.epsilon}")

    @property
    def period(self) -> float:
        return math.pi / self.b1

    @property
    def gamma_min(self) -> float:
        return self.b1 * math.sqrt((1.0 - self.epsilon) / (1.0 + self.epsilon))

    @property
    def gamma_max(self) -> float:
        return self.b1 * math.sqrt((1.0 + self.epsilon) / (1.0 - self.epsilon))

    def _phase(self, t):
        return 2.0 * self.b1 * np.asarray(t, dtype=float) + self.phi

    def beta(self, t):
        ph = self._phase(t)
        return -self.b1 * self.epsilon * np.sin(ph) / (1.0 + self.epsilon * np.cos(ph))

    def beta_dot(self, t):
        ph = self._phase(t)
        den = 1.0 + self.epsilon * np.cos(ph)
        return -2.0 * self.b1**2 * self.epsilon * (np.cos(ph) + self.epsilon) / den**2

    def gamma(self, t):
        ph = self._phase(t)
        return (self.b1 * math.sqrt(1.0 - self.epsilon**2)
                / (1.0 + self.epsilon * np.cos(ph)))


def fit_permanent_regime(state: MadelungState, b1: float,
                         drive_tol: float = 1e-9) -> PermanentRegime:
    """Identify (epsilon, phi) of the closed form from one state sample.

    Requires the drive to already sit at the constant b1 (the closed form is
    only a solution there).  Inverting beta and Gamma at the sample time
    gives sqrt(1 - eps^2) = 2 a / (1 + a^2 + c^2) with a = b1/Gamma and
    c = beta/Gamma, which always yields a unique eps in [0, 1).
    """
    if b1 <= 0.0:
        raise ValueError(f"drive must be positive, got b1={b1}")
    if abs(state.b - b1) > drive_tol * max(1.0, b1):
        raise ValueError(
            f"state has b = {state.b} but the permanent regime is fitted at "
            f"b1 = {b1}; the drive must be constant from the fit time onward")
    gamma = state.gamma
    a = b1 / gamma
    c = state.beta / gamma
    s = 2.0 * a / (1.0 + a * a + c * c)
    epsilon = math.sqrt(max(0.0, 1.0 - s * s))
    if epsilon < 1e-14:
        return PermanentRegime(b1=b1, epsilon=0.0, phi=0.0)
    # eps*cos and eps*sin of the phase at the sample time
    ec = b1 * s / gamma - 1.0
    es = -state.beta * s / gamma
    chi = math.atan2(es, ec)
    phi = math.remainder(chi - 2.0 * b1 * state.t, 2.0 * math.pi)
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    return PermanentRegime(b1=b1, epsilon=epsilon, phi=phi)


def exact_wavefunction(n0: int, state: MadelungState, grid: Grid) -> WaveField:
    """Assemble the exact wave function on the grid at the state's time:

        psi = exp{i beta y^2/2 - i (n0 + 1/2) int Gamma} Psi_{n0, Gamma}(y).
    """
    gamma = state.gamma
    grid.require_mode(n0, gamma)
    y = grid.points
    phase = np.exp(1j * (0.5 * state.beta * y * y
                         - (n0 + 0.5) * state.int_gamma))
    return WaveField(grid=grid, amplitudes=phase * hermite_gauss(n0, gamma, y),
                     t=state.t)


@dataclass
class FluidFields:
    """Hydrodynamic fields derived from a sampled wave function.

    ``velocity`` is NaN wherever the density is below the node threshold
    (the phase gradient is undefined there); the mass flux is always defined.
    The zonal component is enslaved to the drive, u = b y.
    """

    density: np.ndarray
    velocity: np.ndarray
    mass_flux: np.ndarray
    zonal_velocity: np.ndarray
    defined: np.ndarray


def _centered_derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Centered first derivative, 4th order in the interior, falling back to
    the 2nd-order one-sided/centered formula within two points of the edges
    (where the fields have decayed below the tail threshold anyway)."""
    df = np.gradient(f, h)
    df[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    return df


def fluid_fields(field: WaveField, b: float) -> FluidFields:
    """Density, meridional velocity/mass flux, and the zonal shear flow."""
    psi = field.amplitudes
    y = field.grid.points
    rho = np.abs(psi) ** 2
    dpsi = _centered_derivative(psi, field.grid.spacing)
    flux = np.imag(np.conjugate(psi) * dpsi)
    defined = rho > NODE_THRESHOLD * rho.max()
    velocity = np.full_like(rho, np.nan)
    velocity[defined] = flux[defined] / rho[defined]
    return FluidFields(density=rho, velocity=velocity, mass_flux=flux,
                       zonal_velocity=b * y, defined=defined)


def bohm_potential(density: np.ndarray, grid: Grid) -> np.ndarray:
    """Quantum potential Q = -R''/(2R) with R = sqrt(density).

    Centred second differences (4th order in the interior, 2nd order on the
    first interior ring); NaN at the boundary points and wherever the density
    sits below the node threshold, where Q is not defined.
    """
    density = np.asarray(density, dtype=float)
    if np.any(density < 0.0):
        raise ValueError("density must be non-negative")
    r = np.sqrt(density)
    h = grid.spacing
    q = np.full_like(r, np.nan)
    rpp = np.empty_like(r)
    rpp[1:-1] = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (h * h)
    rpp[2:-2] = (-r[4:] + 16.0 * r[3:-1] - 30.0 * r[2:-2]
                 + 16.0 * r[1:-3] - r[:-4]) / (12.0 * h * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        q[1:-1] = -0.5 * rpp[1:-1] / r[1:-1]
    q[density < NODE_THRESHOLD * density.max()] = np.nan
    return q
