"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with ``pytest tests/test_acceptance.py -s`` to see them).

The tolerances are fixed here and nowhere else; every expected number is
either exact arithmetic, a closed form evaluated independently, or a
cross-engine comparison.
"""

import json
import math
import time

import numpy as np
import pytest

from landauflow.basis import (
    Grid,
    WaveField,
    hermite_gauss,
    hermite_gauss_table,
    project_onto_basis,
)
from landauflow.energetics import (
    energy_closed_form,
    energy_series,
    pseudo_energy,
    step_cycle_delta_e,
)
from landauflow.levels import (
    integrate_level_odes,
    short_time_consistency,
    transition_amplitude_series,
)
from landauflow.madelung import (
    MadelungState,
    PermanentRegime,
    exact_wavefunction,
    integrate_beta,
)
from landauflow.oracle import DEFAULT_TIME_STEP, observables, propagate
from landauflow.profiles import StepSequenceProfile, TanhRampProfile
from landauflow.runner import list_presets, parse_config, preset_config


def report(num, label, failures, t0):
    status = "PASS" if not failures else "FAIL"
    print(f"[criterion {num:2d}] {status} ({time.time() - t0:6.1f}s) {label}")
    assert not failures, f"criterion {num}: " + "; ".join(failures)


@pytest.fixture(scope="module")
def ramp():
    """The cross-validation ramp: 1 -> 2, width 2, centred at t = 8."""
    return TanhRampProfile(b0=1.0, b1=2.0, t_center=8.0, width=2.0)


@pytest.fixture(scope="module")
def ramp_run(ramp):
    traj = integrate_beta(ramp, 30.0, tol=1e-12, sample_dt=0.002)
    return ramp, traj


def test_criterion_01_basis_fidelity():
    t0 = time.time()
    failures = []
    for gamma in (0.5, 1.0, 4.0):
        grid = Grid.for_modes(20, gamma)
        table = hermite_gauss_table(20, gamma, grid.points)
        gram = (table * grid.quadrature_weights) @ table.T
        ortho_err = float(np.max(np.abs(gram - np.eye(21))))
        if ortho_err > 1e-10:
            failures.append(f"orthonormality {ortho_err:.2e} > 1e-10 at gamma={gamma}")
        moments = (table * (grid.points**2 * grid.quadrature_weights)) @ table.T
        moment_err = float(np.max(np.abs(np.diag(moments)
                                         - (np.arange(21) + 0.5) / gamma)))
        if moment_err > 1e-9:
            failures.append(f"<y^2> identity {moment_err:.2e} > 1e-9 at gamma={gamma}")
    report(1, "mode orthonormality 1e-10 and <y^2> identity 1e-9 for n,m <= 20",
           failures, t0)


def test_criterion_02_step_closed_form():
    t0 = time.time()
    failures = []
    b1 = 2.0
    t_end = 10.0 * math.pi / b1
    prof = StepSequenceProfile(b0=1.0, steps=((0.0, b1),))
    traj = integrate_beta(prof, t_end, tol=1e-11, sample_dt=t_end / 4096)
    regime = PermanentRegime(b1=b1, epsilon=0.6, phi=0.0)
    beta_err = float(np.max(np.abs(traj.beta - regime.beta(traj.t))))
    if beta_err > 1e-8:
        failures.append(f"|beta_num - beta_closed| = {beta_err:.2e} > 1e-8")
    # extrema of Gamma, refined in windows around the predicted times
    gamma_min, gamma_max = np.inf, -np.inf
    k = 1
    while k * math.pi / (2.0 * b1) < t_end:
        tc = k * math.pi / (2.0 * b1)
        window = np.linspace(max(0.0, tc - 2e-3), min(t_end, tc + 2e-3), 41)
        gammas = [traj.state_at(t).gamma for t in window]
        gamma_min = min(gamma_min, min(gammas))
        gamma_max = max(gamma_max, max(gammas))
        k += 1
    if abs(gamma_min - 1.0) > 1e-6:
        failures.append(f"Gamma min {gamma_min!r} != 1 within 1e-6")
    if abs(gamma_max - 4.0) > 1e-6:
        failures.append(f"Gamma max {gamma_max!r} != 4 within 1e-6")
    report(2, "step 1->2 matches closed form (eps=0.6, phi=0), Gamma in [1, 4]",
           failures, t0)


def test_criterion_03_sloshing_frequency(ramp_run):
    t0 = time.time()
    failures = []
    _, traj = ramp_run
    tail = traj.t >= 18.0   # drive settled to b1 = 2 to a few 1e-5
    t, beta = traj.t[tail], traj.beta[tail]
    sign = np.sign(beta)
    idx = np.flatnonzero((sign[:-1] < 0) & (sign[1:] >= 0))
    crossings = t[idx] - beta[idx] * (t[idx + 1] - t[idx]) / (beta[idx + 1] - beta[idx])
    period = float(np.mean(np.diff(crossings)))
    expected = math.pi / 2.0
    rel = abs(period - expected) / expected
    if rel > 1e-3:
        failures.append(f"period {period} vs pi/b1 {expected}: rel err {rel:.2e} > 0.1%")
    report(3, "post-ramp strain-rate period equals pi/b1 within 0.1%", failures, t0)


def test_criterion_04_exact_vs_oracle(ramp_run):
    t0 = time.time()
    failures = []
    ramp, traj = ramp_run
    t_end = 20.0
    state_end = traj.state_at(t_end)
    for n0 in (0, 1, 2, 3):
        cfg = parse_config(json.dumps({
            "name": "xval", "n0": n0, "t_end": t_end,
            "profile": ramp.to_dict(), "engines": ["madelung", "oracle"]}))
        base = cfg.resolved_grid()
        errs = []
        for refine in (1, 2):
            grid = Grid(half_width=base.half_width, count=(base.count - 1) * refine + 1)
            psi0 = hermite_gauss(n0, ramp.initial_value, grid.points).astype(complex)
            res = propagate(WaveField(grid, psi0), ramp, t_end,
                            dt=DEFAULT_TIME_STEP / refine, sample_times=[0.0, t_end])
            exact = exact_wavefunction(n0, state_end, grid)
            errs.append(float(np.max(np.abs(res.final.density() - exact.density()))))
        if errs[0] > 1e-4:
            failures.append(f"n0={n0}: density error {errs[0]:.2e} > 1e-4 at defaults")
        ratio = errs[0] / errs[1]
        if not 3.5 <= ratio <= 4.5:
            failures.append(f"n0={n0}: refinement ratio {ratio:.2f} outside [3.5, 4.5]")
    report(4, "exact vs propagated density <= 1e-4, refining 4x under (h, dt)/2",
           failures, t0)


def test_criterion_05_energy_identities(ramp_run):
    t0 = time.time()
    failures = []
    ramp, traj = ramp_run
    n0 = 2
    grid = Grid(half_width=15.0, count=48001)
    for t in (0.0, 4.0, 8.0, 12.0, 16.0, 20.0):
        state = traj.state_at(t)
        closed = energy_closed_form(n0, state)
        obs = observables(exact_wavefunction(n0, state, grid), state.b)
        for name, a, b in (("E_kx", obs.e_kx, closed.e_kx),
                           ("E_ky", obs.e_ky, closed.e_ky),
                           ("E_Q", obs.e_q, closed.e_q),
                           ("E", obs.energy, closed.total)):
            if abs(a - b) > 1e-6:
                failures.append(f"{name} at t={t}: |{a:.9f} - {b:.9f}| > 1e-6")
    start = energy_closed_form(n0, traj.state_at(0.0))
    if abs(start.total - (n0 + 0.5) * traj.b0) > 1e-12:
        failures.append("E(0) != (n0+1/2) b0")
    if abs(start.e_kx - start.e_q) > 1e-12:
        failures.append("E_kx(0) != E_Q(0)")
    end_state = traj.state_at(20.0)
    audit = abs((energy_closed_form(n0, end_state).total - start.total)
                - (n0 + 0.5) * end_state.work)
    if audit > 1e-8:
        failures.append(f"cumulative injected power audit {audit:.2e} > 1e-8")
    report(5, "closed-form energy partition matches quadrature to 1e-6; "
              "work integral audits to 1e-8", failures, t0)


def test_criterion_06_excess_nonnegative_on_presets():
    t0 = time.time()
    failures = []
    for name in list_presets():
        cfg = parse_config(json.dumps(preset_config(name)))
        traj = integrate_beta(cfg.profile, cfg.t_end, tol=cfg.tol,
                              sample_times=cfg.sample_times)
        *_, excess = energy_series(cfg.n0, traj)
        if float(excess.min()) < -1e-12:
            failures.append(f"{name}: excess min {excess.min():.2e} < -1e-12")
        if cfg.profile.smooth and abs(float(excess[0])) > 1e-12:
            failures.append(f"{name}: excess(0) = {excess[0]:.2e} != 0")
    report(6, "excess energy >= -1e-12 on every preset; zero at t=0 when smooth",
           failures, t0)


def test_criterion_07_hysteresis():
    t0 = time.time()
    failures = []
    # smooth cycle keeps positive excess
    fig4 = parse_config(json.dumps(preset_config("fig4_cycle")))
    traj4 = integrate_beta(fig4.profile, fig4.t_end, tol=fig4.tol,
                           sample_times=fig4.sample_times)
    *_, excess4 = energy_series(fig4.n0, traj4)
    if not float(excess4[-1]) > 0.0:
        failures.append(f"fig4 cycle final excess {excess4[-1]:.2e} not > 0")
    # marginal stepped cycle cancels
    fig5 = parse_config(json.dumps(preset_config("fig5_marginal_cycle")))
    traj5 = integrate_beta(fig5.profile, fig5.t_end, tol=fig5.tol,
                           sample_times=fig5.sample_times)
    *_, excess5 = energy_series(fig5.n0, traj5)
    if float(excess5[-1]) > 1e-8:
        failures.append(f"fig5 final excess {excess5[-1]:.2e} > 1e-8")
    if abs(float(traj5.beta[-1])) > 1e-8:
        failures.append(f"fig5 final |beta| {abs(traj5.beta[-1]):.2e} > 1e-8")
    # analytic step-cycle energy against the grid propagator
    b0, b1 = 1.0, 2.0
    tau = math.pi / 4.0
    analytic = step_cycle_delta_e(0, b0, b1, tau).delta_e
    prof = StepSequenceProfile(b0=b0, steps=((0.0, b1), (tau, b0)))
    grid = Grid(half_width=15.0, count=32001)
    psi0 = WaveField(grid, hermite_gauss(0, b0, grid.points).astype(complex))
    e_start = observables(psi0, b0).energy
    res = propagate(psi0, prof, tau + 0.01, dt=2.5e-4, sample_times=[0.0, tau + 0.01])
    measured = observables(res.final, b0).energy - e_start
    if abs(measured - analytic) > 1e-6:
        failures.append(f"step-cycle dE: |{measured:.9f} - {analytic:.9f}| > 1e-6")
    report(7, "cycle hysteresis: fig4 > 0, marginal fig5 <= 1e-8, analytic dE "
              "matches propagation to 1e-6", failures, t0)


def test_criterion_08_level_dynamics():
    t0 = time.time()
    failures = []
    cfg = parse_config(json.dumps(preset_config("adiabatic_ramp")))
    prof, n0 = cfg.profile, cfg.n0
    check_times = [0.0, 15.0, 30.0, 45.0, 60.0]
    ltraj = integrate_level_odes(prof, n0, cfg.t_end, n_max=n0 + 40, tol=1e-12,
                                 sample_times=check_times)
    if ltraj.parity_violation > 1e-12:
        failures.append(f"odd-parity coefficients reach {ltraj.parity_violation:.2e}")
    if ltraj.norm_drift > 1e-8:
        failures.append(f"norm drift {ltraj.norm_drift:.2e} > 1e-8")
    grid = Grid(half_width=15.0, count=3073)
    psi0 = hermite_gauss(n0, prof.initial_value, grid.points).astype(complex)
    res = propagate(WaveField(grid, psi0), prof, cfg.t_end, dt=DEFAULT_TIME_STEP,
                    sample_times=[0.0, cfg.t_end], snapshot_times=check_times)
    worst = 0.0
    for i, t in enumerate(check_times):
        coeffs = project_onto_basis(res.snapshots[t], float(prof.value(t)), 12)
        worst = max(worst, float(np.max(np.abs(np.abs(coeffs)
                                               - np.abs(ltraj.phi[i, :13])))))
    if worst > 1e-5:
        failures.append(f"coefficient moduli differ from projections by {worst:.2e}")
    report(8, "interlevel system matches grid projections to 1e-5; parity exact; "
              "norm drift <= 1e-8", failures, t0)


def test_criterion_09_short_time_consistency():
    t0 = time.time()
    failures = []
    prof = TanhRampProfile(b0=1.0, b1=2.0, t_center=2.0, width=2.0)
    times = np.array([0.0, 1e-3, 1e-2])
    traj = integrate_beta(prof, 1e-2, tol=1e-12, sample_times=times)
    amps = transition_amplitude_series(prof, 1e-2, tol=1e-12, sample_times=times)
    rep = short_time_consistency(traj, amps)
    errs = rep.relative_errors()
    for key in ("amplitude_forward", "frequency_lag"):
        if errs[key][2] > 0.02:
            failures.append(f"{key} at t=1e-2: rel err {errs[key][2]:.4f} > 2%")
        if errs[key][1] > 0.002:
            failures.append(f"{key} at t=1e-3: rel err {errs[key][1]:.5f} > 0.2%")
    report(9, "transition amplitude and trap-frequency lag both equal "
              "b'(0)t/4b0 (2% at t=1e-2, 0.2% at t=1e-3)", failures, t0)


def test_criterion_10_pseudo_energy():
    t0 = time.time()
    failures = []
    b1 = 1.0
    grid = Grid(half_width=10.0, count=8193)
    rho_bar = hermite_gauss(0, b1, grid.points) ** 2

    def series(eps):
        regime = PermanentRegime(b1=b1, epsilon=eps, phi=0.0)
        ts = np.linspace(0.0, regime.period, 129)
        pe, excess = [], []
        for t in ts:
            g, be = float(regime.gamma(t)), float(regime.beta(t))
            rho = hermite_gauss(0, g, grid.points) ** 2
            pe.append(pseudo_energy(rho - rho_bar, be * grid.points, rho_bar, grid).value)
            state = MadelungState(t=t, b=b1, beta=be, beta_dot=g * g - be * be - b1 * b1,
                                  int_beta=0.0, int_gamma=0.0)
            excess.append(energy_closed_form(0, state).excess)
        return np.array(pe), np.array(excess)

    pe_a, exc_a = series(0.01)
    pe_b, exc_b = series(0.005)
    defect_a = float(pe_a.max() - pe_a.min())
    defect_b = float(pe_b.max() - pe_b.min())
    ratio = defect_a / defect_b
    if ratio < 3.0:
        failures.append(f"conservation-defect ratio {ratio:.2f} < 3 "
                        f"(defects {defect_a:.2e} vs {defect_b:.2e})")
    mismatch = float(np.max(np.abs(pe_b - exc_b) / exc_b))
    if mismatch > 0.05:
        failures.append(f"pseudo-energy vs excess at eps=0.005: {mismatch:.4f} > 5%")
    report(10, f"pseudo-energy conservation defect falls {ratio:.1f}x when eps "
               "halves; matches excess at small amplitude", failures, t0)
