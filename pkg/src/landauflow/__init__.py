"""Dynamics of trapped charged-particle eigenmodes under a time-dependent drive.

A library and CLI that evolves the eigenmodes of a magnetically trapped
charged particle when the trapping field varies in time, three independent
ways: the exact self-similar fluid solution, a truncated interlevel
coefficient system, and a norm-conserving grid propagator, together with the
energy bookkeeping that diagnoses the persistent sloshing left behind by a
field cycle.
"""

from .basis import (
    Grid,
    LandauMode,
    TailBoundError,
    WaveField,
    hermite_gauss,
    hermite_gauss_table,
    ladder_apply,
    landau_frequency,
    project_onto_basis,
    tail_radius,
)
from .profiles import (
    ConstantProfile,
    FieldProfile,
    ProfileError,
    StepSequenceProfile,
    TanhCycleProfile,
    TanhRampProfile,
    profile_from_dict,
)
from .madelung import (
    FluidFields,
    GammaCollapseError,
    MadelungState,
    MadelungTrajectory,
    PermanentRegime,
    bohm_potential,
    exact_wavefunction,
    fit_permanent_regime,
    fluid_fields,
    integrate_beta,
)
from .levels import (
    ConsistencyReport,
    LevelTrajectory,
    TransitionAmplitudeSeries,
    first_order_wavefunction,
    integrate_level_odes,
    short_time_consistency,
    transition_amplitude_series,
)
from .oracle import (
    BoundaryLeakError,
    Observables,
    OracleResult,
    observables,
    propagate,
)
from .energetics import (
    EnergyBreakdown,
    PseudoEnergyResult,
    StepCycleResult,
    bernoulli_eigenvalue,
    energy_closed_form,
    injected_power,
    pseudo_energy,
    step_cycle_delta_e,
)
from .runner import (
    ConfigError,
    ScenarioConfig,
    list_presets,
    parse_config,
    preset_config,
    run_scenario,
)

__version__ = "0.1.0"
