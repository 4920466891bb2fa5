import json

import numpy as np
import pytest

from landauflow.madelung import integrate_beta
from landauflow.profiles import StepSequenceProfile, TanhRampProfile


@pytest.fixture(scope="session")
def ramp_profile():
    """Moderately fast smooth ramp 1 -> 2 used across the suite."""
    return TanhRampProfile(b0=1.0, b1=2.0, t_center=8.0, width=2.0)


@pytest.fixture(scope="session")
def ramp_trajectory(ramp_profile):
    return integrate_beta(ramp_profile, 20.0, tol=1e-12, sample_dt=0.01)


@pytest.fixture(scope="session")
def step_profile():
    return StepSequenceProfile(b0=1.0, steps=((0.0, 2.0),))


@pytest.fixture(scope="session")
def step_trajectory(step_profile):
    t_end = 10.0 * np.pi / 2.0
    return integrate_beta(step_profile, t_end, tol=1e-11, sample_dt=t_end / 4096)


def make_config(**overrides):
    """Minimal valid scenario config as a JSON string."""
    base = {
        "name": "test",
        "n0": 0,
        "profile": {"kind": "constant", "b0": 1.0},
        "t_end": 1.0,
    }
    base.update(overrides)
    return json.dumps(base)
