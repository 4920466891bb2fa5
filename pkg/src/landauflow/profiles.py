"""Time profiles of the dimensionless drive b(t).

Everything downstream is defined in terms of a positive drive b(t) and, on
smooth profiles, its time derivative.  Step profiles carry their jump times
explicitly so the integrators can split the time axis into smooth segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProfileError",
    "FieldProfile",
    "ConstantProfile",
    "StepSequenceProfile",
    "TanhRampProfile",
    "TanhCycleProfile",
    "profile_from_dict",
]


class ProfileError(ValueError):
    """Invalid drive profile (non-positive values, malformed parameters)."""


class FieldProfile:
    """Base interface: value, derivative, jump metadata."""

    kind = "abstract"
    #: times at which b jumps discontinuously, in increasing order
    jump_times: tuple = ()

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    @property
    def smooth(self) -> bool:
        return not self.jump_times

    @property
    def initial_value(self) -> float:
        """b just before t = 0 (the trap the initial eigenstate belongs to)."""
        return float(self.value(0.0))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantProfile(FieldProfile):
    b0: float

    kind = "constant"
    jump_times = ()

    def __post_init__(self):
        if self.b0 <= 0.0:
            raise ProfileError(f"drive must stay positive, got b0={self.b0}")

    def value(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.b0)[()]

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b0": self.b0}


@dataclass(frozen=True)
class StepSequenceProfile(FieldProfile):
    """Piecewise-constant drive: b0 before the first switch, then each
    listed value from its switch time onward (right-continuous)."""

    b0: float
    steps: tuple

    kind = "step_sequence"

    def __post_init__(self):
        steps = tuple((float(t), float(b)) for t, b in self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise ProfileError("step_sequence needs at least one (time, value) switch")
        if self.b0 <= 0.0:
            raise ProfileError(f"drive must stay positive, got b0={self.b0}")
        times = [t for t, _ in steps]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ProfileError(f"switch times must be strictly increasing, got {times}")
        if any(b <= 0.0 for _, b in steps):
            raise ProfileError("drive must stay positive at every switch")

    @property
    def jump_times(self) -> tuple:
        return tuple(t for t, _ in self.steps)

    @property
    def initial_value(self) -> float:
        return self.b0

    def value(self, t):
        times = np.array([t0 for t0, _ in self.steps])
        values = np.array([self.b0] + [b for _, b in self.steps])
        idx = np.searchsorted(times, np.asarray(t, dtype=float), side="right")
        return values[idx][()]

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b0": self.b0, "steps": [list(s) for s in self.steps]}


@dataclass(frozen=True)
class TanhRampProfile(FieldProfile):
    """Smooth monotone ramp b0 -> b1 of width ``width`` centred at ``t_center``."""

    b0: float
    b1: float
    t_center: float
    width: float

    kind = "tanh_ramp"
    jump_times = ()

    def __post_init__(self):
        if min(self.b0, self.b1) <= 0.0:
            raise ProfileError(f"drive must stay positive, got b0={self.b0}, b1={self.b1}")
        if self.width <= 0.0:
            raise ProfileError(f"ramp width must be positive, got {self.width}")

    def value(self, t):
        u = (np.asarray(t, dtype=float) - self.t_center) / self.width
        return self.b0 + (self.b1 - self.b0) * 0.5 * (1.0 + np.tanh(u))

    def derivative(self, t):
        u = (np.asarray(t, dtype=float) - self.t_center) / self.width
        return (self.b1 - self.b0) * 0.5 / (self.width * np.cosh(u) ** 2)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b0": self.b0, "b1": self.b1,
                "t_center": self.t_center, "width": self.width}


@dataclass(frozen=True)
class TanhCycleProfile(FieldProfile):
    """Smooth up-ramp b0 -> b1 at ``t_up`` followed by a down-ramp back to b0
    at ``t_down``; ``width_down`` defaults to the up-ramp width."""

    b0: float
    b1: float
    t_up: float
    t_down: float
    width: float
    width_down: float = None

    kind = "tanh_cycle"
    jump_times = ()

    def __post_init__(self):
        if self.width_down is None:
            object.__setattr__(self, "width_down", self.width)
        if min(self.b0, self.b1) <= 0.0:
            raise ProfileError(f"drive must stay positive, got b0={self.b0}, b1={self.b1}")
        if self.width <= 0.0 or self.width_down <= 0.0:
            raise ProfileError("ramp widths must be positive")
        if self.t_down <= self.t_up:
            raise ProfileError(
                f"down-ramp must come after the up-ramp, got t_up={self.t_up}, t_down={self.t_down}"
            )

    def value(self, t):
        t = np.asarray(t, dtype=float)
        up = np.tanh((t - self.t_up) / self.width)
        down = np.tanh((t - self.t_down) / self.width_down)
        return self.b0 + (self.b1 - self.b0) * 0.5 * (up - down)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        dup = 1.0 / (self.width * np.cosh((t - self.t_up) / self.width) ** 2)
        ddown = 1.0 / (self.width_down * np.cosh((t - self.t_down) / self.width_down) ** 2)
        return (self.b1 - self.b0) * 0.5 * (dup - ddown)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b0": self.b0, "b1": self.b1, "t_up": self.t_up,
                "t_down": self.t_down, "width": self.width, "width_down": self.width_down}


_PROFILE_KINDS = {
    "constant": (ConstantProfile, {"b0"}, set()),
    "step_sequence": (StepSequenceProfile, {"b0", "steps"}, set()),
    "tanh_ramp": (TanhRampProfile, {"b0", "b1", "t_center", "width"}, set()),
    "tanh_cycle": (TanhCycleProfile, {"b0", "b1", "t_up", "t_down", "width"}, {"width_down"}),
}


def profile_from_dict(spec: dict) -> FieldProfile:
    """Build a profile from its dict form, rejecting unknown kinds and keys."""
    if not isinstance(spec, dict):
        raise ProfileError(f"profile spec must be an object, got {type(spec).__name__}")
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _PROFILE_KINDS:
        raise ProfileError(
            f"unknown profile kind {kind!r}; expected one of {sorted(_PROFILE_KINDS)}"
        )
    cls, required, optional = _PROFILE_KINDS[kind]
    missing = required - spec.keys()
    if missing:
        raise ProfileError(f"profile kind {kind!r} is missing keys {sorted(missing)}")
    unknown = spec.keys() - required - optional
    if unknown:
        raise ProfileError(f"profile kind {kind!r} got unknown keys {sorted(unknown)}")
    if "steps" in spec:
        steps = spec["steps"]
        if (not isinstance(steps, (list, tuple))
                or any(not isinstance(s, (list, tuple)) or len(s) != 2 for s in steps)):
            raise ProfileError("steps must be a list of [time, value] pairs")
        spec["steps"] = tuple(tuple(s) for s in steps)
    return cls(**spec)
