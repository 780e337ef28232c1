"""TS-CSK secret material: the time-scaling pair and the decision engines.

The decision engine is a state-dependent binary switch delta(x).  The
transmitter scales time by lambda(x, m) = lambda_m when delta = 0 and
lambda_{1-m} when delta = 1, so the bit cannot be read off the waveform
without reproducing delta.  Three variants:

  TwoRegion     delta = [v.x >= 0]
  EvenOdd       delta = parity of floor(v.x / h)   (floor toward -inf)
  EightSection  delta_z = [x3 >= x3_threshold]; the x2 axis is split at
                {-theta, 0, +theta} and the four regions return
                delta_z, 1-delta_z, delta_z, 1-delta_z in order
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dynamics import as_state


@dataclass(frozen=True)
class TimeScaling:
    """The (lambda_0, lambda_1) pair; both finite and positive, and distinct
    so the two bit values remain distinguishable."""

    lambda0: float = 1.0
    lambda1: float = 1.3

    def __post_init__(self):
        for v in (self.lambda0, self.lambda1):
            if not (0.0 < v < math.inf):
                raise ValueError(f"lambda values must be in (0, inf), got {v}")

    @property
    def degenerate(self) -> bool:
        return self.lambda0 == self.lambda1


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError("selection vector must have shape (3,)")
    n = float(np.linalg.norm(v))
    if not np.isclose(n, 1.0, rtol=0.0, atol=1e-9):
        raise ValueError(f"selection vector must be unit-norm, |v| = {n}")
    return v


@dataclass(frozen=True)
class TwoRegion:
    v: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(_unit(self.v)))

    def kernel_code(self):
        return 0, self.v[0], self.v[1], self.v[2], 0.0

    def __call__(self, s) -> int:
        return delta_two_region(s, self.v)


@dataclass(frozen=True)
class EvenOdd:
    v: tuple = (1.0, 0.0, 0.0)
    h: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(_unit(self.v)))
        if not (self.h > 0):
            raise ValueError("lattice pitch h must be > 0")

    def kernel_code(self):
        return 1, self.v[0], self.v[1], self.v[2], self.h

    def __call__(self, s) -> int:
        return delta_even_odd(s, self.v, self.h)


@dataclass(frozen=True)
class EightSection:
    """theta splits the x2 axis; x3_threshold drives the inner switch.
    Defaults sit at roughly the canonical attractor's x2 and x3 RMS so all
    four regions are visited (the foci-based thresholds of the eight-section
    construction fall outside this attractor)."""

    theta: float = 0.19
    x3_threshold: float = 1.77

    def __post_init__(self):
        if not (self.theta > 0):
            raise ValueError("theta must be > 0")

    def kernel_code(self):
        return 2, self.theta, self.x3_threshold, 0.0, 0.0

    def __call__(self, s) -> int:
        return delta_eight_section(s, self)


DecisionEngine = Union[TwoRegion, EvenOdd, EightSection]


def delta_two_region(s, v) -> int:
    """0 on v.x < 0, 1 on v.x >= 0 (the boundary maps to 1)."""
    s = as_state(s)
    return 0 if float(np.dot(v, s)) < 0.0 else 1


def delta_even_odd(s, v, h: float) -> int:
    """Parity of floor(v.x / h), floor toward -inf, so every lattice cell of
    width h alternates deterministically on both sides of zero."""
    s = as_state(s)
    return int(math.floor(float(np.dot(v, s)) / h)) & 1


def delta_eight_section(s, e: EightSection) -> int:
    s = as_state(s)
    dz = 1 if s[2] >= e.x3_threshold else 0
    x2 = s[1]
    if x2 < -e.theta:
        return dz
    elif x2 < 0.0:
        return 1 - dz
    elif x2 < e.theta:
        return dz
    return 1 - dz


def lambda_select(delta: int, m_bit: int, ts: TimeScaling) -> float:
    """lambda_m when delta = 0, lambda_{1-m} when delta = 1."""
    if delta not in (0, 1) or m_bit not in (0, 1):
        raise ValueError("delta and m_bit must be 0 or 1")
    idx = m_bit if delta == 0 else 1 - m_bit
    return ts.lambda0 if idx == 0 else ts.lambda1


def calibrate_eight_section(trajectory_states: np.ndarray) -> EightSection:
    """Engine thresholds from an unmodulated calibration run: theta at half
    the x2 RMS, x3 threshold at the x3 RMS."""
    st = np.asarray(trajectory_states)
    return EightSection(
        theta=float(np.sqrt(np.mean(st[:, 1] ** 2)) / 2.0),
        x3_threshold=float(np.sqrt(np.mean(st[:, 2] ** 2))),
    )
