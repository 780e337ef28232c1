"""Memristor device model and the memristor-keyed oscillator.

Linear-drift memristance with a polynomial window:

    M(w)  = r_on * w/d + r_off * (1 - w/d)
    dw/dt = uv * r_on / d^2 * i * (1 - (2 w/d - 1)^(2p)),  w clamped to [0, d]

Two keyed elements lock the oscillator: element 0 scales sigma and element 1
scales beta, each by (nominal / memristance) with the nominal taken as the
element's as-fabricated r_init.  A correct key reproduces the plain oscillator
exactly; a wrong key shifts the coefficients and breaks synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernels import rk4_memristor
from .dynamics import ChuaParams, DivergenceError, Trajectory, as_state

# Values from the memristor-locked oscillator's reference device
# (engineering suffixes: 0.8K/1.65K ohm, 70 nm, 10 fm^2/(V s)).
FIG_DEVICE = dict(r_on=0.8e3, r_off=1.65e3, r_init=1.65e3, d=70e-9, uv=10e-15, p=1)


@dataclass(frozen=True)
class MemristorParams:
    r_on: float = 0.8e3
    r_off: float = 1.65e3
    r_init: float = 1.65e3
    d: float = 70e-9
    uv: float = 10e-15
    p: int = 1

    def __post_init__(self):
        if not (0 < self.r_on < self.r_off):
            raise ValueError("need 0 < r_on < r_off")
        if not (self.r_on <= self.r_init <= self.r_off):
            raise ValueError("r_init must lie in [r_on, r_off]")
        if not (self.d > 0 and self.uv > 0):
            raise ValueError("d and uv must be > 0")
        if self.p < 1:
            raise ValueError("window exponent p must be >= 1")


@dataclass(frozen=True)
class MemristorState:
    w: float

    def clamped(self, mp: MemristorParams) -> "MemristorState":
        return MemristorState(min(max(self.w, 0.0), mp.d))


@dataclass(frozen=True)
class MemristorKey:
    """Target memristance per keyed element plus the accepted relative
    programming tolerance."""

    targets: tuple
    tolerance: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(float(t) for t in self.targets))
        if not (0.0 < self.tolerance < 1.0):
            raise ValueError("tolerance must be in (0, 1)")


def memristance(st: MemristorState, mp: MemristorParams) -> float:
    """Resistance at internal state w; r_off at w=0, r_on at w=d."""
    if not (0.0 <= st.w <= mp.d):
        raise ValueError(f"w must lie in [0, {mp.d}]")
    frac = st.w / mp.d
    return mp.r_on * frac + mp.r_off * (1.0 - frac)


def memristor_step(st: MemristorState, i: float, dt: float, mp: MemristorParams) -> MemristorState:
    """Forward-Euler drift update; the window zeroes drift at both bounds."""
    if not (dt > 0):
        raise ValueError("dt must be > 0")
    window = 1.0 - (2.0 * st.w / mp.d - 1.0) ** (2 * mp.p)
    w = st.w + dt * mp.uv * mp.r_on / mp.d**2 * i * window
    return MemristorState(min(max(w, 0.0), mp.d))


def apply_key(key: MemristorKey, mps: Sequence[MemristorParams]) -> list[MemristorState]:
    """Internal states whose memristance reproduces each key target."""
    if len(key.targets) != len(mps):
        raise ValueError("one target per element required")
    states = []
    for t, mp in zip(key.targets, mps):
        if not (mp.r_on <= t <= mp.r_off):
            raise ValueError(f"target {t} outside [{mp.r_on}, {mp.r_off}]")
        w = mp.d * (mp.r_off - t) / (mp.r_off - mp.r_on)
        states.append(MemristorState(w))
    return states


def key_space_size(mps: Sequence[MemristorParams], quantization: float) -> int:
    """Distinguishable key count at a given memristance step (documentation
    metric)."""
    if not (quantization > 0):
        raise ValueError("quantization must be > 0")
    total = 1
    for mp in mps:
        total *= int((mp.r_off - mp.r_on) / quantization) + 1
    return total


def nominal_key(mps: Sequence[MemristorParams], tolerance: float = 0.05) -> MemristorKey:
    """The design key: every element at its as-fabricated r_init."""
    return MemristorKey(targets=tuple(mp.r_init for mp in mps), tolerance=tolerance)


def memristor_chua_deriv(s, mstates: Sequence[MemristorState],
                         mps: Sequence[MemristorParams], base: ChuaParams):
    """Vector field with memristor-scaled coefficients.

    Returns (derivative, element current proxies).  The sigma element sees
    |x2 - x1 - f(x1)|, the beta element |x2|; the proxies drive the optional
    state drift in integrate_memristor.
    """
    p = effective_params(mstates, mps, base)
    s = as_state(s)
    from .dynamics import chua_deriv, nonlinearity

    currents = [
        abs(s[1] - s[0] - nonlinearity(s[0], base)),
        abs(s[1]),
    ]
    return chua_deriv(s, p), currents


def effective_params(mstates: Sequence[MemristorState],
                     mps: Sequence[MemristorParams], base: ChuaParams) -> ChuaParams:
    """sigma and beta scaled by (r_init / memristance) of elements 0 and 1."""
    if len(mstates) != 2 or len(mps) != 2:
        raise ValueError("keyed oscillator uses exactly two elements (sigma, beta)")
    m1 = memristance(mstates[0], mps[0])
    m2 = memristance(mstates[1], mps[1])
    return ChuaParams(
        sigma=base.sigma * (mps[0].r_init / m1),
        beta=base.beta * (mps[1].r_init / m2),
        m0=base.m0, m1=base.m1, b=base.b, time_scale=base.time_scale,
    )


def integrate_memristor(base: ChuaParams, mstates: Sequence[MemristorState],
                        mps: Sequence[MemristorParams], s0, dt: float, n: int,
                        evolve: bool = False):
    """RK4 trajectory of the keyed oscillator.

    Keys are frozen by default (stable during communication).  With
    ``evolve=True`` the internal states follow the drift law forced by the
    element current proxies; the per-sample states are returned alongside.
    """
    if len(mstates) != 2 or len(mps) != 2:
        raise ValueError("keyed oscillator uses exactly two elements (sigma, beta)")
    s0 = as_state(s0)
    out = np.empty((n + 1, 3))
    wout = np.empty((n + 1, 2))
    status = rk4_memristor(
        base.sigma, base.beta, base.m0, base.m1, base.b,
        mps[0].r_init, mps[1].r_init,
        mstates[0].w, mps[0].d, mps[0].r_on, mps[0].r_off, mps[0].uv, mps[0].p,
        mstates[1].w, mps[1].d, mps[1].r_on, mps[1].r_off, mps[1].uv, mps[1].p,
        1 if evolve else 0, s0[0], s0[1], s0[2], dt, n, out, wout,
    )
    if status >= 0:
        raise DivergenceError(status, status * dt)
    return Trajectory(t0=0.0, dt=dt, states=out), wout


def write_key_file(path, key: MemristorKey) -> None:
    """Plain-text key: one ``element_index, target_memristance`` line per
    element."""
    lines = [f"{i}, {t!r}\n" for i, t in enumerate(key.targets)]
    with open(path, "w") as fh:
        fh.writelines(lines)


def read_key_file(path, tolerance: float = 0.05) -> MemristorKey:
    targets = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'element_index, target_memristance'")
            try:
                idx = int(parts[0])
                val = float(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if idx in targets:
                raise ValueError(f"{path}:{lineno}: duplicate element index {idx}")
            targets[idx] = val
    if not targets or sorted(targets) != list(range(len(targets))):
        raise ValueError(f"{path}: element indices must be 0..n-1 without gaps")
    return MemristorKey(targets=tuple(targets[i] for i in range(len(targets))),
                        tolerance=tolerance)
