"""Chua oscillator in dimensionless form: integration and chaos diagnostics.

The state is a plain float64 array ``(x1, x2, x3)``.  The vector field is

    x1' = sigma * (x2 - x1 - f(x1))
    x2' = x1 - x2 + x3
    x3' = -beta * x2

with the standard piecewise-linear diode f.  ``ChuaParams.time_scale``
multiplies the whole field; it implements coordinated carrier retuning as a
pure time rescaling (attractor geometry unchanged, frequencies scaled).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._kernels import (
    DIVERGENCE_LIMIT,
    rk4_chua,
    rk4_tscsk_tx,
)

DEFAULT_DT = 1.0e-3
DEFAULT_TRANSIENT = 50.0   # settle time discarded before attractor statistics
LYAP_RENORM_INTERVAL = 1.0
LYAP_SEPARATION = 1.0e-8


class DivergenceError(RuntimeError):
    """A state component exceeded the divergence guard (non-chaotic blow-up)."""

    def __init__(self, step: int, t: float):
        self.step = step
        self.t = t
        super().__init__(f"trajectory diverged beyond {DIVERGENCE_LIMIT:g} at step {step} (t={t:g})")


class ScalingBoundError(ValueError):
    """A time-scaling function returned a value outside (0, inf)."""


@dataclass(frozen=True)
class ChuaParams:
    """Dimensionless oscillator coefficients plus diode slopes.

    The canonical double-scroll point is ``CANONICAL``; its largest Lyapunov
    exponent is positive (checked in the test suite).
    """

    sigma: float = 15.6
    beta: float = 28.0
    m0: float = -1.143
    m1: float = -0.714
    b: float = 1.0
    time_scale: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not (self.beta > 0):
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not (self.b > 0):
            raise ValueError(f"b must be > 0, got {self.b}")
        if not (self.time_scale > 0):
            raise ValueError(f"time_scale must be > 0, got {self.time_scale}")
        for name in ("sigma", "beta", "m0", "m1", "b", "time_scale"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def scaled(self, factor: float) -> "ChuaParams":
        return replace(self, sigma=self.sigma * factor, beta=self.beta * factor)


CANONICAL = ChuaParams()


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled run: ``states[k]`` at tau = t0 + k*dt.

    ``scaled_time`` holds the physical time per sample when the run was
    time-scaled; it is strictly increasing whenever present.
    """

    t0: float
    dt: float
    states: np.ndarray
    scaled_time: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be > 0")
        if self.states.ndim != 2 or self.states.shape[1] != 3 or self.states.shape[0] == 0:
            raise ValueError("states must be a non-empty (n, 3) array")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states must be finite")
        if self.scaled_time is not None:
            if self.scaled_time.shape[0] != self.states.shape[0]:
                raise ValueError("scaled_time length must match states")
            if not np.all(np.diff(self.scaled_time) > 0):
                raise ValueError("scaled_time must be strictly increasing")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.states.shape[0])

    @property
    def x1(self) -> np.ndarray:
        return self.states[:, 0]

    def after(self, transient: float) -> np.ndarray:
        """States sampled at t >= t0 + transient."""
        k = int(np.ceil(transient / self.dt))
        return self.states[k:]


def as_state(s: Sequence[float]) -> np.ndarray:
    a = np.asarray(s, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"state must have shape (3,), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("state must be finite")
    return a


def nonlinearity(x, p: ChuaParams):
    """Piecewise-linear diode: slope m0 inside |x| < b, m1 outside; odd."""
    return p.m1 * x + 0.5 * (p.m0 - p.m1) * (np.abs(x + p.b) - np.abs(x - p.b))


def chua_deriv(s, p: ChuaParams) -> np.ndarray:
    """Vector field at one state (or at each row of an (n, 3) array)."""
    s = np.asarray(s, dtype=np.float64)
    x1, x2, x3 = (s[..., 0], s[..., 1], s[..., 2])
    d = np.stack(
        [
            p.sigma * (x2 - x1 - nonlinearity(x1, p)),
            x1 - x2 + x3,
            -p.beta * x2,
        ],
        axis=-1,
    )
    return p.time_scale * d


def equilibria(p: ChuaParams) -> list[np.ndarray]:
    """Fixed points: the origin, plus (+-x*, 0, -+x*) when the outer-segment
    solution x* = (m1 - m0) b / (1 + m1) is consistent (|x*| > b)."""
    if p.m1 == -1.0:
        raise ValueError("degenerate outer slope: 1 + m1 = 0")
    pts = [np.zeros(3)]
    xs = (p.m1 - p.m0) * p.b / (1.0 + p.m1)
    if abs(xs) > p.b:
        pts.append(np.array([xs, 0.0, -xs]))
        pts.append(np.array([-xs, 0.0, xs]))
    return pts


def jacobian(s, p: ChuaParams) -> np.ndarray:
    """Jacobian of the field; rejects the diode breakpoints where f' jumps."""
    s = as_state(s)
    if abs(abs(s[0]) - p.b) == 0.0:
        raise ValueError(f"jacobian undefined at breakpoint |x1| = b = {p.b}; perturb the state")
    fp = p.m0 if abs(s[0]) < p.b else p.m1
    j = np.array(
        [
            [-p.sigma * (1.0 + fp), p.sigma, 0.0],
            [1.0, -1.0, 1.0],
            [0.0, -p.beta, 0.0],
        ]
    )
    return p.time_scale * j


def max_real_eig(m: np.ndarray) -> float:
    """Largest real part over the eigenvalues of a 3x3 matrix, via the
    characteristic cubic (coefficients formed analytically, roots from the
    companion matrix, residual-checked)."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise ValueError("need a finite 3x3 matrix")
    tr = np.trace(m)
    # sum of principal 2x2 minors
    m2 = (
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    det = np.linalg.det(m)
    coeffs = np.array([1.0, -tr, m2, -det])
    roots = np.roots(coeffs)
    scale = max(1.0, np.max(np.abs(roots)) ** 3)
    for r in roots:
        if abs(np.polyval(coeffs, r)) > 1.0e-9 * scale:
            raise ArithmeticError("characteristic root residual above tolerance")
    return float(np.max(roots.real))


def integrate(p: ChuaParams, s0, dt: float, n: int) -> Trajectory:
    """Fixed-step RK4, n steps, n+1 samples.  Deterministic: identical inputs
    give bit-identical trajectories."""
    if not (dt > 0):
        raise ValueError("dt must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    s0 = as_state(s0)
    out = np.empty((n + 1, 3))
    status = rk4_chua(p.sigma, p.beta, p.m0, p.m1, p.b, p.time_scale,
                      s0[0], s0[1], s0[2], dt, n, out)
    if status >= 0:
        raise DivergenceError(status, status * dt)
    return Trajectory(t0=0.0, dt=dt, states=out)


LambdaFn = Union[float, Callable[[np.ndarray], float]]


def integrate_scaled(p: ChuaParams, s0, lambda_fn: LambdaFn, dt_tau: float, n: int) -> Trajectory:
    """RK4 in tau for dx/dtau = lambda(x) * F(x); physical time accumulates
    through dt/dtau = lambda(x) with the same quadrature.

    ``lambda_fn`` may be a positive constant (fast path) or a callable
    state -> positive float (reference path, evaluated at every RK4 stage).
    """
    if not (dt_tau > 0):
        raise ValueError("dt_tau must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    s0 = as_state(s0)

    if not callable(lambda_fn):
        lam = float(lambda_fn)
        if not (0.0 < lam < np.inf):
            raise ScalingBoundError(f"lambda must be in (0, inf), got {lam}")
        out = np.empty((n + 1, 3))
        tout = np.empty(n + 1)
        bits = np.zeros(1, dtype=np.int64)
        status = rk4_tscsk_tx(p.sigma, p.beta, p.m0, p.m1, p.b, p.time_scale,
                              lam, lam, 0, 1.0, 0.0, 0.0, 0.0,
                              bits, np.inf, s0[0], s0[1], s0[2], dt_tau, n, out, tout)
        if status >= 0:
            raise DivergenceError(status, tout[status])
        return Trajectory(t0=0.0, dt=dt_tau, states=out, scaled_time=tout)

    def g(state, t):
        lam = float(lambda_fn(state[:3]))
        if not (0.0 < lam < np.inf):
            raise ScalingBoundError(f"lambda_fn returned {lam}")
        d = chua_deriv(state[:3], p)
        return np.append(lam * d, lam)

    aug = np.append(s0, 0.0)
    out = np.empty((n + 1, 3))
    tout = np.empty(n + 1)
    out[0] = aug[:3]
    tout[0] = 0.0
    for k in range(n):
        k1 = g(aug, 0.0)
        k2 = g(aug + 0.5 * dt_tau * k1, 0.0)
        k3 = g(aug + 0.5 * dt_tau * k2, 0.0)
        k4 = g(aug + dt_tau * k3, 0.0)
        aug = aug + dt_tau * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[k + 1] = aug[:3]
        tout[k + 1] = aug[3]
        if np.any(np.abs(aug[:3]) > DIVERGENCE_LIMIT):
            raise DivergenceError(k, aug[3])
    return Trajectory(t0=0.0, dt=dt_tau, states=out, scaled_time=tout)


def lyapunov_max(p: ChuaParams, horizon: float = 300.0, dt: float = DEFAULT_DT,
                 s0=(0.1, 0.0, 0.0), transient: float = DEFAULT_TRANSIENT,
                 renorm: float = LYAP_RENORM_INTERVAL, d0: float = LYAP_SEPARATION) -> float:
    """Largest Lyapunov exponent by two-trajectory Benettin renormalization.

    A companion state offset by d0 is re-integrated alongside the reference;
    the separation is renormalized back to d0 every ``renorm`` time units and
    the mean log stretching rate is returned.  Deterministic.
    """
    s0 = as_state(s0)
    ref = integrate(p, s0, dt, int(round(transient / dt))).states[-1]
    comp = ref + d0 / np.sqrt(3.0)
    steps = int(round(renorm / dt))
    rounds = int(round(horizon / renorm))
    if rounds < 1:
        raise ValueError("horizon must cover at least one renormalization interval")
    total = 0.0
    for _ in range(rounds):
        ref = integrate(p, ref, dt, steps).states[-1]
        comp = integrate(p, comp, dt, steps).states[-1]
        sep = float(np.linalg.norm(comp - ref))
        total += np.log(sep / d0)
        comp = ref + (comp - ref) * (d0 / sep)
    return total / (rounds * renorm)


def dominant_frequency(signal: np.ndarray, dt: float) -> float:
    """Frequency (cycles per time unit) of the spectral magnitude peak.

    Mean is removed and a tapered-cosine window (Hann taper over half the
    span) applied before the DFT.  Returns 0 for constant signals.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1 or signal.shape[0] < 64:
        raise ValueError("need a 1-d signal of length >= 64")
    if not (dt > 0):
        raise ValueError("dt must be > 0")
    seg = signal - signal.mean()
    if np.max(np.abs(seg)) == 0.0:
        return 0.0
    n = seg.shape[0]
    # Tukey window, alpha = 0.5: flat middle, cosine taper on each quarter
    win = np.ones(n)
    edge = int(np.floor(0.25 * (n - 1))) + 1
    k = np.arange(edge)
    ramp = 0.5 * (1.0 + np.cos(np.pi * (2.0 * k / (0.5 * (n - 1)) - 1.0)))
    win[:edge] = ramp
    win[-edge:] = ramp[::-1]
    mag = np.abs(np.fft.rfft(seg * win))
    freqs = np.fft.rfftfreq(n, dt)
    mag[0] = 0.0
    return float(freqs[int(np.argmax(mag))])
