"""Small deterministic DSP helpers used by the demodulation chains."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._kernels import sosfilt_inplace


def moving_average(x: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average, edges handled by 'same' convolution."""
    if width < 1:
        raise ValueError("width must be >= 1")
    return np.convolve(np.asarray(x, dtype=np.float64), np.ones(width) / width, mode="same")


def median_smooth(x: np.ndarray, width: int) -> np.ndarray:
    """Centered running median; kills isolated spikes without moving edges.
    Width is forced odd; the signal is edge-padded by reflection."""
    if width < 1:
        raise ValueError("width must be >= 1")
    if width % 2 == 0:
        width += 1
    x = np.asarray(x, dtype=np.float64)
    half = width // 2
    padded = np.pad(x, half, mode="edge")
    return np.median(sliding_window_view(padded, width), axis=1)


def butter_sections(cutoff: float, fs: float, order: int = 6):
    """Butterworth low-pass as cascaded biquads (RBJ forms).  Order must be
    even; per-section Q follows the Butterworth pole angles."""
    if order < 2 or order % 2:
        raise ValueError("order must be a positive even number")
    if not (0.0 < cutoff < fs / 2.0):
        raise ValueError("cutoff must lie in (0, fs/2)")
    w0 = 2.0 * np.pi * cutoff / fs
    cw, sw = np.cos(w0), np.sin(w0)
    sections = []
    for k in range(order // 2):
        q = 1.0 / (2.0 * np.cos((2 * k + 1) * np.pi / (2 * order)))
        alpha = sw / (2.0 * q)
        a0 = 1.0 + alpha
        sections.append((
            (1.0 - cw) / 2.0 / a0,
            (1.0 - cw) / a0,
            (1.0 - cw) / 2.0 / a0,
            -2.0 * cw / a0,
            (1.0 - alpha) / a0,
        ))
    return sections


def lowpass_zerophase(x: np.ndarray, cutoff: float, fs: float, order: int = 6) -> np.ndarray:
    """Zero-phase Butterworth low-pass: forward pass then reversed pass
    through the biquad cascade.  Leak-free (no windowing), deterministic."""
    y = np.array(x, dtype=np.float64, copy=True)
    sections = butter_sections(cutoff, fs, order)
    for (b0, b1, b2, a1, a2) in sections:
        sosfilt_inplace(b0, b1, b2, a1, a2, y)
    y = y[::-1].copy()
    for (b0, b1, b2, a1, a2) in sections:
        sosfilt_inplace(b0, b1, b2, a1, a2, y)
    return y[::-1].copy()


def decimate(x: np.ndarray, factor: int) -> np.ndarray:
    """Anti-aliased decimation: moving average over the factor, then stride."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return np.asarray(x, dtype=np.float64).copy()
    return moving_average(x, factor)[::factor]


def bandlimited_noise(n: int, dt: float, f_lo: float, f_hi: float, power: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Gaussian noise confined to [f_lo, f_hi] by spectral masking and scaled
    to the requested mean-square power."""
    if not (0.0 <= f_lo < f_hi):
        raise ValueError("need 0 <= f_lo < f_hi")
    if power < 0:
        raise ValueError("power must be >= 0")
    white = rng.normal(0.0, 1.0, n)
    if power == 0.0:
        return np.zeros(n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, dt)
    spec[(freqs < f_lo) | (freqs > f_hi)] = 0.0
    shaped = np.fft.irfft(spec, n)
    ms = float(np.mean(shaped**2))
    if ms == 0.0:
        raise ValueError("band contains no spectral bins at this length/dt")
    return shaped * np.sqrt(power / ms)
