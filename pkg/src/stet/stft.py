"""Hop-1 discrete STFT with the window-centred phase convention.

The transform computed here is the Riemann sum

    V[k, n] = sum_m s[n + m] g[m] exp(-i w_k m dt) dt,

i.e. the continuous ``V(t, w) = int s(u) g(u - t) exp(-i w (u - t)) du``
sampled at ``t = t_n`` and ``w = w_k``. Derivatives in ``t`` and ``w`` are
obtained exactly from the derivative and time-weighted windows:

    dV/dt = -V[g'] + i w V[g],     dV/dw = -i V[t g].
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .signal import Signal
from .window import GaussianWindowSpec, sample_dwindow, sample_twindow, sample_window

KINDS = ("STFT", "SET", "TET", "STET", "STET2", "dSTFT_t", "dSTFT_w", "STFT_RS", "STFT_RT")

_FRAME_BLOCK = 512


@dataclass(frozen=True, eq=False)
class TFGrid:
    """Complex time-frequency matrix with physical axes.

    ``values`` has shape ``(n_freq, n_time)``; rows follow ``freq_axis_rad_s``
    and columns follow ``time_axis_s``.
    """

    values: np.ndarray
    time_axis_s: np.ndarray
    freq_axis_rad_s: np.ndarray
    window: GaussianWindowSpec
    kind: str
    n_fft: int
    branch_map: Optional[np.ndarray] = field(default=None, repr=False)
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.values.shape != (self.freq_axis_rad_s.size, self.time_axis_s.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match axes "
                f"({self.freq_axis_rad_s.size}, {self.time_axis_s.size})")

    @property
    def shape(self):
        return self.values.shape

    @property
    def fs(self) -> float:
        return self.window.fs

    @property
    def dt(self) -> float:
        return 1.0 / self.window.fs

    @property
    def d_omega(self) -> float:
        return 2.0 * np.pi * self.window.fs / self.n_fft

    @property
    def two_sided(self) -> bool:
        return self.freq_axis_rad_s.size == self.n_fft

    @property
    def interior(self) -> slice:
        """Column slice of frames whose window lies fully inside the record."""
        half = self.window.half_len_samples
        return slice(half, max(half, self.time_axis_s.size - half))

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[:, self.interior] = True
        return mask

    def with_values(self, values, kind=None, branch_map=None) -> "TFGrid":
        return replace(self, values=values, kind=kind or self.kind, branch_map=branch_map, info={})

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def frequency_axis(fs, n_fft, two_sided=False) -> np.ndarray:
    """Bin centres in rad/s: ``[0, pi fs)`` or, two-sided, ``[-pi fs, pi fs)``."""
    d_omega = 2.0 * np.pi * fs / n_fft
    if two_sided:
        k = np.arange(-(n_fft // 2), n_fft - n_fft // 2)
    else:
        k = np.arange(n_fft // 2)
    return k * d_omega


def _check(s: Signal, w: GaussianWindowSpec, n_fft: int):
    if s.sample_rate_hz != w.fs:
        raise ValueError(f"window fs {w.fs} does not match signal fs {s.sample_rate_hz}")
    if n_fft < w.length:
        raise ValueError(f"n_fft={n_fft} shorter than window length {w.length}")
    if len(s) < w.length:
        raise ValueError(f"signal of {len(s)} samples is shorter than the window ({w.length})")


def _windowed_transforms(s: Signal, w: GaussianWindowSpec, n_fft: int, tapers, two_sided):
    """Riemann-sum STFTs of ``s`` for each taper, shape ``(n_freq, n_time)`` each.

    Frames are zero padded past the record ends. Each frame is FFT'd on its own,
    so blocking over frames never changes the numbers.
    """
    half = w.half_len_samples
    n = len(s)
    padded = np.pad(s.samples, half)
    frames = np.lib.stride_tricks.sliding_window_view(padded, w.length)
    if two_sided:
        bins = np.arange(-(n_fft // 2), n_fft - n_fft // 2) % n_fft
    else:
        bins = np.arange(n_fft // 2)
    dt = s.dt
    outs = [np.empty((bins.size, n), dtype=np.complex128) for _ in tapers]
    buf = np.zeros((min(_FRAME_BLOCK, n), n_fft), dtype=np.complex128)
    for start in range(0, n, _FRAME_BLOCK):
        stop = min(start + _FRAME_BLOCK, n)
        block = frames[start:stop]
        rows = stop - start
        for taper, out in zip(tapers, outs):
            x = block * taper
            b = buf[:rows]
            b[:] = 0
            # tap m >= 0 at index m, m < 0 wrapped to n_fft + m: phase referenced to the frame centre
            b[:, :half + 1] = x[:, half:]
            b[:, n_fft - half:] = x[:, :half]
            spec = np.fft.fft(b, axis=1)
            out[:, start:stop] = spec[:, bins].T * dt
    return outs


def _grid(s, w, n_fft, values, kind, two_sided):
    return TFGrid(values, s.times, frequency_axis(s.sample_rate_hz, n_fft, two_sided), w, kind, n_fft)


def stft(s: Signal, w: GaussianWindowSpec, n_fft: int, two_sided=False) -> TFGrid:
    """Hop-1 STFT of ``s`` on ``n_fft // 2`` bins covering ``[0, pi fs)``.

    With ``two_sided=True`` all ``n_fft`` bins are kept, ordered over
    ``[-pi fs, pi fs)``, which is required for non-analytic complex input.
    """
    _check(s, w, n_fft)
    (v,) = _windowed_transforms(s, w, n_fft, [sample_window(w)], two_sided)
    return _grid(s, w, n_fft, v, "STFT", two_sided)


def stft_bundle(s: Signal, w: GaussianWindowSpec, n_fft: int, two_sided=False):
    """Return ``(V, dV/dt, dV/dw)`` as TFGrids, sharing one framing pass."""
    _check(s, w, n_fft)
    v, vd, vt = _windowed_transforms(
        s, w, n_fft, [sample_window(w), sample_dwindow(w), sample_twindow(w)], two_sided)
    omega = frequency_axis(s.sample_rate_hz, n_fft, two_sided)[:, None]
    dv_dt = -vd + 1j * omega * v
    dv_dw = -1j * vt
    return (_grid(s, w, n_fft, v, "STFT", two_sided),
            _grid(s, w, n_fft, dv_dt, "dSTFT_t", two_sided),
            _grid(s, w, n_fft, dv_dw, "dSTFT_w", two_sided))


def stft_dt(s: Signal, w: GaussianWindowSpec, n_fft: int, two_sided=False) -> TFGrid:
    """Partial derivative of the STFT with respect to time."""
    _check(s, w, n_fft)
    v, vd = _windowed_transforms(s, w, n_fft, [sample_window(w), sample_dwindow(w)], two_sided)
    omega = frequency_axis(s.sample_rate_hz, n_fft, two_sided)[:, None]
    return _grid(s, w, n_fft, -vd + 1j * omega * v, "dSTFT_t", two_sided)


def stft_dw(s: Signal, w: GaussianWindowSpec, n_fft: int, two_sided=False) -> TFGrid:
    """Partial derivative of the STFT with respect to angular frequency."""
    _check(s, w, n_fft)
    (vt,) = _windowed_transforms(s, w, n_fft, [sample_twindow(w)], two_sided)
    return _grid(s, w, n_fft, -1j * vt, "dSTFT_w", two_sided)


def lfm_stft_oracle(A, a, b, c, beta, t, omega):
    """Closed-form STFT of ``A exp(i(a + b t + c t^2/2))`` under a Gaussian window.

    Evaluates ``A sqrt(2 pi beta / (1 - i beta c)) exp(i phi(t) - (w - b - c t)^2 / (2/beta - 2 i c))``.
    Meant as a test oracle; ``t`` and ``omega`` broadcast.
    """
    t = np.asarray(t, dtype=float)
    omega = np.asarray(omega, dtype=float)
    gain = np.sqrt(2.0 * np.pi * beta / (1.0 - 1j * beta * c))
    phase = a + b * t + 0.5 * c * t ** 2
    detune = omega - b - c * t
    return A * gain * np.exp(1j * phase - detune ** 2 / (2.0 / beta - 2j * c))
