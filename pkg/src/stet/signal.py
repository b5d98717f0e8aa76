"""Signal container, synthetic test models, noise injection and analytic conversion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled complex time series.

    ``samples`` is stored as a read-only complex128 array so instances can be
    shared freely between threads.
    """

    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128, copy=True).ravel()
        if samples.size == 0:
            raise ValueError("signal must contain at least one sample")
        if not np.isfinite(self.sample_rate_hz) or self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if not np.isfinite(self.start_time_s):
            raise ValueError("start_time_s must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "start_time_s", float(self.start_time_s))

    def __len__(self):
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @property
    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(len(self)) / self.sample_rate_hz

    @property
    def is_real(self) -> bool:
        return not np.any(self.samples.imag)

    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.sample_rate_hz, self.start_time_s)

    def __add__(self, other: "Signal") -> "Signal":
        return mix([self, other])

    def __mul__(self, scale) -> "Signal":
        return self.with_samples(self.samples * scale)

    __rmul__ = __mul__


def _n_samples(duration_s, fs):
    if not (duration_s > 0 and np.isfinite(duration_s)):
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    if not (fs > 0 and np.isfinite(fs)):
        raise ValueError(f"fs must be positive, got {fs}")
    n = int(round(duration_s * fs))
    if n < 1:
        raise ValueError("duration shorter than one sample")
    return n


def synth_harmonic(amplitude, omega0, duration_s, fs, phase=0.0) -> Signal:
    """Constant-amplitude complex tone ``A exp(i (omega0 t + phase))``."""
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    n = _n_samples(duration_s, fs)
    if fs <= omega0 / np.pi:
        raise ValueError(f"fs={fs} Hz does not resolve omega0={omega0} rad/s")
    t = np.arange(n) / fs
    return Signal(amplitude * np.exp(1j * (omega0 * t + phase)), fs)


def synth_impulse(amplitude, t0_s, duration_s, fs) -> Signal:
    """Discrete delta of unit time integral scaled by ``amplitude``.

    The single nonzero sample sits at ``round(t0_s * fs)`` and carries
    ``amplitude * fs`` so that ``sum(samples) / fs == amplitude``.
    """
    n = _n_samples(duration_s, fs)
    if not 0 <= t0_s < duration_s:
        raise ValueError(f"t0_s={t0_s} lies outside the record [0, {duration_s})")
    idx = int(round(t0_s * fs))
    if idx >= n:
        raise ValueError(f"t0_s={t0_s} rounds past the last sample")
    x = np.zeros(n, dtype=np.complex128)
    x[idx] = amplitude * fs
    return Signal(x, fs)


def synth_lfm(amplitude, a, b, c, duration_s, fs) -> Signal:
    """Linear FM ``A exp(i (a + b t + c t^2 / 2))`` with IF law ``b + c t``.

    Raises if the IF leaves ``(0, pi fs)`` anywhere on the record.
    """
    n = _n_samples(duration_s, fs)
    t = np.arange(n) / fs
    inst = b + c * t
    bad = np.flatnonzero((inst <= 0) | (inst >= np.pi * fs))
    if bad.size:
        t_bad = t[bad[0]]
        raise ValueError(
            f"instantaneous frequency {inst[bad[0]]:.6g} rad/s at t={t_bad:.6g} s "
            f"leaves the representable band (0, {np.pi * fs:.6g})")
    if c == 0:
        return synth_harmonic(amplitude, b, duration_s, fs, phase=a)
    return Signal(amplitude * np.exp(1j * (a + b * t + 0.5 * c * t ** 2)), fs)


def synth_phase(amplitude, phase_fn, duration_s, fs) -> Signal:
    """Constant-amplitude signal with an arbitrary phase law ``phase_fn(t)``."""
    n = _n_samples(duration_s, fs)
    t = np.arange(n) / fs
    return Signal(amplitude * np.exp(1j * np.asarray(phase_fn(t), dtype=float)), fs)


def mix(signals) -> Signal:
    signals = list(signals)
    if not signals:
        raise ValueError("mix needs at least one signal")
    ref = signals[0]
    for s in signals[1:]:
        if s.sample_rate_hz != ref.sample_rate_hz or len(s) != len(ref):
            raise ValueError("mix requires identical sample rate and length")
        if s.start_time_s != ref.start_time_s:
            raise ValueError("mix requires identical start times")
    total = np.zeros(len(ref), dtype=np.complex128)
    for s in signals:
        total = total + s.samples
    return ref.with_samples(total)


def add_noise(s: Signal, snr_db, seed) -> Signal:
    """Add circular complex white Gaussian noise at the requested SNR.

    The noise realisation is rescaled so that its empirical power sits exactly
    at ``P_signal / 10**(snr_db/10)``.
    """
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(s)) + 1j * rng.standard_normal(len(s))
    p_sig = s.power()
    p_target = p_sig / 10.0 ** (snr_db / 10.0)
    p_noise = np.mean(np.abs(noise) ** 2)
    noise *= np.sqrt(p_target / p_noise)
    return s.with_samples(s.samples + noise)


def to_analytic(real_signal: Signal) -> Signal:
    """One-sided spectrum analytic signal of a real record.

    Uses a full-record FFT mask: positive bins doubled, negative bins zeroed,
    DC (and Nyquist for even lengths) kept at unit weight so the real part is
    preserved exactly.
    """
    x = real_signal.samples
    if np.any(x.imag):
        raise ValueError("to_analytic expects a real-valued signal")
    n = x.size
    spectrum = np.fft.fft(x.real)
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1:n // 2] = 2.0
    else:
        h[1:(n + 1) // 2] = 2.0
    return real_signal.with_samples(np.fft.ifft(spectrum * h))
