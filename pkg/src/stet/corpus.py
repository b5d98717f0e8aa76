"""Multicomponent test signal: tone, impulse train and two crossing chirps.

The mixture exercises both extraction branches at once. The tone and the slow
upward chirp sit below the chirp-rate boundary; the fast downward chirp and
the impulses sit above it. All parameters are expressed relative to the
window so the balance survives a change of sample rate.
"""
from __future__ import annotations

import numpy as np

from .signal import mix, synth_harmonic, synth_impulse, synth_lfm
from .window import GaussianWindowSpec

DEFAULT_FS = 100.0
DEFAULT_N = 1024
DEFAULT_SIGMA_SAMPLES = 12.8
DEFAULT_NFFT = 1024


def corpus_window(fs=DEFAULT_FS, sigma_samples=DEFAULT_SIGMA_SAMPLES) -> GaussianWindowSpec:
    return GaussianWindowSpec.from_beta((sigma_samples / fs) ** 2, fs)


def multicomponent(fs=DEFAULT_FS, n_samples=DEFAULT_N, sigma_samples=DEFAULT_SIGMA_SAMPLES,
                   n_impulses=4, fast_ratio=1.5, slow_ratio=0.3):
    """Return ``(signal, window)`` for the tone + impulses + crossing-chirp mixture.

    ``fast_ratio`` and ``slow_ratio`` are the chirp rates in units of the
    window's routing boundary. Impulse areas are scaled by
    ``sqrt(n_samples / n_impulses) / fs`` so the impulse train carries energy
    comparable to one unit-amplitude tone.
    """
    w = corpus_window(fs, sigma_samples)
    dur = n_samples / fs
    nyq = np.pi * fs
    c0 = w.boundary
    c_slow = min(slow_ratio * c0, 0.3 * nyq / dur)
    c_fast = fast_ratio * c0
    if c_fast * dur >= 0.9 * nyq:
        raise ValueError("fast chirp leaves the band; shorten the record or lower fast_ratio")
    parts = [synth_harmonic(1.0, 0.35 * nyq, dur, fs)]
    area = np.sqrt(n_samples / n_impulses) / fs
    for k in range(n_impulses):
        parts.append(synth_impulse(area, (k + 0.6) * dur / (n_impulses + 0.3), dur, fs))
    parts.append(synth_lfm(1.0, 0.0, 0.1 * nyq, c_slow, dur, fs))
    parts.append(synth_lfm(1.0, 0.0, 0.95 * nyq, -c_fast, dur, fs))
    return mix(parts), w


def tone_plus_impulses(fs=DEFAULT_FS, n_samples=DEFAULT_N, sigma_samples=DEFAULT_SIGMA_SAMPLES,
                       n_impulses=1, omega_ratio=0.3):
    """Unit tone at ``omega_ratio`` of Nyquist plus impulses holding the tone's energy.

    Returns ``(mixture, window, tone, impulses)`` so callers can score each
    part. The impulses are real, so analyse the mixture on a two-sided grid.
    """
    w = corpus_window(fs, sigma_samples)
    dur = n_samples / fs
    tone = synth_harmonic(1.0, omega_ratio * np.pi * fs, dur, fs)
    area = np.sqrt(n_samples / n_impulses) / fs
    impulses = mix([synth_impulse(area, (k + 0.5) * dur / n_impulses, dur, fs)
                    for k in range(n_impulses)])
    return tone + impulses, w, tone, impulses
