"""Gaussian analysis window ``g(t) = exp(-t^2 / (2 beta))`` and its variants.

``beta`` is expressed in seconds squared, so chirp rates (rad/s^2) and the
routing boundary ``beta**(-2/3)`` live in one unit system.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

DEFAULT_TAIL = 1e-8


@dataclass(frozen=True)
class GaussianWindowSpec:
    beta: float
    half_len_samples: int
    fs: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not (self.fs > 0 and math.isfinite(self.fs)):
            raise ValueError(f"fs must be positive, got {self.fs}")
        if int(self.half_len_samples) != self.half_len_samples or self.half_len_samples < 1:
            raise ValueError("half_len_samples must be a positive integer")
        object.__setattr__(self, "half_len_samples", int(self.half_len_samples))

    @classmethod
    def from_beta(cls, beta, fs, tail=DEFAULT_TAIL, half_len_samples=None):
        """Build a spec, sizing the truncation so the edge tap is ``<= tail``.

        An explicit ``half_len_samples`` that leaves a larger tail is honoured
        with a warning.
        """
        if not (beta > 0 and math.isfinite(beta)):
            raise ValueError(f"beta must be positive, got {beta}")
        if half_len_samples is None:
            radius_s = math.sqrt(2.0 * beta * math.log(1.0 / tail))
            half_len_samples = max(1, math.ceil(radius_s * fs))
        spec = cls(beta, half_len_samples, fs)
        if spec.edge_value > tail * (1 + 1e-12):
            warnings.warn(
                f"window truncated at g={spec.edge_value:.3g} (> {tail:g})", stacklevel=2)
        return spec

    @classmethod
    def from_sigma_ms(cls, sigma_ms, fs, tail=DEFAULT_TAIL):
        """``sigma_t = sqrt(beta)`` given in milliseconds."""
        return cls.from_beta((sigma_ms * 1e-3) ** 2, fs, tail=tail)

    @property
    def sigma_s(self) -> float:
        return math.sqrt(self.beta)

    @property
    def sigma_ms(self) -> float:
        return 1e3 * self.sigma_s

    @property
    def length(self) -> int:
        return 2 * self.half_len_samples + 1

    @property
    def edge_value(self) -> float:
        t_edge = self.half_len_samples / self.fs
        return math.exp(-t_edge ** 2 / (2.0 * self.beta))

    @property
    def boundary(self) -> float:
        """Chirp-rate boundary ``beta**(-2/3)`` (rad/s^2) between the SET and TET regimes."""
        return self.beta ** (-2.0 / 3.0)

    def taps_time(self) -> np.ndarray:
        return np.arange(-self.half_len_samples, self.half_len_samples + 1) / self.fs


def sample_window(spec: GaussianWindowSpec) -> np.ndarray:
    t = spec.taps_time()
    return np.exp(-t ** 2 / (2.0 * spec.beta))


def sample_dwindow(spec: GaussianWindowSpec) -> np.ndarray:
    """Time derivative ``g'(t) = -(t / beta) g(t)``."""
    t = spec.taps_time()
    return -(t / spec.beta) * sample_window(spec)


def sample_twindow(spec: GaussianWindowSpec) -> np.ndarray:
    """Time-weighted window ``t g(t)``."""
    return spec.taps_time() * sample_window(spec)


def frequency_response(spec: GaussianWindowSpec, omega):
    """Continuous Fourier transform ``sqrt(2 pi beta) exp(-beta omega^2 / 2)``."""
    omega = np.asarray(omega, dtype=float)
    return np.sqrt(2.0 * spec.beta * np.pi) * np.exp(-0.5 * spec.beta * omega ** 2)
