"""Concentration metrics, SNR sweeps and ridge tracking."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pipeline import run
from .signal import Signal, add_noise
from .stft import TFGrid

DEFAULT_ALPHA = 3.0


def _energy(G) -> np.ndarray:
    values = G.values if isinstance(G, TFGrid) else np.asarray(G)
    return np.abs(values) ** 2


def renyi_entropy(G, alpha=DEFAULT_ALPHA) -> float:
    """Order-``alpha`` Rényi entropy (bits) of the normalised energy ``|G|^2 / sum|G|^2``."""
    if alpha == 1:
        raise ValueError("alpha = 1 (Shannon limit) is not supported")
    e = _energy(G).ravel()
    total = e.sum()
    if not total > 0:
        raise ValueError("Rényi entropy is undefined for a zero grid")
    p = e[e > 0] / total
    return float(np.log2(np.sum(p ** alpha)) / (1.0 - alpha))


def _sorted_cumulative(G):
    e = np.sort(_energy(G).ravel())[::-1]
    total = e.sum()
    if not total > 0:
        raise ValueError("normalised energy is undefined for a zero grid")
    frac = np.cumsum(e) / total
    frac[np.flatnonzero(e > 0)[-1]:] = 1.0
    return frac


def normalized_energy_curve(G, points=64):
    """Cumulative energy fraction of the ``m`` largest coefficients.

    Sampled at up to ``points`` log-spaced counts between 1 and the pixel count;
    returns a list of ``(count, fraction)``.
    """
    frac = _sorted_cumulative(G)
    counts = np.unique(np.rint(np.geomspace(1, frac.size, max(int(points), 2))).astype(int))
    return [(int(m), float(frac[m - 1])) for m in counts]


def coefficients_for_fraction(G, fraction=0.95) -> int:
    """Smallest number of largest coefficients holding ``fraction`` of the energy."""
    frac = _sorted_cumulative(G)
    return int(np.searchsorted(frac, fraction - 1e-12) + 1)


@dataclass
class RidgeTrack:
    times_s: np.ndarray
    omegas_rad_s: np.ndarray
    magnitudes: np.ndarray
    indices: np.ndarray
    orientation: str

    @property
    def points(self):
        return list(zip(self.times_s.tolist(), self.omegas_rad_s.tolist(), self.magnitudes.tolist()))

    def to_dict(self):
        return {"orientation": self.orientation,
                "time_s": self.times_s.tolist(),
                "omega_rad_s": self.omegas_rad_s.tolist(),
                "magnitude": self.magnitudes.tolist()}


@dataclass
class ConcentrationReport:
    renyi_entropy: float
    normalized_energy: list
    method_tag: str
    alpha: float = DEFAULT_ALPHA
    coefficients_95: int = 0
    ridges: list = field(default_factory=list)

    def to_dict(self):
        return {"method": self.method_tag, "renyi_alpha": self.alpha,
                "renyi_entropy_bits": self.renyi_entropy,
                "coefficients_for_95pct_energy": self.coefficients_95,
                "normalized_energy": [list(p) for p in self.normalized_energy],
                "ridges": [r.to_dict() for r in self.ridges]}


def concentration_report(G: TFGrid, alpha=DEFAULT_ALPHA, points=64, ridges=()) -> ConcentrationReport:
    return ConcentrationReport(
        renyi_entropy=renyi_entropy(G, alpha),
        normalized_energy=normalized_energy_curve(G, points),
        method_tag=G.kind, alpha=alpha,
        coefficients_95=coefficients_for_fraction(G, 0.95),
        ridges=list(ridges))


def snr_sweep(clean: Signal, snrs_db, pipeline, seed, alpha=DEFAULT_ALPHA, window=None, n_fft=None):
    """Rényi entropy of ``pipeline(add_noise(clean, snr, seed))`` for each SNR.

    ``pipeline`` is either a callable mapping a Signal to a TFGrid, or a method
    tag (``"stft"``, ``"set"``, ...) run with ``window`` and ``n_fft``.

    Every level reuses the master seed, so all levels see the same noise
    realisation rescaled to the target power (common random numbers). The
    entropy differences between levels then reflect the noise level rather
    than the draw. Levels stay independent of each other and can run in any
    order.
    """
    snrs = [float(x) for x in snrs_db]
    for snr in snrs:
        if not -20 <= snr <= 60:
            raise ValueError(f"SNR {snr} dB outside the supported [-20, 60] range")
    if isinstance(pipeline, str):
        if window is None or n_fft is None:
            raise ValueError("a method tag needs window and n_fft")
        method = pipeline
        pipeline = lambda s: run(s, window, n_fft, method)  # noqa: E731
    return [(snr, renyi_entropy(pipeline(add_noise(clean, snr, seed)), alpha)) for snr in snrs]


def _dp_path(score, penalty):
    """Maximise ``sum score[path[n], n] - penalty * (path[n] - path[n-1])^2``."""
    n_idx, n_steps = score.shape
    if penalty == 0:
        return np.argmax(score, axis=0)
    jump = penalty * (np.arange(n_idx)[:, None] - np.arange(n_idx)[None, :]) ** 2
    back = np.empty((n_idx, n_steps), dtype=np.int64)
    acc = score[:, 0].copy()
    back[:, 0] = -1
    for n in range(1, n_steps):
        cand = acc[None, :] - jump  # [to, from]
        back[:, n] = np.argmax(cand, axis=1)
        acc = cand[np.arange(n_idx), back[:, n]] + score[:, n]
    path = np.empty(n_steps, dtype=np.int64)
    path[-1] = int(np.argmax(acc))
    for n in range(n_steps - 1, 0, -1):
        path[n - 1] = back[path[n], n]
    return path


def extract_ridge(G: TFGrid, orientation="time", smoothness_penalty=0.0, span=None) -> RidgeTrack:
    """Maximum-energy ridge by dynamic programming.

    Maximises ``sum log|G| - smoothness_penalty * (index jump)^2`` with one
    point per time column (``orientation="time"``) or per frequency row
    (``orientation="frequency"``). ``span`` optionally restricts the walk to a
    slice of the orientation axis.
    """
    mag = np.abs(G.values)
    peak = mag.max()
    if not peak > 0:
        raise ValueError("cannot extract a ridge from a zero grid")
    floor = peak * 1e-12
    score = np.log(np.maximum(mag, floor) / peak)
    if orientation == "time":
        along = np.arange(G.shape[1])
    elif orientation == "frequency":
        score = score.T
        along = np.arange(G.shape[0])
    else:
        raise ValueError("orientation must be 'time' or 'frequency'")
    if span is not None:
        along = along[span]
        score = score[:, span]
    path = _dp_path(score, float(smoothness_penalty))
    if orientation == "time":
        fi, ti = path, along
    else:
        fi, ti = along, path
    return RidgeTrack(G.time_axis_s[ti], G.freq_axis_rad_s[fi], mag[fi, ti], path, orientation)
