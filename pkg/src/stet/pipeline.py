"""End-to-end analysis: STFT -> estimator fields -> extraction transform."""
from __future__ import annotations

from dataclasses import dataclass

from .estimators import DEFAULT_EPS_DIV, EstimatorFields, compute_fields
from .signal import Signal
from .stft import TFGrid, stft_bundle
from .transforms import (ExtractionConfig, branch_map, improved_stet_transform, set_transform,
                         stet_transform, tet_transform)
from .window import GaussianWindowSpec

METHODS = ("stft", "set", "tet", "stet", "stet2")


@dataclass
class Analysis:
    stft: TFGrid
    d_stft_t: TFGrid
    d_stft_w: TFGrid
    fields: EstimatorFields
    config: ExtractionConfig

    def transform(self, method) -> TFGrid:
        method = method.lower()
        if method == "stft":
            return self.stft
        if method == "set":
            return set_transform(self.stft, self.fields, self.config)
        if method == "tet":
            return tet_transform(self.stft, self.fields, self.config)
        if method == "stet":
            return stet_transform(self.stft, self.fields, self.config)
        if method == "stet2":
            return improved_stet_transform(self.stft, self.fields, self.config)
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")

    def branch_map(self):
        return branch_map(self.fields, self.config.boundary, self.config.branch_median)


def analyze(signal: Signal, window: GaussianWindowSpec, n_fft: int,
            config: ExtractionConfig = ExtractionConfig(), two_sided=False,
            eps_div=DEFAULT_EPS_DIV) -> Analysis:
    """Compute the STFT, its derivatives and all estimator fields once."""
    V, dVt, dVw = stft_bundle(signal, window, n_fft, two_sided=two_sided)
    fields = compute_fields(V, dVt, dVw, gamma=config.gamma, eps_div=eps_div)
    return Analysis(V, dVt, dVw, fields, config.resolve(V))


def run(signal: Signal, window: GaussianWindowSpec, n_fft: int, method="stet2",
        config: ExtractionConfig = ExtractionConfig(), two_sided=False) -> TFGrid:
    return analyze(signal, window, n_fft, config, two_sided).transform(method)
