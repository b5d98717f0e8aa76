"""Chirp-routed synchro/transient extraction time-frequency analysis."""
from .signal import (Signal, add_noise, mix, synth_harmonic, synth_impulse, synth_lfm,
                     synth_phase, to_analytic)
from .window import GaussianWindowSpec
from .stft import TFGrid, stft, stft_bundle, stft_dt, stft_dw
from .estimators import EstimatorFields, compute_fields, gd_estimate, if_estimate
from .transforms import (ExtractionConfig, improved_stet_transform, set_transform,
                         stet_transform, tet_transform)
from .pipeline import analyze, run
from .reconstruction import ReconstructionResult, reconstruct, interior_snr_db
from .metrics import (concentration_report, extract_ridge, normalized_energy_curve,
                      renyi_entropy, snr_sweep)

__all__ = [
    "Signal", "add_noise", "mix", "synth_harmonic", "synth_impulse", "synth_lfm", "synth_phase",
    "to_analytic", "GaussianWindowSpec", "TFGrid", "stft", "stft_bundle", "stft_dt", "stft_dw",
    "EstimatorFields", "compute_fields", "gd_estimate", "if_estimate", "ExtractionConfig",
    "improved_stet_transform", "set_transform", "stet_transform", "tet_transform", "analyze", "run",
    "ReconstructionResult", "reconstruct", "interior_snr_db", "concentration_report",
    "extract_ridge", "normalized_energy_curve", "renyi_entropy", "snr_sweep",
]
