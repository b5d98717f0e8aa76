"""Time-domain recovery of the harmonic and impulsive parts of an improved-STET grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import Signal
from .stft import TFGrid
from .transforms import SET_BRANCH, TET_BRANCH


@dataclass(frozen=True)
class ReconstructionResult:
    s1: Signal
    s2: Signal
    total: Signal
    interior_mask: np.ndarray


def _require_branches(S2: TFGrid):
    if S2.kind != "STET2" or S2.branch_map is None:
        raise ValueError(f"expected an STET2 grid with a branch map, got {S2.kind}; "
                         "use improved_stet_transform")


def _as_signal(S2: TFGrid, samples):
    return Signal(samples, S2.fs, S2.time_axis_s[0])


def _run_weights(keep):
    """``1 / run length`` for every kept pixel, runs taken along frequency within a column."""
    k = keep.T  # one column per row, contiguous in memory order below
    start = k.copy()
    start[:, 1:] &= ~k[:, :-1]
    labels = np.cumsum(start.ravel()) - 1
    flat = k.ravel()
    lengths = np.bincount(labels[flat], minlength=max(int(start.sum()), 1))
    w = np.zeros(flat.size)
    w[flat] = 1.0 / lengths[labels[flat]]
    return w.reshape(k.shape).T


def reconstruct_harmonic(S2: TFGrid, merge_runs=True) -> Signal:
    """Sum the SET-branch coefficients of each time column.

    After rectification each kept ridge pixel already equals the signal value,
    so the column sum is the recovered sample. When noise jitters the IF
    estimate, one ridge crossing can keep two adjacent bins; ``merge_runs``
    averages each contiguous run of kept bins so it counts once.
    """
    _require_branches(S2)
    part = np.where(S2.branch_map == SET_BRANCH, S2.values, 0)
    if merge_runs:
        part = part * _run_weights(part != 0)
    return _as_signal(S2, part.sum(axis=0))


def reconstruct_impulsive(S2: TFGrid, skip_edges=True) -> Signal:
    """Inverse Fourier sum of the TET-branch coefficients.

    Each kept pixel holds a spectrum value referenced to absolute time. Every
    column's contribution ``(d_omega / 2 pi) sum_k X_k exp(i w_k t)`` is
    synthesised only within half a period (``n_fft / 2`` samples) of that
    column, which removes the wrap-around of the discrete frequency grid when
    the record is longer than ``n_fft``.

    Frames whose window overhangs the record see the zero padding as a step,
    which the GD estimate reads as a transient. With ``skip_edges`` those
    columns are left out, since their kernels would otherwise ring into the
    interior.
    """
    _require_branches(S2)
    part = np.where(S2.branch_map == TET_BRANCH, S2.values, 0)
    if skip_edges:
        edge = np.ones(part.shape[1], dtype=bool)
        edge[S2.interior] = False
        part[:, edge] = 0
    n_time = part.shape[1]
    out = np.zeros(n_time, dtype=np.complex128)
    cols = np.flatnonzero(np.any(part != 0, axis=0))
    if cols.size == 0:
        return _as_signal(S2, out)

    n_fft = S2.n_fft
    omega = S2.freq_axis_rad_s
    t_cols = S2.time_axis_s[cols]
    # shift each column to local time j*dt around its own centre
    local = part[:, cols] * np.exp(1j * np.outer(omega, t_cols))
    bins = np.rint(omega / S2.d_omega).astype(int) % n_fft
    spec = np.zeros((n_fft, cols.size), dtype=np.complex128)
    spec[bins] = local
    # ifft already carries 1/n_fft; (d_omega / 2 pi) * n_fft = fs
    kernel = np.fft.ifft(spec, axis=0) * S2.fs

    offsets = np.arange(-(n_fft // 2), n_fft - n_fft // 2)
    rows = offsets % n_fft
    targets = cols[None, :] + offsets[:, None]
    contrib = kernel[rows]
    inside = (targets >= 0) & (targets < n_time)
    idx = targets[inside]
    vals = contrib[inside]
    out += np.bincount(idx, weights=vals.real, minlength=n_time)
    out += 1j * np.bincount(idx, weights=vals.imag, minlength=n_time)
    return _as_signal(S2, out)


def reconstruct(S2: TFGrid, skip_edges=True, merge_runs=True) -> ReconstructionResult:
    s1 = reconstruct_harmonic(S2, merge_runs)
    s2 = reconstruct_impulsive(S2, skip_edges)
    total = s1.with_samples(s1.samples + s2.samples)
    interior = np.zeros(S2.shape[1], dtype=bool)
    interior[S2.interior] = True
    return ReconstructionResult(s1, s2, total, interior)


def interior_snr_db(reference: Signal, estimate: Signal, interior_mask) -> float:
    """``10 log10(|ref|^2 / |ref - est|^2)`` over the interior samples."""
    ref = reference.samples[interior_mask]
    err = ref - estimate.samples[interior_mask]
    num = np.sum(np.abs(ref) ** 2)
    den = np.sum(np.abs(err) ** 2)
    if den == 0:
        return float("inf")
    if num == 0:
        return float("-inf")
    return float(10 * np.log10(num / den))
