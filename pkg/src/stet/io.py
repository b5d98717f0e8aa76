"""File formats: signal CSV/WAV, TFGrid exports with JSON sidecars, manifests.

Signal CSV has the header ``time_s,real[,imag]`` and one row per uniformly
spaced sample. A TFGrid is exported either as a CSV magnitude matrix (rows in
descending frequency, columns in time) or as raw little-endian float64
interleaved ``(re, im)`` pairs in natural row order; both get a sidecar
``<stem>.json`` describing kind, axes and window.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import warnings
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .signal import Signal
from .stft import TFGrid, frequency_axis
from .window import GaussianWindowSpec

SPACING_RTOL = 1e-6
_FLOAT_FMT = "%.17g"


class FormatError(ValueError):
    """Raised when an input file cannot be parsed into a valid object."""


# ---------------------------------------------------------------- signals

def write_signal_csv(signal: Signal, path, include_imag=None):
    """Write ``signal`` as CSV; the imag column is dropped only for real data
    unless ``include_imag`` says otherwise."""
    if include_imag is None:
        include_imag = not signal.is_real
    cols = [signal.times, signal.samples.real]
    header = ["time_s", "real"]
    if include_imag:
        cols.append(signal.samples.imag)
        header.append("imag")
    data = np.column_stack(cols)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt=_FLOAT_FMT)
    return Path(path)


def read_signal_csv(path) -> Signal:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
            with warnings.catch_warnings():
                # an empty body is reported below as a FormatError
                warnings.simplefilter("ignore", UserWarning)
                data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if header is None:
        raise FormatError(f"{path}: empty file")
    header = [h.strip().lower() for h in header]
    if header not in (["time_s", "real"], ["time_s", "real", "imag"]):
        raise FormatError(f"{path}: expected header time_s,real[,imag], got {','.join(header)}")
    if data.shape[0] < 2 or data.shape[1] != len(header):
        raise FormatError(f"{path}: need at least two rows of {len(header)} columns")
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: non-finite values")
    t = data[:, 0]
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (t.size - 1)
    if not dt > 0 or np.max(np.abs(steps - dt)) > SPACING_RTOL * dt:
        raise FormatError(f"{path}: time column is not uniformly increasing")
    samples = data[:, 1] + (1j * data[:, 2] if data.shape[1] == 3 else 0)
    return Signal(samples, 1.0 / dt, float(t[0]))


def read_wav(path) -> Signal:
    """First channel of a PCM 16/24/32-bit or float32 WAV, scaled to [-1, 1)."""
    try:
        fs, data = wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if data.ndim > 1:
        data = data[:, 0]
    if data.dtype == np.int16:
        x = data / 2.0 ** 15
    elif data.dtype == np.int32:
        # scipy left-justifies 24-bit samples into int32
        x = data / 2.0 ** 31
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise FormatError(f"{path}: unsupported WAV sample type {data.dtype}")
    if x.size == 0:
        raise FormatError(f"{path}: no samples")
    return Signal(x, float(fs))


def read_signal(path) -> Signal:
    suffix = Path(path).suffix.lower()
    if suffix == ".wav":
        return read_wav(path)
    if suffix == ".csv":
        return read_signal_csv(path)
    raise FormatError(f"{path}: unknown signal format {suffix!r} (expected .csv or .wav)")


# ---------------------------------------------------------------- grids

def grid_metadata(grid: TFGrid, config=None) -> dict:
    meta = {
        "kind": grid.kind,
        "fs": grid.fs,
        "n_fft": grid.n_fft,
        "beta": grid.window.beta,
        "window_half_len_samples": grid.window.half_len_samples,
        "two_sided": grid.two_sided,
        "shape": list(grid.shape),
        "time_axis_s": {"start": float(grid.time_axis_s[0]), "stop": float(grid.time_axis_s[-1]),
                        "count": int(grid.time_axis_s.size)},
        "freq_axis_rad_s": {"start": float(grid.freq_axis_rad_s[0]),
                            "stop": float(grid.freq_axis_rad_s[-1]),
                            "count": int(grid.freq_axis_rad_s.size)},
    }
    if config is not None:
        meta["config"] = config
    if grid.info:
        meta["info"] = grid.info
    return meta


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return Path(path)


def _write_matrix_csv(matrix, path, fmt):
    with open(path, "w", newline="") as fh:
        np.savetxt(fh, matrix, delimiter=",", fmt=fmt)


def write_grid(grid: TFGrid, out_dir, stem, fmt="csv", config=None):
    """Export ``grid`` to ``out_dir/stem.{csv|bin}`` plus ``stem.json``.

    CSV holds ``|values|`` with the highest frequency in the first row; bin
    holds the complex values as interleaved float64 in the grid's own order.
    Returns the written paths.
    """
    out_dir = Path(out_dir)
    meta = grid_metadata(grid, config)
    if fmt == "csv":
        data_path = out_dir / f"{stem}.csv"
        _write_matrix_csv(np.abs(grid.values)[::-1], data_path, "%.10e")
        meta["layout"] = "magnitude, rows descending frequency"
    elif fmt == "bin":
        data_path = out_dir / f"{stem}.bin"
        np.ascontiguousarray(grid.values, dtype="<c16").tofile(data_path)
        meta["layout"] = "complex little-endian float64 (re, im), rows ascending frequency"
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    meta["format"] = fmt
    return [data_path, write_json(meta, out_dir / f"{stem}.json")]


def read_grid_bin(bin_path, branch_map=None) -> TFGrid:
    """Rebuild a TFGrid from a ``.bin`` export and its sidecar."""
    bin_path = Path(bin_path)
    try:
        meta = json.loads(bin_path.with_suffix(".json").read_text())
        n_freq, n_time = meta["shape"]
        window = GaussianWindowSpec(meta["beta"], int(meta["window_half_len_samples"]), meta["fs"])
        values = np.fromfile(bin_path, dtype="<c16")
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"{bin_path}: {exc}") from exc
    if values.size != n_freq * n_time:
        raise FormatError(f"{bin_path}: expected {n_freq * n_time} values, found {values.size}")
    t_ax = meta["time_axis_s"]
    times = t_ax["start"] + np.arange(n_time) / meta["fs"]
    freqs = frequency_axis(meta["fs"], meta["n_fft"], meta["two_sided"])
    if freqs.size != n_freq or not np.isclose(times[-1], t_ax["stop"]):
        raise FormatError(f"{bin_path}: sidecar axes are inconsistent")
    return TFGrid(values.reshape(n_freq, n_time).astype(np.complex128), times, freqs, window,
                  meta["kind"], int(meta["n_fft"]), branch_map=branch_map)


def write_branch_map(branches, path):
    """Branch labels (0 SET, 1 TET, -1 masked), rows descending frequency."""
    _write_matrix_csv(np.asarray(branches)[::-1], path, "%d")
    return Path(path)


def read_branch_map(path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.int8, ndmin=2)
    except (OSError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not np.isin(data, (-1, 0, 1)).all():
        raise FormatError(f"{path}: branch labels must be -1, 0 or 1")
    return data[::-1].copy()


def write_fields(fields, grid: TFGrid, out_dir, stem="fields"):
    """Debug export of the IF, GD and chirp-rate fields (NaN where masked)."""
    out_dir = Path(out_dir)
    paths = []
    for name, arr in (("omega_hat", fields.omega_hat), ("t_hat", fields.t_hat),
                      ("chirp_rate", fields.chirp_rate)):
        valid = fields.mask & (fields.chirp_mask if name == "chirp_rate" else True)
        data = np.where(valid, arr, np.nan)[::-1]
        p = out_dir / f"{stem}_{name}.csv"
        _write_matrix_csv(data, p, "%.10e")
        paths.append(p)
    meta = grid_metadata(grid)
    meta.update(kind="fields", gamma=fields.gamma, fields=[p.name for p in paths],
                layout="real, NaN where masked, rows descending frequency")
    paths.append(write_json(meta, out_dir / f"{stem}.json"))
    return paths


# ---------------------------------------------------------------- manifests

def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, parameters: dict, name="manifest.json"):
    """List every file in ``out_dir`` with its sha256, plus ``parameters``."""
    out_dir = Path(out_dir)
    files = {p.name: sha256(p) for p in sorted(out_dir.iterdir())
             if p.is_file() and p.name != name}
    return write_json({"files": files, "parameters": parameters}, out_dir / name)


def ensure_dir(path) -> Path:
    os.makedirs(path, exist_ok=True)
    return Path(path)
