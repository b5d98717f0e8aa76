"""Extraction transforms: SET, TET, their chirp-routed combination and its
second-order / rectified refinement.

All transforms keep coefficients in place (no reassignment); a Dirac in the
continuous definition becomes a half-step tolerance band on the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.ndimage import median_filter

from .estimators import (DEFAULT_GAMMA, EstimatorFields, gd_estimate2, if_estimate2,
                         rectify_for_set, rectify_for_tet)
from .stft import TFGrid

SET_BRANCH, TET_BRANCH, MASKED = 0, 1, -1


@dataclass(frozen=True)
class ExtractionConfig:
    """Routing boundary (rad/s^2) and keep tolerances; ``None`` means grid default.

    Defaults: ``boundary = beta**(-2/3)``, ``freq_tolerance = d_omega / 2``,
    ``time_tolerance = dt / 2``.
    """

    boundary: Optional[float] = None
    freq_tolerance: Optional[float] = None
    time_tolerance: Optional[float] = None
    gamma: float = DEFAULT_GAMMA
    branch_median: int = 0

    def resolve(self, grid: TFGrid) -> "ExtractionConfig":
        cfg = replace(
            self,
            boundary=grid.window.boundary if self.boundary is None else float(self.boundary),
            freq_tolerance=grid.d_omega / 2 if self.freq_tolerance is None else float(self.freq_tolerance),
            time_tolerance=grid.dt / 2 if self.time_tolerance is None else float(self.time_tolerance),
        )
        if not cfg.boundary > 0:
            raise ValueError("boundary must be positive")
        if not 0 < cfg.freq_tolerance <= grid.d_omega * (1 + 1e-12):
            raise ValueError("freq_tolerance must lie in (0, d_omega]")
        if not 0 < cfg.time_tolerance <= grid.dt * (1 + 1e-12):
            raise ValueError("time_tolerance must lie in (0, dt]")
        if cfg.branch_median and cfg.branch_median % 2 == 0:
            raise ValueError("branch_median must be odd")
        return cfg


def _omega(grid):
    return np.broadcast_to(grid.freq_axis_rad_s[:, None], grid.shape)


def _time(grid):
    return np.broadcast_to(grid.time_axis_s[None, :], grid.shape)


def set_keep(grid: TFGrid, omega_est, valid, tol) -> np.ndarray:
    return valid & (np.abs(omega_est - _omega(grid)) <= tol)


def tet_keep(grid: TFGrid, t_est, valid, tol) -> np.ndarray:
    return valid & (np.abs(t_est - _time(grid)) <= tol)


def set_transform(V: TFGrid, fields: EstimatorFields, cfg: ExtractionConfig = ExtractionConfig()) -> TFGrid:
    """Keep ``V`` where the IF estimate falls in the pixel's own frequency bin."""
    cfg = cfg.resolve(V)
    keep = set_keep(V, fields.omega_hat, fields.mask, cfg.freq_tolerance)
    return V.with_values(np.where(keep, V.values, 0), kind="SET")


def tet_transform(V: TFGrid, fields: EstimatorFields, cfg: ExtractionConfig = ExtractionConfig()) -> TFGrid:
    """Keep ``V`` where the GD estimate falls in the pixel's own time cell."""
    cfg = cfg.resolve(V)
    keep = tet_keep(V, fields.t_hat, fields.mask, cfg.time_tolerance)
    return V.with_values(np.where(keep, V.values, 0), kind="TET")


def branch_map(fields: EstimatorFields, boundary, median_size=0) -> np.ndarray:
    """0 where ``|c| <= boundary`` (SET), 1 where larger or infinite (TET), -1 if masked."""
    valid = fields.mask & fields.chirp_mask
    tet = np.abs(fields.chirp_rate) > boundary
    if median_size:
        # majority vote over valid neighbours only; masked pixels abstain as 0.5
        votes = np.where(valid, tet.astype(float), 0.5)
        tet = median_filter(votes, size=median_size, mode="nearest") > 0.5
    out = np.full(fields.mask.shape, MASKED, dtype=np.int8)
    out[valid & ~tet] = SET_BRANCH
    out[valid & tet] = TET_BRANCH
    return out


def stet_transform(V: TFGrid, fields: EstimatorFields, cfg: ExtractionConfig = ExtractionConfig()) -> TFGrid:
    """Chirp-routed sum of the SET rule (``|c| <= boundary``) and the TET rule (otherwise)."""
    cfg = cfg.resolve(V)
    branches = branch_map(fields, cfg.boundary, cfg.branch_median)
    keep_s = set_keep(V, fields.omega_hat, branches == SET_BRANCH, cfg.freq_tolerance)
    keep_t = tet_keep(V, fields.t_hat, branches == TET_BRANCH, cfg.time_tolerance)
    values = np.where(keep_s, V.values, 0) + np.where(keep_t, V.values, 0)
    return V.with_values(values, kind="STET", branch_map=branches)


def improved_stet_transform(V: TFGrid, fields: EstimatorFields,
                            cfg: ExtractionConfig = ExtractionConfig()) -> TFGrid:
    """Second-order, rectified chirp-routed extraction.

    SET-branch pixels keep the amplitude-rectified STFT where the second-order
    IF lands in the pixel's bin; TET-branch pixels keep the amplitude/phase
    rectified STFT where the second-order GD lands in the pixel's time cell.
    Fallback pixels (first-order estimate reused) are tallied in
    ``grid.info["fallback"]``.
    """
    cfg = cfg.resolve(V)
    branches = branch_map(fields, cfg.boundary, cfg.branch_median)
    omega2, fb_w = if_estimate2(fields)
    t2, fb_t = gd_estimate2(fields, V.freq_axis_rad_s)
    vs = rectify_for_set(V, fields).values
    vt = rectify_for_tet(V, fields).values

    is_set = branches == SET_BRANCH
    is_tet = branches == TET_BRANCH
    keep_s = set_keep(V, omega2, is_set, cfg.freq_tolerance)
    keep_t = tet_keep(V, t2, is_tet, cfg.time_tolerance)
    values = np.where(keep_s, vs, 0) + np.where(keep_t, vt, 0)
    out = V.with_values(values, kind="STET2", branch_map=branches)
    out.info.update(fallback={
        "set_branch": int(np.count_nonzero(fb_w & is_set)),
        "tet_branch": int(np.count_nonzero(fb_t & is_tet)),
    }, kept={"set_branch": int(keep_s.sum()), "tet_branch": int(keep_t.sum())})
    return out
