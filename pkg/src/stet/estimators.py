"""Per-pixel IF / GD estimators, their partials, chirp rate and rectified STFTs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stft import TFGrid

DEFAULT_GAMMA = 1e-3
DEFAULT_EPS_DIV = 1e-6
# |d t_hat / d omega| below this many beta (s^2/rad) counts as vanishing
EPS_DW_T_HAT = 1e-9
# |d omega_hat / d omega| below this counts as vanishing (dimensionless)
EPS_DW_OMEGA_HAT = 1e-9


@dataclass
class EstimatorFields:
    """Estimator fields on the STFT grid (axis 0 frequency, axis 1 time).

    Entries outside ``mask`` (and for the partials outside ``dt_mask`` /
    ``dw_mask``) are zero and must not be consumed.
    """

    omega_hat: np.ndarray
    t_hat: np.ndarray
    d_omega_hat_dt: np.ndarray
    d_omega_hat_dw: np.ndarray
    d_t_hat_dt: np.ndarray
    d_t_hat_dw: np.ndarray
    chirp_rate: np.ndarray
    mask: np.ndarray
    dt_mask: np.ndarray
    dw_mask: np.ndarray
    gamma: float
    beta: float
    time_axis: np.ndarray
    freq_axis: np.ndarray

    @property
    def chirp_mask(self) -> np.ndarray:
        return self.dt_mask


def validity_mask(V: TFGrid, gamma=DEFAULT_GAMMA) -> np.ndarray:
    mag = np.abs(V.values)
    peak = mag.max() if mag.size else 0.0
    if not np.isfinite(peak) or peak == 0:
        return np.zeros(mag.shape, dtype=bool)
    return mag > gamma * peak


def _check_pair(V: TFGrid, D: TFGrid, kind):
    if V.kind != "STFT" or D.kind != kind:
        raise ValueError(f"expected (STFT, {kind}) grids, got ({V.kind}, {D.kind})")
    if V.shape != D.shape:
        raise ValueError("grids do not share axes")


def _if_raw(V, dVt, mask):
    out = np.zeros(V.shape)
    out[mask] = np.real(dVt.values[mask] / (1j * V.values[mask]))
    return out


def _gd_raw(V, dVw, mask):
    out = np.zeros(V.shape)
    t = np.broadcast_to(V.time_axis_s[None, :], V.shape)
    out[mask] = t[mask] - np.imag(dVw.values[mask] / V.values[mask])
    return out


def if_estimate(V: TFGrid, dVt: TFGrid, gamma=DEFAULT_GAMMA) -> np.ma.MaskedArray:
    """First-order IF estimate ``Re(dV/dt / (i V))`` on the pixels above ``gamma max|V|``."""
    _check_pair(V, dVt, "dSTFT_t")
    mask = validity_mask(V, gamma)
    return np.ma.MaskedArray(_if_raw(V, dVt, mask), mask=~mask)


def gd_estimate(V: TFGrid, dVw: TFGrid, gamma=DEFAULT_GAMMA) -> np.ma.MaskedArray:
    """First-order GD estimate ``t - Im(dV/dw / V)``."""
    _check_pair(V, dVw, "dSTFT_w")
    mask = validity_mask(V, gamma)
    return np.ma.MaskedArray(_gd_raw(V, dVw, mask), mask=~mask)


def _shift(a, k, fill):
    """``out[..., i] = a[..., i + k]`` with ``fill`` past the ends."""
    out = np.full_like(a, fill)
    n = a.shape[-1]
    if k > 0:
        out[..., :n - k] = a[..., k:]
    elif k < 0:
        out[..., -k:] = a[..., :n + k]
    else:
        out[...] = a
    return out


def masked_gradient(f, valid, step, axis):
    """Finite-difference derivative of ``f`` restricted to ``valid`` pixels.

    Central differences where both neighbours are valid, second-order one-sided
    stencils at mask borders, and no value where neither side offers two valid
    neighbours. Returns ``(grad, ok)``.
    """
    f = np.moveaxis(np.where(valid, f, 0.0), axis, -1)
    v = np.moveaxis(valid, axis, -1)
    vp1, vp2 = _shift(v, 1, False), _shift(v, 2, False)
    vm1, vm2 = _shift(v, -1, False), _shift(v, -2, False)
    fp1, fp2 = _shift(f, 1, 0.0), _shift(f, 2, 0.0)
    fm1, fm2 = _shift(f, -1, 0.0), _shift(f, -2, 0.0)

    central = v & vp1 & vm1
    forward = v & vp1 & vp2 & ~central
    backward = v & vm1 & vm2 & ~central & ~forward

    grad = np.zeros_like(f)
    grad[central] = (fp1 - fm1)[central] / (2.0 * step)
    grad[forward] = (-3.0 * f + 4.0 * fp1 - fp2)[forward] / (2.0 * step)
    grad[backward] = (3.0 * f - 4.0 * fm1 + fm2)[backward] / (2.0 * step)
    ok = central | forward | backward
    return np.moveaxis(grad, -1, axis), np.moveaxis(ok, -1, axis)


def field_partials(omega_hat, t_hat, mask, dt, d_omega):
    """Partials of the estimator fields along time (axis 1) and frequency (axis 0).

    Returns ``(dw_dt, dw_dw, dt_dt, dt_dw, dt_mask, dw_mask)`` where ``dw_*``
    are derivatives of ``omega_hat`` and ``dt_*`` of ``t_hat``.
    """
    dw_dt, ok_t = masked_gradient(omega_hat, mask, dt, axis=1)
    dt_dt, _ = masked_gradient(t_hat, mask, dt, axis=1)
    dw_dw, ok_w = masked_gradient(omega_hat, mask, d_omega, axis=0)
    dt_dw, _ = masked_gradient(t_hat, mask, d_omega, axis=0)
    return dw_dt, dw_dw, dt_dt, dt_dw, ok_t, ok_w


def chirp_rate(fields: EstimatorFields, eps_div=DEFAULT_EPS_DIV) -> np.ndarray:
    """``d_t omega_hat / d_t t_hat``; ``+inf`` where ``|d_t t_hat| <= eps_div``.

    Pixels without time partials carry 0 and are excluded by ``dt_mask``.
    """
    ok = fields.dt_mask
    den = fields.d_t_hat_dt
    c = np.zeros(den.shape)
    finite = ok & (np.abs(den) > eps_div)
    c[finite] = fields.d_omega_hat_dt[finite] / den[finite]
    c[ok & ~finite] = np.inf
    return c


def compute_fields(V: TFGrid, dVt: TFGrid, dVw: TFGrid, gamma=DEFAULT_GAMMA,
                   eps_div=DEFAULT_EPS_DIV) -> EstimatorFields:
    """All first-order fields, their partials and the chirp rate."""
    _check_pair(V, dVt, "dSTFT_t")
    _check_pair(V, dVw, "dSTFT_w")
    mask = validity_mask(V, gamma)
    omega_hat = _if_raw(V, dVt, mask)
    t_hat = _gd_raw(V, dVw, mask)

    # sanity clamp: a GD estimate more than one record length outside the record is noise
    t = V.time_axis_s
    span = t[-1] - t[0] + V.dt
    wild = mask & ((t_hat < t[0] - span) | (t_hat > t[-1] + span))
    if wild.any():
        mask = mask & ~wild
        omega_hat[wild] = 0.0
        t_hat[wild] = 0.0

    dw_dt, dw_dw, dt_dt, dt_dw, ok_t, ok_w = field_partials(
        omega_hat, t_hat, mask, V.dt, V.d_omega)
    fields = EstimatorFields(
        omega_hat=omega_hat, t_hat=t_hat,
        d_omega_hat_dt=dw_dt, d_omega_hat_dw=dw_dw,
        d_t_hat_dt=dt_dt, d_t_hat_dw=dt_dw,
        chirp_rate=np.zeros(V.shape), mask=mask, dt_mask=ok_t, dw_mask=ok_w,
        gamma=gamma, beta=V.window.beta,
        time_axis=V.time_axis_s, freq_axis=V.freq_axis_rad_s)
    fields.chirp_rate = chirp_rate(fields, eps_div)
    return fields


def if_estimate2(fields: EstimatorFields):
    """Second-order IF ``omega_hat - (t_hat - t) d_w omega_hat / d_w t_hat``.

    Returns ``(omega_hat2, fallback)``; ``fallback`` marks valid pixels where
    ``d_w t_hat`` vanishes or is unavailable and the first-order value is kept.
    """
    den = fields.d_t_hat_dw
    usable = fields.mask & fields.dw_mask & (np.abs(den) > EPS_DW_T_HAT * fields.beta)
    out = fields.omega_hat.copy()
    t = np.broadcast_to(fields.time_axis[None, :], out.shape)
    out[usable] -= (fields.t_hat[usable] - t[usable]) * fields.d_omega_hat_dw[usable] / den[usable]
    return out, fields.mask & ~usable


def gd_estimate2(fields: EstimatorFields, freq_axis=None):
    """Second-order GD ``(d_w t_hat / d_w omega_hat)(w - omega_hat) + t_hat``.

    Returns ``(t_hat2, fallback)`` as for :func:`if_estimate2`.
    """
    if freq_axis is None:
        freq_axis = fields.freq_axis
    den = fields.d_omega_hat_dw
    usable = fields.mask & fields.dw_mask & (np.abs(den) > EPS_DW_OMEGA_HAT)
    out = fields.t_hat.copy()
    w = np.broadcast_to(np.asarray(freq_axis)[:, None], out.shape)
    out[usable] += fields.d_t_hat_dw[usable] / den[usable] * (w[usable] - fields.omega_hat[usable])
    return out, fields.mask & ~usable


def intercept_estimate(fields: EstimatorFields, t_hat2=None) -> np.ndarray:
    """Per-pixel LFM intercept ``b = w - t_hat2 (d_w omega_hat / d_w t_hat)``.

    Pixels where the ratio is undefined carry NaN.
    """
    if t_hat2 is None:
        t_hat2, _ = gd_estimate2(fields)
    w = np.broadcast_to(fields.freq_axis[:, None], t_hat2.shape)
    den = fields.d_t_hat_dw
    usable = fields.mask & fields.dw_mask & (np.abs(den) > EPS_DW_T_HAT * fields.beta)
    b = np.full(t_hat2.shape, np.nan)
    b[usable] = w[usable] - t_hat2[usable] * fields.d_omega_hat_dw[usable] / den[usable]
    return b


def rectify_for_set(V: TFGrid, fields: EstimatorFields) -> TFGrid:
    """Scale ``V`` by ``sqrt((1 - i beta c) / (2 pi beta))`` so the IF ridge reads ``s(t)``.

    Pixels with an infinite or unavailable chirp rate are zeroed.
    """
    beta = fields.beta
    c = fields.chirp_rate
    ok = fields.mask & fields.chirp_mask & np.isfinite(c)
    factor = np.zeros(V.shape, dtype=np.complex128)
    factor[ok] = np.sqrt((1.0 - 1j * beta * c[ok]) / (2.0 * np.pi * beta))
    return V.with_values(V.values * factor, kind="STFT_RS")


def tet_gain(c, beta):
    """Complex gain mapping ``V`` on the GD ridge to the spectrum ``s_hat(w)``, less the
    linear phase term.

    ``sqrt(1/(beta |c|) - i sgn c) exp(i sgn(c) pi/4)``; tends to 1 as ``|c| -> inf``.
    """
    c = np.asarray(c, dtype=float)
    sgn = np.sign(c)
    inv = np.zeros_like(c)
    fin = np.isfinite(c)
    inv[fin] = 1.0 / (beta * np.abs(c[fin]))
    return np.sqrt(inv - 1j * sgn) * np.exp(1j * sgn * np.pi / 4.0)


def rectify_for_tet(V: TFGrid, fields: EstimatorFields, eps_c=None) -> TFGrid:
    """Amplitude and phase rectification so GD-ridge pixels read ``s_hat(w)``.

    The linear phase ``exp(-i w t)`` uses the pixel's own time, which equals
    the GD on the kept ridge pixels. Pixels with ``|c| <= eps_c`` (default
    ``1e-6 * beta**(-2/3)``) are zeroed.
    """
    beta = fields.beta
    if eps_c is None:
        eps_c = 1e-6 * beta ** (-2.0 / 3.0)
    c = fields.chirp_rate
    ok = fields.mask & fields.chirp_mask & (np.abs(c) > eps_c)
    factor = np.zeros(V.shape, dtype=np.complex128)
    factor[ok] = tet_gain(c[ok], beta)
    phase = np.exp(-1j * np.outer(V.freq_axis_rad_s, V.time_axis_s))
    return V.with_values(V.values * factor * phase, kind="STFT_RT")
