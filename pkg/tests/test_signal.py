import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stet.signal import (Signal, add_noise, mix, synth_harmonic, synth_impulse, synth_lfm,
                         synth_phase, to_analytic)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal([], 100.0)
    with pytest.raises(ValueError):
        Signal([1.0], 0.0)
    with pytest.raises(ValueError):
        Signal([1.0], 100.0, start_time_s=np.inf)
    s = Signal([1, 2, 3], 10.0)
    assert s.duration_s == pytest.approx(0.3)
    assert np.allclose(s.times, [0, 0.1, 0.2])
    assert s.is_real


def test_samples_are_read_only():
    s = synth_harmonic(1.0, 2 * np.pi * 5, 1.0, 100.0)
    with pytest.raises(ValueError):
        s.samples[0] = 0


def test_harmonic_first_sample_and_modulus():
    s = synth_harmonic(1.0, 2 * np.pi * 100, 1.0, 1000.0)
    assert len(s) == 1000
    assert s.samples[0] == 1 + 0j
    s2 = synth_harmonic(2.0, 2 * np.pi * 50, 1.0, 1000.0)
    assert np.allclose(np.abs(s2.samples), 2.0, atol=1e-12, rtol=0)


def test_harmonic_zero_amplitude_is_zero():
    s = synth_harmonic(0.0, 2 * np.pi * 10, 0.5, 100.0)
    assert not np.any(s.samples)


def test_harmonic_rejects_bad_arguments():
    with pytest.raises(ValueError):
        synth_harmonic(-1.0, 1.0, 1.0, 100.0)
    with pytest.raises(ValueError):
        synth_harmonic(1.0, 1.0, 0.0, 100.0)
    with pytest.raises(ValueError):
        synth_harmonic(1.0, 1.0, 1.0, -5.0)
    with pytest.raises(ValueError):
        synth_harmonic(1.0, 2 * np.pi * 60, 1.0, 100.0)  # fs <= omega0/pi


def test_impulse_placement_and_area():
    s = synth_impulse(1.0, 0.5, 1.0, 1000.0)
    assert np.flatnonzero(s.samples).tolist() == [500]
    s0 = synth_impulse(1.0, 0.0, 1.0, 1000.0)
    assert np.flatnonzero(s0.samples).tolist() == [0]


@given(A=st.floats(0.01, 100), frac=st.floats(0, 0.99), fs=st.sampled_from([50.0, 100.0, 1000.0]))
@settings(max_examples=40, deadline=None)
def test_impulse_unit_area(A, frac, fs):
    s = synth_impulse(A, frac * 1.0, 1.0, fs)
    assert np.sum(s.samples).real / fs == pytest.approx(A, rel=1e-12)
    assert np.count_nonzero(s.samples) == 1


def test_impulse_outside_record():
    with pytest.raises(ValueError):
        synth_impulse(1.0, 1.0, 1.0, 100.0)
    with pytest.raises(ValueError):
        synth_impulse(1.0, -0.1, 1.0, 100.0)


def test_lfm_if_law_and_phase_increments():
    fs = 2000.0
    b, c = 2 * np.pi * 10, 2 * np.pi * 100
    s = synth_lfm(1.0, 0.0, b, c, 1.0, fs)
    t = s.times
    # IF sweeps 10 -> 110 Hz
    assert (b + c * t[0]) / (2 * np.pi) == pytest.approx(10)
    assert (b + c * 1.0) / (2 * np.pi) == pytest.approx(110)
    dphi = np.angle(s.samples[1:] * np.conj(s.samples[:-1]))
    # the forward difference of the phase sits at the midpoint of the step
    mid = t[:-1] + 0.5 / fs
    assert np.allclose(dphi, (b + c * mid) / fs, atol=1e-9)
    assert np.allclose(np.abs(s.samples), 1.0, atol=1e-12, rtol=0)


def test_lfm_zero_rate_is_bitwise_harmonic():
    a, b = 0.4, 2 * np.pi * 12
    lfm = synth_lfm(1.5, a, b, 0.0, 1.0, 200.0)
    tone = synth_harmonic(1.5, b, 1.0, 200.0, phase=a)
    assert np.array_equal(lfm.samples, tone.samples)


def test_lfm_band_violation_reports_time():
    with pytest.raises(ValueError, match="t="):
        synth_lfm(1.0, 0.0, 2 * np.pi * 10, -2 * np.pi * 50, 1.0, 200.0)


def test_synth_phase_matches_lfm():
    b, c = 30.0, 40.0
    s = synth_phase(1.0, lambda t: b * t + 0.5 * c * t ** 2, 1.0, 100.0)
    assert np.allclose(s.samples, synth_lfm(1.0, 0.0, b, c, 1.0, 100.0).samples)


def test_mix_identity_and_errors():
    s = synth_harmonic(1.0, 20.0, 1.0, 100.0)
    zero = s.with_samples(np.zeros(len(s)))
    assert np.array_equal(mix([s, zero]).samples, s.samples)
    with pytest.raises(ValueError):
        mix([s, synth_harmonic(1.0, 20.0, 1.0, 200.0)])
    with pytest.raises(ValueError):
        mix([s, synth_harmonic(1.0, 20.0, 0.5, 100.0)])
    with pytest.raises(ValueError):
        mix([])


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_mix_commutative_associative(amps, seed):
    rng = np.random.default_rng(seed)
    sigs = [Signal(a * (rng.standard_normal(64) + 1j * rng.standard_normal(64)), 100.0) for a in amps]
    x, y, z = sigs
    assert np.allclose(mix([x, y]).samples, mix([y, x]).samples, atol=1e-12, rtol=0)
    assert np.allclose(mix([mix([x, y]), z]).samples, mix([x, mix([y, z])]).samples, atol=1e-12, rtol=0)


def test_add_noise_snr_and_determinism():
    s = synth_harmonic(1.0, 20.0, 2.0, 100.0)
    noisy = add_noise(s, 0.0, seed=3)
    noise = noisy.samples - s.samples
    measured = 10 * np.log10(s.power() / np.mean(np.abs(noise) ** 2))
    assert abs(measured) < 0.1
    again = add_noise(s, 0.0, seed=3)
    assert np.array_equal(noisy.samples, again.samples)
    other = add_noise(s, 0.0, seed=4)
    assert not np.array_equal(noisy.samples, other.samples)


def test_add_noise_vanishing():
    s = synth_harmonic(1.0, 20.0, 2.0, 100.0)
    quiet = add_noise(s, 200.0, seed=0)
    assert np.mean(np.abs(quiet.samples - s.samples) ** 2) / s.power() < 1e-6


def test_add_noise_is_complex_circular():
    s = synth_harmonic(1.0, 20.0, 100.0, 100.0)
    noise = add_noise(s, 0.0, seed=1).samples - s.samples
    assert np.var(noise.real) == pytest.approx(np.var(noise.imag), rel=0.05)
    assert abs(np.mean(noise.real * noise.imag)) < 0.02


def test_add_noise_rejects_infinite_snr():
    s = synth_harmonic(1.0, 20.0, 1.0, 100.0)
    with pytest.raises(ValueError):
        add_noise(s, np.inf, 0)


def test_to_analytic_cosine():
    fs, n = 1000.0, 1000
    w0 = 2 * np.pi * 100  # whole number of periods: no leakage
    t = np.arange(n) / fs
    a = to_analytic(Signal(np.cos(w0 * t), fs))
    tone = synth_harmonic(1.0, w0, n / fs, fs)
    inner = slice(50, n - 50)
    assert np.max(np.abs(a.samples[inner] - tone.samples[inner])) < 1e-6


def test_to_analytic_preserves_real_part_and_zero():
    rng = np.random.default_rng(0)
    x = Signal(rng.standard_normal(257), 10.0)
    a = to_analytic(x)
    assert np.allclose(a.samples.real, x.samples.real, atol=1e-12)
    z = to_analytic(Signal(np.zeros(16), 10.0))
    assert not np.any(z.samples)


def test_to_analytic_leaves_analytic_spectrum_unchanged():
    fs, n = 1000.0, 1000
    tone = synth_harmonic(1.0, 2 * np.pi * 100, n / fs, fs)
    # feeding the real part back reproduces the one-sided signal exactly
    back = to_analytic(Signal(tone.samples.real, fs))
    assert np.allclose(back.samples, tone.samples, atol=1e-10)


def test_to_analytic_rejects_complex():
    with pytest.raises(ValueError):
        to_analytic(synth_harmonic(1.0, 20.0, 1.0, 100.0))
