import numpy as np
import pytest

from rflabel.errors import RegistryError
from rflabel.registry import SIGNAL_CLASSES
from rflabel.signals import NOISELESS, add_awgn, measured_snr_db, modulate, rrc_taps


def test_modulate_is_deterministic():
    a = modulate("bpsk", "wide_soft_cont", 128, seed=7)
    b = modulate("bpsk", "wide_soft_cont", 128, seed=7)
    assert np.array_equal(a.samples, b.samples)
    assert a.snr_db == NOISELESS


def test_modulate_seed_changes_output():
    a = modulate("bpsk", "wide_soft_cont", 128, seed=7)
    b = modulate("bpsk", "wide_soft_cont", 128, seed=8)
    assert not np.array_equal(a.samples, b.samples)


def test_modulate_exact_length_and_power():
    frame = modulate("qam64", "narrow_sharp_cont", 1024, seed=3)
    assert len(frame.samples) == 1024
    assert abs(np.mean(np.abs(frame.samples) ** 2) - 1.0) < 1e-6


def test_bpsk_long_frame_power_near_one():
    # direct power computation over a 10^4-sample frame
    frame = modulate("bpsk", "wide_soft_cont", 10_000, seed=1)
    assert abs(np.mean(np.abs(frame.samples) ** 2) - 1.0) < 1e-3


def test_qpsk_noiseless_depulsed_constellation_has_four_points():
    sig = SIGNAL_CLASSES["wide_sharp_cont"]
    frame = modulate("qpsk", "wide_sharp_cont", 4096, seed=5)
    # matched filter turns the root-raised cosine into a Nyquist pulse, so
    # symbol-centre samples cluster on the constellation
    taps = rrc_taps(sig.sps, sig.rolloff)
    filtered = np.convolve(frame.samples, taps)
    delay = (len(taps) - 1) // 2
    symbols = filtered[delay : delay + 4096 : sig.sps]
    symbols = symbols[20:-20]  # drop frame-edge transients
    clusters = {(round(s.real, 1), round(s.imag, 1)) for s in symbols / np.abs(symbols).mean()}
    assert len(clusters) == 4


def test_gfsk_constant_envelope_when_continuous():
    # gfsk is only registered on burst profiles by default; synthesize on a
    # continuous profile to observe the constant envelope directly
    frame = modulate("gfsk", "wide_soft_cont", 512, seed=2)
    amp = np.abs(frame.samples)
    assert np.max(amp) - np.min(amp) < 1e-9


def test_burst_profile_has_quiet_region():
    frame = modulate("qam16", "wide_soft_burst", 1024, seed=9)
    power = np.abs(frame.samples) ** 2
    assert np.mean(power < 1e-6) > 0.1  # a real off region exists


def test_modulate_rejects_short_frames():
    with pytest.raises(ValueError):
        modulate("bpsk", "wide_soft_cont", 32, seed=0)


def test_modulate_rejects_unknown_names():
    with pytest.raises(RegistryError):
        modulate("qam1024", "wide_soft_cont", 128, seed=0)
    with pytest.raises(RegistryError):
        modulate("bpsk", "nosuch", 128, seed=0)


def test_awgn_zero_db_noise_power_matches_signal_power():
    clean = modulate("qpsk", "wide_sharp_cont", 10_000, seed=3)
    noisy = add_awgn(clean, 0.0, seed=4)
    noise = noisy.samples - clean.samples
    ratio = np.mean(np.abs(noise) ** 2) / np.mean(np.abs(clean.samples) ** 2)
    assert abs(ratio - 1.0) < 0.05


def test_awgn_18_db_measured_snr():
    clean = modulate("qam16", "narrow_sharp_cont", 1024, seed=3)
    noisy = add_awgn(clean, 18.0, seed=4)
    assert abs(measured_snr_db(clean.samples, noisy.samples) - 18.0) < 0.5


def test_awgn_rejects_infinite_snr_request():
    clean = modulate("bpsk", "wide_soft_cont", 128, seed=0)
    with pytest.raises(ValueError):
        add_awgn(clean, float("inf"), seed=1)


def test_awgn_rejects_already_noisy_frame():
    clean = modulate("bpsk", "wide_soft_cont", 128, seed=0)
    noisy = add_awgn(clean, 10.0, seed=1)
    with pytest.raises(ValueError):
        add_awgn(noisy, 10.0, seed=2)


def test_awgn_deterministic():
    clean = modulate("psk8", "narrow_soft_cont", 256, seed=0)
    a = add_awgn(clean, 6.0, seed=11)
    b = add_awgn(clean, 6.0, seed=11)
    assert np.array_equal(a.samples, b.samples)


def test_rrc_taps_unit_energy():
    taps = rrc_taps(4, 0.25)
    assert abs(np.sum(taps**2) - 1.0) < 1e-12
