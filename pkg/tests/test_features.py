import numpy as np
import pytest

from rflabel.errors import DegenerateFrameError
from rflabel.features import (
    FEATURE_NAMES,
    IMAGE_SIZE,
    SCALE_EXPONENTS,
    denormalize,
    extract_features,
    feature_matrix,
    fit_normalizer,
    normalize,
    rasterize,
    write_feature_csv,
    write_pgm,
)
from rflabel.registry import CoupletLabel
from rflabel.signals import NOISELESS, IQFrame, modulate


def _frame(samples, frame_id=0):
    return IQFrame(samples=np.asarray(samples, dtype=np.complex128), snr_db=NOISELESS,
                   truth=CoupletLabel("bpsk", "wide_soft_cont"), id=frame_id, seed=0)


def test_identical_frames_identical_vectors():
    f = modulate("qam16", "wide_soft_burst", 512, seed=3)
    a = extract_features(f).values
    b = extract_features(f).values
    assert np.array_equal(a, b)


def test_feature_dimension_and_finiteness():
    f = modulate("gfsk", "wide_sharp_burst", 512, seed=1)
    v = extract_features(f).values
    assert v.shape == (len(FEATURE_NAMES),)
    assert np.all(np.isfinite(v))


def test_scaling_law_follows_documented_exponents():
    # oracle: recompute features on the scaled frame and compare against the
    # per-feature exponent table
    base = modulate("qam64", "narrow_sharp_burst", 1024, seed=5)
    c = 3.7
    scaled = _frame(base.samples * c)
    v0 = extract_features(base).values
    v1 = extract_features(scaled).values
    for i, name in enumerate(FEATURE_NAMES):
        expected = v0[i] * c ** SCALE_EXPONENTS[name]
        assert v1[i] == pytest.approx(expected, rel=1e-9, abs=1e-9), name


def test_bpsk_qpsk_order_four_cumulant_separation():
    # oracle: the order-4 self-cumulant entry must sit clearly lower for BPSK
    # than for QPSK on noiseless frames (classic constellation separation)
    idx = FEATURE_NAMES.index("c40_re_norm")
    gaps = []
    for seed in range(5):
        b = extract_features(modulate("bpsk", "wide_soft_cont", 4096, seed=seed)).values
        q = extract_features(modulate("qpsk", "wide_soft_cont", 4096, seed=seed)).values
        assert b[idx] < q[idx] < 0.0
        gaps.append(q[idx] - b[idx])
    assert min(gaps) > 0.1


def test_all_zero_frame_is_degenerate():
    with pytest.raises(DegenerateFrameError):
        extract_features(_frame(np.zeros(256)))


def test_normalizer_zero_mean_unit_std():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(100, 16)) * rng.uniform(0.5, 3.0, size=16)
    stats = fit_normalizer(X)
    Xn = normalize(X, stats)
    assert np.all(np.abs(Xn.mean(axis=0)) < 1e-9)
    assert np.allclose(Xn.std(axis=0), 1.0, atol=1e-9)


def test_normalizer_hand_case():
    stats = fit_normalizer(np.array([[0.0], [2.0]]))
    assert stats.mean[0] == pytest.approx(1.0)
    assert stats.std[0] == pytest.approx(1.0)
    assert normalize(np.array([2.0]), stats)[0] == pytest.approx(1.0)


def test_normalizer_single_vector_floors_std():
    stats = fit_normalizer(np.array([[3.0, -1.0]]))
    assert np.all(stats.std == 1e-8)
    assert np.allclose(normalize(np.array([3.0, -1.0]), stats), 0.0)


def test_normalize_round_trip():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(50, 16))
    stats = fit_normalizer(X)
    v = rng.normal(size=16)
    back = denormalize(normalize(v, stats), stats)
    assert np.allclose(back, v, rtol=1e-9, atol=1e-12)


def test_fit_normalizer_rejects_empty():
    with pytest.raises(ValueError):
        fit_normalizer(np.empty((0, 16)))


def test_rasterize_dimensions_and_range():
    f = modulate("qpsk", "wide_sharp_cont", 1024, seed=0)
    grid = rasterize(f)
    assert grid.pixels.shape == (IMAGE_SIZE, IMAGE_SIZE)
    assert grid.pixels.dtype == np.uint8


def test_rasterize_zero_frame_all_black():
    grid = rasterize(_frame(np.zeros(512)))
    assert not grid.pixels.any()


def test_rasterize_single_tone_ridge_row():
    # oracle: the dominant row must be the FFT bin nearest the tone frequency
    tone_freq = 0.125
    n = np.arange(2048)
    frame = _frame(np.exp(2j * np.pi * tone_freq * n))
    grid = rasterize(frame)
    row_energy = grid.pixels.astype(float).sum(axis=1)
    bins = np.fft.fftshift(np.fft.fftfreq(IMAGE_SIZE))
    expected_row = int(np.argmin(np.abs(bins - tone_freq)))
    assert int(np.argmax(row_energy)) == expected_row


def test_rasterize_rejects_short_frames():
    with pytest.raises(ValueError):
        rasterize(_frame(np.ones(100)))


def test_write_pgm(tmp_path):
    grid = rasterize(modulate("bpsk", "wide_soft_cont", 512, seed=1))
    path = tmp_path / "frame.pgm"
    write_pgm(grid, path)
    data = path.read_bytes()
    assert data.startswith(b"P5\n224 224\n255\n")
    assert len(data) == len(b"P5\n224 224\n255\n") + 224 * 224


def test_feature_csv_layout(tmp_path, tiny_dataset):
    frames = tiny_dataset.frames[:5]
    path = tmp_path / "features.csv"
    write_feature_csv(path, frames)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "frame_id,couplet,snr_db," + ",".join(FEATURE_NAMES)
    assert len(lines) == 6


def test_feature_matrix_shapes(tiny_features):
    X, labels = tiny_features
    assert X.shape == (len(labels), len(FEATURE_NAMES))
    assert np.all(np.isfinite(X))
