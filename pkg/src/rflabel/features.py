"""Fixed-dimension feature vectors and image rasterization for I/Q frames.

The 16 features are the classic statistical family for modulation work:
envelope statistics, phase/frequency statistics, self- and modulus
cumulants of orders 2 through 8 (normalized by signal power so they are
scale-free), and two spectral-shape measures.  ``SCALE_EXPONENTS`` documents
how each entry responds to an amplitude rescale of the input frame:
feature(c * x) = c**exponent * feature(x).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateFrameError
from .signals import IQFrame

FEATURE_NAMES = (
    "env_cv",
    "env_kurtosis",
    "papr",
    "phase_std",
    "freq_std",
    "mean_power",
    "c20_norm",
    "c40_re_norm",
    "c40_mag_norm",
    "c41_mag_norm",
    "c42_norm",
    "c60_mag_norm",
    "c80_mag_norm",
    "spectral_symmetry",
    "occupied_bw90",
    "active_fraction",
)

SCALE_EXPONENTS = {name: 0 for name in FEATURE_NAMES}
SCALE_EXPONENTS["mean_power"] = 2

N_FEATURES = len(FEATURE_NAMES)

IMAGE_SIZE = 224
ACTIVE_POWER_THRESHOLD = 0.25  # relative to mean frame power
STD_FLOOR = 1e-8


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    frame_id: int


@dataclass(frozen=True)
class ImageGrid:
    pixels: np.ndarray  # uint8, IMAGE_SIZE x IMAGE_SIZE
    frame_id: int


def extract_features(frame: IQFrame) -> FeatureVector:
    """Compute the 16-entry feature vector of one frame.

    Pure function of the samples; raises DegenerateFrameError on an
    (effectively) all-zero frame, where phase statistics are undefined.
    """
    x = np.asarray(frame.samples, dtype=np.complex128)
    if len(x) < 64:
        raise ValueError(f"frame too short for features: {len(x)} < 64")
    power = np.abs(x) ** 2
    mean_power = float(np.mean(power))
    if mean_power < 1e-24:
        raise DegenerateFrameError("all-zero frame: phase statistics undefined")

    amp = np.abs(x)
    amp_mean = float(np.mean(amp))
    amp_std = float(np.std(amp))
    env_cv = amp_std / amp_mean
    if amp_std > 1e-12 * amp_mean:
        env_kurt = float(np.mean((amp - amp_mean) ** 4)) / amp_std**4
    else:
        env_kurt = 0.0  # constant envelope
    papr = float(np.max(power)) / mean_power

    active = power > ACTIVE_POWER_THRESHOLD * mean_power
    active_fraction = float(np.mean(active))
    # exact zeros (burst gaps in noiseless frames) carry no phase; the angle
    # of a zero product is a signed-zero artifact, so drop those samples
    nonzero = amp > 0.0
    phase_std = float(np.std(np.angle(x[nonzero]))) if nonzero.any() else 0.0
    lag = x[1:] * np.conj(x[:-1])
    lag = lag[np.abs(lag) > 0.0]
    freq_std = float(np.std(np.angle(lag))) if len(lag) else 0.0

    xc = x - np.mean(x)
    c21 = float(np.mean(np.abs(xc) ** 2))
    m20 = np.mean(xc**2)
    m30 = np.mean(xc**3)
    m40 = np.mean(xc**4)
    m60 = np.mean(xc**6)
    m80 = np.mean(xc**8)
    m41 = np.mean(xc**3 * np.conj(xc))
    m42 = float(np.mean(np.abs(xc) ** 4))
    c40 = m40 - 3 * m20**2
    c41 = m41 - 3 * m20 * c21
    c42 = m42 - abs(m20) ** 2 - 2 * c21**2
    # univariate (self) cumulants of order 6 and 8 for a zero-mean variable
    c60 = m60 - 15 * m40 * m20 - 10 * m30**2 + 30 * m20**3
    c80 = m80 - 28 * m60 * m20 - 35 * m40**2 + 420 * m40 * m20**2 - 630 * m20**4

    spectrum = np.abs(np.fft.fft(xc)) ** 2
    total = float(np.sum(spectrum))
    half = len(x) // 2
    upper = float(np.sum(spectrum[1:half]))
    lower = float(np.sum(spectrum[half:]))
    symmetry = (upper - lower) / (upper + lower) if (upper + lower) > 0 else 0.0
    # smallest centered band holding 90% of the power, as a fraction of fs
    freqs = np.fft.fftfreq(len(x))
    order = np.argsort(np.abs(freqs), kind="stable")
    cum = np.cumsum(spectrum[order])
    n_bins = int(np.searchsorted(cum, 0.9 * total) + 1)
    occ_bw90 = n_bins / len(x)

    values = np.array(
        [
            env_cv,
            env_kurt,
            papr,
            phase_std,
            freq_std,
            mean_power,
            abs(m20) / c21,
            c40.real / c21**2,
            abs(c40) / c21**2,
            abs(c41) / c21**2,
            c42 / c21**2,
            abs(c60) / c21**3,
            abs(c80) / c21**4,
            symmetry,
            occ_bw90,
            active_fraction,
        ]
    )
    if not np.all(np.isfinite(values)):
        raise DegenerateFrameError("non-finite feature value")
    return FeatureVector(values=values, frame_id=frame.id)


@dataclass(frozen=True)
class NormStats:
    """Per-dimension mean and (floored) standard deviation of a training split."""

    mean: np.ndarray
    std: np.ndarray


def fit_normalizer(train: np.ndarray) -> NormStats:
    train = np.atleast_2d(np.asarray(train, dtype=float))
    if train.shape[0] == 0:
        raise ValueError("empty training set")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std = np.where(std < STD_FLOOR, STD_FLOOR, std)
    return NormStats(mean=mean, std=std)


def normalize(values: np.ndarray, stats: NormStats) -> np.ndarray:
    return (np.asarray(values, dtype=float) - stats.mean) / stats.std


def denormalize(values: np.ndarray, stats: NormStats) -> np.ndarray:
    return np.asarray(values, dtype=float) * stats.std + stats.mean


def rasterize(frame: IQFrame) -> ImageGrid:
    """Short-time Fourier magnitude image: 224 frequency bins x 224 hops.

    Hann-windowed 224-sample segments at 224 evenly spaced start offsets,
    two-sided spectrum centered on DC, min-max scaled to 0..255.
    """
    x = np.asarray(frame.samples, dtype=np.complex128)
    n = IMAGE_SIZE
    if len(x) < n:
        raise ValueError(f"frame too short to rasterize: {len(x)} < {n}")
    starts = np.rint(np.linspace(0, len(x) - n, n)).astype(int)
    segments = x[starts[None, :] + np.arange(n)[:, None]]  # (sample, hop)
    window = np.hanning(n)
    spec = np.abs(np.fft.fftshift(np.fft.fft(segments * window[:, None], axis=0), axes=0))
    lo, hi = float(spec.min()), float(spec.max())
    if hi - lo < 1e-30:
        pixels = np.zeros((n, n), dtype=np.uint8)
    else:
        pixels = np.rint((spec - lo) / (hi - lo) * 255).astype(np.uint8)
    return ImageGrid(pixels=pixels, frame_id=frame.id)


def write_pgm(grid: ImageGrid, path: str | Path) -> None:
    """Binary (P5) PGM export of a rasterized frame."""
    h, w = grid.pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(grid.pixels.tobytes())


def feature_matrix(frames) -> tuple[np.ndarray, list]:
    """Stack per-frame feature vectors into an (n_frames, 16) matrix."""
    rows = [extract_features(f).values for f in frames]
    return np.vstack(rows), [f.truth for f in frames]


def write_feature_csv(path: str | Path, frames, matrix: np.ndarray | None = None) -> None:
    """One row per frame: frame_id, couplet, snr_db, then the named features."""
    if matrix is None:
        matrix, _ = feature_matrix(frames)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_id", "couplet", "snr_db", *FEATURE_NAMES])
        for frame, row in zip(frames, matrix):
            writer.writerow([frame.id, str(frame.truth), repr(float(frame.snr_db)),
                             *[repr(float(v)) for v in row]])
