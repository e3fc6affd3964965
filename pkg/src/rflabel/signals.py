"""Synthetic complex-baseband frame generation.

Frames are produced in two steps: ``modulate`` renders a noiseless,
unit-power frame for a (modulation, signal class) couplet, and ``add_awgn``
injects complex Gaussian noise at a requested SNR.  Both are pure functions
of their seed, so any frame can be regenerated bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .registry import CoupletLabel, get_scheme, get_signal_class

NOISELESS = float("inf")

RRC_SPAN = 8          # RRC filter half-length, in symbols
GFSK_BT = 0.35        # Gaussian filter bandwidth-time product
GFSK_MOD_INDEX = 0.5
BURST_DUTY_RANGE = (0.25, 0.85)  # per-frame uniform draw of the active fraction
BURST_RAMP_SYMBOLS = 2


@dataclass(frozen=True)
class IQFrame:
    """One complex baseband capture with its ground-truth couplet."""

    samples: np.ndarray
    snr_db: float
    truth: CoupletLabel
    id: int
    seed: int

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def is_noiseless(self) -> bool:
        return self.snr_db == NOISELESS


def rrc_taps(sps: int, rolloff: float, span: int = RRC_SPAN) -> np.ndarray:
    """Root-raised-cosine impulse response over ``span`` symbols each side."""
    n = np.arange(-span * sps, span * sps + 1, dtype=float)
    t = n / sps
    beta = rolloff
    taps = np.empty_like(t)
    # generic formula with its two removable singularities patched
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.sin(np.pi * t * (1 - beta)) + 4 * beta * t * np.cos(np.pi * t * (1 + beta))
        den = np.pi * t * (1 - (4 * beta * t) ** 2)
        taps = num / den
    taps[t == 0] = 1 - beta + 4 * beta / np.pi
    singular = np.isclose(np.abs(t), 1 / (4 * beta))
    taps[singular] = (beta / np.sqrt(2)) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
        + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
    )
    return taps / np.sqrt(np.sum(taps**2))


def gaussian_taps(sps: int, bt: float = GFSK_BT, span: int = 3) -> np.ndarray:
    """Gaussian frequency-pulse filter, normalized to unit sum."""
    t = np.arange(-span * sps, span * sps + 1, dtype=float) / sps
    sigma = np.sqrt(np.log(2)) / (2 * np.pi * bt)
    taps = np.exp(-(t**2) / (2 * sigma**2))
    return taps / np.sum(taps)


def _burst_envelope(frame_len: int, sps: int, rng: np.random.Generator) -> np.ndarray:
    """On/off mask with smooth ramps; each frame draws its own active fraction."""
    duty = float(rng.uniform(*BURST_DUTY_RANGE))
    active = int(round(frame_len * duty))
    ramp_len = BURST_RAMP_SYMBOLS * sps
    start = int(rng.integers(0, frame_len - active + 1))
    env = np.zeros(frame_len)
    env[start : start + active] = 1.0
    ramp = 0.5 * (1 - np.cos(np.pi * np.arange(ramp_len) / ramp_len))
    env[start : start + ramp_len] *= ramp
    env[start + active - ramp_len : start + active] *= ramp[::-1]
    return env


def _linear_baseband(constellation, sps, rolloff, frame_len, rng):
    n_sym = frame_len // sps + 4 * RRC_SPAN
    points = np.asarray(constellation, dtype=np.complex128)
    symbols = points[rng.integers(0, len(points), size=n_sym)]
    upsampled = np.zeros(n_sym * sps, dtype=np.complex128)
    upsampled[::sps] = symbols
    shaped = np.convolve(upsampled, rrc_taps(sps, rolloff))
    start = RRC_SPAN * sps  # skip the filter's leading transient
    return shaped[start : start + frame_len]


def _gfsk_baseband(sps, frame_len, rng):
    n_sym = frame_len // sps + 8
    bits = rng.integers(0, 2, size=n_sym) * 2.0 - 1.0
    nrz = np.repeat(bits, sps)
    freq = np.convolve(nrz, gaussian_taps(sps))
    phase = np.cumsum(freq) * np.pi * GFSK_MOD_INDEX / sps
    start = 3 * sps
    return np.exp(1j * phase[start : start + frame_len])


def modulate(scheme_name: str, signal_name: str, frame_len: int, seed: int,
             frame_id: int = 0) -> IQFrame:
    """Render a noiseless unit-power frame for one couplet.

    Deterministic for a fixed (scheme, signal class, frame_len, seed).
    """
    if frame_len < 64:
        raise ValueError(f"frame_len must be >= 64, got {frame_len}")
    scheme = get_scheme(scheme_name)
    sig = get_signal_class(signal_name)
    rng = np.random.default_rng(seed)

    if scheme.is_linear:
        samples = _linear_baseband(scheme.constellation, sig.sps, sig.rolloff, frame_len, rng)
    else:
        samples = _gfsk_baseband(sig.sps, frame_len, rng)

    if sig.burst:
        samples = samples * _burst_envelope(frame_len, sig.sps, rng)

    samples = samples / np.sqrt(np.mean(np.abs(samples) ** 2))
    return IQFrame(
        samples=samples,
        snr_db=NOISELESS,
        truth=CoupletLabel(scheme_name, signal_name),
        id=frame_id,
        seed=seed,
    )


def add_awgn(frame: IQFrame, snr_db: float, seed: int) -> IQFrame:
    """Add complex Gaussian noise so the frame hits ``snr_db`` exactly.

    The noise block is drawn i.i.d. and then rescaled so its realized power
    equals signal_power / 10^(snr_db/10); the recorded SNR therefore matches
    the measured one to float precision on every frame.
    """
    if not frame.is_noiseless:
        raise ValueError("frame already carries noise; add_awgn needs a noiseless frame")
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    rng = np.random.default_rng(seed)
    signal_power = float(np.mean(np.abs(frame.samples) ** 2))
    target = signal_power / 10.0 ** (snr_db / 10.0)
    n = len(frame.samples)
    noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(target / 2)
    noise *= np.sqrt(target / np.mean(np.abs(noise) ** 2))
    return replace(frame, samples=frame.samples + noise, snr_db=float(snr_db))


def measured_snr_db(clean: np.ndarray, noisy: np.ndarray) -> float:
    """Empirical SNR of a noisy frame given its clean counterpart."""
    noise = noisy - clean
    return float(10 * np.log10(np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noise) ** 2)))
