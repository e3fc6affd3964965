"""Registries of modulation schemes, signal classes, and label couplets.

The dataset labels joint (modulation, signal class) couplets.  Six linear /
nonlinear modulations and eight transmission profiles are registered; nine
couplets drawn from their product form the default label set.  The profile
and couplet registries are synthetic stand-ins (the original capture campaign
behind this label structure is not public) and are documented as such in the
README.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RegistryError


@dataclass(frozen=True)
class ModScheme:
    """A modulation identified by name.

    ``constellation`` holds the unit-average-power symbol points for linear
    schemes and is ``None`` for nonlinear ones (GFSK).
    """

    name: str
    constellation: tuple[complex, ...] | None

    @property
    def is_linear(self) -> bool:
        return self.constellation is not None


@dataclass(frozen=True)
class SignalClass:
    """A transmission profile: pulse shaping plus frame structure.

    sps:      samples per symbol (controls occupied bandwidth)
    rolloff:  root-raised-cosine roll-off factor
    burst:    True for on/off burst framing, False for continuous
    """

    name: str
    sps: int
    rolloff: float
    burst: bool


@dataclass(frozen=True, order=True)
class CoupletLabel:
    """The joint (modulation, signal class) label attached to one frame."""

    modulation: str
    signal: str

    def __str__(self) -> str:
        return f"{self.modulation}:{self.signal}"

    @classmethod
    def parse(cls, text: str) -> "CoupletLabel":
        mod, sep, sig = text.partition(":")
        if not sep or not mod or not sig:
            raise RegistryError(f"malformed couplet string {text!r}, expected 'mod:sig'")
        return cls(mod, sig)


def _unit_power(points: list[complex]) -> tuple[complex, ...]:
    arr = np.asarray(points, dtype=np.complex128)
    arr = arr / np.sqrt(np.mean(np.abs(arr) ** 2))
    return tuple(arr.tolist())


def _psk(order: int, phase0: float = 0.0) -> tuple[complex, ...]:
    angles = phase0 + 2.0 * np.pi * np.arange(order) / order
    return _unit_power(list(np.exp(1j * angles)))

def _qam(side: int) -> tuple[complex, ...]:
    levels = np.arange(-side + 1, side, 2, dtype=float)
    return _unit_power([complex(i, q) for i in levels for q in levels])


MOD_SCHEMES: dict[str, ModScheme] = {
    "bpsk": ModScheme("bpsk", _psk(2)),
    "qpsk": ModScheme("qpsk", _psk(4, phase0=np.pi / 4)),
    "psk8": ModScheme("psk8", _psk(8)),
    "qam16": ModScheme("qam16", _qam(4)),
    "qam64": ModScheme("qam64", _qam(8)),
    "gfsk": ModScheme("gfsk", None),
}

# Eight profiles: {wide sps=4, narrow sps=8} x {soft b=0.5, sharp b=0.25}
# x {continuous, burst}.
SIGNAL_CLASSES: dict[str, SignalClass] = {
    sc.name: sc
    for sc in [
        SignalClass("wide_soft_cont", sps=4, rolloff=0.50, burst=False),
        SignalClass("wide_soft_burst", sps=4, rolloff=0.50, burst=True),
        SignalClass("wide_sharp_cont", sps=4, rolloff=0.25, burst=False),
        SignalClass("wide_sharp_burst", sps=4, rolloff=0.25, burst=True),
        SignalClass("narrow_soft_cont", sps=8, rolloff=0.50, burst=False),
        SignalClass("narrow_soft_burst", sps=8, rolloff=0.50, burst=True),
        SignalClass("narrow_sharp_cont", sps=8, rolloff=0.25, burst=False),
        SignalClass("narrow_sharp_burst", sps=8, rolloff=0.25, burst=True),
    ]
}

# Nine registered couplets covering all six modulations and all eight
# profiles.  Same-modulation couplets differ in bandwidth or framing; the
# qpsk/qam16 pair shares the wide burst profile on purpose: the per-frame
# burst duty couples into the power-normalized statistics, so that pair is
# only separable jointly, not dimension-by-dimension.
DEFAULT_COUPLETS: tuple[CoupletLabel, ...] = (
    CoupletLabel("bpsk", "wide_soft_cont"),
    CoupletLabel("qpsk", "wide_sharp_cont"),
    CoupletLabel("psk8", "narrow_soft_cont"),
    CoupletLabel("qpsk", "wide_soft_burst"),
    CoupletLabel("qam16", "wide_soft_burst"),
    CoupletLabel("gfsk", "wide_sharp_burst"),
    CoupletLabel("bpsk", "narrow_soft_burst"),
    CoupletLabel("qam64", "narrow_sharp_burst"),
    CoupletLabel("qam16", "narrow_sharp_cont"),
)


def get_scheme(name: str) -> ModScheme:
    try:
        return MOD_SCHEMES[name]
    except KeyError:
        raise RegistryError(f"unknown modulation scheme {name!r}") from None


def get_signal_class(name: str) -> SignalClass:
    try:
        return SIGNAL_CLASSES[name]
    except KeyError:
        raise RegistryError(f"unknown signal class {name!r}") from None


def validate_couplet(label: CoupletLabel) -> CoupletLabel:
    """Check that both halves of a couplet name registered entries."""
    get_scheme(label.modulation)
    get_signal_class(label.signal)
    return label
