"""Dataset construction and on-disk container.

Seeds: every frame gets an independent 64-bit seed hashed out of the master
seed with ``SeedSequence((master_seed, stream, frame_index))`` (stream 1 for
modulation, stream 2 for noise); the shuffle that fixes presentation order
uses stream 3.  Builds are therefore reproducible element-wise and safe to
parallelize over frames.

File layout (little-endian, extension ``.iqds``):

    magic   4s   b"IQDS"
    version u32  1
    hlen    u32  length of the UTF-8 JSON header
    header  JSON: {"format", "version", "spec", "n_frames"}
    then per frame, in presentation order:
        id u32, couplet_index u16, snr_db f32, seed u64,
        frame_len complex64 samples (interleaved I/Q float32)
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetSpecError
from .registry import DEFAULT_COUPLETS, CoupletLabel, validate_couplet
from .signals import IQFrame, add_awgn, modulate

MAGIC = b"IQDS"
FORMAT_VERSION = 1
_RECORD_HEADER = struct.Struct("<IHfQ")

DEFAULT_SNR_LIST = tuple(float(s) for s in range(0, 19, 2))


@dataclass(frozen=True)
class DatasetSpec:
    couplets: tuple[CoupletLabel, ...] = DEFAULT_COUPLETS
    snr_list: tuple[float, ...] = DEFAULT_SNR_LIST
    frames_per_couplet_per_snr: int = 100
    frame_len: int = 1024
    master_seed: int = 0
    # optional truncation of the shuffled build (e.g. to hit an exact session
    # size); class balance is only exact for untruncated builds
    total_frames: int | None = None
    # unit-test override for the nine-couplet rule
    allow_any_couplet_count: bool = False

    def validate(self) -> "DatasetSpec":
        if not self.snr_list:
            raise DatasetSpecError("snr_list must be non-empty")
        if self.frames_per_couplet_per_snr < 1:
            raise DatasetSpecError("frames_per_couplet_per_snr must be >= 1")
        if self.frame_len < 64:
            raise DatasetSpecError("frame_len must be >= 64")
        if len(set(self.couplets)) != len(self.couplets):
            raise DatasetSpecError("duplicate couplets in spec")
        if len(self.couplets) != 9 and not self.allow_any_couplet_count:
            raise DatasetSpecError(
                f"dataset registry uses exactly 9 couplets, got {len(self.couplets)} "
                "(set allow_any_couplet_count for test builds)"
            )
        for c in self.couplets:
            validate_couplet(c)
        if self.total_frames is not None and self.total_frames < 1:
            raise DatasetSpecError("total_frames must be >= 1 when given")
        return self

    def to_dict(self) -> dict:
        return {
            "couplets": [str(c) for c in self.couplets],
            "snr_list": list(self.snr_list),
            "frames_per_couplet_per_snr": self.frames_per_couplet_per_snr,
            "frame_len": self.frame_len,
            "master_seed": self.master_seed,
            "total_frames": self.total_frames,
            "allow_any_couplet_count": self.allow_any_couplet_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        return cls(
            couplets=tuple(CoupletLabel.parse(c) for c in d["couplets"]),
            snr_list=tuple(float(s) for s in d["snr_list"]),
            frames_per_couplet_per_snr=int(d["frames_per_couplet_per_snr"]),
            frame_len=int(d["frame_len"]),
            master_seed=int(d["master_seed"]),
            total_frames=d.get("total_frames"),
            allow_any_couplet_count=bool(d.get("allow_any_couplet_count", False)),
        )


@dataclass
class Dataset:
    spec: DatasetSpec
    frames: list[IQFrame] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)

    def by_id(self) -> dict[int, IQFrame]:
        return {f.id: f for f in self.frames}

    def truth_map(self) -> dict[int, CoupletLabel]:
        return {f.id: f.truth for f in self.frames}


def derive_seed(*entropy: int) -> int:
    """Counter-hash a 64-bit child seed out of integer entropy words."""
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def build_dataset(spec: DatasetSpec) -> Dataset:
    """Generate |couplets| x |snr_list| x frames_per_couplet_per_snr frames."""
    spec.validate()
    frames: list[IQFrame] = []
    counter = 0
    for couplet in spec.couplets:
        for snr in spec.snr_list:
            for _ in range(spec.frames_per_couplet_per_snr):
                mod_seed = derive_seed(spec.master_seed, 1, counter)
                noise_seed = derive_seed(spec.master_seed, 2, counter)
                frame = modulate(
                    couplet.modulation, couplet.signal, spec.frame_len,
                    seed=mod_seed, frame_id=counter,
                )
                frames.append(add_awgn(frame, snr, seed=noise_seed))
                counter += 1
    shuffle_rng = np.random.default_rng(derive_seed(spec.master_seed, 3))
    order = shuffle_rng.permutation(len(frames))
    frames = [frames[i] for i in order]
    if spec.total_frames is not None:
        if spec.total_frames > len(frames):
            raise DatasetSpecError(
                f"total_frames={spec.total_frames} exceeds build size {len(frames)}"
            )
        frames = frames[: spec.total_frames]
    return Dataset(spec=spec, frames=frames)


def save_dataset(ds: Dataset, path) -> None:
    header = json.dumps(
        {
            "format": "rflabel-dataset",
            "version": FORMAT_VERSION,
            "spec": ds.spec.to_dict(),
            "n_frames": len(ds.frames),
        },
        sort_keys=True,
    ).encode("utf-8")
    couplet_index = {c: i for i, c in enumerate(ds.spec.couplets)}
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        for frame in ds.frames:
            fh.write(
                _RECORD_HEADER.pack(
                    frame.id, couplet_index[frame.truth], frame.snr_db, frame.seed
                )
            )
            fh.write(np.asarray(frame.samples, dtype=np.complex64).tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise DatasetSpecError(f"{path}: not a dataset file (bad magic)")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise DatasetSpecError(f"{path}: unsupported container version {version}")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        spec = DatasetSpec.from_dict(header["spec"])
        frames = []
        for _ in range(header["n_frames"]):
            fid, cidx, snr, seed = _RECORD_HEADER.unpack(fh.read(_RECORD_HEADER.size))
            raw = fh.read(8 * spec.frame_len)
            samples = np.frombuffer(raw, dtype=np.complex64).astype(np.complex128)
            frames.append(
                IQFrame(samples=samples, snr_db=float(snr),
                        truth=spec.couplets[cidx], id=fid, seed=seed)
            )
    return Dataset(spec=spec, frames=frames)
