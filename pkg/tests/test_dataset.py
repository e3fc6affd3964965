import hashlib

import numpy as np
import pytest

from rflabel.dataset import DatasetSpec, build_dataset, derive_seed, load_dataset, save_dataset
from rflabel.errors import DatasetSpecError
from rflabel.registry import DEFAULT_COUPLETS
from rflabel.signals import measured_snr_db, modulate

# frozen digest of the container bytes for the pinned spec below; guards the
# documented file layout and the generator's determinism together
GOLDEN_SPEC = DatasetSpec(
    snr_list=(0.0, 18.0), frames_per_couplet_per_snr=1, frame_len=256, master_seed=7
)
GOLDEN_SHA256 = "a6f34fe1b04b46c4029446be6c3157aa3839fe9035d8e00dba74d6554406d717"


def test_build_size_is_product_of_dimensions():
    spec = DatasetSpec(snr_list=(0.0, 6.0), frames_per_couplet_per_snr=2,
                       frame_len=64, master_seed=1)
    ds = build_dataset(spec)
    assert len(ds) == 9 * 2 * 2


def test_build_is_deterministic():
    spec = DatasetSpec(snr_list=(6.0,), frames_per_couplet_per_snr=2,
                       frame_len=128, master_seed=5)
    a, b = build_dataset(spec), build_dataset(spec)
    assert [f.id for f in a.frames] == [f.id for f in b.frames]
    for fa, fb in zip(a.frames, b.frames):
        assert np.array_equal(fa.samples, fb.samples)


def test_class_balance_per_snr():
    spec = DatasetSpec(snr_list=(0.0, 12.0), frames_per_couplet_per_snr=3,
                       frame_len=64, master_seed=2)
    ds = build_dataset(spec)
    counts = {}
    for f in ds.frames:
        counts[(f.truth, f.snr_db)] = counts.get((f.truth, f.snr_db), 0) + 1
    assert set(counts.values()) == {3}
    assert len(counts) == 9 * 2


def test_total_frames_truncation_hits_exact_size():
    spec = DatasetSpec(snr_list=(18.0,), frames_per_couplet_per_snr=627,
                       frame_len=64, master_seed=3, total_frames=5642)
    # build with a short frame_len for speed; size logic is what matters
    ds = build_dataset(spec)
    assert len(ds) == 5642


def test_snr_fidelity_of_every_frame():
    spec = DatasetSpec(snr_list=(0.0, 18.0), frames_per_couplet_per_snr=2,
                       frame_len=1024, master_seed=4)
    ds = build_dataset(spec)
    for f in ds.frames:
        clean = modulate(f.truth.modulation, f.truth.signal, spec.frame_len, seed=f.seed)
        assert abs(measured_snr_db(clean.samples, f.samples) - f.snr_db) < 0.5


def test_couplet_count_enforced_without_override():
    with pytest.raises(DatasetSpecError):
        DatasetSpec(couplets=DEFAULT_COUPLETS[:5], snr_list=(0.0,),
                    frames_per_couplet_per_snr=1).validate()
    spec = DatasetSpec(couplets=DEFAULT_COUPLETS[:5], snr_list=(0.0,), frame_len=64,
                       frames_per_couplet_per_snr=1, allow_any_couplet_count=True)
    assert len(build_dataset(spec)) == 5


def test_spec_validation_errors():
    with pytest.raises(DatasetSpecError):
        DatasetSpec(snr_list=()).validate()
    with pytest.raises(DatasetSpecError):
        DatasetSpec(frames_per_couplet_per_snr=0).validate()
    with pytest.raises(DatasetSpecError):
        DatasetSpec(frame_len=32).validate()
    with pytest.raises(DatasetSpecError):
        DatasetSpec(total_frames=0).validate()


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)


def test_save_load_round_trip(tmp_path):
    spec = DatasetSpec(snr_list=(6.0,), frames_per_couplet_per_snr=1,
                       frame_len=128, master_seed=9)
    ds = build_dataset(spec)
    path = tmp_path / "ds.iqds"
    save_dataset(ds, path)
    loaded = load_dataset(path)
    assert loaded.spec == ds.spec
    assert [f.id for f in loaded.frames] == [f.id for f in ds.frames]
    assert [f.truth for f in loaded.frames] == [f.truth for f in ds.frames]
    for fa, fb in zip(ds.frames, loaded.frames):
        # stored as complex64: equal up to float32 quantization
        assert np.allclose(fa.samples, fb.samples, atol=1e-6)


def test_save_is_byte_stable(tmp_path):
    ds = build_dataset(GOLDEN_SPEC)
    p1, p2 = tmp_path / "a.iqds", tmp_path / "b.iqds"
    save_dataset(ds, p1)
    save_dataset(build_dataset(GOLDEN_SPEC), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_golden_checksum(tmp_path):
    ds = build_dataset(GOLDEN_SPEC)
    path = tmp_path / "golden.iqds"
    save_dataset(ds, path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    assert digest == GOLDEN_SHA256


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.iqds"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(DatasetSpecError):
        load_dataset(path)
