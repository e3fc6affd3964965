import numpy as np
import pytest

from rflabel.dataset import DatasetSpec, build_dataset


@pytest.fixture(scope="session")
def tiny_dataset():
    """Nine couplets x 12 frames at 18 dB; small enough for loop tests."""
    spec = DatasetSpec(snr_list=(18.0,), frames_per_couplet_per_snr=12, master_seed=42)
    return build_dataset(spec)


@pytest.fixture(scope="session")
def tiny_features(tiny_dataset):
    from rflabel.features import feature_matrix

    X, labels = feature_matrix(tiny_dataset.frames)
    return X, labels


@pytest.fixture
def rng():
    return np.random.default_rng(0)
