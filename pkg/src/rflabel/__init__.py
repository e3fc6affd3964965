"""rflabel: active-learning labelling workbench for synthetic I/Q captures.

A library plus CLI that generates labelled complex-baseband datasets across
an SNR sweep, labels them with a buffer-enabled human-in-the-loop session
(simulated or live through the HTTP service), and benchmarks from-scratch
KNN / Gaussian naive Bayes / RBF-SVM classifiers on the same data.
"""

__version__ = "0.1.0"

from .dataset import Dataset, DatasetSpec, build_dataset, load_dataset, save_dataset
from .oracle import SimulatedOracle
from .registry import DEFAULT_COUPLETS, CoupletLabel
from .session import LabelSession, LoopConfig, SessionReport, run_session

__all__ = [
    "__version__",
    "Dataset",
    "DatasetSpec",
    "build_dataset",
    "load_dataset",
    "save_dataset",
    "SimulatedOracle",
    "DEFAULT_COUPLETS",
    "CoupletLabel",
    "LabelSession",
    "LoopConfig",
    "SessionReport",
    "run_session",
]
