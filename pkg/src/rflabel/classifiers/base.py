"""Shared classifier plumbing: distance, labelled points, model blobs.

Every fitted model serializes to a self-describing versioned JSON blob via
``serialize_model``; the blob length doubles as the model-size figure used
by the storage comparison report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..registry import CoupletLabel

MODEL_FORMAT = "rflabel-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class LabeledPoint:
    x: np.ndarray
    y: CoupletLabel


def euclidean_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Plain Euclidean distance; rejects mismatched dimensions."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.sqrt(np.sum((x - y) ** 2)))


def serialize_model(kind: str, payload: dict) -> bytes:
    """Canonical JSON bytes for a fitted model (stable across identical fits)."""
    return json.dumps(
        {"format": MODEL_FORMAT, "version": MODEL_VERSION, "kind": kind, "payload": payload},
        sort_keys=True,
    ).encode("utf-8")


def deserialize_model(blob: bytes) -> tuple[str, dict]:
    doc = json.loads(blob.decode("utf-8"))
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a model blob")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')}")
    return doc["kind"], doc["payload"]


def model_size_bytes(model) -> int:
    return len(model.dumps())


def labels_to_strings(labels) -> list[str]:
    return [str(lab) for lab in labels]


def labels_from_strings(items) -> list[CoupletLabel]:
    return [CoupletLabel.parse(s) for s in items]
