"""Report computation and export: delimited files plus rendered figures.

Every exported table is a CSV with a documented header; each table is
rendered to a PNG figure of the same stem alongside it.  All content is a
pure function of the inputs, so re-exporting identical artifacts yields
byte-identical files.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .classifiers import knn_fit, model_size_bytes, nb_fit, ova_fit, ova_predict, select_k
from .classifiers.svm import SvmParams
from .dataset import Dataset
from .features import feature_matrix, fit_normalizer, normalize
from .session import SessionReport

CLASSIFIER_NAMES = ("knn", "nb", "svm")
SVM_EVAL_PARAMS = SvmParams(C=10.0)
PNG_META = {"Software": "rflabel"}


@dataclass(frozen=True)
class AccuracyTable:
    snrs: tuple[float, ...]
    accuracies: dict[str, tuple[float, ...]]  # classifier -> one percent per SNR

    def row(self, snr: float) -> dict[str, float]:
        i = self.snrs.index(snr)
        return {name: vals[i] for name, vals in self.accuracies.items()}


@dataclass(frozen=True)
class ModelSizeReport:
    sizes: dict[str, int]  # classifier -> serialized bytes


def model_label_ratio(report: SessionReport) -> float:
    """Share of the dataset the model labelled, as a percentage."""
    if report.total == 0:
        raise ValueError("empty session: ratio undefined")
    if report.model_labelled + report.user_labelled != report.total:
        raise ValueError("inconsistent report totals")
    return 100.0 * report.model_labelled / report.total


def stratified_split(labels, train_frac: float, seed: int) -> tuple[list[int], list[int]]:
    """Per-class deterministic split; returns (train_idx, test_idx)."""
    rng = np.random.default_rng(seed)
    names = [str(lab) for lab in labels]
    train, test = [], []
    for name in sorted(set(names)):
        idx = np.array([i for i, n in enumerate(names) if n == name])
        idx = rng.permutation(idx)
        cut = int(round(train_frac * len(idx)))
        train.extend(int(i) for i in idx[:cut])
        test.extend(int(i) for i in idx[cut:])
    return train, test


def _fit_eval(name: str, Xtr, ytr, Xte, yte, select_seed: int):
    if name == "knn":
        model = knn_fit(Xtr, ytr, k=select_k(Xtr, ytr, seed=select_seed))
        pred = model.predict_batch(Xte)
    elif name == "nb":
        model = nb_fit(Xtr, ytr)
        pred = model.predict_batch(Xte)
    elif name == "svm":
        model = ova_fit(Xtr, ytr, scorer_kind="svm", svm_params=SVM_EVAL_PARAMS)
        pred = [ova_predict(model, x)[0] for x in Xte]
    else:
        raise ValueError(f"unknown classifier {name!r}")
    accuracy = 100.0 * float(np.mean([p == t for p, t in zip(pred, yte)]))
    return model, accuracy


def accuracy_table(dataset: Dataset, split_seed: int = 0,
                   classifiers=CLASSIFIER_NAMES, train_frac: float = 0.7) -> AccuracyTable:
    """Per-SNR stratified 70/30 evaluation of each classifier."""
    by_snr: dict[float, list] = {}
    for frame in dataset.frames:
        by_snr.setdefault(frame.snr_db, []).append(frame)
    snrs = tuple(sorted(by_snr))
    columns: dict[str, list[float]] = {name: [] for name in classifiers}
    for snr in snrs:
        # canonical frame order: the split depends on ids, not presentation
        frames = sorted(by_snr[snr], key=lambda f: f.id)
        X, labels = feature_matrix(frames)
        counts = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        if min(counts.values()) < 2:
            raise ValueError(f"need >= 2 frames per couplet at {snr} dB for a split")
        train, test = stratified_split(labels, train_frac, split_seed)
        stats = fit_normalizer(X[train])
        Xtr, Xte = normalize(X[train], stats), normalize(X[test], stats)
        ytr = [labels[i] for i in train]
        yte = [labels[i] for i in test]
        for name in classifiers:
            _, acc = _fit_eval(name, Xtr, ytr, Xte, yte, select_seed=split_seed)
            columns[name].append(acc)
    return AccuracyTable(snrs=snrs, accuracies={n: tuple(v) for n, v in columns.items()})


def model_size_report(dataset: Dataset, snr: float, split_seed: int = 0,
                      classifiers=CLASSIFIER_NAMES) -> ModelSizeReport:
    """Serialized size of each classifier fitted at one reference SNR."""
    frames = sorted((f for f in dataset.frames if f.snr_db == snr), key=lambda f: f.id)
    if not frames:
        raise ValueError(f"dataset has no frames at {snr} dB")
    X, labels = feature_matrix(frames)
    train, _ = stratified_split(labels, 0.7, split_seed)
    stats = fit_normalizer(X[train])
    Xtr = normalize(X[train], stats)
    ytr = [labels[i] for i in train]
    sizes = {}
    for name in classifiers:
        model, _ = _fit_eval(name, Xtr, ytr, Xtr[:1], ytr[:1], select_seed=split_seed)
        sizes[name] = model_size_bytes(model)
    return ModelSizeReport(sizes=sizes)


# ------------------------------------------------------------------ exports

def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def _save_fig(fig, path: Path) -> None:
    fig.savefig(path, dpi=100, metadata=PNG_META)
    plt.close(fig)


def export_session_outputs(report: SessionReport, out_dir: str | Path) -> list[Path]:
    """fig1 (cumulative label counts), fig2 (correct per page), fig3 (training
    cost per round), and the full per-iteration table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    rows = [[r.iteration, r.model_cum, r.user_cum] for r in report.records]
    path = out / "fig1_labels.csv"
    _write_csv(path, ["iteration", "model_count", "user_count"], rows)
    written.append(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    its = [r.iteration for r in report.records]
    ax.plot(its, [r.model_cum for r in report.records], label="model", color="tab:blue")
    ax.plot(its, [r.user_cum for r in report.records], label="user", color="tab:orange")
    ax.set_xlabel("iteration")
    ax.set_ylabel("labels")
    ax.set_title("Model vs user labelling")
    ax.legend()
    fig.tight_layout()
    path = out / "fig1_labels.png"
    _save_fig(fig, path)
    written.append(path)

    rows = [[r.iteration, r.model_correct_in_page] for r in report.records]
    path = out / "fig2_predictions.csv"
    _write_csv(path, ["iteration", "correct_in_page"], rows)
    written.append(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(its, [r.model_correct_in_page for r in report.records],
            marker="o", markersize=3, color="tab:blue")
    ax.set_xlabel("iteration")
    ax.set_ylabel("correct model labels per page")
    ax.set_title("Model predictions per page")
    fig.tight_layout()
    path = out / "fig2_predictions.png"
    _save_fig(fig, path)
    written.append(path)

    rows = [[t.round, repr(t.seconds)] for t in report.train_events]
    path = out / "fig3_time.csv"
    _write_csv(path, ["train_round", "seconds"], rows)
    written.append(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([t.round for t in report.train_events],
           [t.seconds for t in report.train_events], color="tab:blue")
    ax.set_xlabel("training round")
    ax.set_ylabel("estimated seconds")
    ax.set_title("Training cost per round")
    fig.tight_layout()
    path = out / "fig3_time.png"
    _save_fig(fig, path)
    written.append(path)

    rows = [
        [r.iteration, r.model_correct_in_page, r.corrections, r.buffer_size,
         r.retrains, repr(r.train_time), r.model_cum, r.user_cum]
        for r in report.records
    ]
    path = out / "session_report.csv"
    _write_csv(
        path,
        ["iteration", "model_correct_in_page", "corrections", "buffer_size",
         "retrains", "train_time", "model_cum", "user_cum"],
        rows,
    )
    written.append(path)
    return written


def export_accuracy_table(table: AccuracyTable, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(table.accuracies)
    rows = [
        [repr(float(snr))] + [f"{table.accuracies[n][i]:.2f}" for n in names]
        for i, snr in enumerate(table.snrs)
    ]
    csv_path = out / "table1_accuracy.csv"
    _write_csv(csv_path, ["snr_db", *names], rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in names:
        ax.plot(table.snrs, table.accuracies[name], marker="o", markersize=3, label=name)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("accuracy (%)")
    ax.set_title("Classifier accuracy vs SNR")
    ax.legend()
    fig.tight_layout()
    png_path = out / "fig4_accuracy.png"
    _save_fig(fig, png_path)
    return [csv_path, png_path]


def export_size_report(sizes: ModelSizeReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = sorted(sizes.sizes)
    rows = [[n, sizes.sizes[n]] for n in names]
    csv_path = out / "fig5_sizes.csv"
    _write_csv(csv_path, ["classifier", "size_bytes"], rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(names, [sizes.sizes[n] for n in names], color="tab:blue")
    ax.set_xlabel("classifier")
    ax.set_ylabel("serialized size (bytes)")
    ax.set_yscale("log")
    ax.set_title("Model storage comparison")
    fig.tight_layout()
    png_path = out / "fig5_sizes.png"
    _save_fig(fig, png_path)
    return [csv_path, png_path]
