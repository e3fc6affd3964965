"""Acceptance suite: one test per release criterion, each printing a
[PASS] line with its measured numbers (run with ``pytest -s``).

All tolerances are pinned here; the suite drives only the public library
and CLI surfaces with the simulated oracle.
"""

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from rflabel.classifiers import knn_fit, nb_fit, nb_posterior
from rflabel.classifiers.svm import SvmParams, dual_objective, kkt_max_violation, rbf_kernel, svm_fit
from rflabel.dataset import DatasetSpec, build_dataset
from rflabel.oracle import OracleRequest, SimulatedOracle
from rflabel.registry import CoupletLabel
from rflabel.reporting import accuracy_table, model_label_ratio
from rflabel.session import LabelSession, LoopConfig, drive_session, run_session

from test_knn import LABELS, brute_knn
from test_svm import qp_oracle


def _passline(text):
    print(f"\n[PASS] {text}")


# ---------------------------------------------------------------- criterion 1

def test_knn_matches_brute_oracle_on_randomized_instances():
    """KNN equals the independent sort-and-vote oracle on 1000+ instances."""
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    mismatches = 0
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        d = int(rng.integers(1, 5))
        k = int(rng.integers(1, min(n, 5) + 1))
        points = rng.integers(-3, 4, size=(n, d)).astype(float)  # grid: real ties
        labels = [LABELS[i] for i in rng.integers(0, 3, size=n)]
        model = knn_fit(points, labels, k=k)
        query = rng.integers(-3, 4, size=d).astype(float)
        if model.predict(query) != brute_knn(points, labels, k, query):
            mismatches += 1
        checked += 1
    # engineered tie gauntlet: equidistant points, vote ties, duplicate rows
    engineered = [
        (np.array([[-1.0], [1.0]]), [LABELS[1], LABELS[0]], 2, np.array([0.0])),
        (np.array([[0.0], [0.0], [2.0]]), [LABELS[0], LABELS[1], LABELS[1]], 3, np.array([1.0])),
        (np.array([[0.0, 0.0], [0.0, 2.0], [2.0, 0.0], [2.0, 2.0]]),
         [LABELS[0], LABELS[1], LABELS[1], LABELS[0]], 4, np.array([1.0, 1.0])),
        (np.array([[0.0], [0.2], [1.0], [1.1]]), [LABELS[0], LABELS[0], LABELS[1], LABELS[1]],
         4, np.array([0.6])),
    ]
    for points, labels, k, query in engineered:
        model = knn_fit(points, labels, k=k)
        if model.predict(query) != brute_knn(points, labels, k, query):
            mismatches += 1
        checked += 1
    elapsed = time.perf_counter() - start
    assert mismatches == 0
    assert elapsed < 10.0
    _passline(f"knn-oracle-equivalence: {checked} instances, 0 mismatches, {elapsed:.1f}s")


# ---------------------------------------------------------------- criterion 2

def test_nb_posterior_sums_and_hand_case():
    """Posterior sums within 1e-9 on 10^4 queries; 1-D hand case 0.8808."""
    rng = np.random.default_rng(11)
    X = rng.normal(size=(90, 5)) + np.repeat(np.arange(3)[:, None] * 2.5, 30, axis=0)
    labels = [LABELS[i // 30] for i in range(90)]
    model = nb_fit(X, labels)
    worst = 0.0
    for _ in range(10_000):
        q = rng.normal(scale=8.0, size=5)
        worst = max(worst, abs(nb_posterior(model, q).sum() - 1.0))
    assert worst < 1e-9

    hand = nb_fit(np.array([[-1.0], [1.0], [1.0], [3.0]]),
                  [LABELS[0], LABELS[0], LABELS[1], LABELS[1]])
    post = nb_posterior(hand, np.array([0.0]))[hand.classes.index(LABELS[0])]
    expected = 1.0 / (1.0 + np.exp(-2.0))
    assert post == pytest.approx(expected, abs=1e-4)
    _passline(f"nb-correctness: max |sum-1| = {worst:.2e}, hand case {post:.6f} "
              f"(target {expected:.6f} +- 1e-4)")


# ---------------------------------------------------------------- criterion 3

def test_svm_kkt_accuracy_and_dual_oracle():
    """100 separable instances: KKT <= 1e-3, 100% training accuracy; dual
    matches the projected-gradient oracle within 1e-3 on <= 20-point cases."""
    start = time.perf_counter()
    params = SvmParams(C=10.0, gamma=0.5)
    oracle_checked = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n_per = int(rng.integers(4, 26))
        pos = rng.normal(size=(n_per, 2)) * 0.6 + [2.5, 0.0]
        neg = rng.normal(size=(n_per, 2)) * 0.6 + [-2.5, 0.0]
        X = np.vstack([pos, neg])
        y = np.array([1.0] * n_per + [-1.0] * n_per)
        model = svm_fit(X, y, params)
        assert model.converged, f"seed {seed} did not converge"
        assert np.all(model.predict(X) == y), f"seed {seed} below 100% training accuracy"
        violation = kkt_max_violation(model.alpha, y, model.decision(X), params.C)
        assert violation <= params.tol, f"seed {seed} KKT residual {violation}"
        if len(y) <= 20:
            K = rbf_kernel(X, X, params.gamma)
            w_smo = dual_objective(model.alpha, y, K)
            w_ref = dual_objective(qp_oracle(K, y, params.C), y, K)
            assert abs(w_smo - w_ref) <= 1e-3, f"seed {seed}: {w_smo} vs {w_ref}"
            oracle_checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _passline(f"svm-solver: 100 instances converged at KKT<=1e-3 with 100% training "
              f"accuracy; dual vs QP oracle on {oracle_checked} small instances; {elapsed:.1f}s")


# ---------------------------------------------------------------- criterion 4

def test_accuracy_trend_across_snr():
    """18 dB beats 0 dB by >= 5 points per classifier; KNN >= 95% and
    KNN >= NB at 18 dB (dataset: 9 couplets x 100 frames/SNR, seed 42)."""
    start = time.perf_counter()
    spec = DatasetSpec(snr_list=(0.0, 18.0), frames_per_couplet_per_snr=100,
                       master_seed=42)
    table = accuracy_table(build_dataset(spec), split_seed=0)
    low, high = table.row(0.0), table.row(18.0)
    for name in ("knn", "nb", "svm"):
        assert high[name] - low[name] >= 5.0, f"{name}: {low[name]} -> {high[name]}"
    assert high["knn"] >= 95.0
    assert high["knn"] >= high["nb"]
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    _passline(
        "table1-trend: 0dB->18dB knn {:.1f}->{:.1f}, nb {:.1f}->{:.1f}, svm {:.1f}->{:.1f}; "
        "{:.0f}s".format(low["knn"], high["knn"], low["nb"], high["nb"],
                         low["svm"], high["svm"], elapsed)
    )


# ---------------------------------------------------------------- criterion 5

def test_session_ratio_on_5642_frames():
    """Simulated-oracle session over 5642 frames at 18 dB with the default
    loop config reaches >= 80% model-labelled with exact conservation."""
    start = time.perf_counter()
    spec = DatasetSpec(snr_list=(18.0,), frames_per_couplet_per_snr=627,
                       master_seed=42, total_frames=5642)
    ds = build_dataset(spec)
    assert len(ds) == 5642
    oracle = SimulatedOracle(truth=ds.truth_map(), couplets=ds.spec.couplets, seed=1)
    report = run_session(ds, LoopConfig(), oracle, rng_seed=1)
    assert report.complete
    assert report.user_labelled + report.model_labelled == 5642
    ratio = model_label_ratio(report)
    assert ratio >= 80.0
    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    _passline(f"session-ratio: {report.model_labelled}/5642 model-labelled "
              f"({ratio:.2f}%, reference 86.74%), conservation exact; {elapsed:.0f}s")


# ---------------------------------------------------------------- criterion 6

def _drive_with_invariants(ds, config, oracle, rng_seed, checkpoint_at=2):
    """Manual loop driver asserting the state-machine invariants per step;
    returns (report, report_from_replay)."""
    session = LabelSession(ds, config, rng_seed=rng_seed)
    replay_doc = None
    pool_size = len(session.pool)
    while session.phase != "complete":
        assert len(session.pool) <= pool_size
        pool_size = len(session.pool)
        if session.phase in ("bootstrap_pending", "bootstrap_selected"):
            session.bootstrap(oracle, partial=True)
            assert len(session.buffer) <= config.buffer_capacity
            continue
        if len(session.records) >= config.max_iterations:
            break
        page = session.predict_page()
        responses = oracle.label_many(
            [OracleRequest(frame_id=i.frame_id, model_label=i.model_label)
             for i in page.items]
        )
        corrections = {r.frame_id: r.label for r, i in zip(responses, page.items)
                       if r.label != i.model_label}
        incorrect = session.review_page(corrections)
        assert len(session.buffer) <= config.buffer_capacity
        session.maybe_flush_buffer()
        restarts_before = session.restarts
        decision = session.check_restart()
        fired = session.restarts == restarts_before + 1
        if session.phase != "complete":
            assert fired == (incorrect > config.restart_threshold)
            assert (decision == "restart") == fired
        if session.iteration == checkpoint_at and replay_doc is None:
            replay_doc = session.to_checkpoint()
    session.check_conservation()
    report = session.report()
    if replay_doc is not None:
        resumed = LabelSession.from_checkpoint(replay_doc)
        replay_report = drive_session(resumed, oracle)
    else:
        replay_report = report
    return report, replay_report


def test_loop_state_machine_properties():
    """50 randomized sessions: buffer bound, conservation, strict restart
    boundary, and checkpoint replay all hold with zero violations."""
    start = time.perf_counter()
    spec = DatasetSpec(snr_list=(18.0,), frames_per_couplet_per_snr=25,
                       frame_len=512, master_seed=23)
    ds = build_dataset(spec)
    for i in range(50):
        error_rate = (0.0, 0.1)[i % 2]
        capacity = (30, 60)[(i // 2) % 2]
        config = LoopConfig(buffer_capacity=capacity, max_iterations=200)
        oracle = SimulatedOracle(truth=ds.truth_map(), couplets=ds.spec.couplets,
                                 error_rate=error_rate, seed=100 + i)
        report, replay = _drive_with_invariants(ds, config, oracle, rng_seed=i)
        assert report.complete
        assert report.user_labelled + report.model_labelled == len(ds)
        assert all(r.buffer_size <= capacity for r in report.records)
        assert replay == report, f"session {i}: replay diverged"
    elapsed = time.perf_counter() - start
    _passline(f"loop-state-machine: 50 sessions x (buffer bound, conservation, "
              f"restart boundary, checkpoint replay), 0 violations; {elapsed:.0f}s")


# ---------------------------------------------------------------- criterion 7

def test_correct_per_page_trend_is_positive():
    """Spearman(iteration, correct-in-page) > 0 on >= 45 of 50 sessions."""
    start = time.perf_counter()
    spec = DatasetSpec(snr_list=(18.0,), frames_per_couplet_per_snr=200,
                       master_seed=42)
    ds = build_dataset(spec)
    positive = 0
    rhos = []
    for seed in range(50):
        oracle = SimulatedOracle(truth=ds.truth_map(), couplets=ds.spec.couplets,
                                 seed=seed)
        report = run_session(ds, LoopConfig(), oracle, rng_seed=seed)
        ys = [r.model_correct_in_page for r in report.records]
        rho = spearmanr(range(len(ys)), ys).statistic
        rhos.append(rho)
        if not np.isnan(rho) and rho > 0:
            positive += 1
    elapsed = time.perf_counter() - start
    assert positive >= 45, f"only {positive}/50 sessions trend upward"
    _passline(f"fig2-trend: positive Spearman on {positive}/50 sessions "
              f"(median rho {np.nanmedian(rhos):+.2f}); {elapsed:.0f}s")


# ---------------------------------------------------------------- criterion 8

def _run_cli(args):
    env = {k: v for k, v in os.environ.items() if not k.startswith("RFLABEL_")}
    env["COLUMNS"] = "100"
    result = subprocess.run([sys.executable, "-m", "rflabel.cli", *args],
                            capture_output=True, text=True, env=env)
    assert result.returncode == 0, result.stderr
    return result


def test_cli_outputs_are_byte_identical(tmp_path):
    """gen-data, eval-classifiers, label-session run twice with identical
    flags produce byte-identical output files."""
    start = time.perf_counter()
    checked = []
    commands = {
        "gen-data": ["gen-data", "--snr", "18", "--frames", "3", "--frame-len",
                     "256", "--seed", "42", "--features"],
        "eval-classifiers": ["eval-classifiers", "--snr", "0:18:18", "--frames", "6",
                             "--frame-len", "256", "--seed", "42"],
        "label-session": ["label-session", "--snr", "18", "--frames", "10",
                          "--frame-len", "256", "--seed", "42", "--bootstrap", "18",
                          "--page-size", "10", "--restart-threshold", "5",
                          "--buffer-capacity", "8"],
    }
    for name, args in commands.items():
        out = tmp_path / name
        full = [*args, "--out", str(out)]
        _run_cli(full)
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        _run_cli(full)
        second = {p.name: p.read_bytes() for p in out.iterdir()}
        assert first == second, f"{name}: outputs differ between runs"
        checked.append(f"{name}({len(first)} files)")
    elapsed = time.perf_counter() - start
    _passline(f"cli-determinism: {', '.join(checked)} byte-identical; {elapsed:.0f}s")
