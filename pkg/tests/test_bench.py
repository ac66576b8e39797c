"""The latency harness: report contents and invariants."""

import numpy as np

from swishnet import weights
from swishnet.bench import bench_latency, format_report
from swishnet.model import build, load_preset, param_count


def test_report_fields_and_invariants(tmp_path):
    m = build(load_preset("swishnet-slim"), rng_seed=0)
    report = bench_latency(m, clip_len_s=1.0, iters=25, warmup=5,
                           model_name="slim")
    assert report.iters == 25
    assert 0 < report.median_ms <= report.p95_ms
    assert report.end_to_end_median_ms >= report.median_ms
    assert report.n_params == param_count(m.config)

    # reported weight size equals the on-disk byte count of a save
    path = tmp_path / "m.swsh"
    weights.save_model(m, path)
    assert report.weight_bytes == path.stat().st_size

    text = format_report(report)
    assert "model-only" in text and "harness overhead" in text


def test_threaded_run_produces_measurements():
    m = build(load_preset("swishnet-slim"), rng_seed=1)
    report = bench_latency(m, clip_len_s=0.5, iters=16, warmup=2, threads=4)
    assert report.threads == 4
    assert report.median_ms > 0


def test_latency_weight_independent():
    # same architecture, different weights: medians within normal jitter
    a = bench_latency(build(load_preset("swishnet-slim"), rng_seed=0),
                      clip_len_s=0.5, iters=40, warmup=10)
    b = bench_latency(build(load_preset("swishnet-slim"), rng_seed=9),
                      clip_len_s=0.5, iters=40, warmup=10)
    assert 0.3 < a.median_ms / b.median_ms < 3.0
