"""Single-sample CPU latency benchmark: batch size 1, warmup excluded,
model-only and end-to-end (features plus forward) timings, harness overhead
measured and reported."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backend
from .features import FeatureKind, extract_features
from .model import Model, forward, param_count
from .weights import serialize_model
from .wavio import AudioClip


@dataclass(frozen=True)
class BenchReport:
    model_name: str
    backend_name: str
    clip_len_s: float
    iters: int
    threads: int
    median_ms: float
    mean_ms: float
    p95_ms: float
    end_to_end_median_ms: float
    overhead_ms: float
    n_params: int
    weight_bytes: int

    def __post_init__(self):
        assert self.median_ms > 0 and self.median_ms <= self.p95_ms


def _frames_for(clip_len_s: float, sample_rate: int = 16_000) -> int:
    n = int(round(clip_len_s * sample_rate))
    return (n - 400) // 160 + 1


def _time_calls(fn, iters: int, warmup: int) -> np.ndarray:
    for _ in range(warmup):
        fn()
    times = np.empty(iters)
    for i in range(iters):
        start = time.perf_counter()
        fn()
        times[i] = time.perf_counter() - start
    return times * 1000.0


def bench_latency(
    m: Model,
    clip_len_s: float = 1.0,
    iters: int = 100,
    warmup: int = 10,
    threads: int = 1,
    seed: int = 0,
    model_name: str = "model",
) -> BenchReport:
    """Per-sample wall-clock latency at batch size 1.

    Model-only timing feeds a pre-extracted feature matrix through forward();
    end-to-end timing includes MFCC extraction from raw audio. Latency is
    weight-independent, so an untrained model benchmarks identically.
    """
    rng = np.random.default_rng(seed)
    n_frames = _frames_for(clip_len_s)
    feats = rng.standard_normal((n_frames, m.config.input_channels))

    def model_only():
        forward(m, feats, training=False)

    if threads == 1:
        times = _time_calls(model_only, iters, warmup)
    else:
        _time_calls(model_only, 1, warmup)  # warm any jit caches first
        per_call = []

        def timed():
            start = time.perf_counter()
            model_only()
            per_call.append(time.perf_counter() - start)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda _: timed(), range(iters)))
        times = np.asarray(per_call) * 1000.0

    audio = AudioClip(samples=np.clip(rng.standard_normal(int(clip_len_s * 16_000)) * 0.1,
                                      -1.0, 1.0), sample_rate=16_000)

    def end_to_end():
        feature_matrix = extract_features(audio, FeatureKind.MFCC, preprocess=False)
        forward(m, feature_matrix, training=False)

    e2e = _time_calls(end_to_end, max(10, iters // 4), warmup=3)

    # harness overhead: timing loop around a no-op callable
    overhead = _time_calls(lambda: None, iters, warmup=3)

    return BenchReport(
        model_name=model_name,
        backend_name=backend.active_name(),
        clip_len_s=clip_len_s,
        iters=iters,
        threads=threads,
        median_ms=float(np.median(times)),
        mean_ms=float(np.mean(times)),
        p95_ms=float(np.percentile(times, 95)),
        end_to_end_median_ms=float(np.median(e2e)),
        overhead_ms=float(np.median(overhead)),
        n_params=param_count(m.config),
        weight_bytes=len(serialize_model(m)),
    )


def format_report(report: BenchReport) -> str:
    return "\n".join([
        f"model:        {report.model_name} ({report.n_params} parameters, "
        f"{report.weight_bytes / 1024:.1f} KB weights)",
        f"backend:      {report.backend_name}  threads: {report.threads}  "
        f"clip: {report.clip_len_s:g}s  iters: {report.iters}",
        f"model-only:   median {report.median_ms:.3f} ms  mean {report.mean_ms:.3f} ms  "
        f"p95 {report.p95_ms:.3f} ms",
        f"end-to-end:   median {report.end_to_end_median_ms:.3f} ms (features + forward)",
        f"harness overhead: {report.overhead_ms * 1000:.2f} us per call",
    ])
