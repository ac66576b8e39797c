"""Frame-wise segmentation: synthetic timeline generation, sliding-window
prediction, probability median filtering, and silence-excluded scoring.

Frame labels live on the 10 ms hop grid. Timelines carry four classes
(noise/music/speech plus silence); predictions carry the three scoreable
classes and silence frames are dropped before metrics.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .data import CLASSES
from .errors import ConfigError, EvaluationError
from .features import FeatureMatrix
from .model import Model, forward
from .ops import softmax
from .tensor import Tensor
from .wavio import AudioClip

SILENCE = "silence"
TIMELINE_CLASSES = CLASSES + (SILENCE,)
SILENCE_INDEX = TIMELINE_CLASSES.index(SILENCE)

HOP_S = 0.01
SAMPLES_PER_FRAME = 160  # 10 ms at 16 kHz

# average segment lengths (seconds) for the generated timelines
MEAN_SEGMENT_S = {"silence": 0.5, "noise": 5.0, "music": 10.0, "speech": 12.0}
MIN_SEGMENT_S = 0.1
MAX_SEGMENT_FACTOR = 4.0  # per-class cap at 4x the mean

MEDIAN_FILTER_LEN = 200


@dataclass(frozen=True)
class Timeline:
    """Ground-truth labels per 10 ms frame plus the generating segment runs."""

    labels: np.ndarray                       # (n_frames,) indices into TIMELINE_CLASSES
    segments: tuple[tuple[int, int], ...]    # (class index, n_frames) runs

    @property
    def n_frames(self) -> int:
        return self.labels.shape[0]

    @property
    def duration_s(self) -> float:
        return self.n_frames * HOP_S


def run_length_encode(labels: np.ndarray) -> tuple[tuple[int, int], ...]:
    runs = []
    start = 0
    for i in range(1, labels.size + 1):
        if i == labels.size or labels[i] != labels[start]:
            runs.append((int(labels[start]), i - start))
            start = i
    return tuple(runs)


def save_timeline(path, timeline: Timeline) -> None:
    lines = []
    t = 0
    for label, n in timeline.segments:
        lines.append(f"{t * HOP_S:.2f}\t{(t + n) * HOP_S:.2f}\t{TIMELINE_CLASSES[label]}")
        t += n
    Path(path).write_text("\n".join(lines) + "\n")


def load_timeline(path) -> Timeline:
    segments = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        start_s, end_s, name = line.split("\t")
        if name not in TIMELINE_CLASSES:
            raise EvaluationError(f"{path}:{lineno}: unknown class {name!r}")
        n = int(round(float(end_s) / HOP_S)) - int(round(float(start_s) / HOP_S))
        segments.append((TIMELINE_CLASSES.index(name), n))
    labels = np.concatenate([np.full(n, c, dtype=np.int8) for c, n in segments])
    return Timeline(labels=labels, segments=run_length_encode(labels))


def _truncated_exp_frames(rng: np.random.Generator, mean_s: float) -> int:
    """Segment length in frames: exponential with the given mean, truncated
    to [MIN_SEGMENT_S, 4 * mean], snapped to the 10 ms grid."""
    hi = MAX_SEGMENT_FACTOR * mean_s
    length = min(max(rng.exponential(mean_s), MIN_SEGMENT_S), hi)
    return max(int(round(MIN_SEGMENT_S / HOP_S)), int(round(length / HOP_S)))


def _draw_audio(rng: np.random.Generator, pool: list[AudioClip], n_samples: int) -> np.ndarray:
    """A random contiguous chunk from a random pool clip, tiled if needed."""
    pieces = []
    remaining = n_samples
    while remaining > 0:
        clip = pool[rng.integers(len(pool))]
        take = min(remaining, len(clip))
        start = rng.integers(0, len(clip) - take + 1)
        pieces.append(clip.samples[start:start + take])
        remaining -= take
    return np.concatenate(pieces)


def synth_timeline(
    pools: dict[str, list[AudioClip]],
    rng: np.random.Generator,
    length_range_s: tuple[float, float] = (20.0, 120.0),
    silence_gap_prob: float = 0.5,
) -> tuple[AudioClip, Timeline]:
    """Concatenate random class segments into one labelled recording.

    pools maps each of noise/music/speech/silence to non-empty clip lists;
    silence segments come from the silence pool (natural quiet audio, not
    zeros). Consecutive class segments always differ; with probability
    silence_gap_prob a silence gap separates them, otherwise the transition
    is abrupt. Total length is uniform in length_range_s.
    """
    for name in TIMELINE_CLASSES:
        if not pools.get(name):
            raise ConfigError(f"empty audio pool for class {name!r}")
    total_frames = int(round(rng.uniform(*length_range_s) / HOP_S))
    plan: list[tuple[int, int]] = []  # (class index, n_frames)
    used = 0
    previous = None
    while used < total_frames:
        choices = [c for c in CLASSES if c != previous]
        name = choices[rng.integers(len(choices))]
        if previous is not None and rng.random() < silence_gap_prob:
            n_sil = min(_truncated_exp_frames(rng, MEAN_SEGMENT_S[SILENCE]), total_frames - used)
            plan.append((SILENCE_INDEX, n_sil))
            used += n_sil
            if used >= total_frames:
                break
        n = min(_truncated_exp_frames(rng, MEAN_SEGMENT_S[name]), total_frames - used)
        plan.append((TIMELINE_CLASSES.index(name), n))
        used += n
        previous = name

    audio = np.concatenate([
        _draw_audio(rng, pools[TIMELINE_CLASSES[c]], n * SAMPLES_PER_FRAME)
        for c, n in plan
    ])
    labels = np.concatenate([np.full(n, c, dtype=np.int8) for c, n in plan])
    return (AudioClip(samples=audio, sample_rate=16_000),
            Timeline(labels=labels, segments=run_length_encode(labels)))


@dataclass(frozen=True)
class SegmentPrediction:
    """Per-frame probabilities over the three scoreable classes."""

    probs: np.ndarray  # (n_frames, 3)

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.probs, axis=1)

    @property
    def n_frames(self) -> int:
        return self.probs.shape[0]


def save_predictions(path, pred: SegmentPrediction) -> None:
    lines = [
        f"{i * HOP_S:.2f}\t{p[0]:.6f}\t{p[1]:.6f}\t{p[2]:.6f}"
        for i, p in enumerate(pred.probs)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_predictions(path) -> SegmentPrediction:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            parts = line.split("\t")
            rows.append([float(v) for v in parts[1:4]])
    return SegmentPrediction(probs=np.asarray(rows))


def sliding_predict(
    m: Model,
    features: FeatureMatrix,
    window_len_s: float = 1.0,
    stride: int = 1,
    batch_size: int = 256,
) -> SegmentPrediction:
    """Classify a window around every frame (or every stride-th frame,
    holding probabilities in between).

    Windows are centered and shifted inward at the edges so every prediction
    sees a full-length window.
    """
    values = features.values
    n_frames = values.shape[0]
    # a window_len_s stretch of audio holds round(window_len_s/hop) - 2 full
    # 25 ms frames, matching the clip classification path exactly
    window = int(round(window_len_s / HOP_S)) - 2
    window = min(max(window, 1), n_frames)
    if window < m.config.min_input_frames():
        raise ConfigError(
            f"window of {window} frames is below the model minimum "
            f"of {m.config.min_input_frames()}"
        )
    centers = np.arange(0, n_frames, stride)
    starts = np.clip(centers - window // 2, 0, n_frames - window)
    probs_at = np.empty((centers.size, 3))
    for chunk_start in range(0, centers.size, batch_size):
        chunk = starts[chunk_start:chunk_start + batch_size]
        batch = np.stack([values[s:s + window] for s in chunk])
        logits = forward(m, Tensor(batch), training=False)
        probs_at[chunk_start:chunk_start + len(chunk)] = softmax(logits).data
    if stride == 1:
        return SegmentPrediction(probs=probs_at)
    full = np.repeat(probs_at, stride, axis=0)[:n_frames]
    return SegmentPrediction(probs=full)


def align_prediction(pred: SegmentPrediction, n_frames: int) -> SegmentPrediction:
    """Pad (edge-replicate) or truncate to n_frames; feature framing drops the
    last couple of hop-grid frames relative to the raw audio timeline."""
    probs = pred.probs
    if probs.shape[0] >= n_frames:
        return SegmentPrediction(probs=probs[:n_frames])
    pad = np.repeat(probs[-1:], n_frames - probs.shape[0], axis=0)
    return SegmentPrediction(probs=np.vstack([probs, pad]))


def median_filter(pred: SegmentPrediction, filter_len: int = MEDIAN_FILTER_LEN) -> SegmentPrediction:
    """Per-class sliding median over the probability channels, then
    renormalize.

    Edges are clamped (replicated); even-length windows take the lower
    median so every filtered value is a member of its window.
    """
    if filter_len < 1:
        raise ConfigError(f"filter_len must be >= 1, got {filter_len}")
    if filter_len == 1:
        return SegmentPrediction(probs=pred.probs.copy())
    probs = pred.probs
    left = (filter_len - 1) // 2
    right = filter_len - 1 - left
    padded = np.pad(probs, ((left, right), (0, 0)), mode="edge")
    windows = sliding_window_view(padded, filter_len, axis=0)  # (n, 3, filter_len)
    k = (filter_len - 1) // 2
    med = np.partition(windows, k, axis=2)[:, :, k]
    total = med.sum(axis=1, keepdims=True)
    med = np.where(total > 0, med / np.maximum(total, 1e-300), 1.0 / 3.0)
    return SegmentPrediction(probs=med)


@dataclass(frozen=True)
class SegScores:
    overall_accuracy: float
    sns_accuracy: float            # speech vs non-speech after collapsing noise+music
    confusion: np.ndarray          # (3, 3) row-normalized, rows = true class
    confusion_counts: np.ndarray   # (3, 3) raw counts
    f1: np.ndarray                 # per-class F1 over (noise, music, speech)
    n_scored: int


def score(pred: SegmentPrediction, truth: Timeline) -> SegScores:
    """Frame accuracy, confusion, and per-class F1 with silence excluded."""
    if pred.n_frames != truth.n_frames:
        raise EvaluationError(
            f"prediction has {pred.n_frames} frames but truth has {truth.n_frames}"
        )
    keep = truth.labels != SILENCE_INDEX
    if not keep.any():
        raise EvaluationError("timeline is entirely silence; nothing to score")
    y_true = truth.labels[keep].astype(np.int64)
    y_pred = pred.labels[keep]

    n_classes = len(CLASSES)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    row_total = counts.sum(axis=1, keepdims=True)
    confusion = counts / np.maximum(row_total, 1)

    overall = float(np.trace(counts) / counts.sum())
    speech = CLASSES.index("speech")
    sns = float(((y_true == speech) == (y_pred == speech)).mean())

    f1 = np.zeros(n_classes)
    for c in range(n_classes):
        tp = counts[c, c]
        denom = 2 * tp + (counts[:, c].sum() - tp) + (counts[c].sum() - tp)
        f1[c] = 2 * tp / denom if denom else 0.0

    return SegScores(overall_accuracy=overall, sns_accuracy=sns, confusion=confusion,
                     confusion_counts=counts, f1=f1, n_scored=int(keep.sum()))


def format_score_tables(scores: SegScores) -> str:
    """Aligned plain-text rendering of the metric tables."""
    lines = [
        f"Frames scored (silence excluded): {scores.n_scored}",
        f"Overall accuracy:          {scores.overall_accuracy * 100:6.2f}%",
        f"Speech/non-speech accuracy: {scores.sns_accuracy * 100:5.2f}%",
        "",
        "Confusion matrix (rows: true, columns: predicted; noise, music, speech):",
    ]
    for row in scores.confusion:
        lines.append("  " + "  ".join(f"{v:.2f}" for v in row))
    lines.append("")
    lines.append("Class-wise F1: " + "  ".join(
        f"{name} {v * 100:.2f}%" for name, v in zip(CLASSES, scores.f1)
    ))
    return "\n".join(lines)
