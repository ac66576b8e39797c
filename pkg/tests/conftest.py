"""Shared fixtures: synthetic corpora and a model trained on them once per
session (reused by the generalization, segmentation, and CLI tests)."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from swishnet import synthdata
from swishnet.data import CLASSES
from swishnet.features import FeatureKind, extract_features
from swishnet.model import build, load_preset
from swishnet.train import TrainConfig, train_on_arrays


def corpus_clip_features(corpus, split_slices, clip_len_s=0.5):
    """Featurize a synthetic corpus and cut fixed-length clips per class."""
    from swishnet.data import clip_frame_slices
    xs, ys = [], []
    for label_idx, name in enumerate(CLASSES):
        for clip in split_slices(corpus[name]):
            feats = extract_features(clip, FeatureKind.MFCC, preprocess=False)
            for sl in clip_frame_slices(len(clip), clip_len_s):
                xs.append(feats.values[sl])
                ys.append(label_idx)
    return np.stack(xs), np.asarray(ys, dtype=np.int64)


@pytest.fixture(scope="session")
def synth_corpus():
    """24 files per class, split 16 train / 2 val / 6 test."""
    rng = np.random.default_rng(2024)
    return synthdata.make_corpus(rng, files_per_class=24, duration_range_s=(2.5, 4.0))


@pytest.fixture(scope="session")
def synth_clipsets(synth_corpus):
    train_x, train_y = corpus_clip_features(synth_corpus, lambda c: c[:16])
    val_x, val_y = corpus_clip_features(synth_corpus, lambda c: c[16:18])
    test_x, test_y = corpus_clip_features(synth_corpus, lambda c: c[18:])
    return {"train": (train_x, train_y), "val": (val_x, val_y), "test": (test_x, test_y)}


@pytest.fixture(scope="session")
def fixture_times():
    """Wall-clock cost of shared fixtures, charged to the tests that use them."""
    return {}


@pytest.fixture(scope="session")
def trained_slim(synth_clipsets, fixture_times):
    """Slim model trained on the synthetic corpus (0.5 s clips)."""
    import time
    start = time.perf_counter()
    m = build(load_preset("swishnet-slim"), rng_seed=0)
    x, y = synth_clipsets["train"]
    vx, vy = synth_clipsets["val"]
    config = TrainConfig(clip_len_s=0.5, epochs=30, batch_size=16, seed=0,
                         base_lr=3e-3, min_lr=1e-4, restart_period=10)
    train_on_arrays(m, x, y, config, x_val=vx, y_val=vy)
    fixture_times["trained_slim"] = time.perf_counter() - start
    return m
