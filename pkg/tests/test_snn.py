"""The self-normalizing FNN baseline."""

import numpy as np
import pytest

from swishnet import ops
from swishnet.errors import ConfigError
from swishnet.gradcheck import finite_diff_check
from swishnet.snn import (FULL_SCALE_WIDTHS, build_snn, snn_forward,
                          snn_param_count, snn_predict_clip)
from swishnet.tensor import Tensor, from_op


def test_paper_scale_width_preset():
    total = snn_param_count(FULL_SCALE_WIDTHS, d_in=60, n_classes=3)
    assert abs(total - 179_203) < 500
    m = build_snn(FULL_SCALE_WIDTHS, seed=0)
    allocated = sum(p.data.size for p in m.params.values())
    assert allocated == total


def test_needs_four_layers():
    with pytest.raises(ConfigError):
        build_snn((10, 10, 10), d_in=6)


def test_zero_input_propagates_zeros():
    m = build_snn((8, 8, 8, 8), d_in=6, seed=0)
    logits = snn_forward(m, np.zeros(6))
    np.testing.assert_array_equal(logits.data, 0.0)  # selu(0)=0 and zero biases


def test_end_to_end_gradients():
    m = build_snn((6, 5, 4, 4), d_in=8, seed=1)
    rng = np.random.default_rng(2)
    x = rng.standard_normal((4, 8))
    labels = np.array([0, 1, 2, 1])
    tensors = list(m.params.values())

    def fn(*_):
        return ops.cross_entropy(snn_forward(m, x), labels)

    assert finite_diff_check(fn, tensors) < 1e-4


def test_clip_votes():
    m = build_snn((8, 8, 8, 8), d_in=4, seed=3)
    rng = np.random.default_rng(4)
    frames = rng.standard_normal((12, 4))
    for vote in ("mean", "majority"):
        label, probs = snn_predict_clip(m, frames, vote=vote)
        assert 0 <= label < 3
        assert abs(probs.sum() - 1.0) < 1e-9
    with pytest.raises(ConfigError):
        snn_predict_clip(m, frames, vote="bogus")


def test_overfits_tiny_problem():
    from swishnet.snn import train_snn
    m = build_snn((16, 16, 16, 16), d_in=4, seed=5, dropout_rate=0.0)
    rng = np.random.default_rng(6)
    x = np.vstack([rng.normal(c, 0.3, size=(20, 4)) for c in (-2.0, 0.0, 2.0)])
    y = np.repeat(np.arange(3), 20)
    train_snn(m, x, y, epochs=120, batch_size=60, lr=3e-3, seed=0)
    pred = np.argmax(snn_forward(m, x).data, axis=1)
    assert (pred == y).mean() == 1.0


def test_early_stopping_on_plateau():
    from swishnet.snn import train_snn
    rng = np.random.default_rng(7)
    x = rng.standard_normal((120, 4))
    y = rng.integers(0, 3, 120)  # unlearnable labels
    x_val = rng.standard_normal((40, 4))
    y_val = rng.integers(0, 3, 40)  # held-out noise: validation plateaus
    m = build_snn((8, 8, 8, 8), d_in=4, seed=0, dropout_rate=0.0)
    history = train_snn(m, x, y, epochs=200, batch_size=64, lr=1e-3, seed=0,
                        val=(x_val, y_val), patience=3)
    assert len(history) < 200
