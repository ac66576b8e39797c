"""Self-normalizing feed-forward baseline: 4 SELU hidden layers with alpha
dropout, trained frame-wise, clip decisions by averaged probabilities or
majority vote."""

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .errors import ConfigError
from .tensor import Tensor

# Hidden widths sized so the total lands at the published baseline scale
# (179,235 parameters for 60 inputs / 3 classes).
FULL_SCALE_WIDTHS = (234, 234, 234, 231)
DEFAULT_DROPOUT = 0.05


@dataclass
class SnnModel:
    widths: tuple[int, ...]
    d_in: int
    n_classes: int
    params: dict[str, Tensor]
    dropout_rate: float = DEFAULT_DROPOUT
    metadata: dict[str, str] = field(default_factory=dict)


def snn_param_count(widths: tuple[int, ...], d_in: int = 60, n_classes: int = 3) -> int:
    total = 0
    previous = d_in
    for width in widths:
        total += (previous + 1) * width
        previous = width
    return total + (previous + 1) * n_classes


def build_snn(
    widths: tuple[int, ...] = FULL_SCALE_WIDTHS,
    d_in: int = 60,
    n_classes: int = 3,
    seed: int = 0,
    dropout_rate: float = DEFAULT_DROPOUT,
) -> SnnModel:
    if len(widths) != 4:
        raise ConfigError(f"the baseline uses 4 hidden layers, got {len(widths)}")
    rng = np.random.default_rng(seed)
    params: dict[str, Tensor] = {}
    previous = d_in
    for i, width in enumerate(list(widths) + [n_classes]):
        # SELU networks want lecun-normal initialization
        scale = 1.0 / np.sqrt(previous)
        params[f"l{i}.w"] = Tensor(rng.normal(0.0, scale, size=(previous, width)),
                                   requires_grad=True)
        params[f"l{i}.b"] = Tensor(np.zeros(width), requires_grad=True)
        previous = width
    return SnnModel(widths=tuple(widths), d_in=d_in, n_classes=n_classes,
                    params=params, dropout_rate=dropout_rate,
                    metadata={"seed": str(seed)})


def snn_forward(
    m: SnnModel,
    x,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Frames (D,) or (B, D) -> logits."""
    h = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))
    n_hidden = len(m.widths)
    for i in range(n_hidden):
        h = ops.selu(ops.dense(h, m.params[f"l{i}.w"], m.params[f"l{i}.b"]))
        if training and m.dropout_rate > 0.0:
            h = ops.alpha_dropout(h, m.dropout_rate, training=True, rng=rng)
    return ops.dense(h, m.params[f"l{n_hidden}.w"], m.params[f"l{n_hidden}.b"])


def train_snn(
    m: SnnModel,
    frames: np.ndarray,
    labels: np.ndarray,
    epochs: int = 30,
    batch_size: int = 256,
    lr: float = 1e-3,
    seed: int = 0,
    val: tuple[np.ndarray, np.ndarray] | None = None,
    patience: int = 5,
) -> list[dict]:
    """Frame-wise training with Adam; stops early once validation loss has
    not improved for `patience` epochs."""
    from . import ops
    from .optim import adam_init, adam_step

    rng = np.random.default_rng(seed)
    state = adam_init(m.params)
    history = []
    best_val = np.inf
    stale = 0
    n = frames.shape[0]
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            for p in m.params.values():
                p.zero_grad()
            logits = snn_forward(m, frames[idx], training=True, rng=rng)
            loss = ops.cross_entropy(logits, labels[idx])
            loss.backward()
            adam_step(state, m.params,
                      {k: p.grad for k, p in m.params.items() if p.grad is not None}, lr)
        row = {"epoch": epoch}
        if val is not None:
            logits = snn_forward(m, val[0])
            row["val_loss"] = float(ops.cross_entropy(logits, val[1]).data)
            if row["val_loss"] < best_val - 1e-6:
                best_val = row["val_loss"]
                stale = 0
            else:
                stale += 1
        history.append(row)
        if val is not None and stale >= patience:
            break
    return history


def snn_predict_clip(m: SnnModel, frames: np.ndarray, vote: str = "mean") -> tuple[int, np.ndarray]:
    """Clip decision from per-frame predictions.

    vote="mean" averages per-frame probabilities; vote="majority" counts
    per-frame argmax labels (ties broken by the averaged probabilities).
    """
    logits = snn_forward(m, frames)
    probs = ops.softmax(logits).data
    mean_probs = probs.mean(axis=0)
    if vote == "mean":
        return int(np.argmax(mean_probs)), mean_probs
    if vote == "majority":
        counts = np.bincount(np.argmax(probs, axis=1), minlength=m.n_classes)
        best = counts.max()
        tied = np.flatnonzero(counts == best)
        winner = tied[np.argmax(mean_probs[tied])]
        return int(winner), mean_probs
    raise ConfigError(f"unknown vote mode {vote!r}")
