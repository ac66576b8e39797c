"""Training loop: shuffled minibatches over fixed-length clips, Adam with
cosine-annealed warm restarts, optional distillation, best-validation
checkpointing, and a line-per-epoch metric log."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dsp, ops
from .data import (CLASS_TO_INDEX, ManifestRecord, clip_frame_slices, clip_id,
                   load_teacher_logits)
from .errors import DataError, SwishNetError, TooShortError
from .features import FeatureKind, extract_features
from .losses import distill_loss
from .model import Model, forward
from .optim import adam_init, adam_step, sgdr_schedule
from .tensor import Tensor
from .wavio import load_wav

REFERENCE_CLIP_LEN_S = 2.0  # batch_size is quoted at this clip length


@dataclass(frozen=True)
class DistillConfig:
    temperature: float
    soft_weight: float = 0.9


@dataclass(frozen=True)
class TrainConfig:
    clip_len_s: float = 1.0
    overlap: float = 0.5
    epochs: int = 120
    base_lr: float = 1e-3
    min_lr: float = 1e-5
    restart_period: int = 10
    restart_mult: int = 2
    batch_size: int = 16  # at the 2.0 s reference; shorter clips scale it up
    seed: int = 0
    preprocess: bool = True
    distill: DistillConfig | None = None

    def __post_init__(self):
        if not 0 < self.min_lr <= self.base_lr:
            raise ValueError("need 0 < min_lr <= base_lr")
        if self.distill is not None and self.distill.temperature <= 0:
            raise ValueError("distillation temperature must be positive")

    def effective_batch_size(self) -> int:
        """Scaled so shorter clips (more samples per epoch) use larger
        batches, keeping gradient updates per epoch roughly constant."""
        return max(1, int(round(self.batch_size * REFERENCE_CLIP_LEN_S / self.clip_len_s)))


@dataclass
class ClipSet:
    x: np.ndarray            # (n_clips, frames, 20)
    y: np.ndarray            # (n_clips,)
    ids: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return self.x.shape[0]


def prepare_clips(
    records: list[ManifestRecord],
    split: str,
    clip_len_s: float,
    overlap: float = 0.5,
    preprocess: bool = True,
) -> ClipSet:
    """Extract MFCC features per file and slice them into training clips."""
    xs, ys, ids = [], [], []
    for record in records:
        if record.split != split:
            continue
        clip = dsp.resample(load_wav(record.path))
        if preprocess:
            clip = dsp.remove_silence(clip)
            if len(clip):
                clip = dsp.equalize_loudness(clip)
        try:
            feats = extract_features(clip, FeatureKind.MFCC, preprocess=False)
        except (TooShortError, SwishNetError):
            continue
        slices = clip_frame_slices(len(clip), clip_len_s,
                                   sample_rate=16_000, overlap=overlap)
        for i, sl in enumerate(slices):
            xs.append(feats.values[sl])
            ys.append(CLASS_TO_INDEX[record.label])
            ids.append(clip_id(record.path, i))
    if not xs:
        return ClipSet(x=np.zeros((0, 0, 20)), y=np.zeros(0, dtype=np.int64))
    return ClipSet(x=np.stack(xs), y=np.asarray(ys, dtype=np.int64), ids=ids)


def evaluate(m: Model, x: np.ndarray, y: np.ndarray, batch_size: int = 256) -> tuple[float, float]:
    """Mean cross-entropy and accuracy over a clip set."""
    total_loss = 0.0
    correct = 0
    for start in range(0, x.shape[0], batch_size):
        xb = x[start:start + batch_size]
        yb = y[start:start + batch_size]
        logits = forward(m, Tensor(xb), training=False)
        total_loss += float(ops.cross_entropy(logits, yb).data) * xb.shape[0]
        correct += int((np.argmax(logits.data, axis=1) == yb).sum())
    n = x.shape[0]
    return total_loss / n, correct / n


def _epoch_log_line(row: dict) -> str:
    return ("{epoch}\t{lr:.8g}\t{train_loss:.6f}\t{train_acc:.4f}"
            "\t{val_loss}\t{val_acc}").format(
        epoch=row["epoch"], lr=row["lr"],
        train_loss=row["train_loss"], train_acc=row["train_acc"],
        val_loss="" if row["val_loss"] is None else f"{row['val_loss']:.6f}",
        val_acc="" if row["val_acc"] is None else f"{row['val_acc']:.4f}",
    )


def train_on_arrays(
    m: Model,
    x_train: np.ndarray,
    y_train: np.ndarray,
    config: TrainConfig,
    x_val: np.ndarray | None = None,
    y_val: np.ndarray | None = None,
    teacher: np.ndarray | None = None,
    log_path=None,
    stop_at_train_acc: float | None = None,
) -> list[dict]:
    """Core loop over pre-extracted clips. Restores the best-validation
    parameters (best train loss when no validation set) before returning."""
    if config.distill is not None and teacher is None:
        raise DataError("distillation requested but no teacher logits supplied")
    rng = np.random.default_rng(config.seed)
    state = adam_init(m.params)
    lrs = sgdr_schedule(config.epochs, config.base_lr, config.min_lr,
                        config.restart_period, config.restart_mult)
    batch = config.effective_batch_size()
    n = x_train.shape[0]
    history: list[dict] = []
    best_key = np.inf
    best_params: dict[str, np.ndarray] = {name: p.data.copy() for name, p in m.params.items()}
    log_lines: list[str] = []

    for epoch in range(config.epochs):
        lr = float(lrs[epoch])
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            xb = Tensor(x_train[idx])
            yb = y_train[idx]
            for p in m.params.values():
                p.zero_grad()
            logits = forward(m, xb, training=True, rng=rng)
            if config.distill is not None:
                loss = distill_loss(logits, teacher[idx], yb,
                                    config.distill.temperature,
                                    config.distill.soft_weight)
            else:
                loss = ops.cross_entropy(logits, yb)
            loss.backward()
            grads = {name: p.grad for name, p in m.params.items() if p.grad is not None}
            adam_step(state, m.params, grads, lr)
            epoch_loss += float(loss.data) * idx.size

        train_loss, train_acc = evaluate(m, x_train, y_train)
        if x_val is not None and x_val.shape[0]:
            val_loss, val_acc = evaluate(m, x_val, y_val)
            key = val_loss
        else:
            val_loss = val_acc = None
            key = train_loss
        if key < best_key:
            best_key = key
            best_params = {name: p.data.copy() for name, p in m.params.items()}
        row = {"epoch": epoch, "lr": lr, "batch_loss": epoch_loss / n,
               "train_loss": train_loss, "train_acc": train_acc,
               "val_loss": val_loss, "val_acc": val_acc}
        history.append(row)
        log_lines.append(_epoch_log_line(row))
        if stop_at_train_acc is not None and train_acc >= stop_at_train_acc:
            break

    for name, p in m.params.items():
        p.data = best_params[name]
    m.metadata["epochs_trained"] = str(len(history))
    m.metadata["best_key"] = f"{best_key:.6f}"
    if log_path is not None:
        Path(log_path).write_text("\n".join(log_lines) + "\n")
    return history


def train(
    m: Model,
    records: list[ManifestRecord],
    config: TrainConfig,
    teacher_logits_path=None,
    log_path=None,
) -> list[dict]:
    """Manifest-driven training: features for every train/val file, clips,
    then the core loop. Distillation reads teacher logits keyed by clip id."""
    train_set = prepare_clips(records, "train", config.clip_len_s,
                              config.overlap, config.preprocess)
    if len(train_set) == 0:
        raise DataError("no training clips could be extracted from the manifest")
    val_set = prepare_clips(records, "val", config.clip_len_s,
                            config.overlap, config.preprocess)

    teacher = None
    if config.distill is not None:
        if teacher_logits_path is None:
            raise DataError("distillation config given but no teacher logits file")
        table = load_teacher_logits(teacher_logits_path)
        rows = []
        for cid in train_set.ids:
            if cid not in table:
                raise DataError(f"no teacher logits for clip {cid!r}")
            rows.append(table[cid])
        teacher = np.stack(rows)

    return train_on_arrays(
        m, train_set.x, train_set.y, config,
        x_val=val_set.x if len(val_set) else None,
        y_val=val_set.y if len(val_set) else None,
        teacher=teacher, log_path=log_path,
    )
