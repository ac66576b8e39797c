"""Dataset manifests, per-class splits, clip slicing, and teacher-logit files.

Manifest lines are `path<TAB>class<TAB>split`; teacher logits are
`clip_id<TAB>l0<TAB>l1<TAB>l2` keyed by `<file stem>:<clip index>`.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import FRAME_MS, HOP_MS
from .errors import ConfigError, DataError
from .wavio import AudioClip

CLASSES = ("noise", "music", "speech")
CLASS_TO_INDEX = {name: i for i, name in enumerate(CLASSES)}
SPLITS = ("train", "val", "test")

TRAIN_FRACTION = 0.65
VAL_FRACTION = 0.10


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    label: str
    split: str


def split_dataset(files_by_class: dict[str, list], seed: int = 0) -> list[ManifestRecord]:
    """Shuffled per-class 65/10/25 assignment, floor-then-distribute rounding.

    train = floor(0.65 n), val = floor(0.10 n), test = the remainder.
    Deterministic per seed; needs at least 4 files per class.
    """
    rng = np.random.default_rng(seed)
    records = []
    for label in sorted(files_by_class):
        if label not in CLASSES:
            raise ConfigError(f"unknown class {label!r}; expected one of {CLASSES}")
        files = [str(f) for f in files_by_class[label]]
        if len(files) < 4:
            raise ConfigError(f"class {label!r} has {len(files)} files; need at least 4")
        order = rng.permutation(len(files))
        n_train = int(TRAIN_FRACTION * len(files))
        n_val = int(VAL_FRACTION * len(files))
        for rank, idx in enumerate(order):
            if rank < n_train:
                split = "train"
            elif rank < n_train + n_val:
                split = "val"
            else:
                split = "test"
            records.append(ManifestRecord(path=files[idx], label=label, split=split))
    return records


def save_manifest(path, records: list[ManifestRecord]) -> None:
    lines = [f"{r.path}\t{r.label}\t{r.split}" for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def load_manifest(path) -> list[ManifestRecord]:
    records = []
    seen: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(f"{path}:{lineno}: expected path<TAB>class<TAB>split")
        file_path, label, split = parts
        if label not in CLASSES:
            raise DataError(f"{path}:{lineno}: unknown class {label!r}")
        if split not in SPLITS:
            raise DataError(f"{path}:{lineno}: unknown split {split!r}")
        if file_path in seen and seen[file_path] != split:
            raise DataError(f"{path}:{lineno}: {file_path} appears in two splits")
        seen[file_path] = split
        records.append(ManifestRecord(path=file_path, label=label, split=split))
    return records


def make_clips(clip: AudioClip, clip_len_s: float, overlap: float = 0.5) -> list[AudioClip]:
    """Cut a clip into fixed-length pieces starting every clip_len*(1-overlap)
    seconds; the trailing partial piece is dropped. May return []."""
    length = int(round(clip_len_s * clip.sample_rate))
    hop = max(1, int(round(length * (1.0 - overlap))))
    if len(clip) < length:
        return []
    n = (len(clip) - length) // hop + 1
    return [
        AudioClip(samples=clip.samples[i * hop:i * hop + length], sample_rate=clip.sample_rate)
        for i in range(n)
    ]


def clip_frame_slices(
    n_samples: int,
    clip_len_s: float,
    sample_rate: int = 16_000,
    overlap: float = 0.5,
) -> list[slice]:
    """Feature-matrix row slices equivalent to featurizing make_clips output.

    Clip starts land on the hop grid, so slicing the whole-file feature
    matrix produces the same frames as framing each audio clip separately;
    the count comes from the audio formula so both paths agree exactly.
    """
    frame_len = int(round(sample_rate * FRAME_MS / 1000.0))
    hop = int(round(sample_rate * HOP_MS / 1000.0))
    clip_samples = int(round(clip_len_s * sample_rate))
    clip_hop = max(1, int(round(clip_samples * (1.0 - overlap))))
    if n_samples < clip_samples:
        return []
    n = (n_samples - clip_samples) // clip_hop + 1
    frames_per_clip = (clip_samples - frame_len) // hop + 1
    start_step = clip_hop // hop
    return [slice(i * start_step, i * start_step + frames_per_clip) for i in range(n)]


def clip_id(path, index: int) -> str:
    return f"{Path(path).stem}:{index}"


def save_teacher_logits(path, logits_by_id: dict[str, np.ndarray]) -> None:
    lines = [
        cid + "\t" + "\t".join(f"{v:.8g}" for v in vals)
        for cid, vals in logits_by_id.items()
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_teacher_logits(path) -> dict[str, np.ndarray]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise DataError(f"{path}:{lineno}: expected clip_id and 3 logits")
        try:
            out[parts[0]] = np.array([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric logit") from exc
    return out
