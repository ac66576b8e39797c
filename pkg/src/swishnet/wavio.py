"""Minimal RIFF/WAVE reading and writing.

Supports the two encodings the corpora use: PCM16 and IEEE float32, mono or
multichannel (averaged to mono on load). Hand-rolled rather than delegated so
malformed files and unsupported codecs raise distinct, typed errors.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SwishNetError, UnsupportedFormatError, WavDecodeError

PCM16_SCALE = 32768.0

_FORMAT_PCM = 1
_FORMAT_IEEE_FLOAT = 3


@dataclass(frozen=True)
class AudioClip:
    """Mono audio: float64 samples (nominally in [-1, 1]) plus a sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise SwishNetError(f"AudioClip samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.isfinite(samples).all():
            raise SwishNetError("AudioClip samples must be finite")
        if int(self.sample_rate) <= 0:
            raise SwishNetError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def __len__(self) -> int:
        return self.samples.size


def _read_exact(buf: bytes, offset: int, n: int, what: str) -> bytes:
    if offset + n > len(buf):
        raise WavDecodeError(f"truncated WAV: {what} runs past end of file")
    return buf[offset:offset + n]


def load_wav(path) -> AudioClip:
    """Decode a RIFF/WAVE file to a mono AudioClip.

    PCM16 samples are scaled by 1/32768; multichannel audio is averaged to
    mono. Raises WavDecodeError for malformed files and
    UnsupportedFormatError for codecs other than PCM16 / float32.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavDecodeError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    offset = 12
    while offset + 8 <= len(raw):
        chunk_id = raw[offset:offset + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, offset + 4)
        body = _read_exact(raw, offset + 8, chunk_size, f"chunk {chunk_id!r}")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavDecodeError(f"{path}: fmt chunk too small ({chunk_size} bytes)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = body
        offset += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise WavDecodeError(f"{path}: missing fmt chunk")
    if data is None:
        raise WavDecodeError(f"{path}: missing data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels < 1:
        raise WavDecodeError(f"{path}: zero channels")
    if audio_format == _FORMAT_PCM and bits == 16:
        values = np.frombuffer(data[: len(data) - len(data) % 2], dtype="<i2")
        samples = values.astype(np.float64) / PCM16_SCALE
    elif audio_format == _FORMAT_IEEE_FLOAT and bits == 32:
        values = np.frombuffer(data[: len(data) - len(data) % 4], dtype="<f4")
        samples = values.astype(np.float64)
    else:
        raise UnsupportedFormatError(
            f"{path}: unsupported codec (format={audio_format}, bits={bits}); "
            "only PCM16 and IEEE float32 are handled"
        )

    if n_channels > 1:
        usable = samples.size - samples.size % n_channels
        samples = samples[:usable].reshape(-1, n_channels).mean(axis=1)
    return AudioClip(samples=samples, sample_rate=sample_rate)


def save_wav(path, clip: AudioClip) -> None:
    """Write a mono PCM16 WAV file (samples clipped to [-1, 1])."""
    scaled = np.clip(clip.samples, -1.0, 1.0) * PCM16_SCALE
    pcm = np.clip(np.rint(scaled), -32768, 32767).astype("<i2")
    data = pcm.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    fmt = b"fmt " + struct.pack(
        "<IHHIIHH", 16, _FORMAT_PCM, 1, clip.sample_rate,
        clip.sample_rate * 2, 2, 16,
    )
    with open(path, "wb") as fh:
        fh.write(header + fmt + b"data" + struct.pack("<I", len(data)) + data)
