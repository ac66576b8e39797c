"""MFCC and log mel-filterbank feature extraction, deltas, and the on-disk cache.

The standard front end: 25 ms frames / 10 ms hop, 512-point FFT, HTK mel
scale, orthonormal DCT-II. Energies are floored at 1e-10 before the log so
silent frames stay finite.
"""

import struct
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import dsp
from .errors import ConfigError, FileFormatError, SwishNetError
from .wavio import AudioClip

N_FFT = 512
N_MELS_MFCC = 32
N_MFCC = 20
N_MELS_LOG_MFB = 64
LOG_FLOOR = 1e-10
DELTA_HALF_WIDTH = 2


class FeatureKind(IntEnum):
    """Code stored in the feature-cache header."""

    MFCC = 0
    LOG_MFB = 1
    MFCC_DELTAS = 2


_KIND_COEFFS = {FeatureKind.MFCC: 20, FeatureKind.LOG_MFB: 64, FeatureKind.MFCC_DELTAS: 60}


@dataclass(frozen=True)
class FeatureMatrix:
    """Frames-by-coefficients feature grid with frame timing metadata."""

    values: np.ndarray
    kind: FeatureKind
    frame_len_ms: float = dsp.FRAME_MS
    hop_ms: float = dsp.HOP_MS

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1:
            raise SwishNetError(f"feature matrix must be 2-D with >= 1 frame, got {values.shape}")
        if not np.isfinite(values).all():
            raise SwishNetError("feature values must be finite")
        expected = _KIND_COEFFS[FeatureKind(self.kind)]
        if values.shape[1] != expected:
            raise SwishNetError(
                f"{FeatureKind(self.kind).name} expects {expected} coefficients, "
                f"got {values.shape[1]}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", FeatureKind(self.kind))

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_coeffs(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MelFilterBank:
    """Triangular mel filters as an (n_mels, n_fft/2+1) weight matrix."""

    n_fft: int
    n_mels: int
    sample_rate: int
    weights: np.ndarray


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_fft: int, n_mels: int, sample_rate: int) -> MelFilterBank:
    """Triangular filters with centers equally spaced in mel between 0 and Nyquist.

    Raises ConfigError when n_mels is too large for the FFT resolution (a
    filter would have no positive weight).
    """
    if n_mels < 1:
        raise ConfigError(f"n_mels must be >= 1, got {n_mels}")
    edges_hz = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    bin_hz = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)
    weights = np.zeros((n_mels, bin_hz.size))
    for m in range(n_mels):
        lo, center, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        weights[m] = np.maximum(0.0, np.minimum(rising, falling))
    if not (weights.max(axis=1) > 0).all():
        raise ConfigError(
            f"{n_mels} mel bands exceed the resolution of a {n_fft}-point FFT "
            f"at {sample_rate} Hz: some filter has zero support"
        )
    return MelFilterBank(n_fft=n_fft, n_mels=n_mels, sample_rate=sample_rate, weights=weights)


@lru_cache(maxsize=8)
def _cached_filterbank(n_fft: int, n_mels: int, sample_rate: int) -> MelFilterBank:
    return mel_filterbank(n_fft, n_mels, sample_rate)


def dct_matrix(n_coeffs: int, n_inputs: int) -> np.ndarray:
    """Orthonormal DCT-II basis, (n_coeffs, n_inputs)."""
    k = np.arange(n_coeffs)[:, None]
    m = np.arange(n_inputs)[None, :]
    basis = np.cos(np.pi * k * (2 * m + 1) / (2 * n_inputs))
    basis *= np.sqrt(2.0 / n_inputs)
    basis[0] *= np.sqrt(0.5)
    return basis


def _log_mel_energies(frames: np.ndarray, fbank: MelFilterBank) -> np.ndarray:
    spectrum = np.fft.rfft(frames, n=fbank.n_fft, axis=1)
    power = spectrum.real**2 + spectrum.imag**2
    energies = power @ fbank.weights.T
    return np.log(np.maximum(energies, LOG_FLOOR))


def mfcc(frames: np.ndarray, fbank: MelFilterBank, n_coeffs: int = N_MFCC) -> FeatureMatrix:
    """Windowed frames -> power spectrum -> mel energies -> log -> DCT-II."""
    if fbank.n_mels < n_coeffs:
        raise ConfigError(f"need n_mels >= n_coeffs, got {fbank.n_mels} < {n_coeffs}")
    log_mel = _log_mel_energies(frames, fbank)
    values = log_mel @ dct_matrix(n_coeffs, fbank.n_mels).T
    return FeatureMatrix(values=values, kind=FeatureKind.MFCC)


def log_mfb(frames: np.ndarray, fbank: MelFilterBank) -> FeatureMatrix:
    """As mfcc() but stopping before the DCT; expects a 64-band filterbank."""
    return FeatureMatrix(values=_log_mel_energies(frames, fbank), kind=FeatureKind.LOG_MFB)


def deltas(features: FeatureMatrix, half_width: int = DELTA_HALF_WIDTH) -> FeatureMatrix:
    """Append regression deltas and delta-deltas: [c, d, dd] -> 60 coefficients."""
    c = features.values
    d = _regression_delta(c, half_width)
    dd = _regression_delta(d, half_width)
    return FeatureMatrix(values=np.hstack([c, d, dd]), kind=FeatureKind.MFCC_DELTAS)


def _regression_delta(x: np.ndarray, half_width: int) -> np.ndarray:
    # d_t = sum_n n*(x[t+n] - x[t-n]) / (2*sum_n n^2), edges replicated
    padded = np.pad(x, ((half_width, half_width), (0, 0)), mode="edge")
    denom = 2.0 * sum(n * n for n in range(1, half_width + 1))
    out = np.zeros_like(x)
    t = np.arange(x.shape[0])
    for n in range(1, half_width + 1):
        out += n * (padded[t + half_width + n] - padded[t + half_width - n])
    return out / denom


def extract_features(
    clip: AudioClip,
    kind: FeatureKind = FeatureKind.MFCC,
    preprocess: bool = True,
) -> FeatureMatrix:
    """Full front end: resample to 16 kHz, condition, frame, featurize.

    preprocess=False skips silence removal and loudness equalization (useful
    for already-conditioned or synthetic audio).
    """
    clip = dsp.resample(clip)
    if preprocess:
        clip = dsp.remove_silence(clip)
        if len(clip) == 0:
            raise SwishNetError("clip is entirely silent after power thresholding")
        clip = dsp.equalize_loudness(clip)
    frames = dsp.frame_signal(clip)
    kind = FeatureKind(kind)
    if kind == FeatureKind.LOG_MFB:
        return log_mfb(frames, _cached_filterbank(N_FFT, N_MELS_LOG_MFB, clip.sample_rate))
    base = mfcc(frames, _cached_filterbank(N_FFT, N_MELS_MFCC, clip.sample_rate))
    if kind == FeatureKind.MFCC:
        return base
    return deltas(base)


_CACHE_MAGIC = b"SWFT"
_CACHE_VERSION = 1


def save_features(path, features: FeatureMatrix) -> None:
    """Write the little-endian feature cache: SWFT, version, dims, kind, f32 rows."""
    header = _CACHE_MAGIC + struct.pack(
        "<IIIB", _CACHE_VERSION, features.n_frames, features.n_coeffs, int(features.kind)
    )
    Path(path).write_bytes(header + features.values.astype("<f4").tobytes())


def load_features(path) -> FeatureMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < 17 or raw[:4] != _CACHE_MAGIC:
        raise FileFormatError(f"{path}: not a feature cache (bad magic)")
    version, n_frames, n_coeffs, kind = struct.unpack_from("<IIIB", raw, 4)
    if version != _CACHE_VERSION:
        raise FileFormatError(f"{path}: unsupported cache version {version}")
    body = raw[17:]
    expected = n_frames * n_coeffs * 4
    if len(body) != expected:
        raise FileFormatError(
            f"{path}: truncated cache ({len(body)} payload bytes, expected {expected})"
        )
    values = np.frombuffer(body, dtype="<f4").astype(np.float64).reshape(n_frames, n_coeffs)
    return FeatureMatrix(values=values, kind=FeatureKind(kind))
