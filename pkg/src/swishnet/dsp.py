"""Signal conditioning: silence removal, loudness equalization, framing.

Operates on AudioClip values; everything here is a pure function. Defaults
follow the pipeline configuration: 25 ms analysis frames with a 10 ms hop,
-40 dB silence threshold, 250 ms loudness blocks.
"""

import numpy as np
from scipy.signal import resample_poly

from .errors import TooShortError
from .wavio import AudioClip

TARGET_SAMPLE_RATE = 16_000

FRAME_MS = 25.0
HOP_MS = 10.0

SILENCE_FRAME_MS = 25.0
SILENCE_THRESHOLD_DB = -40.0

LOUDNESS_WINDOW_MS = 250.0
LOUDNESS_TARGET_RMS = 0.1
LOUDNESS_RMS_FLOOR = 1e-6  # blocks quieter than this are left unscaled


def _samples_per_ms(sample_rate: int, ms: float) -> int:
    return max(1, int(round(sample_rate * ms / 1000.0)))


def resample(clip: AudioClip, target_rate: int = TARGET_SAMPLE_RATE) -> AudioClip:
    """Windowed-sinc (polyphase) resampling to target_rate."""
    if clip.sample_rate == target_rate:
        return clip
    gcd = np.gcd(clip.sample_rate, target_rate)
    out = resample_poly(clip.samples, target_rate // gcd, clip.sample_rate // gcd)
    out = np.clip(out, -1.0, 1.0)
    return AudioClip(samples=out, sample_rate=target_rate)


def remove_silence(
    clip: AudioClip,
    frame_ms: float = SILENCE_FRAME_MS,
    threshold_db: float = SILENCE_THRESHOLD_DB,
) -> AudioClip:
    """Drop frames whose mean power is below threshold_db relative to the loudest frame.

    Frames are consecutive non-overlapping blocks of frame_ms (the trailing
    partial block is scored on its own length). The result may be empty.
    """
    frame_len = _samples_per_ms(clip.sample_rate, frame_ms)
    x = clip.samples
    if x.size == 0:
        return clip
    n_frames = int(np.ceil(x.size / frame_len))
    powers = np.empty(n_frames)
    for i in range(n_frames):
        frame = x[i * frame_len:(i + 1) * frame_len]
        powers[i] = np.mean(frame * frame)
    peak = powers.max()
    if peak <= 0.0:
        return AudioClip(samples=np.empty(0), sample_rate=clip.sample_rate)
    keep = powers >= peak * 10.0 ** (threshold_db / 10.0)
    pieces = [x[i * frame_len:(i + 1) * frame_len] for i in range(n_frames) if keep[i]]
    if not pieces:
        return AudioClip(samples=np.empty(0), sample_rate=clip.sample_rate)
    return AudioClip(samples=np.concatenate(pieces), sample_rate=clip.sample_rate)


def equalize_loudness(
    clip: AudioClip,
    window_ms: float = LOUDNESS_WINDOW_MS,
    target_rms: float = LOUDNESS_TARGET_RMS,
) -> AudioClip:
    """Scale consecutive window_ms blocks so each block's RMS equals target_rms.

    Blocks with RMS below the digital-silence floor are left untouched.
    Output length equals input length; the trailing partial block is scaled
    on its own RMS.
    """
    if target_rms <= 0:
        raise ValueError(f"target_rms must be positive, got {target_rms}")
    block = _samples_per_ms(clip.sample_rate, window_ms)
    x = clip.samples.copy()
    for start in range(0, x.size, block):
        seg = x[start:start + block]
        rms = np.sqrt(np.mean(seg * seg))
        if rms >= LOUDNESS_RMS_FLOOR:
            seg *= target_rms / rms
    return AudioClip(samples=x, sample_rate=clip.sample_rate)


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window (denominator N, not N-1)."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    return (n_samples - frame_len) // hop + 1


def frame_signal(
    clip: AudioClip,
    frame_ms: float = FRAME_MS,
    hop_ms: float = HOP_MS,
    window: bool = True,
) -> np.ndarray:
    """Slice a clip into overlapping windowed frames, (n_frames, frame_len).

    n_frames = floor((N - L) / H) + 1; the trailing partial frame is dropped.
    Raises TooShortError when the clip holds less than one frame.
    """
    frame_len = _samples_per_ms(clip.sample_rate, frame_ms)
    hop = _samples_per_ms(clip.sample_rate, hop_ms)
    x = clip.samples
    if x.size < frame_len:
        raise TooShortError(
            f"clip of {x.size} samples is shorter than one {frame_len}-sample frame"
        )
    n = frame_count(x.size, frame_len, hop)
    idx = hop * np.arange(n)[:, None] + np.arange(frame_len)[None, :]
    frames = x[idx]
    if window:
        frames = frames * hann_window(frame_len)
    return frames
