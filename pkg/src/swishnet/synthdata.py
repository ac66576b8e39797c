"""Synthetic three-class audio with well-separated spectra, for tests and
demos without a real corpus: band-limited noise, steady harmonic chords, and
amplitude-modulated harmonic tones that mimic voiced speech cadence."""

import numpy as np

from .wavio import AudioClip

SAMPLE_RATE = 16_000
RMS_LEVEL = 0.1


def _normalize(x: np.ndarray, rms: float = RMS_LEVEL) -> np.ndarray:
    current = np.sqrt(np.mean(x * x))
    if current < 1e-12:
        return x
    y = x * (rms / current)
    peak = np.abs(y).max()
    if peak > 0.99:
        y *= 0.99 / peak
    return y


def make_noise_clip(rng: np.random.Generator, duration_s: float) -> AudioClip:
    """Broadband noise band-passed to a random high band (2-7 kHz)."""
    n = int(round(duration_s * SAMPLE_RATE))
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / SAMPLE_RATE)
    lo = rng.uniform(1800.0, 2600.0)
    hi = rng.uniform(5200.0, 7000.0)
    spectrum[(freqs < lo) | (freqs > hi)] = 0.0
    return AudioClip(samples=_normalize(np.fft.irfft(spectrum, n)), sample_rate=SAMPLE_RATE)


def make_music_clip(rng: np.random.Generator, duration_s: float) -> AudioClip:
    """A sustained low-register chord: a few harmonic stacks, steady level."""
    n = int(round(duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    root = rng.uniform(110.0, 220.0)
    x = np.zeros(n)
    for ratio in (1.0, 1.25, 1.5):
        f0 = root * ratio * rng.uniform(0.998, 1.002)
        for harmonic in range(1, 5):
            x += (1.0 / harmonic) * np.sin(2 * np.pi * f0 * harmonic * t + rng.uniform(0, 2 * np.pi))
    return AudioClip(samples=_normalize(x), sample_rate=SAMPLE_RATE)


def make_speech_clip(rng: np.random.Generator, duration_s: float) -> AudioClip:
    """Voiced-speech-like signal: mid-pitch harmonics with vibrato and a
    syllable-rate amplitude envelope."""
    n = int(round(duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    f0 = rng.uniform(100.0, 240.0)
    vibrato = 1.0 + 0.03 * np.sin(2 * np.pi * rng.uniform(4.0, 6.0) * t)
    phase = 2 * np.pi * f0 * np.cumsum(vibrato) / SAMPLE_RATE
    x = np.zeros(n)
    for harmonic in range(1, 9):
        x += (1.0 / harmonic) * np.sin(harmonic * phase + rng.uniform(0, 2 * np.pi))
    syllable_hz = rng.uniform(3.0, 6.0)
    envelope = 0.1 + 0.9 * 0.5 * (1 - np.cos(2 * np.pi * syllable_hz * t + rng.uniform(0, 2 * np.pi)))
    return AudioClip(samples=_normalize(x * envelope), sample_rate=SAMPLE_RATE)


def make_silence_clip(rng: np.random.Generator, duration_s: float) -> AudioClip:
    """Near-silence: very low-level hiss (about -60 dBFS)."""
    n = int(round(duration_s * SAMPLE_RATE))
    return AudioClip(samples=rng.standard_normal(n) * 1e-3, sample_rate=SAMPLE_RATE)


_MAKERS = {"noise": make_noise_clip, "music": make_music_clip, "speech": make_speech_clip}


def make_corpus(
    rng: np.random.Generator,
    files_per_class: int,
    duration_range_s: tuple[float, float] = (2.5, 4.0),
) -> dict[str, list[AudioClip]]:
    """files_per_class clips for each of noise/music/speech."""
    corpus: dict[str, list[AudioClip]] = {}
    for name, maker in _MAKERS.items():
        corpus[name] = [
            maker(rng, rng.uniform(*duration_range_s)) for _ in range(files_per_class)
        ]
    return corpus
