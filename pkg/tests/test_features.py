"""Feature extraction against the brute-force no-FFT oracle."""

import numpy as np
import pytest

from oracles import log_mfb_oracle, mfcc_oracle
from swishnet import dsp, features
from swishnet.errors import ConfigError, FileFormatError
from swishnet.features import (FeatureKind, FeatureMatrix, deltas, dct_matrix,
                               extract_features, hz_to_mel, load_features,
                               log_mfb, mel_filterbank, mfcc, save_features)
from swishnet.wavio import AudioClip

SR = 16_000


class TestMelScale:
    def test_mel_of_zero(self):
        assert hz_to_mel(0.0) == 0.0

    def test_mel_of_700(self):
        assert abs(hz_to_mel(700.0) - 2595.0 * np.log10(2.0)) < 1e-9
        assert abs(hz_to_mel(700.0) - 781.17) < 0.01


class TestMelFilterbank:
    def test_rows_nonnegative_with_support(self):
        fbank = mel_filterbank(512, 32, SR)
        assert (fbank.weights >= 0).all()
        assert (fbank.weights.max(axis=1) > 0).all()

    def test_rows_unimodal(self):
        fbank = mel_filterbank(512, 64, SR)
        for row in fbank.weights:
            peak = np.argmax(row)
            assert (np.diff(row[: peak + 1]) >= -1e-15).all()
            assert (np.diff(row[peak:]) <= 1e-15).all()

    def test_boundary_placement(self):
        fbank = mel_filterbank(512, 32, SR)
        # first filter rises from the DC region; last filter's support
        # reaches the Nyquist bin and is zero exactly there
        assert fbank.weights[0, :4].sum() > 0
        assert fbank.weights[-1, -2] > 0
        assert fbank.weights[-1, -1] < 1e-12

    def test_too_many_bands_rejected(self):
        with pytest.raises(ConfigError):
            mel_filterbank(64, 64, SR)


class TestMfcc:
    def test_constant_log_energy_gives_dct_of_constant(self):
        # a frame whose mel-log energies all equal c: coefficient 0 is
        # c*sqrt(n_mels), the rest vanish
        fbank = mel_filterbank(512, 32, SR)
        c = -3.7
        log_e = np.full(32, c)
        coeffs = log_e @ dct_matrix(20, 32).T
        assert abs(coeffs[0] - c * np.sqrt(32)) < 1e-9
        assert np.max(np.abs(coeffs[1:])) < 1e-9

    def test_zero_frame_hits_log_floor(self):
        fbank = mel_filterbank(512, 32, SR)
        out = mfcc(np.zeros((1, 400)), fbank)
        floor_log = np.log(1e-10)
        expected = np.full(32, floor_log) @ dct_matrix(20, 32).T
        np.testing.assert_allclose(out.values[0], expected, atol=1e-9)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(42)
        fbank = mel_filterbank(512, 32, SR)
        frames = rng.uniform(-1, 1, size=(20, 400))
        out = mfcc(frames, fbank)
        for i in range(frames.shape[0]):
            expected = mfcc_oracle(frames[i])
            np.testing.assert_allclose(out.values[i], expected, atol=1e-6)

    def test_needs_enough_bands(self):
        with pytest.raises(ConfigError):
            mfcc(np.zeros((1, 400)), mel_filterbank(512, 16, SR), n_coeffs=20)


class TestLogMfb:
    def test_constant_spectrum_constant_rows(self):
        # equal power in every bin: rows vary only through filter areas, so
        # feed a frame of zeros (floor) instead: all values equal the floor log
        fbank = mel_filterbank(512, 64, SR)
        out = log_mfb(np.zeros((2, 400)), fbank)
        np.testing.assert_allclose(out.values, np.log(1e-10))

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(43)
        fbank = mel_filterbank(512, 64, SR)
        frames = rng.uniform(-1, 1, size=(10, 400))
        out = log_mfb(frames, fbank)
        for i in range(frames.shape[0]):
            np.testing.assert_allclose(out.values[i], log_mfb_oracle(frames[i]), atol=1e-6)


class TestDeltas:
    def _matrix(self, values):
        return FeatureMatrix(values=values, kind=FeatureKind.MFCC)

    def test_constant_features_zero_deltas(self):
        base = self._matrix(np.tile(np.arange(20.0), (6, 1)))
        out = deltas(base)
        assert out.kind == FeatureKind.MFCC_DELTAS
        assert out.n_coeffs == 60
        np.testing.assert_allclose(out.values[:, 20:], 0.0, atol=1e-12)

    def test_linear_ramp_delta_one(self):
        values = np.tile(np.arange(10.0)[:, None], (1, 20))
        out = deltas(self._matrix(values))
        # interior frames: d_t = (1*(2) + 2*(4)) / 10 = 1
        np.testing.assert_allclose(out.values[2:-2, 20:40], 1.0, atol=1e-12)

    def test_single_frame_zero(self):
        out = deltas(self._matrix(np.ones((1, 20))))
        np.testing.assert_allclose(out.values[:, 20:], 0.0)


class TestCache:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        fm = FeatureMatrix(values=rng.standard_normal((7, 20)).astype(np.float32),
                           kind=FeatureKind.MFCC)
        path = tmp_path / "x.swft"
        save_features(path, fm)
        back = load_features(path)
        assert back.kind == FeatureKind.MFCC
        np.testing.assert_array_equal(back.values, fm.values)

    def test_header_layout(self, tmp_path):
        fm = FeatureMatrix(values=np.zeros((3, 20)), kind=FeatureKind.MFCC)
        path = tmp_path / "x.swft"
        save_features(path, fm)
        raw = path.read_bytes()
        assert raw[:4] == b"SWFT"
        assert len(raw) == 17 + 3 * 20 * 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.swft"
        path.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(FileFormatError):
            load_features(path)

    def test_truncated(self, tmp_path):
        fm = FeatureMatrix(values=np.zeros((3, 20)), kind=FeatureKind.MFCC)
        path = tmp_path / "x.swft"
        save_features(path, fm)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(FileFormatError):
            load_features(path)


class TestExtractFeatures:
    def test_kinds_and_shapes(self):
        rng = np.random.default_rng(2)
        clip = AudioClip(samples=rng.uniform(-0.5, 0.5, SR), sample_rate=SR)
        for kind, n in ((FeatureKind.MFCC, 20), (FeatureKind.LOG_MFB, 64),
                        (FeatureKind.MFCC_DELTAS, 60)):
            out = extract_features(clip, kind, preprocess=False)
            assert out.n_coeffs == n
            assert out.n_frames == 98

    def test_resamples_non_16k_input(self):
        rng = np.random.default_rng(2)
        clip = AudioClip(samples=rng.uniform(-0.5, 0.5, 22050), sample_rate=22050)
        out = extract_features(clip, preprocess=False)
        assert out.n_frames == dsp.frame_count(16_000, 400, 160)
