"""The command-line surface: contracts, formats, and exit codes."""

import numpy as np
import pytest

from swishnet import synthdata, weights
from swishnet.cli import main
from swishnet.data import CLASSES
from swishnet.features import load_features
from swishnet.wavio import save_wav


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    """A small on-disk corpus: 5 wav files per class in class subdirs, each
    with a quiet pause inside (so silence extraction finds material)."""
    root = tmp_path_factory.mktemp("corpus")
    rng = np.random.default_rng(0)
    makers = {"noise": synthdata.make_noise_clip, "music": synthdata.make_music_clip,
              "speech": synthdata.make_speech_clip}
    for name, maker in makers.items():
        sub = root / name
        sub.mkdir()
        for i in range(5):
            clip = maker(rng, 2.2)
            pause = rng.standard_normal(int(0.4 * 16000)) * 1e-4
            samples = np.concatenate([clip.samples[:16000], pause, clip.samples[16000:]])
            save_wav(sub / f"{name}{i}.wav",
                     type(clip)(samples=samples, sample_rate=16000))
    return root


@pytest.fixture(scope="module")
def manifest(corpus_dir, tmp_path_factory):
    path = tmp_path_factory.mktemp("manifest") / "m.tsv"
    assert main(["split", "--data-dir", str(corpus_dir), "--out", str(path),
                 "--seed", "3"]) == 0
    return path


@pytest.fixture(scope="module")
def model_path(tmp_path_factory, trained_slim):
    path = tmp_path_factory.mktemp("model") / "slim.swsh"
    weights.save_model(trained_slim, path)
    return path


class TestUsageErrors:
    def test_unknown_flag_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--bogus-flag"])
        assert exc.value.code == 1

    def test_unknown_command_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_data_error_exits_2(self, tmp_path):
        bad = tmp_path / "nope.swsh"
        bad.write_bytes(b"not a model")
        wav = tmp_path / "x.wav"
        save_wav(wav, synthdata.make_noise_clip(np.random.default_rng(0), 1.0))
        assert main(["classify", str(wav), "--model", str(bad)]) == 2

    def test_missing_file_exits_2(self, model_path):
        assert main(["classify", "/no/such/file.wav", "--model", str(model_path)]) == 2


class TestFeatures:
    def test_cache_written(self, tmp_path, capsys):
        wav = tmp_path / "x.wav"
        save_wav(wav, synthdata.make_music_clip(np.random.default_rng(1), 1.0))
        out = tmp_path / "x.swft"
        assert main(["features", str(wav), "--out", str(out), "--raw"]) == 0
        cached = load_features(out)
        assert cached.n_frames == 98 and cached.n_coeffs == 20
        assert "98 frames" in capsys.readouterr().out

    def test_deltas_kind(self, tmp_path):
        wav = tmp_path / "x.wav"
        save_wav(wav, synthdata.make_music_clip(np.random.default_rng(2), 1.0))
        out = tmp_path / "x.swft"
        assert main(["features", str(wav), "--out", str(out), "--kind", "deltas",
                     "--raw"]) == 0
        assert load_features(out).n_coeffs == 60


class TestSplit:
    def test_manifest_written(self, manifest):
        text = manifest.read_text()
        lines = [l for l in text.splitlines() if l]
        assert len(lines) == 15
        for line in lines:
            path, label, split = line.split("\t")
            assert label in CLASSES
            assert split in ("train", "val", "test")


class TestClassify:
    def test_output_contract(self, model_path, tmp_path, capsys):
        wav = tmp_path / "m.wav"
        save_wav(wav, synthdata.make_music_clip(np.random.default_rng(3), 1.0))
        assert main(["classify", str(wav), "--model", str(model_path), "--raw"]) == 0
        out = capsys.readouterr().out.strip()
        label, probs = out.split(" p=")
        assert label in CLASSES
        values = [float(v) for v in probs.strip("[]").split()]
        assert len(values) == 3
        assert abs(sum(values) - 1.0) < 1e-3


class TestTrainCli:
    def test_train_writes_model_and_log(self, manifest, tmp_path, capsys):
        out = tmp_path / "m.swsh"
        log = tmp_path / "log.tsv"
        code = main(["train", "--manifest", str(manifest), "--out", str(out),
                     "--epochs", "2", "--clip-len", "0.5", "--raw",
                     "--log", str(log), "--seed", "0"])
        assert code == 0
        assert out.exists()
        loaded = weights.load_model(out)
        assert loaded.metadata["preset"] == "swishnet-slim"
        assert len(log.read_text().strip().splitlines()) == 2

    def test_distill_cli(self, manifest, tmp_path):
        from swishnet.data import load_manifest, save_teacher_logits
        from swishnet.train import prepare_clips
        clipset = prepare_clips(load_manifest(manifest), "train", 0.5, preprocess=False)
        table = {}
        for cid, label in zip(clipset.ids, clipset.y):
            logits = np.full(3, -2.0)
            logits[label] = 2.0
            table[cid] = logits
        logits_path = tmp_path / "t.tsv"
        save_teacher_logits(logits_path, table)
        out = tmp_path / "d.swsh"
        code = main(["distill", "--manifest", str(manifest), "--out", str(out),
                     "--epochs", "1", "--clip-len", "0.5", "--raw",
                     "--teacher-logits", str(logits_path), "--temperature", "2.0"])
        assert code == 0
        assert out.exists()


class TestSegmentSynthEval:
    def test_synth_then_segment_then_eval(self, manifest, model_path, tmp_path, capsys):
        seg_dir = tmp_path / "segments"
        assert main(["synth", "--manifest", str(manifest), "--out-dir", str(seg_dir),
                     "--n-files", "1", "--min-len", "20", "--max-len", "25",
                     "--seed", "5"]) == 0
        wav = seg_dir / "seg000.wav"
        truth = seg_dir / "seg000.tsv"
        assert wav.exists() and truth.exists()

        out_tl = tmp_path / "pred.tsv"
        dump = tmp_path / "probs.tsv"
        assert main(["segment", str(wav), "--model", str(model_path),
                     "--out", str(out_tl), "--dump", str(dump),
                     "--stride", "5"]) == 0
        assert out_tl.exists() and dump.exists()

        assert main(["eval", "--pred", str(dump), "--truth", str(truth)]) == 0
        out = capsys.readouterr().out
        assert "Overall accuracy" in out
        assert "Confusion matrix" in out

    def test_eval_hand_fixture(self, tmp_path, capsys):
        # 10-frame fixture with a known confusion matrix, via the file formats
        from swishnet.segment import (SegmentPrediction, Timeline,
                                      run_length_encode, save_predictions,
                                      save_timeline)
        truth_labels = np.array([0, 0, 0, 1, 1, 1, 2, 2, 2, 3], dtype=np.int8)
        pred_labels = [0, 1, 0, 1, 1, 2, 2, 2, 2, 0]
        probs = np.full((10, 3), 0.01)
        probs[np.arange(10), pred_labels] = 0.98
        probs /= probs.sum(axis=1, keepdims=True)
        pred_path = tmp_path / "pred.tsv"
        truth_path = tmp_path / "truth.tsv"
        save_predictions(pred_path, SegmentPrediction(probs=probs))
        save_timeline(truth_path, Timeline(labels=truth_labels,
                                           segments=run_length_encode(truth_labels)))
        assert main(["eval", "--pred", str(pred_path), "--truth", str(truth_path)]) == 0
        out = capsys.readouterr().out
        assert "0.67  0.33  0.00" in out   # noise row: 2/3, 1/3, 0
        assert "0.00  0.67  0.33" in out   # music row
        assert "0.00  0.00  1.00" in out   # speech row


class TestBenchCli:
    def test_bench_fresh_preset(self, capsys):
        assert main(["bench", "--preset", "swishnet-slim", "--clip-len", "1.0",
                     "--iters", "10", "--warmup", "2"]) == 0
        out = capsys.readouterr().out
        assert "model-only" in out and "end-to-end" in out

    def test_bench_both_backends(self, capsys):
        assert main(["bench", "--preset", "swishnet-slim", "--iters", "5",
                     "--warmup", "1", "--backend", "both"]) == 0
        out = capsys.readouterr().out
        assert "backend:      numpy" in out
        assert "backend:      numba" in out
        assert "faster" in out

    def test_bench_saved_model(self, model_path, capsys):
        assert main(["bench", "--model", str(model_path), "--iters", "5",
                     "--warmup", "1"]) == 0
        assert "slim.swsh" in capsys.readouterr().out
