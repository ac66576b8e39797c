"""Command-line surface for the toolkit.

Subcommands: features, split, train, distill, classify, segment, synth,
eval, bench. Exit codes: 0 success, 1 usage error, 2 data/processing error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import backend, bench, data, gmm, segment, weights
from .data import CLASSES
from .errors import SwishNetError
from .features import FeatureKind, extract_features, save_features
from .model import build, load_preset, PRESET_NAMES
from .train import DistillConfig, TrainConfig, train
from .wavio import load_wav, save_wav


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="swishnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("features", "extract features from a WAV into a cache file")
    p.add_argument("wav")
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=["mfcc", "logmfb", "deltas"], default="mfcc")
    p.add_argument("--raw", action="store_true",
                   help="skip silence removal and loudness equalization")

    p = add("split", "scan a directory of <class>/*.wav and write a manifest")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out", required=True)

    for name in ("train", "distill"):
        p = add(name, "train a model from a manifest"
                if name == "train" else "train with teacher logits")
        p.add_argument("--manifest", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--preset", choices=list(PRESET_NAMES), default="swishnet-slim")
        p.add_argument("--clip-len", type=float, default=1.0, choices=[0.5, 1.0, 2.0])
        p.add_argument("--epochs", type=int, default=120)
        p.add_argument("--batch-size", type=int, default=16,
                       help="batch size at the 2 s reference clip length")
        p.add_argument("--base-lr", type=float, default=1e-3)
        p.add_argument("--min-lr", type=float, default=1e-5)
        p.add_argument("--restart-period", type=int, default=10)
        p.add_argument("--restart-mult", type=int, default=2)
        p.add_argument("--log", help="write per-epoch metrics to this file")
        p.add_argument("--raw", action="store_true")
        if name == "distill":
            p.add_argument("--teacher-logits", required=True)
            p.add_argument("--temperature", type=float, required=True)
            p.add_argument("--soft-weight", type=float, default=0.9)

    p = add("classify", "classify one clip")
    p.add_argument("wav")
    p.add_argument("--model", required=True)
    p.add_argument("--raw", action="store_true")

    p = add("segment", "frame-wise segmentation of a recording")
    p.add_argument("wav")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="predicted timeline (tsv)")
    p.add_argument("--window", type=float, default=1.0)
    p.add_argument("--stride", type=int, default=10,
                   help="predict every k-th frame and hold in between")
    p.add_argument("--median", type=int, default=segment.MEDIAN_FILTER_LEN,
                   help="median filter length in frames (1 disables)")
    p.add_argument("--dump", help="also write per-frame probabilities (tsv)")

    p = add("synth", "build a labelled segmentation dataset from test-split audio")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-files", type=int, default=10)
    p.add_argument("--min-len", type=float, default=20.0)
    p.add_argument("--max-len", type=float, default=120.0)

    p = add("eval", "score per-frame predictions against a truth timeline")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)

    p = add("bench", "single-sample latency benchmark")
    p.add_argument("--model", help="weight file; otherwise --preset is built fresh")
    p.add_argument("--preset", choices=list(PRESET_NAMES), default="swishnet-slim")
    p.add_argument("--clip-len", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--warmup", type=int, default=10)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--backend", choices=["active", "numpy", "numba", "both"],
                   default="active")
    return parser


_KINDS = {"mfcc": FeatureKind.MFCC, "logmfb": FeatureKind.LOG_MFB,
          "deltas": FeatureKind.MFCC_DELTAS}


def _cmd_features(args) -> int:
    clip = load_wav(args.wav)
    feats = extract_features(clip, _KINDS[args.kind], preprocess=not args.raw)
    save_features(args.out, feats)
    print(f"{args.out}: {feats.n_frames} frames x {feats.n_coeffs} coefficients "
          f"({feats.kind.name})")
    return 0


def _cmd_split(args) -> int:
    root = Path(args.data_dir)
    files_by_class = {}
    for name in CLASSES:
        found = sorted((root / name).glob("*.wav"))
        if found:
            files_by_class[name] = found
    records = data.split_dataset(files_by_class, seed=args.seed)
    data.save_manifest(args.out, records)
    counts = {}
    for r in records:
        counts[r.split] = counts.get(r.split, 0) + 1
    print(f"{args.out}: {len(records)} files "
          + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return 0


def _cmd_train(args, distill: bool) -> int:
    records = data.load_manifest(args.manifest)
    config = TrainConfig(
        clip_len_s=args.clip_len, epochs=args.epochs, batch_size=args.batch_size,
        base_lr=args.base_lr, min_lr=args.min_lr, restart_period=args.restart_period,
        restart_mult=args.restart_mult, seed=args.seed, preprocess=not args.raw,
        distill=DistillConfig(args.temperature, args.soft_weight) if distill else None,
    )
    m = build(load_preset(args.preset), rng_seed=args.seed)
    m.metadata["preset"] = args.preset
    history = train(m, records, config,
                    teacher_logits_path=args.teacher_logits if distill else None,
                    log_path=args.log)
    weights.save_model(m, args.out)
    last = history[-1]
    val = f" val_acc={last['val_acc']:.3f}" if last["val_acc"] is not None else ""
    print(f"{args.out}: trained {len(history)} epochs, "
          f"train_acc={last['train_acc']:.3f}{val}")
    return 0


def _cmd_classify(args) -> int:
    m = weights.load_model(args.model)
    clip = load_wav(args.wav)
    feats = extract_features(clip, FeatureKind.MFCC, preprocess=not args.raw)
    from .model import classify as classify_clip
    label, probs = classify_clip(m, feats)
    print(f"{CLASSES[label]} p=[{probs[0]:.4f} {probs[1]:.4f} {probs[2]:.4f}]")
    return 0


def _cmd_segment(args) -> int:
    m = weights.load_model(args.model)
    clip = load_wav(args.wav)
    feats = extract_features(clip, FeatureKind.MFCC, preprocess=False)
    pred = segment.sliding_predict(m, feats, window_len_s=args.window, stride=args.stride)
    if args.median > 1:
        pred = segment.median_filter(pred, args.median)
    pred = segment.align_prediction(pred, len(clip.samples) // segment.SAMPLES_PER_FRAME)
    if args.dump:
        segment.save_predictions(args.dump, pred)
    labels = pred.labels
    runs = segment.run_length_encode(labels)
    lines = []
    t = 0
    for label, n in runs:
        lines.append(f"{t * segment.HOP_S:.2f}\t{(t + n) * segment.HOP_S:.2f}"
                     f"\t{CLASSES[label]}")
        t += n
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"{args.out}: {len(runs)} segments over {labels.size * segment.HOP_S:.1f}s")
    return 0


def _cmd_synth(args) -> int:
    records = data.load_manifest(args.manifest)
    pools = {name: [] for name in segment.TIMELINE_CLASSES}
    from . import dsp
    for record in records:
        if record.split != "test":
            continue
        clip = dsp.resample(load_wav(record.path))
        voiced = dsp.remove_silence(clip)
        if len(voiced) >= 16_000:
            pools[record.label].append(voiced)
        quiet = _silence_complement(clip)
        if quiet is not None:
            pools[segment.SILENCE].append(quiet)
    rng = np.random.default_rng(args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.n_files):
        audio, timeline = segment.synth_timeline(
            pools, rng, length_range_s=(args.min_len, args.max_len))
        save_wav(out_dir / f"seg{i:03d}.wav", audio)
        segment.save_timeline(out_dir / f"seg{i:03d}.tsv", timeline)
    print(f"{out_dir}: wrote {args.n_files} labelled recordings")
    return 0


def _silence_complement(clip):
    """The frames remove_silence drops: natural quiet audio for gap segments."""
    from . import dsp
    kept = dsp.remove_silence(clip)
    if len(kept) + 1600 > len(clip):  # less than 0.1 s of silence in the file
        return None
    frame = int(round(clip.sample_rate * dsp.SILENCE_FRAME_MS / 1000.0))
    x = clip.samples
    n_frames = int(np.ceil(x.size / frame))
    powers = [float(np.mean(x[i * frame:(i + 1) * frame] ** 2)) for i in range(n_frames)]
    peak = max(powers)
    if peak <= 0:
        return None
    threshold = peak * 10.0 ** (dsp.SILENCE_THRESHOLD_DB / 10.0)
    quiet = [x[i * frame:(i + 1) * frame] for i in range(n_frames) if powers[i] < threshold]
    if not quiet:
        return None
    samples = np.concatenate(quiet)
    if samples.size < 1600:
        return None
    from .wavio import AudioClip
    return AudioClip(samples=samples, sample_rate=clip.sample_rate)


def _cmd_eval(args) -> int:
    pred = segment.load_predictions(args.pred)
    truth = segment.load_timeline(args.truth)
    scores = segment.score(pred, truth)
    print(segment.format_score_tables(scores))
    return 0


def _cmd_bench(args) -> int:
    if args.model:
        m = weights.load_model(args.model)
        name = Path(args.model).name
    else:
        m = build(load_preset(args.preset), rng_seed=args.seed)
        name = args.preset
    backends = [backend.active_name()] if args.backend == "active" else [args.backend]
    if args.backend == "both":
        backends = list(backend.available_backends())
    reports = []
    for backend_name in backends:
        with backend.use(backend_name):
            reports.append(bench.bench_latency(
                m, clip_len_s=args.clip_len, iters=args.iters, warmup=args.warmup,
                threads=args.threads, seed=args.seed, model_name=name))
    for report in reports:
        print(bench.format_report(report))
        print()
    if len(reports) == 2:
        ratio = reports[0].median_ms / reports[1].median_ms
        faster = reports[1] if ratio > 1 else reports[0]
        print(f"{faster.backend_name} is {max(ratio, 1 / ratio):.2f}x faster "
              f"(median model-only latency)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "features":
            return _cmd_features(args)
        if args.command == "split":
            return _cmd_split(args)
        if args.command == "train":
            return _cmd_train(args, distill=False)
        if args.command == "distill":
            return _cmd_train(args, distill=True)
        if args.command == "classify":
            return _cmd_classify(args)
        if args.command == "segment":
            return _cmd_segment(args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "bench":
            return _cmd_bench(args)
    except SwishNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


def entry() -> None:
    sys.exit(main())
