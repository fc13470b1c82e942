"""Command-line entry point: ``vidmark <command> ...``.

Exit codes: 0 success, 1 other failures, 2 bad configuration or arguments,
3 external codec unavailable in strict mode.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import bench
from .corpus import synthetic_corpus
from .detector import calibrate_null, crop_region, detect, editing_roi, filter_frames
from .distortion import DistortionSpec, apply
from .errors import CodecUnavailable, ConfigInvalid, VidmarkError
from .io import load_clip, save_clip
from .metrics import quality_report
from .spread import Message, embed_video, extract_video, gen_key, load_key, save_key

log = logging.getLogger("vidmark")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CODEC = 0, 1, 2, 3


def _parse_message(text: str, m: int) -> Message:
    """``random:SEED``, a 0/1 string, or ``hex:...``."""
    if text.startswith("random:"):
        return Message.random(m, int(text.split(":", 1)[1]))
    if text.startswith("hex:"):
        raw = bytes.fromhex(text[4:])
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:m]
        if bits.size < m:
            raise ConfigInvalid(f"hex message has {bits.size} bits, key needs {m}")
        return Message(bits)
    msg = Message.from_string(text)
    if msg.m != m:
        raise ConfigInvalid(f"message has {msg.m} bits, key needs {m}")
    return msg


def _param(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise ConfigInvalid(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, json.loads(value)
    except json.JSONDecodeError:
        return name, value


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


# --------------------------------------------------------------------------- commands


def cmd_keygen(args) -> int:
    key = gen_key(args.seed, args.m, tuple(args.dims), args.chip_len)
    if args.null_clips:
        clips = [c for _, c in synthetic_corpus(args.null_clips, *key.dims, seed=args.null_seed)]
        key = key.with_null(calibrate_null(key, clips))
    save_key(key, args.out)
    print(f"key: seed={key.seed} m={key.m} chip_len={key.chip_len} dims={key.dims} -> {args.out}")
    return EXIT_OK


def cmd_embed(args) -> int:
    key = load_key(args.key)
    cover = load_clip(args.input, args.format)
    msg = _parse_message(args.message, key.m)
    if args.psnr is not None:
        alpha, marked, _ = bench.tune_alpha(cover, msg, key, args.psnr, args.psnr_tol)
    else:
        alpha, marked = args.alpha, embed_video(cover, msg, key, args.alpha)
    save_clip(marked, args.output, args.out_format)
    q = quality_report(cover, marked)
    print(json.dumps({"alpha": alpha, "message": msg.to_string(), **q}))
    return EXIT_OK


def cmd_extract(args) -> int:
    key = load_key(args.key)
    res = extract_video(load_clip(args.input, args.format), key)
    out = {"message": res.message.to_string(), "statistic": res.statistic, "detection": res.detection}
    if args.expect:
        from .metrics import bit_accuracy

        out["bit_acc"] = bit_accuracy(_parse_message(args.expect, key.m), res.message)
    print(json.dumps(out))
    return EXIT_OK


def cmd_attack(args) -> int:
    params = dict(_param(p) for p in args.param)
    try:
        spec = DistortionSpec.of(args.kind, args.strength, args.seed, **params)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    clip = load_clip(args.input, args.format)
    save_clip(apply(clip, spec), args.output, args.out_format)
    print(json.dumps(spec.to_dict()))
    return EXIT_OK


def cmd_detect(args) -> int:
    key = load_key(args.key)
    clip = load_clip(args.input, args.format)
    if args.roi == "lower-left":
        clip = crop_region(clip, *editing_roi(clip.shape[1:]))
    trace = detect(clip, key, stride=args.stride)
    kept = filter_frames(trace, args.threshold)
    out = {
        "scores": [round(float(s), 6) for s in trace.scores],
        "kept": [[r.start, r.stop] for r in kept],
    }
    print(json.dumps(out))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    key = load_key(args.key)
    if args.clips:
        clips = [load_clip(p) for p in args.clips]
    else:
        clips = [c for _, c in synthetic_corpus(args.synthetic, *key.dims, seed=args.seed)]
    null = calibrate_null(key, clips)
    save_key(key.with_null(null), args.out or args.key)
    print(json.dumps({"mean": null.mean, "std": null.std, "n": null.n}))
    return EXIT_OK


def _eval_config(args) -> bench.EvalConfig:
    cfg = bench.EvalConfig.load(args.config) if args.config else bench.EvalConfig()
    d = cfg.to_dict()
    if args.clips:
        d["corpus"]["paths"] = args.clips
    if args.synthetic is not None:
        d["corpus"].update(paths=[], synthetic=args.synthetic)
    for name in ("seed", "repeats", "workers", "key_seed", "key_path", "chip_len"):
        value = getattr(args, name)
        if value is not None:
            d[name] = value
    if args.alpha:
        d["alpha"] = _floats(args.alpha)
    if args.psnr:
        d["alpha"], d["psnr_target"] = None, _floats(args.psnr)
    if args.payload:
        d["payload"] = _ints(args.payload)
    if args.lengths:
        if args.what == "editing":
            d["editing"]["lengths"] = _ints(args.lengths)
        else:
            d["lengths"] = _ints(args.lengths)
    if args.trials is not None:
        d["editing"]["trials"] = args.trials
    if args.strict_codec:
        d["strict_codec"] = True
    if args.timing:
        d["timing"] = True
    outputs = dict(d.get("outputs") or {})
    for name in ("csv", "json", "journal"):
        value = getattr(args, name)
        if value:
            outputs[name] = value
    d["outputs"] = outputs
    return bench.EvalConfig.from_dict(d)


def cmd_eval(args) -> int:
    cfg = _eval_config(args)
    if args.dump_config:
        print(cfg.dumps())
        return EXIT_OK
    report = bench.RUNNERS[args.what](cfg)
    for fmt in ("csv", "json"):
        if cfg.outputs.get(fmt):
            bench.emit_report(report, fmt, cfg.outputs[fmt])
    _print_aggregates(report)
    return EXIT_OK


def _print_aggregates(report: bench.EvalReport) -> None:
    print(f"{'method':28s} {'m':>4s} {'distortion':16s} {'strength':>8s} {'n':>4s} {'acc%':>7s} {'std':>6s}")
    for a in report.aggregates():
        mean = "  skip" if a["mean"] is None else f"{100 * a['mean']:7.2f}"
        std = "" if a["std"] is None else f"{100 * a['std']:6.2f}"
        strength = "" if a["strength"] is None else f"{a['strength']:g}"
        print(f"{a['method']:28s} {a['payload']:>4} {a['distortion']:16s} {strength:>8s} {a['n']:>4d} {mean} {std}")


def cmd_report(args) -> int:
    report = bench.load_report(args.input)
    _print_aggregates(report)
    if args.histogram:
        for a in report.aggregates():
            print(a["method"], a["distortion"], a["strength"], " ".join(map(str, a["histogram"])))
    if args.json:
        bench.emit_report(report, "json", args.json)
    if args.csv:
        bench.emit_report(report, "csv", args.csv)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vidmark", description="Blind 3D-wavelet spread-spectrum video watermarking.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def io_args(sp, output=True):
        sp.add_argument("input")
        if output:
            sp.add_argument("output")
        sp.add_argument("--format", choices=["y4m", "frames", "raw"], help="input format (default: by extension)")
        if output:
            sp.add_argument("--out-format", choices=["y4m", "frames", "raw"])

    sp = sub.add_parser("keygen", help="derive a key file")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--m", type=int, default=96)
    sp.add_argument("--dims", type=int, nargs=3, default=[8, 128, 128], metavar=("T", "H", "W"))
    sp.add_argument("--chip-len", type=int, default=None)
    sp.add_argument("--null-clips", type=int, default=0, help="calibrate a null on this many synthetic clips")
    sp.add_argument("--null-seed", type=int, default=1000)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_keygen)

    sp = sub.add_parser("embed", help="watermark a clip")
    io_args(sp)
    sp.add_argument("--key", required=True)
    sp.add_argument("--message", default="random:0", help="0/1 string, hex:..., or random:SEED")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float, default=0.046)
    g.add_argument("--psnr", type=float, help="tune alpha to this RGB PSNR in dB")
    sp.add_argument("--psnr-tol", type=float, default=0.05)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("extract", help="blind decode")
    io_args(sp, output=False)
    sp.add_argument("--key", required=True)
    sp.add_argument("--expect", help="sent message, to report bit accuracy")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("attack", help="apply one distortion")
    io_args(sp)
    sp.add_argument("--kind", required=True)
    sp.add_argument("--strength", type=float)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("detect", help="per-frame watermark presence scores")
    io_args(sp, output=False)
    sp.add_argument("--key", required=True, help="key file with a calibrated null")
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--threshold", type=float, default=0.3)
    sp.add_argument("--roi", choices=["full", "lower-left"], default="full")
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("calibrate", help="fit the detector null model and store it in the key")
    sp.add_argument("--key", required=True)
    sp.add_argument("--clips", nargs="*", default=[])
    sp.add_argument("--synthetic", type=int, default=40)
    sp.add_argument("--seed", type=int, default=1000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("eval", help="run an evaluation")
    sp.add_argument("what", choices=sorted(bench.RUNNERS))
    sp.add_argument("--config", help="JSON EvalConfig; flags override it")
    sp.add_argument("--clips", nargs="*")
    sp.add_argument("--synthetic", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--key-seed", type=int)
    sp.add_argument("--key-path")
    sp.add_argument("--chip-len", type=int)
    sp.add_argument("--repeats", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--alpha", help="comma-separated alpha values")
    sp.add_argument("--psnr", help="comma-separated PSNR targets (dB)")
    sp.add_argument("--payload", help="comma-separated payload sizes")
    sp.add_argument("--lengths", help="comma-separated clip or background lengths")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--strict-codec", action="store_true")
    sp.add_argument("--timing", action="store_true", help="fill the ms column (breaks byte-identical reruns)")
    sp.add_argument("--csv")
    sp.add_argument("--json")
    sp.add_argument("--journal", help="resume file; rows already recorded are not recomputed")
    sp.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("report", help="summarize a CSV or JSON report")
    sp.add_argument("input")
    sp.add_argument("--histogram", action="store_true")
    sp.add_argument("--json")
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_report)
    return p


_FORMATS = {"y4m": "Y4M", "frames": "FrameDir", "raw": "RawPlanar"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    for name in ("format", "out_format"):
        if getattr(args, name, None):
            setattr(args, name, _FORMATS[getattr(args, name)])
    try:
        return args.func(args)
    except CodecUnavailable as exc:
        print(f"vidmark: codec unavailable: {exc}", file=sys.stderr)
        return EXIT_CODEC
    except ConfigInvalid as exc:
        print(f"vidmark: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VidmarkError as exc:
        print(f"vidmark: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"vidmark: invalid argument: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"vidmark: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
