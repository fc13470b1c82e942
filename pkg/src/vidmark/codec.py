"""Bridge to an external H.264 encoder driven through command templates.

The clip is written as Y4M, encoded, decoded back to Y4M and re-read.  The
encode template sees ``{encoder}``, ``{in}``, ``{out}`` and ``{crf}``; ``{in}``
and ``{out}`` are path stems (``.y4m`` / ``.mp4`` are appended by the
template).  The decode template sees ``{encoder}``, ``{out}`` and ``{dec}``.
"""
from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import tempfile
from pathlib import Path

from .errors import CodecFailure, CodecUnavailable, DimensionMismatch
from .io import read_y4m, write_y4m
from .video import VideoClip

ENV_ENCODE = "VIDMARK_CODEC_CMD"
ENV_DECODE = "VIDMARK_DECODE_CMD"

DEFAULT_ENCODE = (
    "{encoder} -y -loglevel error -i {in}.y4m -c:v libx264 -preset medium "
    "-crf {crf} -pix_fmt yuv444p {out}.mp4"
)
DEFAULT_DECODE = "{encoder} -y -loglevel error -i {out}.mp4 -pix_fmt yuvj444p -f yuv4mpegpipe -strict -1 {dec}.y4m"


def find_encoder() -> str | None:
    exe = shutil.which("ffmpeg")
    if exe:
        return exe
    try:
        import imageio_ffmpeg
    except ImportError:
        return None
    try:
        return imageio_ffmpeg.get_ffmpeg_exe()
    except RuntimeError:
        return None


def templates() -> tuple[str, str]:
    return os.environ.get(ENV_ENCODE, DEFAULT_ENCODE), os.environ.get(ENV_DECODE, DEFAULT_DECODE)


def available(command_template: str | None = None) -> bool:
    try:
        _resolve_program(command_template or templates()[0])
    except CodecUnavailable:
        return False
    return True


def _resolve_program(template: str) -> str | None:
    """Return the encoder path to substitute for ``{encoder}``; raise if the program is missing."""
    head = shlex.split(template)[0] if template.strip() else ""
    if head == "{encoder}":
        exe = find_encoder()
        if exe is None:
            raise CodecUnavailable("no ffmpeg found on PATH (or via imageio-ffmpeg)")
        return exe
    if not head or shutil.which(head) is None:
        raise CodecUnavailable(f"encoder program {head!r} not found")
    return None


def _run(template: str, **fields) -> None:
    args = [a.format(**fields) for a in shlex.split(template)]
    try:
        proc = subprocess.run(args, capture_output=True, timeout=600)
    except FileNotFoundError as exc:
        raise CodecUnavailable(str(exc)) from exc
    if proc.returncode != 0:
        raise CodecFailure(
            f"{args[0]} exited with {proc.returncode}: {proc.stderr.decode(errors='replace')[-500:]}"
        )


def external_codec(
    clip: VideoClip,
    crf: int,
    command_template: str | None = None,
    decode_template: str | None = None,
) -> VideoClip:
    enc_default, dec_default = templates()
    enc_t = command_template or enc_default
    dec_t = decode_template or dec_default
    encoder = _resolve_program(enc_t) or ""
    with tempfile.TemporaryDirectory(prefix="vidmark-codec-") as tmp:
        stem_in, stem_out, stem_dec = (str(Path(tmp) / n) for n in ("in", "out", "dec"))
        write_y4m(clip, stem_in + ".y4m")
        _run(enc_t, encoder=encoder, crf=int(crf), out=stem_out, dec=stem_dec, **{"in": stem_in})
        _run(dec_t, encoder=encoder, crf=int(crf), out=stem_out, dec=stem_dec, **{"in": stem_in})
        decoded = read_y4m(stem_dec + ".y4m")
    if decoded.shape != clip.shape:
        raise DimensionMismatch(f"codec returned {decoded.shape}, sent {clip.shape}")
    return decoded.to(clip.colorspace).clamped()
