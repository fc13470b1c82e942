"""Clip file formats: YUV4MPEG2, directories of PPM/PNG frames, raw planes + JSON sidecar.

Samples are real-valued in memory and quantized to 8 bits (``round(255 x)``)
only here.  Y4M carries YUV, so loading one yields a YUV-tagged clip and saving
an RGB clip converts it first; frame directories always hold RGB.
"""
from __future__ import annotations

import enum
import json
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import CorruptHeader, DimensionMismatch, IoFailure, UnsupportedFormat
from .video import ColorSpace, VideoClip


class Format(str, enum.Enum):
    Y4M = "Y4M"
    FRAMEDIR = "FrameDir"
    RAWPLANAR = "RawPlanar"


def guess_format(path) -> Format:
    p = Path(path)
    if p.suffix.lower() == ".y4m":
        return Format.Y4M
    if p.is_dir() or p.suffix == "":
        return Format.FRAMEDIR
    if p.suffix.lower() in (".raw", ".f32", ".u8", ".bin"):
        return Format.RAWPLANAR
    raise UnsupportedFormat(f"cannot infer format of {path}")


def _coerce(fmt) -> Format:
    if fmt is None:
        return None
    try:
        return Format(fmt)
    except ValueError:
        for f in Format:
            if f.value.lower() == str(fmt).lower():
                return f
    raise UnsupportedFormat(f"unknown format {fmt!r}")


def quantize(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.asarray(x) * 255.0), 0, 255).astype(np.uint8)


def load_clip(path, fmt=None) -> VideoClip:
    fmt = _coerce(fmt) or guess_format(path)
    if not Path(path).exists():
        raise IoFailure(f"no such file: {path}")
    if fmt is Format.Y4M:
        return read_y4m(path)
    if fmt is Format.FRAMEDIR:
        return read_frame_dir(path)
    return read_raw(path)


def save_clip(clip: VideoClip, path, fmt=None, **kwargs) -> None:
    fmt = _coerce(fmt) or guess_format(path)
    try:
        if fmt is Format.Y4M:
            write_y4m(clip, path, **kwargs)
        elif fmt is Format.FRAMEDIR:
            write_frame_dir(clip, path, **kwargs)
        else:
            write_raw(clip, path, **kwargs)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


# --------------------------------------------------------------------------- Y4M

_CHROMA = {
    "420jpeg": (2, 2),
    "420paldv": (2, 2),
    "420mpeg2": (2, 2),
    "420": (2, 2),
    "422": (1, 2),
    "444": (1, 1),
    "mono": None,
}


def _parse_y4m_header(line: bytes) -> dict:
    try:
        text = line.decode("ascii")
    except UnicodeDecodeError as exc:
        raise CorruptHeader("Y4M header is not ASCII") from exc
    parts = text.split()
    if not parts or parts[0] != "YUV4MPEG2":
        raise CorruptHeader("missing YUV4MPEG2 signature")
    hdr = {"C": "420jpeg", "F": "25:1", "X": []}
    for tok in parts[1:]:
        tag, val = tok[0], tok[1:]
        if tag == "X":
            hdr["X"].append(val)
        else:
            hdr[tag] = val
    try:
        hdr["W"] = int(hdr["W"])
        hdr["H"] = int(hdr["H"])
    except (KeyError, ValueError) as exc:
        raise CorruptHeader(f"bad or missing W/H in header: {text!r}") from exc
    chroma = re.sub(r"p\d+$", "", hdr["C"]) if hdr["C"] != "mono" else "mono"
    if chroma not in _CHROMA:
        raise UnsupportedFormat(f"unsupported Y4M chroma mode {hdr['C']}")
    if hdr["C"] not in _CHROMA:
        raise UnsupportedFormat(f"only 8-bit Y4M is supported, got C{hdr['C']}")
    hdr["C"] = chroma
    num, _, den = hdr["F"].partition(":")
    try:
        hdr["fps"] = int(num) / int(den or 1)
    except (ValueError, ZeroDivisionError) as exc:
        raise CorruptHeader(f"bad frame rate {hdr['F']}") from exc
    return hdr


def read_y4m(path) -> VideoClip:
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise CorruptHeader("Y4M header is not terminated")
    hdr = _parse_y4m_header(data[:nl])
    w, h = hdr["W"], hdr["H"]
    sub = _CHROMA[hdr["C"]]
    if sub is None:
        cw = ch = 0
    else:
        ch, cw = -(-h // sub[0]), -(-w // sub[1])
    frame_bytes = w * h + 2 * cw * ch
    pos = nl + 1
    frames = []
    while pos < len(data):
        end = data.find(b"\n", pos)
        if end < 0 or not data[pos:end].startswith(b"FRAME"):
            raise CorruptHeader(f"expected FRAME marker at byte {pos}")
        pos = end + 1
        payload = data[pos : pos + frame_bytes]
        if len(payload) != frame_bytes:
            raise DimensionMismatch(
                f"frame {len(frames)} has {len(payload)} bytes, expected {frame_bytes}"
            )
        pos += frame_bytes
        buf = np.frombuffer(payload, dtype=np.uint8)
        y = buf[: w * h].reshape(h, w)
        if sub is None:
            u = v = np.full((h, w), 128, dtype=np.uint8)
        else:
            u = buf[w * h : w * h + cw * ch].reshape(ch, cw)
            v = buf[w * h + cw * ch :].reshape(ch, cw)
            u = np.repeat(np.repeat(u, sub[0], axis=0), sub[1], axis=1)[:h, :w]
            v = np.repeat(np.repeat(v, sub[0], axis=0), sub[1], axis=1)[:h, :w]
        frames.append(np.stack([y, u, v], axis=-1))
    if not frames:
        raise DimensionMismatch("Y4M stream holds no frames")
    return VideoClip(np.stack(frames) / 255.0, ColorSpace.YUV, hdr["fps"])


def _fps_fraction(fps: float) -> str:
    if float(fps).is_integer():
        return f"{int(fps)}:1"
    return f"{int(round(fps * 1001))}:1001"


def write_y4m(clip: VideoClip, path) -> None:
    q = quantize(clip.to(ColorSpace.YUV).frames)
    t, h, w, _ = q.shape
    header = f"YUV4MPEG2 W{w} H{h} F{_fps_fraction(clip.frame_rate)} Ip A1:1 C444 XCOLORRANGE=FULL\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for frame in q:
            fh.write(b"FRAME\n")
            fh.write(np.ascontiguousarray(frame.transpose(2, 0, 1)).tobytes())


# --------------------------------------------------------------------------- frame directory

_FRAME_EXTS = (".ppm", ".pgm", ".pnm", ".png")


def read_frame_dir(path) -> VideoClip:
    files = sorted(p for p in Path(path).iterdir() if p.suffix.lower() in _FRAME_EXTS)
    if not files:
        raise UnsupportedFormat(f"no PPM/PNG frames in {path}")
    frames = []
    for f in files:
        try:
            with Image.open(f) as im:
                arr = np.asarray(im.convert("RGB"))
        except OSError as exc:
            raise CorruptHeader(f"{f}: {exc}") from exc
        if frames and arr.shape != frames[0].shape:
            raise DimensionMismatch(f"{f.name} is {arr.shape}, first frame is {frames[0].shape}")
        frames.append(arr)
    return VideoClip(np.stack(frames) / 255.0, ColorSpace.RGB)


def write_frame_dir(clip: VideoClip, path, ext: str = ".ppm") -> None:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    q = quantize(clip.to(ColorSpace.RGB).frames)
    for i, frame in enumerate(q):
        Image.fromarray(frame, "RGB").save(out / f"frame_{i:05d}{ext}")


# --------------------------------------------------------------------------- raw planar


def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def read_raw(path) -> VideoClip:
    side = _sidecar(path)
    try:
        meta = json.loads(side.read_text())
        t, h, w, c = (int(meta[k]) for k in ("t", "h", "w", "c"))
    except FileNotFoundError as exc:
        raise CorruptHeader(f"missing sidecar {side}") from exc
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptHeader(f"bad sidecar {side}: {exc}") from exc
    dtype = meta.get("dtype", "u8")
    if dtype not in ("u8", "f32"):
        raise UnsupportedFormat(f"raw dtype {dtype!r}")
    if c != 3:
        raise DimensionMismatch(f"raw clip has c={c}, expected 3")
    raw = np.fromfile(path, dtype=np.uint8 if dtype == "u8" else "<f4")
    if raw.size != t * c * h * w:
        raise DimensionMismatch(f"raw file holds {raw.size} samples, sidecar implies {t * c * h * w}")
    planes = raw.reshape(t, c, h, w).transpose(0, 2, 3, 1).astype(np.float64)
    if dtype == "u8":
        planes /= 255.0
    return VideoClip(planes, meta.get("colorspace", "RGB"), float(meta.get("frame_rate", 25.0)))


def write_raw(clip: VideoClip, path, dtype: str = "u8") -> None:
    if dtype not in ("u8", "f32"):
        raise UnsupportedFormat(f"raw dtype {dtype!r}")
    planes = clip.frames.transpose(0, 3, 1, 2)
    data = quantize(planes) if dtype == "u8" else planes.astype("<f4")
    Path(path).write_bytes(np.ascontiguousarray(data).tobytes())
    t, h, w = clip.shape
    meta = {
        "t": t,
        "h": h,
        "w": w,
        "c": 3,
        "colorspace": clip.colorspace.value,
        "dtype": dtype,
        "frame_rate": clip.frame_rate,
    }
    _sidecar(path).write_text(json.dumps(meta, indent=2) + "\n")
