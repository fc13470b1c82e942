"""Clip container, BT.601 full-range color conversion and temporal tiling."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class ColorSpace(str, enum.Enum):
    RGB = "RGB"
    YUV = "YUV"


# BT.601 full range (JFIF): Y in [0,1], U/V centred on 0.5.
_RGB2YUV = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.299 / 1.772, -0.587 / 1.772, 0.886 / 1.772],
        [0.701 / 1.402, -0.587 / 1.402, -0.114 / 1.402],
    ]
)
_YUV2RGB = np.linalg.inv(_RGB2YUV)
_CHROMA_OFFSET = np.array([0.0, 0.5, 0.5])


def rgb_to_yuv(rgb: np.ndarray) -> np.ndarray:
    return rgb @ _RGB2YUV.T + _CHROMA_OFFSET


def yuv_to_rgb(yuv: np.ndarray) -> np.ndarray:
    return (yuv - _CHROMA_OFFSET) @ _YUV2RGB.T


@dataclass(frozen=True, eq=False)
class VideoClip:
    """A T x H x W x 3 clip of real samples, nominally in [0, 1].

    The frame array is stored read-only; every operation returns a new clip.
    """

    frames: np.ndarray
    colorspace: ColorSpace = ColorSpace.RGB
    frame_rate: float = 25.0

    def __post_init__(self):
        frames = self.frames
        # Read-only float64 input (e.g. a slice of another clip) is shared, anything else copied.
        if not (isinstance(frames, np.ndarray) and frames.dtype == np.float64 and not frames.flags.writeable):
            frames = np.array(frames, dtype=np.float64, copy=True)
        if frames.ndim != 4 or frames.shape[3] != 3:
            raise ValueError(f"expected T x H x W x 3 frames, got shape {frames.shape}")
        t, h, w, _ = frames.shape
        if t < 1 or h < 8 or w < 8:
            raise ValueError(f"clip too small: T={t}, H={h}, W={w} (need T>=1, H,W>=8)")
        if not np.all(np.isfinite(frames)):
            raise ValueError("clip contains non-finite samples")
        if frames.flags.writeable:
            frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "colorspace", ColorSpace(self.colorspace))

    @property
    def shape(self) -> tuple[int, int, int]:
        t, h, w, _ = self.frames.shape
        return t, h, w

    def __len__(self) -> int:
        return self.frames.shape[0]

    def replace(self, frames: np.ndarray, colorspace: ColorSpace | None = None) -> "VideoClip":
        return VideoClip(frames, colorspace or self.colorspace, self.frame_rate)

    def clamped(self) -> "VideoClip":
        return self.replace(np.clip(self.frames, 0.0, 1.0))

    def to(self, target: ColorSpace | str) -> "VideoClip":
        return convert_colorspace(self, target)

    def luma(self) -> np.ndarray:
        """Y plane (T x H x W) regardless of the stored colorspace."""
        if self.colorspace is ColorSpace.YUV:
            return self.frames[..., 0].copy()
        return self.frames @ _RGB2YUV[0]

    def __getitem__(self, index) -> "VideoClip":
        if isinstance(index, int):
            index = slice(index, index + 1)
        return self.replace(self.frames[index])


def convert_colorspace(clip: VideoClip, target: ColorSpace | str) -> VideoClip:
    target = ColorSpace(target)
    if clip.colorspace is target:
        return clip
    if target is ColorSpace.YUV:
        return clip.replace(rgb_to_yuv(clip.frames), target)
    return clip.replace(yuv_to_rgb(clip.frames), target)


def concat(clips: list[VideoClip]) -> VideoClip:
    first = clips[0]
    frames = [c.to(first.colorspace).frames for c in clips]
    return first.replace(np.concatenate(frames, axis=0))


@dataclass(frozen=True)
class TileLayout:
    segment_len: int = 8

    def __post_init__(self):
        if self.segment_len < 2:
            raise ValueError("segment_len must be >= 2")


def segment_bounds(t: int, segment_len: int) -> list[tuple[int, int]]:
    return [(s, min(s + segment_len, t)) for s in range(0, t, segment_len)]


def tile_frames(frames: np.ndarray, segment_len: int) -> list[np.ndarray]:
    """Split along axis 0; the last segment is padded by repeating its final frame."""
    out = []
    for start, stop in segment_bounds(frames.shape[0], segment_len):
        seg = frames[start:stop]
        short = segment_len - (stop - start)
        if short:
            seg = np.concatenate([seg, np.repeat(seg[-1:], short, axis=0)], axis=0)
        out.append(seg)
    return out


def untile_frames(segments: list[np.ndarray], t: int) -> np.ndarray:
    return np.concatenate(segments, axis=0)[:t]


def tile_temporal(clip: VideoClip, layout: TileLayout = TileLayout()) -> list[VideoClip]:
    return [clip.replace(seg) for seg in tile_frames(clip.frames, layout.segment_len)]


def untile_temporal(segments: list[VideoClip], t: int) -> VideoClip:
    first = segments[0]
    return first.replace(untile_frames([s.to(first.colorspace).frames for s in segments], t))


@dataclass(frozen=True)
class PaddedShape:
    """Original and edge-padded extents of a T x H x W volume."""

    original: tuple[int, int, int]
    padded: tuple[int, int, int] = field(default=(0, 0, 0))

    @classmethod
    def for_levels(cls, shape: tuple[int, int, int], levels: int) -> "PaddedShape":
        step = 2**levels
        padded = tuple(-(-n // step) * step for n in shape)
        return cls(tuple(shape), padded)


def edge_pad(volume: np.ndarray, padded: tuple[int, ...]) -> np.ndarray:
    widths = [(0, p - n) for n, p in zip(volume.shape, padded)]
    widths += [(0, 0)] * (volume.ndim - len(widths))
    if not any(w for _, w in widths):
        return volume
    return np.pad(volume, widths, mode="edge")
