"""Deterministic per-frame JPEG round trip (8x8 DCT, Annex K tables, IJG quality scaling)."""
from __future__ import annotations

import numpy as np
from scipy.fft import dctn, idctn

from .video import rgb_to_yuv, yuv_to_rgb

LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)

CHROMA_TABLE = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.float64,
)


def scaled_table(table: np.ndarray, quality: float) -> np.ndarray:
    quality = float(np.clip(quality, 1, 100))
    scale = 5000.0 / quality if quality < 50 else 200.0 - 2.0 * quality
    return np.clip(np.floor((table * scale + 50.0) / 100.0), 1, 255)


def _blocks(plane: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """(..., H, W) -> (..., H/8, W/8, 8, 8) after edge padding to multiples of 8."""
    h, w = plane.shape[-2:]
    ph, pw = -(-h // 8) * 8, -(-w // 8) * 8
    pad = [(0, 0)] * (plane.ndim - 2) + [(0, ph - h), (0, pw - w)]
    p = np.pad(plane, pad, mode="edge")
    shape = p.shape[:-2] + (ph // 8, 8, pw // 8, 8)
    return p.reshape(shape).swapaxes(-3, -2), (h, w)


def _unblocks(blocks: np.ndarray, hw: tuple[int, int]) -> np.ndarray:
    b = blocks.swapaxes(-3, -2)
    shape = b.shape[:-4] + (b.shape[-4] * 8, b.shape[-2] * 8)
    return b.reshape(shape)[..., : hw[0], : hw[1]]


def quantize_plane(plane: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Level-shifted DCT, round(coef / table) * table, inverse DCT; input in [0, 255]."""
    blocks, hw = _blocks(plane - 128.0)
    coef = dctn(blocks, axes=(-2, -1), norm="ortho")
    coef = np.rint(coef / table) * table
    return _unblocks(idctn(coef, axes=(-2, -1), norm="ortho"), hw) + 128.0


def _subsample(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape[-2:]
    p = np.pad(plane, [(0, 0)] * (plane.ndim - 2) + [(0, h % 2), (0, w % 2)], mode="edge")
    return 0.25 * (p[..., ::2, ::2] + p[..., 1::2, ::2] + p[..., ::2, 1::2] + p[..., 1::2, 1::2])


def _upsample(plane: np.ndarray, hw: tuple[int, int]) -> np.ndarray:
    return np.repeat(np.repeat(plane, 2, axis=-2), 2, axis=-1)[..., : hw[0], : hw[1]]


def jpeg_roundtrip(rgb: np.ndarray, quality: float = 50, subsample_chroma: bool = True) -> np.ndarray:
    """Compress/decompress every frame of a (..., H, W, 3) RGB array in [0, 1]."""
    ycc = np.moveaxis(rgb_to_yuv(rgb) * 255.0, -1, 0)
    hw = ycc.shape[-2:]
    out = np.empty_like(ycc)
    out[0] = quantize_plane(ycc[0], scaled_table(LUMA_TABLE, quality))
    ctable = scaled_table(CHROMA_TABLE, quality)
    for c in (1, 2):
        if subsample_chroma:
            out[c] = _upsample(quantize_plane(_subsample(ycc[c]), ctable), hw)
        else:
            out[c] = quantize_plane(ycc[c], ctable)
    out = np.clip(np.rint(out), 0, 255) / 255.0
    return yuv_to_rgb(np.moveaxis(out, 0, -1))
