"""Quality and robustness measurements."""
from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, FrameTooSmall, LengthMismatch
from .video import ColorSpace, VideoClip

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Recorded in every report so numbers from different tools stay comparable.
PSNR_MODE = "RGB, all channels, real-valued, peak 1.0"
MSSIM_MODE = "luma, 11x11 Gaussian sigma 1.5, valid windows"


def _same_dims(a: VideoClip, b: VideoClip):
    if a.frames.shape != b.frames.shape:
        raise DimensionMismatch(f"{a.frames.shape} vs {b.frames.shape}")


def _psnr_from_mse(mse: float) -> float:
    return math.inf if mse == 0 else 10.0 * math.log10(1.0 / mse)


def psnr(a: VideoClip, b: VideoClip) -> float:
    _same_dims(a, b)
    diff = a.to(ColorSpace.RGB).frames - b.to(ColorSpace.RGB).frames
    return _psnr_from_mse(float(np.mean(diff * diff)))


def tpsnr(a: VideoClip, b: VideoClip) -> float:
    """PSNR between the consecutive-frame difference signals of two clips.

    A cheap temporal-consistency proxy; it is not comparable to learned
    perceptual temporal metrics.
    """
    _same_dims(a, b)
    if len(a) < 2:
        return math.inf
    da = np.diff(a.to(ColorSpace.RGB).frames, axis=0)
    db = np.diff(b.to(ColorSpace.RGB).frames, axis=0)
    return _psnr_from_mse(float(np.mean((da - db) ** 2)))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _filter_valid(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    r = g.size // 2
    y = correlate1d(x, g, axis=-1, mode="constant")
    y = correlate1d(y, g, axis=-2, mode="constant")
    return y[..., r:-r, r:-r]


def ssim_map(x: np.ndarray, y: np.ndarray, data_range: float = 1.0) -> np.ndarray:
    """SSIM per valid window position for (..., H, W) planes."""
    g = gaussian_window()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mx, my = _filter_valid(x, g), _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    return ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2))


def mssim(a: VideoClip, b: VideoClip) -> float:
    _same_dims(a, b)
    _, h, w = a.shape
    if min(h, w) < SSIM_WINDOW:
        raise FrameTooSmall(f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}")
    return float(np.mean(ssim_map(a.luma(), b.luma())))


def bit_accuracy(sent, decoded) -> float:
    """Fraction of positions where two messages (or bit arrays) agree."""
    s = np.asarray(getattr(sent, "bits", sent))
    d = np.asarray(getattr(decoded, "bits", decoded))
    if s.shape != d.shape:
        raise LengthMismatch(f"{s.size} vs {d.size} bits")
    return float(np.count_nonzero(s == d)) / s.size


def quality_report(cover: VideoClip, marked: VideoClip) -> dict:
    return {"psnr_db": psnr(cover, marked), "mssim": mssim(cover, marked), "tpsnr_db": tpsnr(cover, marked)}
