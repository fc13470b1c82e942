"""Seeded synthetic scenes standing in for a natural-video corpus.

Each scene is a textured background (1/f amplitude spectrum, optionally
panning) with soft-edged textured objects moving over it, a slow illumination
ramp, mild chroma and sensor grain.  Contrast ranges put the overall luma std
near 0.19, typical of natural footage.  All motion uses exact sub-pixel Fourier
shifts of periodic fields, so a clip is fully determined by its seed.
"""
from __future__ import annotations

import numpy as np
import scipy.fft

from .video import VideoClip

KINDS = ("objects", "pan", "gradient")


def pink_spectrum(rng: np.random.Generator, h: int, w: int, beta: float = 1.0) -> np.ndarray:
    """Fourier coefficients of a zero-mean, unit-std field with amplitude ~ 1/f**beta."""
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    f = np.sqrt(fy**2 + fx**2)
    f[0, 0] = 1.0
    amp = f**-beta
    amp[0, 0] = 0.0
    spec = amp * np.fft.fft2(rng.standard_normal((h, w)))
    return spec / np.fft.ifft2(spec).real.std()


def shifted(spec: np.ndarray, dy: float, dx: float) -> np.ndarray:
    """Real field of ``spec`` translated by (dy, dx) pixels, periodically."""
    h, w = spec.shape
    if dy == 0 and dx == 0:
        return scipy.fft.ifft2(spec, workers=-1).real
    half = spec[:, : w // 2 + 1]
    py = np.exp(-2j * np.pi * np.fft.fftfreq(h) * dy)[:, None]
    px = np.exp(-2j * np.pi * np.fft.rfftfreq(w) * dx)[None, :]
    return scipy.fft.irfft2(half * py * px, s=(h, w), workers=-1)


def _ellipse(h, w, cy, cx, ry, rx, soft=1.5):
    yy, xx = np.ogrid[0:h, 0:w]
    # Wrap so objects leaving one edge re-enter at the other, like the periodic textures.
    dy = (yy - cy + h / 2) % h - h / 2
    dx = (xx - cx + w / 2) % w - w / 2
    r = np.sqrt((dy / ry) ** 2 + (dx / rx) ** 2)
    return np.clip((1.0 - r) * min(ry, rx) / soft + 0.5, 0.0, 1.0)


def synthetic_clip(seed: int, t: int = 8, h: int = 128, w: int = 128, kind: str | None = None) -> VideoClip:
    rng = np.random.default_rng([seed, 0xC11B])
    kind = kind or KINDS[seed % len(KINDS)]
    if kind not in KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    scale = min(h, w) / 128.0

    mean = rng.uniform(0.3, 0.6)
    bg_contrast = rng.uniform(0.04, 0.1) if kind == "gradient" else rng.uniform(0.16, 0.36)
    bg = pink_spectrum(rng, h, w, beta=rng.uniform(1.0, 1.4))
    if kind == "pan":
        angle = rng.uniform(0, 2 * np.pi)
        bg_vel = rng.uniform(0.5, 2.5) * scale * np.array([np.sin(angle), np.cos(angle)])
    else:
        bg_vel = np.zeros(2)

    n_obj = {"objects": rng.integers(1, 4), "pan": rng.integers(0, 2), "gradient": rng.integers(0, 2)}[kind]
    objects = []
    for _ in range(n_obj):
        objects.append(
            {
                "spec": pink_spectrum(rng, h, w, beta=rng.uniform(1.0, 1.5)),
                "mean": rng.uniform(0.2, 0.75),
                "contrast": rng.uniform(0.16, 0.4),
                "pos": rng.uniform(0, 1, size=2) * (h, w),
                "radii": rng.uniform(0.12, 0.3, size=2) * (h, w),
                "vel": rng.uniform(-3.0, 3.0, size=2) * scale,
            }
        )

    yy, xx = np.mgrid[0:h, 0:w]
    direction = rng.uniform(-1, 1, size=2)
    ramp = rng.uniform(0.05, 0.3) * (direction[0] * (yy / h - 0.5) + direction[1] * (xx / w - 0.5))
    chroma_specs = [pink_spectrum(rng, h, w, beta=1.6) for _ in range(2)]
    chroma_amp = rng.uniform(0.02, 0.06)
    tint = rng.uniform(-0.08, 0.08, size=3)
    grain = rng.uniform(0.002, 0.006)

    static = not bg_vel.any()
    if static:
        still_luma = mean + ramp + bg_contrast * shifted(bg, 0, 0)
        still_chroma = [chroma_amp * shifted(s, 0, 0) for s in chroma_specs]
    frames = np.empty((t, h, w, 3))
    for k in range(t):
        if static:
            luma, chroma = still_luma, still_chroma
        else:
            dy, dx = bg_vel * k
            luma = mean + ramp + bg_contrast * shifted(bg, dy, dx)
            chroma = [chroma_amp * shifted(s, dy, dx) for s in chroma_specs]
        for obj in objects:
            oy, ox = obj["vel"] * k
            cy, cx = obj["pos"] + (oy, ox)
            mask = _ellipse(h, w, cy, cx, *obj["radii"])
            tex = obj["mean"] + obj["contrast"] * shifted(obj["spec"], oy, ox)
            luma = mask * tex + (1.0 - mask) * luma
        luma = luma + grain * rng.standard_normal((h, w))
        frames[k] = _colorize(luma, chroma, tint)
    frames.flags.writeable = False
    return VideoClip(frames)


def _colorize(luma: np.ndarray, chroma, tint: np.ndarray) -> np.ndarray:
    r = luma + tint[0] + 0.6 * chroma[0]
    g = luma + tint[1] - 0.3 * chroma[0] - 0.3 * chroma[1]
    b = luma + tint[2] + 0.6 * chroma[1]
    return np.clip(np.stack([r, g, b], axis=-1), 0.0, 1.0)


def synthetic_corpus(n: int, t: int = 8, h: int = 128, w: int = 128, seed: int = 0) -> list[tuple[str, VideoClip]]:
    return [(f"syn{seed}-{i:03d}", synthetic_clip(seed * 100003 + i, t, h, w)) for i in range(n)]
