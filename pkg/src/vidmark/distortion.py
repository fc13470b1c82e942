"""Attack engine: temporal, spatial, color and compression distortions.

Every attack maps a clip to a clip of identical shape.  Randomness comes only
from ``DistortionSpec.seed``; apart from ``ExternalCodec`` every attack is a
pure function of ``(clip, spec)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.ndimage import correlate1d, uniform_filter1d

from . import codec
from .errors import EmptyPool
from .jpeg import jpeg_roundtrip
from .video import ColorSpace, VideoClip

DEFAULTS: dict[str, dict] = {
    "Identity": {},
    "FrameDrop": {"p": 0.5},
    "FrameSwap": {"p": 0.5},
    "FrameAverage": {"N": 3},
    "FrameShift": {},
    "Crop": {"ratio": 0.4},
    "GaussianBlur3D": {"sigma": 2.0, "k_spatial": 5, "k_temporal": 3},
    "GaussianNoise": {"std": 0.04},
    "Hue": {"strength": 1.0},
    "Saturation": {"lo": 0.5, "hi": 1.5},
    "JpegProxy": {"quality": 50, "subsample_chroma": True},
    "FreqTruncate": {"fraction": 0.5},
    "ExternalCodec": {"crf": 22},
}
KINDS = tuple(DEFAULTS)

# Parameter swept as "strength"; Saturation uses the half-width of [lo, hi] around 1.
PRIMARY = {
    "FrameDrop": "p",
    "FrameSwap": "p",
    "FrameAverage": "N",
    "Crop": "ratio",
    "GaussianBlur3D": "sigma",
    "GaussianNoise": "std",
    "Hue": "strength",
    "Saturation": "spread",
    "JpegProxy": "quality",
    "FreqTruncate": "fraction",
    "ExternalCodec": "crf",
}


@dataclass(frozen=True)
class DistortionSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULTS:
            raise ValueError(f"unknown distortion kind {self.kind!r}; choose from {KINDS}")
        extra = set(self.params) - set(DEFAULTS[self.kind]) - ({"command", "decode"} if self.kind == "ExternalCodec" else set())
        if extra:
            raise ValueError(f"{self.kind} does not take {sorted(extra)}")
        merged = {**DEFAULTS[self.kind], **self.params}
        object.__setattr__(self, "params", merged)
        _validate(self.kind, merged)

    @classmethod
    def of(cls, kind: str, strength=None, seed: int = 0, **params) -> "DistortionSpec":
        spec = cls(kind, params, seed)
        return spec if strength is None else spec.with_strength(strength)

    @property
    def strength(self):
        key = PRIMARY.get(self.kind)
        if key is None:
            return None
        if key == "spread":
            return (self.params["hi"] - self.params["lo"]) / 2
        return self.params[key]

    def with_strength(self, value) -> "DistortionSpec":
        key = PRIMARY.get(self.kind)
        if key is None:
            raise ValueError(f"{self.kind} has no strength parameter")
        if key == "spread":
            params = {**self.params, "lo": 1.0 - value, "hi": 1.0 + value}
        else:
            params = {**self.params, key: value}
        return replace(self, params=params)

    def with_seed(self, seed: int) -> "DistortionSpec":
        return replace(self, seed=int(seed))

    @property
    def label(self) -> str:
        s = self.strength
        return self.kind if s is None else f"{self.kind}({s:g})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, data: dict) -> "DistortionSpec":
        return cls(data["kind"], dict(data.get("params", {})), int(data.get("seed", 0)))


def _validate(kind: str, p: dict) -> None:
    def need(ok, msg):
        if not ok:
            raise ValueError(f"{kind}: {msg}")

    if kind in ("FrameDrop", "FrameSwap"):
        need(0.0 <= p["p"] <= 1.0, "p must lie in [0, 1]")
    elif kind == "FrameAverage":
        need(int(p["N"]) == p["N"] and p["N"] >= 1, "N must be a positive integer")
    elif kind == "Crop":
        need(0.0 < p["ratio"] <= 1.0, "ratio must lie in (0, 1]")
    elif kind == "GaussianBlur3D":
        need(p["sigma"] > 0, "sigma must be > 0")
        need(p["k_spatial"] >= 1 and p["k_spatial"] % 2 == 1, "k_spatial must be odd")
        need(p["k_temporal"] >= 1 and p["k_temporal"] % 2 == 1, "k_temporal must be odd")
    elif kind == "GaussianNoise":
        need(p["std"] >= 0, "std must be >= 0")
    elif kind == "Hue":
        need(p["strength"] >= 0, "strength must be >= 0")
    elif kind == "Saturation":
        need(0.0 <= p["lo"] <= p["hi"], "need 0 <= lo <= hi")
    elif kind == "JpegProxy":
        need(1 <= p["quality"] <= 100, "quality must lie in [1, 100]")
    elif kind == "FreqTruncate":
        need(0.0 < p["fraction"] <= 1.0, "fraction must lie in (0, 1]")
    elif kind == "ExternalCodec":
        need(0 <= int(p["crf"]) <= 63, "crf must lie in [0, 63]")


# --------------------------------------------------------------------------- kernels


def freeze_indices(keep: np.ndarray) -> np.ndarray:
    """Source frame for every position: the nearest retained frame at or before it.

    Positions before the first retained frame take the first retained frame.
    """
    keep = np.asarray(keep, dtype=bool)
    if not keep.any():
        keep = keep.copy()
        keep[0] = True
    idx = np.where(keep, np.arange(keep.size), -1)
    idx = np.maximum.accumulate(idx)
    idx[idx < 0] = np.flatnonzero(keep)[0]
    return idx


def frame_drop(frames, p, rng):
    keep = rng.random(frames.shape[0]) >= p
    return frames[freeze_indices(keep)]


def swap_order(t: int, p: float, rng) -> np.ndarray:
    order = np.arange(t)
    flips = rng.random(t // 2) < p
    for i in np.flatnonzero(flips):
        a = 2 * i
        order[a], order[a + 1] = order[a + 1], order[a]
    return order


def cyclic_shift(frames, k: int):
    return np.roll(frames, k, axis=0)


def crop_box(h: int, w: int, ratio: float, rng) -> tuple[int, int, int, int]:
    bh = max(1, int(round(ratio * h)))
    bw = max(1, int(round(ratio * w)))
    y0 = int(rng.integers(0, h - bh + 1))
    x0 = int(rng.integers(0, w - bw + 1))
    return y0, x0, bh, bw


def crop_out(frames, ratio, rng):
    _, h, w, _ = frames.shape
    y0, x0, bh, bw = crop_box(h, w, ratio, rng)
    out = np.zeros_like(frames)
    out[:, y0 : y0 + bh, x0 : x0 + bw] = frames[:, y0 : y0 + bh, x0 : x0 + bw]
    return out


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    r = size // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def blur3d(frames, sigma, k_spatial=5, k_temporal=3):
    out = frames
    ks = gaussian_kernel(k_spatial, sigma)
    kt = gaussian_kernel(k_temporal, sigma)
    out = correlate1d(out, kt, axis=0, mode="reflect")
    out = correlate1d(out, ks, axis=1, mode="reflect")
    return correlate1d(out, ks, axis=2, mode="reflect")


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    safe = np.where(c > 0, c, 1.0)
    h = np.where(
        v == r,
        ((g - b) / safe) % 6.0,
        np.where(v == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
    )
    h = np.where(c > 0, h / 6.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    out = []
    for n in (5.0, 3.0, 1.0):
        k = (n + h * 6.0) % 6.0
        out.append(v - v * s * np.clip(np.minimum(k, 4.0 - k), 0.0, 1.0))
    return np.stack(out, axis=-1)


def hue_shift(frames, degrees: float):
    hsv = rgb_to_hsv(frames)
    hsv[..., 0] = (hsv[..., 0] + degrees / 360.0) % 1.0
    return hsv_to_rgb(hsv)


def scale_saturation(frames, factor: float):
    hsv = rgb_to_hsv(frames)
    hsv[..., 1] = np.clip(hsv[..., 1] * factor, 0.0, 1.0)
    return hsv_to_rgb(hsv)


def truncation_mask(shape, fraction: float) -> np.ndarray:
    """Boolean mask over fftn bins keeping |k| <= fraction * N / 2 on every axis (symmetric)."""
    masks = []
    for n in shape:
        k = np.abs(np.fft.fftfreq(n) * n)
        masks.append(k <= fraction * n / 2 + 1e-9)
    return masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]


def freq_truncate(frames, fraction: float):
    spec = np.fft.fftn(frames, axes=(0, 1, 2))
    spec *= truncation_mask(frames.shape[:3], fraction)[..., None]
    return np.fft.ifftn(spec, axes=(0, 1, 2)).real


# --------------------------------------------------------------------------- dispatch


def apply(clip: VideoClip, spec: DistortionSpec) -> VideoClip:
    """Apply one attack; output has the input's shape and colorspace, clamped to [0, 1]."""
    kind, p = spec.kind, spec.params
    if kind == "Identity":
        return clip
    if kind == "ExternalCodec":
        return codec.external_codec(clip, int(p["crf"]), p.get("command"), p.get("decode"))
    rng = np.random.default_rng(spec.seed)
    x = clip.to(ColorSpace.RGB).frames
    if kind == "FrameDrop":
        out = frame_drop(x, p["p"], rng)
    elif kind == "FrameSwap":
        out = x[swap_order(x.shape[0], p["p"], rng)]
    elif kind == "FrameAverage":
        out = uniform_filter1d(x, size=int(p["N"]), axis=0, mode="nearest")
    elif kind == "FrameShift":
        out = cyclic_shift(x, int(rng.integers(0, x.shape[0])))
    elif kind == "Crop":
        out = crop_out(x, p["ratio"], rng)
    elif kind == "GaussianBlur3D":
        out = blur3d(x, p["sigma"], int(p["k_spatial"]), int(p["k_temporal"]))
    elif kind == "GaussianNoise":
        out = x + rng.normal(0.0, p["std"], size=x.shape)
    elif kind == "Hue":
        limit = 90.0 * p["strength"]
        out = hue_shift(x, rng.uniform(-limit, limit))
    elif kind == "Saturation":
        out = scale_saturation(x, rng.uniform(p["lo"], p["hi"]))
    elif kind == "JpegProxy":
        out = jpeg_roundtrip(x, p["quality"], bool(p["subsample_chroma"]))
    elif kind == "FreqTruncate":
        out = freq_truncate(x, p["fraction"])
    else:  # pragma: no cover - guarded by DistortionSpec validation
        raise ValueError(kind)
    return VideoClip(np.clip(out, 0.0, 1.0), ColorSpace.RGB, clip.frame_rate).to(clip.colorspace)


def sample_random(pool: list[DistortionSpec], seed: int) -> DistortionSpec:
    """Uniform choice from ``pool``; the returned spec carries a seed derived from ``seed``."""
    if not pool:
        raise EmptyPool("distortion pool is empty")
    rng = np.random.default_rng(seed)
    choice = pool[int(rng.integers(len(pool)))]
    return choice.with_seed(int(rng.integers(0, 2**63)))


# Table-style evaluation suite, the four-distortion trade-off panel, and the training pool.
TABLE1_SUITE = (
    DistortionSpec("Identity"),
    DistortionSpec("ExternalCodec", {"crf": 22}),
    DistortionSpec("FrameAverage", {"N": 3}),
    DistortionSpec("FrameDrop", {"p": 0.5}),
    DistortionSpec("FrameSwap", {"p": 0.5}),
    DistortionSpec("GaussianBlur3D", {"sigma": 2.0}),
    DistortionSpec("GaussianNoise", {"std": 0.04}),
    DistortionSpec("Crop", {"ratio": 0.4}),
    DistortionSpec("Hue", {"strength": 1.0}),
)

PANEL4 = (
    DistortionSpec("ExternalCodec", {"crf": 22}),
    DistortionSpec("Crop", {"ratio": 0.5}),
    DistortionSpec("FrameDrop", {"p": 0.5}),
    DistortionSpec("GaussianNoise", {"std": 0.04}),
)

TRAINING_POOL = (
    DistortionSpec("ExternalCodec", {"crf": 25}),
    DistortionSpec("FrameDrop", {"p": 0.5}),
    DistortionSpec("FrameSwap", {"p": 0.5}),
    DistortionSpec("Crop", {"ratio": 0.5}),
    DistortionSpec("Saturation"),
    DistortionSpec("Hue"),
    DistortionSpec("GaussianBlur3D", {"sigma": 2.0}),
    DistortionSpec("GaussianNoise", {"std": 0.05}),
    DistortionSpec("JpegProxy", {"quality": 50}),
    DistortionSpec("FrameShift"),
)

__all__ = ["DistortionSpec", "apply", "sample_random", "TABLE1_SUITE", "PANEL4", "TRAINING_POOL"]
