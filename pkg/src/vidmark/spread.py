"""Spread-spectrum embedding into mid-level 3D wavelet detail bands.

Every message bit owns ``chip_len`` coefficient slots drawn (without
replacement) from the six embedding bands of one decomposition level.  The
bit is written as ``c' = c + alpha * gain * chip * (2b - 1)``; since the Haar
transform is linear and orthonormal, this is the same as adding
``alpha * R`` in the pixel domain, with ``R`` the inverse transform of the
chip pattern.  Only the luma plane is touched.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import KeyClipMismatch, PayloadMismatch, PayloadTooLarge
from .video import ColorSpace, PaddedShape, VideoClip, tile_frames
from .wavelet import EMBED_BANDS, dwt3_forward, dwt3_inverse, zeros_like_layout

KEY_VERSION = 1
DEFAULT_LEVEL = 2
DEFAULT_LEVELS = 3
GAIN = 1.0
# Standardized statistic at which the detection score crosses 0.5.
DETECTION_MIDPOINT = 4.0
NULL_TRIALS = 16
# (temporal, vertical, horizontal) window, in band samples, for local host variance.
VARIANCE_WINDOW = (1, 5, 5)
# Significance (in standard errors) needed to flip a temporal-high band's sign.
ORIENT_Z = 3.0


@dataclass(frozen=True, eq=False)
class Message:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.size < 1:
            raise ValueError("message needs at least one bit")
        if not np.all((bits == 0) | (bits == 1)):
            raise ValueError("message bits must be 0 or 1")
        bits = bits.astype(np.uint8)
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @property
    def m(self) -> int:
        return self.bits.size

    @classmethod
    def random(cls, m: int, seed) -> "Message":
        return cls(np.random.default_rng(seed).integers(0, 2, size=m))

    @classmethod
    def from_string(cls, text: str) -> "Message":
        return cls(np.array([int(c) for c in text.strip()]))

    def to_string(self) -> str:
        return "".join(str(int(b)) for b in self.bits)

    def __eq__(self, other):
        return isinstance(other, Message) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())


@dataclass(frozen=True)
class NullModel:
    """Mean/std of the presence statistic on unwatermarked windows."""

    mean: float
    std: float
    n: int

    def standardize(self, stat):
        return (np.asarray(stat) - self.mean) / self.std


def usable_extent(dims, level: int) -> tuple[int, int, int]:
    """Band coefficients whose Haar support lies fully inside ``dims``."""
    return tuple(n // 2**level for n in dims)


def slot_count(dims, level: int = DEFAULT_LEVEL, bands=EMBED_BANDS) -> int:
    return len(bands) * int(np.prod(usable_extent(dims, level)))


def capacity(dims, chip_len: int, level: int = DEFAULT_LEVEL, bands=EMBED_BANDS) -> int:
    if chip_len < 1:
        raise ValueError("chip_len must be >= 1")
    return slot_count(dims, level, bands) // chip_len


@dataclass(frozen=True, eq=False)
class WatermarkKey:
    """Shared secret; everything except the scalar fields is re-derived from ``seed``."""

    seed: int
    m: int
    chip_len: int
    dims: tuple[int, int, int]
    level: int = DEFAULT_LEVEL
    levels: int = DEFAULT_LEVELS
    bands: tuple[str, ...] = EMBED_BANDS
    null: NullModel | None = None
    chips: np.ndarray = field(init=False, repr=False)
    slot_band: np.ndarray = field(init=False, repr=False)
    slot_index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "bands", tuple(self.bands))
        if not 1 <= self.level <= self.levels:
            raise ValueError(f"embedding level {self.level} outside 1..{self.levels}")
        if self.m < 1 or self.chip_len < 1:
            raise ValueError("m and chip_len must be >= 1")
        total = slot_count(self.dims, self.level, self.bands)
        if self.m * self.chip_len > total:
            raise PayloadTooLarge(
                f"m*chip_len = {self.m * self.chip_len} exceeds {total} slots for dims {self.dims}"
            )
        chips, band, index = _derive(
            self.seed, self.m, self.chip_len, self.dims, self.level, self.levels, len(self.bands)
        )
        object.__setattr__(self, "chips", chips)
        object.__setattr__(self, "slot_band", band)
        object.__setattr__(self, "slot_index", index)

    @property
    def params(self) -> dict:
        return {
            "version": KEY_VERSION,
            "seed": int(self.seed),
            "m": self.m,
            "chip_len": self.chip_len,
            "level": self.level,
            "levels": self.levels,
            "bands": list(self.bands),
            "dims": list(self.dims),
        }

    def with_null(self, null: NullModel | None) -> "WatermarkKey":
        return replace(self, null=null)

    def with_seed(self, seed: int) -> "WatermarkKey":
        return replace(self, seed=seed, null=None)

    def same_layout(self, other: "WatermarkKey") -> bool:
        return self.params == other.params

    def slot_mask(self, band_idx: int) -> np.ndarray:
        return self.slot_band == band_idx


@functools.lru_cache(maxsize=256)
def _derive(seed, m, chip_len, dims, level, levels, n_bands):
    ut, uh, uw = usable_extent(dims, level)
    bt, bh, bw = (n // 2**level for n in PaddedShape.for_levels(dims, levels).padded)
    per_band = ut * uh * uw
    rng = np.random.default_rng(seed)
    picks = rng.permutation(n_bands * per_band)[: m * chip_len]
    band, local = np.divmod(picks, per_band)
    t, rem = np.divmod(local, uh * uw)
    v, h = np.divmod(rem, uw)
    index = (t * bh + v) * bw + h
    base = np.where(np.arange(chip_len) < (chip_len + 1) // 2, 1, -1).astype(np.int8)
    chips = rng.permuted(np.tile(base, (m, 1)), axis=1)
    out = (chips, band.reshape(m, chip_len).astype(np.int16), index.reshape(m, chip_len))
    for arr in out:
        arr.flags.writeable = False
    return out


def gen_key(
    seed: int,
    m: int,
    clip_dims,
    chip_len: int | None = None,
    level: int = DEFAULT_LEVEL,
    levels: int = DEFAULT_LEVELS,
    bands=EMBED_BANDS,
) -> WatermarkKey:
    """Derive a key; ``chip_len`` defaults to the largest value the slot budget allows."""
    dims = tuple(clip_dims)
    if chip_len is None:
        chip_len = slot_count(dims, level, bands) // m
        if chip_len < 1:
            raise PayloadTooLarge(f"payload {m} exceeds slot budget for {dims}")
    return WatermarkKey(int(seed), int(m), int(chip_len), dims, level, levels, tuple(bands))


def save_key(key: WatermarkKey, path) -> None:
    data = key.params
    if key.null is not None:
        data["null"] = {"mean": key.null.mean, "std": key.null.std, "n": key.null.n}
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def load_key(path) -> WatermarkKey:
    return key_from_dict(json.loads(Path(path).read_text()))


def key_from_dict(data: dict) -> WatermarkKey:
    if data.get("version", KEY_VERSION) != KEY_VERSION:
        raise ValueError(f"unsupported key version {data.get('version')}")
    null = data.get("null")
    return WatermarkKey(
        seed=int(data["seed"]),
        m=int(data["m"]),
        chip_len=int(data["chip_len"]),
        dims=tuple(data["dims"]),
        level=int(data.get("level", DEFAULT_LEVEL)),
        levels=int(data.get("levels", DEFAULT_LEVELS)),
        bands=tuple(data.get("bands", EMBED_BANDS)),
        null=NullModel(float(null["mean"]), float(null["std"]), int(null["n"])) if null else None,
    )


# --------------------------------------------------------------------------- embedding


def coefficient_pattern(msg: Message, key: WatermarkKey):
    """Zero pyramid with ``gain * chip * (2b - 1)`` written at every assigned slot."""
    pyr = zeros_like_layout(PaddedShape.for_levels(key.dims, key.levels), key.levels)
    signs = (2.0 * msg.bits.astype(np.float64) - 1.0)[:, None]
    values = GAIN * key.chips * signs
    for b, code in enumerate(key.bands):
        mask = key.slot_mask(b)
        pyr.band(key.level, code).reshape(-1)[key.slot_index[mask]] = values[mask]
    return pyr


@functools.lru_cache(maxsize=64)
def _residual_cached(key: WatermarkKey, bits: bytes) -> np.ndarray:
    msg = Message(np.frombuffer(bits, dtype=np.uint8))
    r = dwt3_inverse(coefficient_pattern(msg, key))
    r.flags.writeable = False
    return r


def luma_residual(msg: Message, key: WatermarkKey) -> np.ndarray:
    """Pixel-domain luma residual R (T x H x W), independent of alpha."""
    if msg.m != key.m:
        raise PayloadMismatch(f"message has {msg.m} bits, key expects {key.m}")
    return _residual_cached(key, msg.bits.tobytes())


def _check_dims(clip: VideoClip, key: WatermarkKey):
    if clip.shape != key.dims:
        raise KeyClipMismatch(f"clip dims {clip.shape} do not match key dims {key.dims}")


def _add_luma(clip: VideoClip, delta: np.ndarray, clamp: bool) -> VideoClip:
    if clip.colorspace is ColorSpace.YUV:
        frames = clip.frames.copy()
        frames[..., 0] += delta
    else:
        # Full-range BT.601: a pure luma offset moves R, G and B equally.
        frames = clip.frames + delta[..., None]
    if clamp:
        np.clip(frames, 0.0, 1.0, out=frames)
    return clip.replace(frames)


def embed(cover: VideoClip, msg: Message, key: WatermarkKey, alpha: float, clamp: bool = True) -> VideoClip:
    """V_w = V_in + alpha * R on the luma plane; ``clamp=False`` is a diagnostic mode."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    r = luma_residual(msg, key)
    _check_dims(cover, key)
    if alpha == 0:
        return cover
    return _add_luma(cover, alpha * r, clamp)


def embed_video(cover: VideoClip, msg: Message, key: WatermarkKey, alpha: float, clamp: bool = True) -> VideoClip:
    """Embed the same message in every ``key.dims[0]``-frame segment."""
    seg_len, h, w = key.dims
    if cover.shape[1:] != (h, w):
        raise KeyClipMismatch(f"frame size {cover.shape[1:]} does not match key {(h, w)}")
    r = luma_residual(msg, key)
    t = len(cover)
    n_seg = -(-t // seg_len)
    delta = np.concatenate([r] * n_seg, axis=0)[:t]
    if alpha == 0:
        return cover
    return _add_luma(cover, alpha * delta, clamp)


# --------------------------------------------------------------------------- extraction


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    message: Message
    soft: np.ndarray
    per_band_scores: np.ndarray
    weights: np.ndarray
    statistic: float
    detection: float

    @property
    def bits(self) -> np.ndarray:
        return self.message.bits


def local_variance(band: np.ndarray) -> np.ndarray:
    """Host variance around every coefficient, from a spatial window of its own band."""
    var = uniform_filter(band * band, size=VARIANCE_WINDOW, mode="reflect")
    return var + 1e-3 * np.mean(band * band) + 1e-12


def band_stack(luma: np.ndarray, key: WatermarkKey) -> tuple[np.ndarray, np.ndarray]:
    """Variance-weighted embedding bands (n_bands x N) and their RMS over usable slots.

    Each coefficient is divided by its local variance before correlation, the
    locally optimum detector for a Gaussian host whose variance changes across
    the frame: busy regions are down-weighted, flat ones count more.
    """
    pyr = dwt3_forward(luma, key.levels)
    ut, uh, uw = usable_extent(key.dims, key.level)
    flat, rms = [], []
    for code in key.bands:
        band = pyr.band(key.level, code)
        weighted = band / local_variance(band)
        flat.append(weighted.reshape(-1))
        rms.append(np.sqrt(np.mean(weighted[:ut, :uh, :uw] ** 2)))
    return np.stack(flat), np.array(rms)


def band_correlations(stack: np.ndarray, rms: np.ndarray, key: WatermarkKey) -> np.ndarray:
    """Per-bit, per-band normalized correlation (m x n_bands), ~N(0, 1) without a watermark."""
    vals = stack[key.slot_band, key.slot_index]
    prod = key.chips * vals
    n_bands = len(key.bands)
    onehot = key.slot_band[..., None] == np.arange(n_bands)
    corr = np.einsum("ml,mlb->mb", prod, onehot)
    counts = onehot.sum(axis=1)
    scale = rms[None, :] * np.sqrt(counts)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(scale > 0, corr / np.where(scale > 0, scale, 1.0), 0.0)
    return z


def combine(z: np.ndarray, bands=None) -> tuple[np.ndarray, np.ndarray]:
    """Weight bands by their estimated correlation amplitude; returns (soft, weights).

    Freezing or moving frames across temporal blocks can invert the sign of
    temporal-high bands, while temporal-low bands only ever mix in positive
    copies.  When band codes are given, a temporal-high band whose correlation
    with the temporal-low consensus is significantly negative (beyond
    ``ORIENT_Z`` standard errors) gets a negative weight.  The significance
    test matters: under blur the temporal-low bands can be pure noise.
    """
    excess = np.mean(z * z, axis=0) - 1.0
    w = np.sqrt(np.maximum(excess, 0.0))
    if w.sum() <= 0:
        w = np.ones(z.shape[1])
    if bands is not None:
        low = np.array([code[0] == "L" for code in bands])
        if low.any() and (~low).any() and w[low].sum() > 0:
            ref = z[:, low] @ w[low]
            high = z[:, ~low]
            denom = np.linalg.norm(high, axis=0) * np.linalg.norm(ref)
            r = (high.T @ ref) / np.where(denom > 0, denom, 1.0)
            w[~low] *= np.where(r < -ORIENT_Z / np.sqrt(z.shape[0]), -1.0, 1.0)
    w = w / np.abs(w).sum()
    return z @ w, w


def presence_statistic(z: np.ndarray, bands=None) -> float:
    """Mean |combined correlation|, rescaled so each term is unit-variance under the null."""
    soft, w = combine(z, bands)
    return float(np.mean(np.abs(soft)) / np.sqrt(np.sum(w * w)))


def logistic(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def score_from_standardized(zscore):
    return logistic(np.asarray(zscore) - DETECTION_MIDPOINT)


def decoy_keys(key: WatermarkKey, n: int = NULL_TRIALS) -> list[WatermarkKey]:
    seeds = np.random.default_rng([int(key.seed) & (2**63 - 1), 0x5EED]).integers(0, 2**63, size=n)
    return [key.with_seed(int(s)) for s in seeds]


def _segment_z(lumas, key: WatermarkKey):
    stacks = [band_stack(l, key) for l in lumas]
    return stacks, _pool([band_correlations(s, r, key) for s, r in stacks])


def _pool(zs: list[np.ndarray]) -> np.ndarray:
    return np.sum(zs, axis=0) / np.sqrt(len(zs))


def _extract_lumas(lumas: list[np.ndarray], key: WatermarkKey, null_trials: int) -> ExtractionResult:
    stacks, z = _segment_z(lumas, key)
    soft, w = combine(z, key.bands)
    stat = presence_statistic(z, key.bands)
    if key.null is not None:
        zscore = float(key.null.standardize(stat))
    elif null_trials > 0:
        null = [
            presence_statistic(_pool([band_correlations(s, r, d) for s, r in stacks]), d.bands)
            for d in decoy_keys(key, null_trials)
        ]
        zscore = (stat - np.mean(null)) / max(np.std(null, ddof=1), 1e-6)
    else:
        zscore = float("nan")
    detection = float(score_from_standardized(zscore)) if np.isfinite(zscore) else float("nan")
    bits = (soft > 0).astype(np.uint8)
    return ExtractionResult(Message(bits), soft, z, w, stat, detection)


def extract(suspect: VideoClip, key: WatermarkKey, null_trials: int = NULL_TRIALS) -> ExtractionResult:
    """Blind decode of a clip whose dims equal ``key.dims``; the cover is never needed."""
    _check_dims(suspect, key)
    return _extract_lumas([suspect.luma()], key, null_trials)


def extract_video(suspect: VideoClip, key: WatermarkKey, null_trials: int = NULL_TRIALS) -> ExtractionResult:
    """Decode a clip of any length by pooling correlations over ``key.dims[0]``-frame segments."""
    seg_len, h, w = key.dims
    if suspect.shape[1:] != (h, w):
        raise KeyClipMismatch(f"frame size {suspect.shape[1:]} does not match key {(h, w)}")
    return _extract_lumas(tile_frames(suspect.luma(), seg_len), key, null_trials)


def bit_errors(a: Message, b: Message) -> int:
    return int(np.count_nonzero(a.bits != b.bits))
