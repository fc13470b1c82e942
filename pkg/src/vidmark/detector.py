"""Watermark presence detection over sliding frame windows.

The raw evidence for a window is the presence statistic of the spread-spectrum
decoder (mean absolute combined correlation).  It is standardized against a
null model measured on unwatermarked windows and squashed to [0, 1] with a
logistic centred at ``DETECTION_MIDPOINT`` standard deviations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distortion import scale_saturation
from .errors import BadGeometry, ClipTooShort, InsufficientSamples
from .spread import (
    ExtractionResult,
    NullModel,
    WatermarkKey,
    _extract_lumas,
    band_correlations,
    band_stack,
    extract_video,
    presence_statistic,
    score_from_standardized,
)
from .video import VideoClip

MIN_NULL_WINDOWS = 20
FILTER_THRESHOLD = 0.3
PATCH = 128
MARGIN = 4
INSERT_LEN = 16


def window_statistic(luma: np.ndarray, key: WatermarkKey) -> float:
    stack, rms = band_stack(luma, key)
    return presence_statistic(band_correlations(stack, rms, key), key.bands)


def _windows(t: int, window_len: int, stride: int) -> list[int]:
    starts = list(range(0, t - window_len + 1, stride))
    if starts[-1] != t - window_len:
        starts.append(t - window_len)
    return starts


def calibrate_null(key: WatermarkKey, clips, window_len: int | None = None) -> NullModel:
    """Fit mean/std of the presence statistic on unwatermarked clips.

    Each clip contributes its non-overlapping ``window_len``-frame windows; at
    least ``MIN_NULL_WINDOWS`` are needed.
    """
    window_len = window_len or key.dims[0]
    stats = []
    for clip in clips:
        luma = clip.luma()
        for s in range(0, luma.shape[0] - window_len + 1, window_len):
            stats.append(window_statistic(luma[s : s + window_len], key))
    if len(stats) < MIN_NULL_WINDOWS:
        raise InsufficientSamples(f"{len(stats)} null windows, need >= {MIN_NULL_WINDOWS}")
    stats = np.array(stats)
    return NullModel(float(stats.mean()), float(stats.std(ddof=1)), int(stats.size))


@dataclass(frozen=True, eq=False)
class DetectionTrace:
    window_len: int
    stride: int
    scores: np.ndarray
    window_starts: np.ndarray
    window_scores: np.ndarray
    window_z: np.ndarray
    labels: np.ndarray | None = None

    def kept(self, threshold: float = FILTER_THRESHOLD) -> np.ndarray:
        return self.scores >= threshold


def detect(
    video: VideoClip,
    key: WatermarkKey,
    null: NullModel | None = None,
    window_len: int | None = None,
    stride: int = 1,
    labels=None,
) -> DetectionTrace:
    """Score every frame by the best window covering it."""
    null = null or key.null
    if null is None:
        raise InsufficientSamples("detector needs a calibrated null model (see calibrate_null)")
    window_len = window_len or key.dims[0]
    if window_len != key.dims[0]:
        raise ValueError(f"window_len {window_len} must equal the key's segment length {key.dims[0]}")
    t = len(video)
    if t < window_len:
        raise ClipTooShort(f"clip has {t} frames, window needs {window_len}")
    luma = video.luma()
    starts = np.array(_windows(t, window_len, stride))
    stats = np.array([window_statistic(luma[s : s + window_len], key) for s in starts])
    z = null.standardize(stats)
    wscores = score_from_standardized(z)
    scores = np.zeros(t)
    for s, v in zip(starts, wscores):
        np.maximum(scores[s : s + window_len], v, out=scores[s : s + window_len])
    lab = None if labels is None else np.asarray(labels, dtype=bool)
    return DetectionTrace(window_len, stride, scores, starts, wscores, z, lab)


def runs(mask) -> list[range]:
    mask = np.asarray(mask, dtype=bool)
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [range(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]


def filter_frames(trace: DetectionTrace, threshold: float = FILTER_THRESHOLD) -> list[range]:
    """Frames scoring at least ``threshold``, as sorted maximal runs."""
    return runs(trace.kept(threshold))


def select_windows(trace: DetectionTrace, threshold: float = FILTER_THRESHOLD) -> list[int]:
    """Greedy non-overlapping windows inside kept frames, strongest first.

    Ranking uses the unsquashed z-score: misaligned windows over a watermarked
    run often saturate the logistic too, but the aligned one has the largest z.
    """
    kept = trace.kept(threshold)
    order = sorted(range(len(trace.window_starts)), key=lambda i: (-trace.window_z[i], trace.window_starts[i]))
    taken = np.zeros_like(kept)
    chosen = []
    for i in order:
        s = int(trace.window_starts[i])
        span = slice(s, s + trace.window_len)
        if trace.window_scores[i] < threshold or not kept[span].all() or taken[span].any():
            continue
        taken[span] = True
        chosen.append(s)
    return sorted(chosen)


def decode_filtered(
    video: VideoClip, key: WatermarkKey, trace: DetectionTrace, threshold: float = FILTER_THRESHOLD
) -> ExtractionResult:
    """Decode only from windows the detector kept.

    Falls back to decoding the whole clip when nothing passes the threshold.
    """
    starts = select_windows(trace, threshold)
    if not starts:
        return extract_video(video, key, null_trials=0)
    luma = video.luma()
    return _extract_lumas([luma[s : s + trace.window_len] for s in starts], key, null_trials=0)


def decode_unfiltered(video: VideoClip, key: WatermarkKey) -> ExtractionResult:
    return extract_video(video, key, null_trials=0)


# --------------------------------------------------------------------------- editing scenario


def editing_roi(frame_shape, patch: int = PATCH, margin: int = MARGIN) -> tuple[slice, slice]:
    """Rows/cols of the lower-left patch position."""
    h, w = frame_shape
    if h < patch + margin or w < patch + margin:
        raise BadGeometry(f"frame {h}x{w} cannot hold a {patch}px patch with a {margin}px margin")
    return slice(h - margin - patch, h - margin), slice(margin, margin + patch)


def crop_region(clip: VideoClip, rows: slice, cols: slice) -> VideoClip:
    return clip.replace(clip.frames[:, rows, cols])


def center_crop(clip: VideoClip, size: int) -> VideoClip:
    _, h, w = clip.shape
    if h < size or w < size:
        raise BadGeometry(f"cannot center-crop {h}x{w} to {size}x{size}")
    y0, x0 = (h - size) // 2, (w - size) // 2
    return crop_region(clip, slice(y0, y0 + size), slice(x0, x0 + size))


def make_editing_scenario(
    background: VideoClip,
    wm_source: VideoClip,
    insert_at: int,
    seed: int,
    patch: int = PATCH,
    margin: int = MARGIN,
) -> tuple[VideoClip, np.ndarray]:
    """Paste a center-cropped, saturation-jittered watermarked source into the lower-left corner.

    Returns the composite and per-frame ground-truth labels (True while the
    source is on screen).
    """
    t_bg, h, w = background.shape
    n = len(wm_source)
    if insert_at < 0 or insert_at + n > t_bg:
        raise BadGeometry(f"cannot insert {n} frames at {insert_at} into {t_bg}")
    rows, cols = editing_roi((h, w), patch, margin)
    src = center_crop(wm_source.to("RGB"), patch)
    factor = np.random.default_rng(seed).uniform(0.5, 1.5)
    edited = np.clip(scale_saturation(src.frames, factor), 0.0, 1.0)
    frames = background.to("RGB").frames.copy()
    frames[insert_at : insert_at + n, rows, cols] = edited
    frames.flags.writeable = False
    labels = np.zeros(t_bg, dtype=bool)
    labels[insert_at : insert_at + n] = True
    return VideoClip(frames, "RGB", background.frame_rate), labels


def iou(pred, truth) -> float:
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    union = np.count_nonzero(pred | truth)
    return 1.0 if union == 0 else np.count_nonzero(pred & truth) / union


def localize(trace: DetectionTrace, threshold: float = FILTER_THRESHOLD) -> np.ndarray:
    """Mask of the kept run holding the highest frame score (empty if nothing is kept)."""
    mask = np.zeros(trace.scores.size, dtype=bool)
    best = None
    for r in filter_frames(trace, threshold):
        peak = trace.scores[r.start : r.stop].max()
        if best is None or peak > best[0]:
            best = (peak, r)
    if best is not None:
        mask[best[1].start : best[1].stop] = True
    return mask
