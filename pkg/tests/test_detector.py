import numpy as np
import pytest

from vidmark.corpus import synthetic_clip, synthetic_corpus
from vidmark.detector import (
    DetectionTrace,
    calibrate_null,
    decode_filtered,
    detect,
    editing_roi,
    filter_frames,
    iou,
    localize,
    make_editing_scenario,
    runs,
    select_windows,
    window_statistic,
)
from vidmark.errors import BadGeometry, ClipTooShort, InsufficientSamples
from vidmark.metrics import bit_accuracy
from vidmark.spread import Message, embed, embed_video, gen_key
from vidmark.video import VideoClip

ALPHA = 0.047


def _trace(scores, window_len=1):
    scores = np.asarray(scores, dtype=float)
    starts = np.arange(scores.size)
    return DetectionTrace(window_len, 1, scores, starts, scores, scores * 10)


@pytest.fixture(scope="module")
def key():
    return gen_key(7, 96, (8, 128, 128))


@pytest.fixture(scope="module")
def covers():
    return [c for _, c in synthetic_corpus(30, seed=5)]


@pytest.fixture(scope="module")
def null_clips():
    return [c for _, c in synthetic_corpus(40, seed=6)]


@pytest.fixture(scope="module")
def calibrated(key, null_clips):
    return key.with_null(calibrate_null(key, null_clips))


def test_filter_trivial_cases():
    assert filter_frames(_trace(np.zeros(6))) == []
    assert filter_frames(_trace(np.ones(6))) == [range(0, 6)]
    assert filter_frames(_trace([0.1, 0.5, 0.6, 0.2])) == [range(1, 3)]
    assert filter_frames(_trace([0.3, 0.29, 0.9])) == [range(0, 1), range(2, 3)]


def test_runs():
    assert runs([True, True, False, True]) == [range(0, 2), range(3, 4)]
    assert runs([]) == []


def test_select_windows_prefers_high_z_and_no_overlap():
    t = DetectionTrace(
        4, 1, np.ones(10), np.arange(7), np.ones(7), np.array([5.0, 6, 9, 4, 3, 2, 8])
    )
    assert select_windows(t) == [2, 6]


def test_iou():
    assert iou([1, 1, 0, 0], [0, 1, 1, 0]) == pytest.approx(1 / 3)
    assert iou([0, 0], [0, 0]) == 1.0


def test_editing_roi_and_geometry():
    rows, cols = editing_roi((240, 462))
    assert (rows.start, rows.stop, cols.start, cols.stop) == (108, 236, 4, 132)
    with pytest.raises(BadGeometry):
        editing_roi((100, 462))


def test_scenario_labels_and_pixel_fraction():
    bg = VideoClip(np.zeros((60, 240, 462, 3)))
    src = VideoClip(np.full((16, 128, 128, 3), 0.5))
    clip, labels = make_editing_scenario(bg, src, 20, seed=1)
    assert np.flatnonzero(labels).tolist() == list(range(20, 36))
    changed = np.any(clip.frames != 0, axis=-1)
    assert not changed[~labels].any()
    assert changed[labels].mean() == pytest.approx(128 * 128 / (240 * 462), abs=1e-9)
    assert changed[labels].mean() == pytest.approx(0.148, abs=0.001)
    # Share of all pixels in the 60-frame clip carrying the source.
    assert changed.mean() == pytest.approx(0.0394, abs=0.001)
    with pytest.raises(BadGeometry):
        make_editing_scenario(bg, src, 50, seed=1)


def test_null_is_standardized(key, calibrated, covers):
    z = np.array([calibrated.null.standardize(window_statistic(c.luma(), key)) for c in covers])
    assert abs(z.mean()) <= 0.5
    assert 0.5 <= z.std(ddof=1) <= 1.6
    assert calibrated.null.n == 40


def test_watermarked_windows_stand_out(key, calibrated, covers):
    z = []
    for i, c in enumerate(covers):
        marked = embed(c, Message.random(96, i), key, ALPHA)
        z.append(calibrated.null.standardize(window_statistic(marked.luma(), key)))
    assert np.mean(np.array(z) > 3) >= 0.95


def test_detect_scores(key, calibrated, covers):
    long_cover = VideoClip(np.concatenate([c.frames for c in covers[:3]]))
    marked = embed_video(long_cover, Message.random(96, 3), key, ALPHA)
    assert np.all(detect(marked, calibrated).scores >= 0.9)
    clean = detect(long_cover, calibrated)
    assert np.mean(clean.scores <= 0.3) >= 0.95


def test_detect_errors(key, calibrated, null_clips):
    with pytest.raises(InsufficientSamples):
        detect(null_clips[0], key)
    with pytest.raises(ClipTooShort):
        detect(VideoClip(null_clips[0].frames[:5]), calibrated)
    with pytest.raises(ValueError):
        detect(null_clips[0], calibrated, window_len=4)
    with pytest.raises(InsufficientSamples):
        calibrate_null(key, null_clips[:10])


def test_localization_and_filtered_decode(key, calibrated):
    bg = VideoClip(np.concatenate([synthetic_clip(900 + i, h=240, w=462).frames for i in range(8)]))
    src_cover = VideoClip(np.concatenate([synthetic_clip(950 + i).frames for i in range(2)]))
    msg = Message.random(96, 11)
    src = embed_video(src_cover, msg, key, ALPHA)
    clip, labels = make_editing_scenario(bg, src, 24, seed=2)
    rows, cols = editing_roi((240, 462))
    roi = VideoClip(clip.frames[:, rows, cols])
    trace = detect(roi, calibrated, labels=labels)
    assert iou(localize(trace), labels) >= 0.6
    assert select_windows(trace) == [24, 32]
    assert bit_accuracy(msg, decode_filtered(roi, key, trace).message) >= 0.9
