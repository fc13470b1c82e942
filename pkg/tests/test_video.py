import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vidmark.video import (
    ColorSpace,
    PaddedShape,
    TileLayout,
    VideoClip,
    concat,
    convert_colorspace,
    rgb_to_yuv,
    segment_bounds,
    tile_temporal,
    untile_temporal,
    yuv_to_rgb,
)

from conftest import random_clip


def test_gray_maps_to_neutral_chroma():
    yuv = rgb_to_yuv(np.full(3, 0.5))
    assert yuv == pytest.approx([0.5, 0.5, 0.5], abs=1e-12)


def test_white_has_unit_luma():
    assert rgb_to_yuv(np.ones(3))[0] == pytest.approx(1.0, abs=1e-12)


def test_color_roundtrip_10k_pixels():
    x = np.random.default_rng(0).random((10_000, 3))
    assert np.max(np.abs(yuv_to_rgb(rgb_to_yuv(x)) - x)) <= 1e-6


def test_convert_clip_roundtrip():
    clip = random_clip(3)
    back = convert_colorspace(convert_colorspace(clip, "YUV"), ColorSpace.RGB)
    assert back.colorspace is ColorSpace.RGB
    assert np.max(np.abs(back.frames - clip.frames)) <= 1e-6


def test_clip_is_immutable_and_copies_input():
    src = np.zeros((2, 8, 8, 3))
    clip = VideoClip(src)
    src[:] = 1.0
    assert clip.frames.max() == 0.0
    with pytest.raises(ValueError):
        clip.frames[0, 0, 0, 0] = 1.0


@pytest.mark.parametrize("shape", [(0, 8, 8, 3), (2, 4, 8, 3), (2, 8, 8, 1), (8, 8, 3)])
def test_clip_rejects_bad_shapes(shape):
    with pytest.raises(ValueError):
        VideoClip(np.zeros(shape))


def test_clip_rejects_nan():
    f = np.zeros((1, 8, 8, 3))
    f[0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        VideoClip(f)


def test_luma_matches_conversion():
    clip = random_clip(5)
    assert np.allclose(clip.luma(), clip.to("YUV").frames[..., 0])


@pytest.mark.parametrize(
    "t,expected",
    [(8, [(0, 8)]), (16, [(0, 8), (8, 16)]), (13, [(0, 8), (8, 13)])],
)
def test_segment_bounds(t, expected):
    assert segment_bounds(t, 8) == expected


def test_t13_last_segment_replicates_edge():
    clip = random_clip(1, t=13)
    segs = tile_temporal(clip, TileLayout(8))
    assert [len(s) for s in segs] == [8, 8]
    tail = segs[1].frames
    assert np.array_equal(tail[:5], clip.frames[8:13])
    assert all(np.array_equal(tail[k], clip.frames[12]) for k in range(5, 8))
    assert np.array_equal(untile_temporal(segs, 13).frames, clip.frames)


def test_single_segment_is_identity():
    clip = random_clip(2, t=8)
    (seg,) = tile_temporal(clip)
    assert np.array_equal(seg.frames, clip.frames)


def test_layout_rejects_short_segments():
    with pytest.raises(ValueError):
        TileLayout(1)


@given(t=st.integers(1, 64), seg=st.sampled_from([4, 8, 16]))
def test_tiling_partitions_and_inverts(t, seg):
    bounds = segment_bounds(t, seg)
    covered = np.concatenate([np.arange(a, b) for a, b in bounds])
    assert np.array_equal(covered, np.arange(t))
    clip = VideoClip(np.arange(t, dtype=float)[:, None, None, None] * np.ones((1, 8, 8, 3)) / 64)
    segs = tile_temporal(clip, TileLayout(seg))
    assert all(len(s) == seg for s in segs)
    assert np.array_equal(untile_temporal(segs, t).frames, clip.frames)


def test_concat_and_indexing():
    a, b = random_clip(1, t=3), random_clip(2, t=2)
    joined = concat([a, b])
    assert len(joined) == 5
    assert np.array_equal(joined[3].frames[0], b.frames[0])


def test_padded_shape_for_levels():
    ps = PaddedShape.for_levels((13, 240, 462), 3)
    assert ps.padded == (16, 240, 464)
