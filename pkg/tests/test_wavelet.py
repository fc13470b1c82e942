import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vidmark.errors import BadBandCode, BadShape
from vidmark.wavelet import (
    BAND_CODES,
    EMBED_BANDS,
    WaveletPyramid,
    dwt3_forward,
    dwt3_inverse,
    subband_view,
    zeros_like_layout,
)
from vidmark.video import PaddedShape


def haar_matrix(n: int) -> np.ndarray:
    """One analysis step as a dense n x n matrix: lowpass rows first, then highpass rows."""
    m = np.zeros((n, n))
    s = 1 / np.sqrt(2)
    for k in range(n // 2):
        m[k, 2 * k] = m[k, 2 * k + 1] = s
        m[n // 2 + k, 2 * k] = s
        m[n // 2 + k, 2 * k + 1] = -s
    return m


def dense_level(x: np.ndarray) -> np.ndarray:
    """Separable analysis of a 3D block via the Kronecker-factored matrix acting on vec(x)."""
    t, h, w = x.shape
    big = np.kron(np.kron(haar_matrix(t), haar_matrix(h)), haar_matrix(w))
    return (big @ x.reshape(-1)).reshape(t, h, w)


def dense_oracle(x: np.ndarray, levels: int) -> dict:
    """Band dictionary {(level, code): array} from repeated dense analysis of the LLL corner."""
    out = {}
    cur = x
    for lev in range(1, levels + 1):
        y = dense_level(cur)
        t, h, w = (n // 2 for n in cur.shape)
        for code in BAND_CODES:
            sl = tuple(slice(0, n) if c == "L" else slice(n, 2 * n) for c, n in zip(code, (t, h, w)))
            out[(lev, code)] = y[sl]
        cur = out[(lev, "LLL")]
    return out


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("shape", [(8, 8, 8), (8, 16, 16)])
def test_matches_kronecker_oracle(seed, shape):
    x = np.random.default_rng(seed).standard_normal(shape)
    pyr = dwt3_forward(x, 3)
    ref = dense_oracle(x, 3)
    for lev in (1, 2, 3):
        for code in BAND_CODES:
            if code == "LLL" and lev < 3:
                continue
            assert np.max(np.abs(pyr.band(lev, code) - ref[(lev, code)])) <= 1e-9


def test_constant_kills_details():
    c = 0.37
    pyr = dwt3_forward(np.full((8, 16, 16), c), 3)
    for lev, code, band in pyr.bands():
        if code == "LLL":
            assert np.allclose(band, c * 2 ** (3 * 3 / 2))
        else:
            assert np.max(np.abs(band)) < 1e-12


def test_impulse_response_one_level():
    x = np.zeros((8, 8, 8))
    x[0, 0, 0] = 1.0
    pyr = dwt3_forward(x, 1)
    for code in BAND_CODES:
        band = pyr.band(1, code)
        nz = np.flatnonzero(np.abs(band) > 1e-15)
        assert nz.tolist() == [0]
        assert abs(band.flat[0]) == pytest.approx(2 ** -1.5, abs=1e-12)


@pytest.mark.parametrize("shape", [(8, 16, 16), (8, 32, 32), (16, 32, 32)])
def test_perfect_reconstruction_and_parseval(shape):
    for seed in range(5):
        x = np.random.default_rng(seed).random(shape)
        pyr = dwt3_forward(x)
        assert np.max(np.abs(dwt3_inverse(pyr) - x)) <= 1e-9
        assert abs(pyr.energy() - np.sum(x * x)) / np.sum(x * x) <= 1e-6
        assert pyr.coefficient_count() == x.size


def test_zero_pyramid_is_zero_signal():
    pyr = zeros_like_layout(PaddedShape.for_levels((8, 16, 16), 3), 3)
    assert not np.any(dwt3_inverse(pyr))


def test_forward_of_inverse_is_identity():
    rng = np.random.default_rng(9)
    pyr = zeros_like_layout(PaddedShape.for_levels((8, 16, 16), 3), 3)
    for _, _, band in pyr.bands():
        band[...] = rng.standard_normal(band.shape)
    again = dwt3_forward(dwt3_inverse(pyr))
    for (l1, c1, b1), (l2, c2, b2) in zip(pyr.bands(), again.bands()):
        assert (l1, c1) == (l2, c2)
        assert np.max(np.abs(b1 - b2)) <= 1e-9


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2**16))
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.random((8, 8, 8)), rng.random((8, 8, 8))
    lhs = dwt3_forward(a * x + b * y).to_array()
    rhs = a * dwt3_forward(x).to_array() + b * dwt3_forward(y).to_array()
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_level1_band_shapes_for_8x128x128():
    pyr = dwt3_forward(np.zeros((8, 128, 128)))
    shapes = {code: pyr.band(1, code).shape for code in BAND_CODES if code != "LLL"}
    assert len(shapes) == 7
    assert set(shapes.values()) == {(4, 64, 64)}


def test_embedding_bands_exclude_lll_and_hhh():
    assert "LLL" not in EMBED_BANDS and "HHH" not in EMBED_BANDS
    assert len(set(EMBED_BANDS)) == 6


def test_subband_write_is_a_basis_vector():
    x = np.zeros((8, 16, 16))
    pyr = dwt3_forward(x)
    subband_view(pyr, 2, "LLH")[1, 2, 3] = 1.0
    delta = dwt3_inverse(pyr)
    # The same coefficient set through the dense oracle's transpose (orthonormal => inverse).
    expected = np.zeros_like(x)
    lvl1 = np.zeros((4, 8, 8))
    lvl1_bands = {code: np.zeros((2, 4, 4)) for code in BAND_CODES}
    lvl1_bands["LLH"][1, 2, 3] = 1.0
    for code, b in lvl1_bands.items():
        sl = tuple(slice(0, 2) if c == "L" else slice(2, 4) for c in code[:1]) + tuple(
            slice(0, 4) if c == "L" else slice(4, 8) for c in code[1:]
        )
        lvl1[sl] = b
    big2 = np.kron(np.kron(haar_matrix(4), haar_matrix(8)), haar_matrix(8))
    lll1 = (big2.T @ lvl1.reshape(-1)).reshape(4, 8, 8)
    top = np.zeros((8, 16, 16))
    top[:4, :8, :8] = lll1
    big1 = np.kron(np.kron(haar_matrix(8), haar_matrix(16)), haar_matrix(16))
    expected = (big1.T @ top.reshape(-1)).reshape(8, 16, 16)
    assert np.max(np.abs(delta - expected)) <= 1e-12
    assert np.sum(delta * delta) == pytest.approx(1.0)


@pytest.mark.parametrize("level,code", [(0, "LLH"), (4, "LLH"), (1, "LLL"), (2, "XYZ"), (1, "LL")])
def test_bad_band_codes(level, code):
    pyr = dwt3_forward(np.zeros((8, 16, 16)))
    with pytest.raises(BadBandCode):
        subband_view(pyr, level, code)


def test_deepest_lll_is_addressable():
    pyr = dwt3_forward(np.ones((8, 16, 16)))
    assert subband_view(pyr, 3, "LLL").shape == (1, 2, 2)


def test_too_small_axis_raises():
    with pytest.raises(BadShape):
        dwt3_forward(np.zeros((4, 16, 16)), 3)


def test_non_dyadic_shapes_are_padded_and_cropped():
    x = np.random.default_rng(4).random((13, 20, 28))
    pyr = dwt3_forward(x)
    assert np.max(np.abs(dwt3_inverse(pyr) - x)) <= 1e-9


def test_packed_array_roundtrip():
    x = np.random.default_rng(2).random((8, 16, 16))
    pyr = dwt3_forward(x)
    again = WaveletPyramid.from_array(pyr.to_array(), 3)
    assert np.max(np.abs(dwt3_inverse(again) - x)) <= 1e-12
