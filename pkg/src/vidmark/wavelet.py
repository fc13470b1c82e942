"""Separable multi-level 3D Haar transform with named sub-band access.

Band codes are three letters over (temporal, vertical, horizontal); ``L`` marks
the low-pass branch on that axis.  Level ``k`` decomposes the ``LLL`` band of
level ``k - 1`` (level 0 being the input), so only the deepest level keeps an
``LLL`` band.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BadBandCode, BadShape
from .video import PaddedShape, edge_pad

BAND_CODES = tuple("".join(c) for c in itertools.product("LH", repeat=3))
DETAIL_CODES = BAND_CODES[1:]
EMBED_BANDS = ("LLH", "LHL", "LHH", "HLL", "HLH", "HHL")

_SQRT1_2 = np.sqrt(0.5)


def _split(x: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    even = x.take(np.arange(0, x.shape[axis], 2), axis=axis)
    odd = x.take(np.arange(1, x.shape[axis], 2), axis=axis)
    return (even + odd) * _SQRT1_2, (even - odd) * _SQRT1_2


def _merge(low: np.ndarray, high: np.ndarray, axis: int) -> np.ndarray:
    even = (low + high) * _SQRT1_2
    odd = (low - high) * _SQRT1_2
    shape = list(low.shape)
    shape[axis] *= 2
    out = np.empty(shape, dtype=np.result_type(low, high))
    idx = [slice(None)] * low.ndim
    idx[axis] = slice(0, None, 2)
    out[tuple(idx)] = even
    idx[axis] = slice(1, None, 2)
    out[tuple(idx)] = odd
    return out


def analyze_level(x: np.ndarray) -> dict[str, np.ndarray]:
    """One level of 3D analysis: t, then v, then h."""
    bands = {"": x}
    for axis in range(3):
        nxt = {}
        for code, arr in bands.items():
            low, high = _split(arr, axis)
            nxt[code + "L"] = low
            nxt[code + "H"] = high
        bands = nxt
    return bands


def synthesize_level(bands: dict[str, np.ndarray]) -> np.ndarray:
    cur = dict(bands)
    for axis in (2, 1, 0):
        nxt = {}
        for code in {c[:axis] for c in cur}:
            nxt[code] = _merge(cur[code + "L"], cur[code + "H"], axis)
        cur = nxt
    return cur[""]


@dataclass(eq=False)
class WaveletPyramid:
    """Coefficient tree of a ``levels``-deep 3D Haar decomposition.

    ``details[k - 1]`` maps the seven detail codes of level ``k`` to arrays;
    ``approx`` is the deepest ``LLL`` band.  Arrays are live: in-place edits
    are picked up by :func:`dwt3_inverse`.
    """

    details: list[dict[str, np.ndarray]]
    approx: np.ndarray
    shape: PaddedShape

    @property
    def levels(self) -> int:
        return len(self.details)

    def band(self, level: int, code: str) -> np.ndarray:
        return subband_view(self, level, code)

    def bands(self):
        for k, level_bands in enumerate(self.details, start=1):
            for code, arr in level_bands.items():
                yield k, code, arr
        yield self.levels, "LLL", self.approx

    def coefficient_count(self) -> int:
        return sum(arr.size for _, _, arr in self.bands())

    def energy(self) -> float:
        return float(sum(np.sum(arr * arr) for _, _, arr in self.bands()))

    def copy(self) -> "WaveletPyramid":
        return WaveletPyramid(
            [{c: a.copy() for c, a in lv.items()} for lv in self.details],
            self.approx.copy(),
            self.shape,
        )

    def to_array(self) -> np.ndarray:
        """Pack into the usual nested-corner layout (low halves first on each axis)."""
        out = np.empty(self.shape.padded)
        for k, code, arr in self.bands():
            out[_corner(arr.shape, code)] = arr
        return out

    @classmethod
    def from_array(cls, packed: np.ndarray, levels: int, original=None) -> "WaveletPyramid":
        shape = PaddedShape(tuple(original or packed.shape), packed.shape)
        details = []
        dims = np.array(packed.shape)
        for _ in range(levels):
            dims = dims // 2
            details.append(
                {code: packed[_corner(tuple(dims), code)].copy() for code in DETAIL_CODES}
            )
        approx = packed[_corner(tuple(dims), "LLL")].copy()
        return cls(details, approx, shape)


def _corner(band_shape: tuple[int, ...], code: str) -> tuple[slice, ...]:
    return tuple(
        slice(0, n) if c == "L" else slice(n, 2 * n) for n, c in zip(band_shape, code)
    )


def zeros_like_layout(shape: PaddedShape, levels: int) -> WaveletPyramid:
    dims = np.array(shape.padded)
    details = []
    for _ in range(levels):
        dims = dims // 2
        details.append({code: np.zeros(tuple(dims)) for code in DETAIL_CODES})
    return WaveletPyramid(details, np.zeros(tuple(dims)), shape)


def band_shape(dims: tuple[int, int, int], level: int, levels: int = 3) -> tuple[int, int, int]:
    padded = PaddedShape.for_levels(dims, levels).padded
    return tuple(n // 2**level for n in padded)


def dwt3_forward(volume: np.ndarray, levels: int = 3) -> WaveletPyramid:
    """Orthonormal Haar analysis of a T x H x W volume.

    Axes that are not multiples of ``2**levels`` are edge-padded; the original
    extent is kept on the pyramid and restored by :func:`dwt3_inverse`.
    """
    x = np.asarray(volume, dtype=np.float64)
    if x.ndim != 3:
        raise BadShape(f"expected a 3D volume, got shape {x.shape}")
    if levels < 1:
        raise BadShape("levels must be >= 1")
    if min(x.shape) < 2**levels:
        raise BadShape(f"every axis needs >= {2**levels} samples for {levels} levels, got {x.shape}")
    shape = PaddedShape.for_levels(x.shape, levels)
    cur = edge_pad(x, shape.padded)
    details = []
    for _ in range(levels):
        bands = analyze_level(cur)
        cur = bands.pop("LLL")
        details.append(bands)
    return WaveletPyramid(details, cur, shape)


def dwt3_inverse(pyr: WaveletPyramid) -> np.ndarray:
    cur = pyr.approx
    for bands in reversed(pyr.details):
        cur = synthesize_level({**bands, "LLL": cur})
    t, h, w = pyr.shape.original
    return cur[:t, :h, :w]


def subband_view(pyr: WaveletPyramid, level: int, code: str) -> np.ndarray:
    if not 1 <= level <= pyr.levels:
        raise BadBandCode(f"level {level} outside 1..{pyr.levels}")
    if code not in BAND_CODES:
        raise BadBandCode(f"unknown band code {code!r}")
    if code == "LLL":
        if level != pyr.levels:
            raise BadBandCode(f"LLL of level {level} is decomposed further")
        return pyr.approx
    return pyr.details[level - 1][code]
