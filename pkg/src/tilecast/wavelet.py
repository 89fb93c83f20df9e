"""Reversible 5/3 integer lifting wavelet pyramid.

One decomposition level splits a grid into LL/HL/LH/HH subbands with
the LeGall 5/3 lifting steps

    d[n] = x[2n+1] - floor((x[2n] + x[2n+2]) / 2)
    s[n] = x[2n]   + floor((d[n-1] + d[n] + 2) / 4)

applied rows-then-columns, using whole-sample symmetric extension at
boundaries. Even-indexed samples feed the low-pass band, so a length-n
signal splits into ceil(n/2) low and floor(n/2) high samples and odd
dimensions are handled without padding. The transform is exactly
invertible on integer input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Band = np.ndarray
DetailBands = tuple[Band, Band, Band]


class PyramidShapeError(ValueError):
    """Detail-band dimensions are inconsistent with the LL band."""


@dataclass(frozen=True)
class CoefficientPyramid:
    """Wavelet coefficients of one grid.

    ``ll`` is the deepest low-pass band. ``details[i]`` holds the
    (HL, LH, HH) bands at depth ``depth - i``, i.e. synthesis order:
    merging ``ll`` with ``details[0]`` yields the LL band one level up.
    """

    ll: Band
    details: tuple[DetailBands, ...]

    @property
    def depth(self) -> int:
        return len(self.details)

    @property
    def levels(self) -> int:
        """Number of addressable resolution levels (depth + 1)."""
        return len(self.details) + 1


def _as_coeffs(a) -> np.ndarray:
    arr = np.asarray(a, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got ndim={arr.ndim}")
    return arr


def _analyze_last(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One lifting pass along the last axis: returns (low, high)."""
    n = a.shape[-1]
    even = np.ascontiguousarray(a[..., 0::2])
    odd = np.ascontiguousarray(a[..., 1::2])
    nd = odd.shape[-1]
    if nd == 0:
        return even, odd
    if n % 2 == 0:
        even_next = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)
        d = odd - ((even + even_next) >> 1)
        d_left = np.concatenate([d[..., :1], d[..., :-1]], axis=-1)
        d_right = d
    else:
        d = odd - ((even[..., :-1] + even[..., 1:]) >> 1)
        d_left = np.concatenate([d[..., :1], d], axis=-1)
        d_right = np.concatenate([d, d[..., -1:]], axis=-1)
    s = even + ((d_left + d_right + 2) >> 2)
    return s, d


def _synthesize_last(s: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Invert _analyze_last: interleave (low, high) back into samples."""
    ns, nd = s.shape[-1], d.shape[-1]
    n = ns + nd
    if nd == 0:
        return s.copy()
    if ns == nd:
        d_left = np.concatenate([d[..., :1], d[..., :-1]], axis=-1)
        d_right = d
    else:
        d_left = np.concatenate([d[..., :1], d], axis=-1)
        d_right = np.concatenate([d, d[..., -1:]], axis=-1)
    even = s - ((d_left + d_right + 2) >> 2)
    if n % 2 == 0:
        even_next = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)
        odd = d + ((even + even_next) >> 1)
    else:
        odd = d + ((even[..., :-1] + even[..., 1:]) >> 1)
    out = np.empty(s.shape[:-1] + (n,), dtype=np.int64)
    out[..., 0::2] = even
    out[..., 1::2] = odd
    return out


def _analyze2d(a: np.ndarray) -> tuple[Band, Band, Band, Band]:
    low, high = _analyze_last(a)
    lowT, highT = low.T, high.T
    ll_t, lh_t = _analyze_last(lowT)
    hl_t, hh_t = _analyze_last(highT)
    return ll_t.T.copy(), hl_t.T.copy(), lh_t.T.copy(), hh_t.T.copy()


def _synthesize2d(ll: Band, hl: Band, lh: Band, hh: Band) -> np.ndarray:
    a, b = ll.shape
    c, d = hh.shape
    if hl.shape != (a, d) or lh.shape != (c, b) or not (0 <= a - c <= 1) or not (0 <= b - d <= 1):
        raise PyramidShapeError(
            f"inconsistent band shapes: LL{ll.shape} HL{hl.shape} LH{lh.shape} HH{hh.shape}"
        )
    low = _synthesize_last(ll.T, lh.T).T
    high = _synthesize_last(hl.T, hh.T).T
    return _synthesize_last(low, high)


def split_dims(n: int) -> tuple[int, int]:
    """(low, high) sample counts of one lifting pass over length n."""
    return (n + 1) // 2, n // 2


def forward_53(samples, depth: int) -> CoefficientPyramid:
    """Decompose a 2-D integer grid ``depth`` times, recursing on LL.

    ``depth`` 0 returns the input unchanged as a single LL band. Input
    is expected DC-shifted (e.g. 8-bit value - 128) when coding images,
    but any integer grid is accepted.
    """
    cur = _as_coeffs(samples)
    if cur.size == 0:
        raise ValueError("empty grid")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    collected = []
    for _ in range(depth):
        ll, hl, lh, hh = _analyze2d(cur)
        collected.append((hl, lh, hh))
        cur = ll
    return CoefficientPyramid(ll=cur, details=tuple(reversed(collected)))


def inverse_53(pyramid: CoefficientPyramid) -> np.ndarray:
    """Full synthesis; exact inverse of forward_53."""
    return reconstruct_at(pyramid, pyramid.levels)


def reconstruct_at(pyramid: CoefficientPyramid, resolution: int) -> np.ndarray:
    """Synthesize the LL image at a resolution level in 1..levels.

    Level 1 is the deepest LL band itself; level ``levels`` is the full
    reconstruction. Each step up doubles (odd dims: ceil-doubles) the
    grid.
    """
    if not 1 <= resolution <= pyramid.levels:
        raise ValueError(
            f"resolution {resolution} out of range 1..{pyramid.levels}"
        )
    cur = _as_coeffs(pyramid.ll)
    for hl, lh, hh in pyramid.details[: resolution - 1]:
        cur = _synthesize2d(cur, _as_coeffs(hl), _as_coeffs(lh), _as_coeffs(hh))
    return cur
