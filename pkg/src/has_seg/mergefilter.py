"""Histogram-estimation filter built from non-overlapping median blocks.

The image is cut into horizontal bands of ``k`` pixel rows. Each band is
tiled left to right by blocks ``k`` columns wide (the rightmost block and the
bottom band may be smaller; they cover only real pixels, never padding). Per
band the filter

1. takes the exact median of every block (even pixel counts use the lower of
   the two central values, so outputs stay in the band's value set),
2. tabulates the absolute differences between consecutive block medians into
   value/frequency lists (alpha, beta),
3. picks the merge threshold tau = alpha[argmin beta*(1 - alpha)], breaking
   objective ties toward the smaller difference,
4. sweeps the blocks once, chaining a block onto the current group while its
   median differs from the previous block's median by less than tau, and
   rewrites every pixel of a group with the pooled median of the group's raw
   pixels.

Bands never interact, so the filter may run them on parallel workers. The
histogram of the filtered image is the estimated histogram used by the peak
detector.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .image import GrayImage, Histogram, compute_histogram


class PatchMedian(NamedTuple):
    """One block's exact median plus the pixel rectangle it covers."""

    band_index: int
    block_index: int
    median: int
    row_start: int
    row_stop: int
    col_start: int
    col_stop: int


@dataclass(frozen=True)
class DifferenceDistribution:
    """Distinct absolute steps between consecutive medians and their counts."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.alpha, dtype=np.int64)
        b = np.asarray(self.beta, dtype=np.int64)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("alpha and beta must be matching 1-D arrays")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def empty(self) -> bool:
        return self.alpha.size == 0


def band_count(height: int, kernel: int) -> int:
    return -(-height // kernel)


def _lower_median(values: np.ndarray) -> int:
    m = (values.size - 1) // 2
    return int(np.partition(values, m)[m])


def patch_medians(img: GrayImage, band_index: int, kernel: int) -> list[PatchMedian]:
    """Medians of the non-overlapping blocks tiling one band, left to right."""
    if kernel < 2:
        raise ValueError(f"kernel size must be at least 2, got {kernel}")
    height, width = img.height, img.width
    row_start = band_index * kernel
    if band_index < 0 or row_start >= height:
        raise IndexError(
            f"band {band_index} out of range for height {height} with kernel {kernel}"
        )
    row_stop = min(row_start + kernel, height)
    band = img.pixels[row_start:row_stop]
    rows = row_stop - row_start

    out: list[PatchMedian] = []
    nfull = width // kernel
    if nfull:
        blocks = (
            band[:, : nfull * kernel]
            .reshape(rows, nfull, kernel)
            .transpose(1, 0, 2)
            .reshape(nfull, rows * kernel)
        )
        mid = (rows * kernel - 1) // 2
        meds = np.sort(blocks, axis=1)[:, mid]
        for j in range(nfull):
            out.append(
                PatchMedian(
                    band_index, j, int(meds[j]),
                    row_start, row_stop, j * kernel, (j + 1) * kernel,
                )
            )
    if width % kernel:
        tail = band[:, nfull * kernel :].ravel()
        out.append(
            PatchMedian(
                band_index, nfull, _lower_median(tail),
                row_start, row_stop, nfull * kernel, width,
            )
        )
    return out


def difference_distribution(medians: list[PatchMedian]) -> DifferenceDistribution:
    """Tabulate |median[i+1] - median[i]| over consecutive blocks."""
    if len(medians) < 2:
        return DifferenceDistribution(np.zeros(0, np.int64), np.zeros(0, np.int64))
    vals = np.array([m.median for m in medians], dtype=np.int64)
    diffs = np.abs(np.diff(vals))
    alpha, beta = np.unique(diffs, return_counts=True)
    return DifferenceDistribution(alpha, beta)


def merge_threshold(dist: DifferenceDistribution) -> int:
    """Difference value minimizing beta*(1 - alpha); 0 for empty distributions.

    np.argmin returns the first minimum and alpha is ascending, so objective
    ties resolve toward the smaller difference (less merging).
    """
    if dist.empty:
        return 0
    objective = dist.beta * (1 - dist.alpha)
    return int(dist.alpha[int(np.argmin(objective))])


def merge_band(
    img: GrayImage, medians: list[PatchMedian], tau: int, out: np.ndarray
) -> None:
    """Group chained blocks and write each group's pooled median into `out`.

    A block joins the running group while its median is within tau
    (strictly) of the previous block's median; tau = 0 merges nothing.
    """
    if not medians:
        return
    src = img.pixels
    row_start, row_stop = medians[0].row_start, medians[0].row_stop
    group_start = medians[0].col_start
    prev = medians[0].median
    spans: list[tuple[int, int]] = []
    for m in medians[1:]:
        if abs(m.median - prev) < tau:
            prev = m.median
            continue
        spans.append((group_start, m.col_start))
        group_start = m.col_start
        prev = m.median
    spans.append((group_start, medians[-1].col_stop))
    for col_start, col_stop in spans:
        value = _lower_median(src[row_start:row_stop, col_start:col_stop].ravel())
        out[row_start:row_stop, col_start:col_stop] = value


def _filter_band(img: GrayImage, band_index: int, kernel: int, out: np.ndarray) -> None:
    medians = patch_medians(img, band_index, kernel)
    tau = merge_threshold(difference_distribution(medians))
    merge_band(img, medians, tau, out)


def filter_image(img: GrayImage, kernel: int, threads: int = 1) -> GrayImage:
    """Apply the merge filter independently to every band of the image."""
    if kernel < 2:
        raise ValueError(f"kernel size must be at least 2, got {kernel}")
    if kernel > min(img.width, img.height):
        raise ValueError(
            f"kernel {kernel} too large for a {img.width}x{img.height} image"
        )
    out = np.empty((img.height, img.width), dtype=np.uint8)
    bands = range(band_count(img.height, kernel))
    if threads > 1:
        # Bands write disjoint row slices of `out`, so workers never collide.
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: _filter_band(img, b, kernel, out), bands))
    else:
        for b in bands:
            _filter_band(img, b, kernel, out)
    return GrayImage(out)


def estimate_histogram(img: GrayImage, kernel: int, threads: int = 1) -> Histogram:
    """Histogram of the merge-filtered image; preserves total pixel mass."""
    return compute_histogram(filter_image(img, kernel, threads=threads))
