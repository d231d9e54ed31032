"""Decision boundaries between detected peaks, and pixel labeling.

Two rules convert a peak set into intensity intervals covering [0, 255]:

* distance: every intensity joins its nearest peak; the midpoint between two
  adjacent peaks goes to the lower one, so the boundary sits at
  floor((p_i + p_{i+1}) / 2).
* histogram: the boundary between two adjacent peaks is the intensity of
  minimum frequency strictly between them (ties to the lowest such
  intensity); the boundary intensity belongs to the lower region.

Labeling then maps every pixel of the filtered image to the region whose
interval contains its intensity.
"""

from __future__ import annotations

import numpy as np

from .image import GrayImage, Histogram, LabelMap, Region, RegionMap
from .peaks import PeakSet


def _regions_from_bounds(peaks: tuple[int, ...], uppers: list[int]) -> RegionMap:
    regions = []
    lower = 0
    for peak, upper in zip(peaks, uppers + [255]):
        regions.append(Region(lower, upper, peak))
        lower = upper + 1
    return RegionMap(tuple(regions))


def boundaries_distance(peaks: PeakSet) -> RegionMap:
    """Nearest-peak intervals; equidistant intensities join the lower peak."""
    ps = peaks.intensities
    uppers = [(a + b) // 2 for a, b in zip(ps, ps[1:])]
    return _regions_from_bounds(ps, uppers)


def boundaries_histogram(peaks: PeakSet, hist: Histogram) -> RegionMap:
    """Minimum-frequency intervals between adjacent peaks."""
    ps = peaks.intensities
    counts = hist.counts
    uppers = []
    for a, b in zip(ps, ps[1:]):
        between = counts[a + 1 : b]
        if between.size == 0:
            # Adjacent peaks leave no interior intensity; split right after a.
            uppers.append(a)
            continue
        uppers.append(a + 1 + int(np.argmin(between)))  # first min = lowest tie
    return _regions_from_bounds(ps, uppers)


def segment(filtered: GrayImage, regions: RegionMap) -> LabelMap:
    """Label every pixel with the index of the region owning its intensity."""
    lut = regions.to_lut()
    return LabelMap(lut[filtered.pixels], regions)
