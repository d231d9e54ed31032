"""Vote-accumulator peak detection over an estimated intensity histogram.

The detector anchors at the most frequent intensity and works on the two
sides of the anchor separately, in offset space:

* Non-empty bins are ordered by decreasing frequency (ties by distance from
  the anchor, then by intensity) and expressed as offsets from the anchor.
* Per side, a cursor sweeps the offset magnitudes upward. Whenever the cursor
  value is one of the side's offsets, the prefix of the frequency-ordered
  side list up to that offset is taken, the cursor skips past the maximal run
  of consecutive magnitudes inside that prefix, and every prefix member still
  beyond the cursor collects one vote. Far-away frequent offsets therefore
  accumulate the most votes.
* Votes are scaled by the bin frequencies, each side keeps the offsets whose
  scaled score exceeds the mean score of its voted offsets, and the kept
  offsets are mapped back to absolute intensities. The anchor is always kept.
* Runs of consecutive kept intensities collapse to a single peak at the
  highest-scoring intensity of the run (the anchor wins its own run).

The result is deterministic and depends only on the histogram.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .image import Histogram


class Peak(NamedTuple):
    intensity: int
    score: float


@dataclass(frozen=True)
class PeakSet:
    """Detected material peaks, strictly increasing in intensity."""

    peaks: tuple[Peak, ...]

    def __post_init__(self) -> None:
        peaks = tuple(Peak(int(p[0]), float(p[1])) for p in self.peaks)
        if not peaks:
            raise ValueError("a peak set needs at least one peak")
        ints = [p.intensity for p in peaks]
        if any(b <= a for a, b in zip(ints, ints[1:])):
            raise ValueError("peak intensities must be strictly increasing")
        if ints[0] < 0 or ints[-1] > 255:
            raise ValueError("peak intensities must lie in [0, 255]")
        object.__setattr__(self, "peaks", peaks)

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def intensities(self) -> tuple[int, ...]:
        return tuple(p.intensity for p in self.peaks)


@dataclass(frozen=True)
class OffsetTable:
    """Non-empty bins as (offset from anchor, frequency), frequency-ordered."""

    anchor: int
    entries: tuple[tuple[int, int], ...]


Side = Literal["negative", "positive"]


@dataclass(frozen=True)
class AccumulatorState:
    """Per-side vote counts indexed by offset magnitude (slot 0 unused)."""

    side: Side
    votes: np.ndarray

    @property
    def empty(self) -> bool:
        return self.votes.size == 0


def build_offset_table(hist: Histogram) -> OffsetTable:
    """Anchor at the most frequent bin and order all bins by frequency.

    Frequency ties order by distance from the anchor and then by intensity,
    which keeps the ordering deterministic and mirror-symmetric; an anchor
    tie (two bins sharing the maximal count) resolves to the lower intensity.
    """
    counts = hist.counts
    nonzero = np.flatnonzero(counts)
    if nonzero.size == 0:
        raise ValueError("cannot detect peaks in an empty histogram")
    anchor = int(np.argmax(counts))  # first maximum = lowest intensity
    order = sorted(
        (int(v) for v in nonzero),
        key=lambda v: (-int(counts[v]), abs(v - anchor), v),
    )
    entries = tuple((v - anchor, int(counts[v])) for v in order)
    return OffsetTable(anchor=anchor, entries=entries)


def _side_offsets(table: OffsetTable, side: Side) -> list[int]:
    if side == "negative":
        return [-off for off, _ in table.entries if off < 0]
    return [off for off, _ in table.entries if off > 0]


def build_side_accumulator(table: OffsetTable, side: Side) -> AccumulatorState:
    """Run the voting sweep over one side's offset magnitudes."""
    offsets = _side_offsets(table, side)
    if not offsets:
        return AccumulatorState(side, np.zeros(0, dtype=np.int64))
    rank = {e: i for i, e in enumerate(offsets)}
    limit = max(offsets)
    votes = np.zeros(limit + 1, dtype=np.int64)
    cursor = 1
    while cursor < limit:
        f = rank.get(cursor)
        if f is None:
            # Offset magnitude not populated on this side: move on.
            cursor += 1
            continue
        prefix = offsets[: f + 1]
        members = set(prefix)
        while True:
            step_hits = (cursor + 1) in members
            cursor += 1
            if not step_hits:
                break
        for e in prefix:
            if e > cursor:
                votes[e] += 1
    return AccumulatorState(side, votes)


def scale_accumulator(
    acc: AccumulatorState, hist: Histogram, table: OffsetTable
) -> np.ndarray:
    """score[e] = votes[e] * frequency of the bin at anchor -/+ e."""
    if acc.empty:
        return np.zeros(0, dtype=np.int64)
    sign = -1 if acc.side == "negative" else 1
    scores = np.zeros_like(acc.votes)
    for e in np.flatnonzero(acc.votes):
        scores[e] = acc.votes[e] * int(hist.counts[table.anchor + sign * int(e)])
    return scores


def threshold_and_join(
    left: np.ndarray, right: np.ndarray, anchor: int
) -> dict[int, int]:
    """Mean-threshold each side, map survivors back to intensities, and join.

    The mean is taken per side over its voted offsets only; a score is kept
    on strict excess. Every tabulated offset has frequency >= 1, so an offset
    scores non-zero exactly when it was voted for. The anchor survives
    unconditionally (the sweep never votes for offset zero).
    """
    kept = {anchor: 0}
    for sign, scores in ((-1, left), (1, right)):
        voted = np.flatnonzero(scores)
        if voted.size == 0:
            continue
        mean = float(scores[voted].mean())
        for e in voted:
            if float(scores[e]) > mean:
                kept[anchor + sign * int(e)] = int(scores[e])
    return dict(sorted(kept.items()))


def merge_contiguous_peaks(kept: dict[int, int], anchor: int) -> PeakSet:
    """Collapse each run of consecutive kept intensities into one peak.

    A run's peak is its highest-scoring intensity (ties to the lower one);
    the run containing the anchor always yields the anchor itself.
    """
    if not kept:
        raise ValueError("cannot merge an empty intensity mask")
    intensities = sorted(kept)
    peaks: list[Peak] = []
    run: list[int] = [intensities[0]]
    for v in intensities[1:]:
        if v == run[-1] + 1:
            run.append(v)
            continue
        peaks.append(_run_peak(run, kept, anchor))
        run = [v]
    peaks.append(_run_peak(run, kept, anchor))
    return PeakSet(tuple(peaks))


def _run_peak(run: list[int], kept: dict[int, int], anchor: int) -> Peak:
    if anchor in run:
        return Peak(anchor, float(kept[anchor]))
    best = run[0]
    for v in run[1:]:
        if kept[v] > kept[best]:
            best = v
    return Peak(best, float(kept[best]))


def detect_peaks(hist: Histogram) -> PeakSet:
    """Full pipeline: offset table, both side sweeps, scaling, threshold, merge."""
    table = build_offset_table(hist)
    left = scale_accumulator(build_side_accumulator(table, "negative"), hist, table)
    right = scale_accumulator(build_side_accumulator(table, "positive"), hist, table)
    kept = threshold_and_join(left, right, table.anchor)
    return merge_contiguous_peaks(kept, table.anchor)


def accumulator_debug(hist: Histogram) -> list[tuple[int, int, int, int, bool]]:
    """Per-intensity (intensity, frequency, votes, score, kept) rows.

    Mirrors what detect_peaks computes internally; intended for CSV dumps so
    the accumulator can be plotted next to the histogram.
    """
    table = build_offset_table(hist)
    acc = {
        "negative": build_side_accumulator(table, "negative"),
        "positive": build_side_accumulator(table, "positive"),
    }
    scores = {s: scale_accumulator(a, hist, table) for s, a in acc.items()}
    kept = threshold_and_join(scores["negative"], scores["positive"], table.anchor)
    rows = []
    for v in range(256):
        offset = v - table.anchor
        side: Side = "negative" if offset < 0 else "positive"
        e = abs(offset)
        votes_arr = acc[side].votes
        votes = int(votes_arr[e]) if 0 < e < votes_arr.size else 0
        score_arr = scores[side]
        score = int(score_arr[e]) if 0 < e < score_arr.size else 0
        rows.append((v, int(hist.counts[v]), votes, score, v in kept))
    return rows
