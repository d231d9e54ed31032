"""Grayscale image containers, file I/O and histogram extraction.

Images are 8-bit single-channel rasters stored row-major in numpy arrays of
shape (height, width), so ``pixels[row, col]`` addresses a pixel. Supported
input formats are PGM (P2 and P5, maxval 255 or 65535) and PNG; 16-bit inputs
are right-shifted to 8 bits and color PNG inputs are collapsed with the
integer luma formula round(0.299*R + 0.587*G + 0.114*B). Outputs are binary
PGM (P5) or 8-bit grayscale PNG, chosen by the file extension; both
round-trip bit-exactly through ``load_image``.

All container types are immutable after construction (the backing arrays are
marked read-only) and safe to share across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError


class UnsupportedFormatError(Exception):
    """The file is not one of the supported image formats."""


class CorruptHeaderError(Exception):
    """The file looks like a supported format but is malformed or truncated."""


class TooManyRegionsError(ValueError):
    """A label map has more regions than the fixed render palette supports."""


# Fixed 16-entry palette used to render label maps; region index -> RGB.
# Documented in the README so segmentation renders are reproducible.
LABEL_PALETTE = (
    (0, 0, 255),      # 0  blue
    (0, 200, 0),      # 1  green
    (255, 0, 0),      # 2  red
    (255, 215, 0),    # 3  gold
    (255, 0, 255),    # 4  magenta
    (0, 255, 255),    # 5  cyan
    (255, 140, 0),    # 6  orange
    (128, 0, 255),    # 7  purple
    (0, 128, 0),      # 8  dark green
    (139, 69, 19),    # 9  brown
    (255, 182, 193),  # 10 pink
    (128, 128, 128),  # 11 gray
    (0, 0, 128),      # 12 navy
    (128, 128, 0),    # 13 olive
    (64, 224, 208),   # 14 turquoise
    (255, 255, 255),  # 15 white
)

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _frozen_array(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster; ``pixels`` has shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.pixels)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D pixel array, got shape {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"image dimensions must be at least 1x1, got {a.shape}")
        if a.dtype != np.uint8:
            if not np.issubdtype(a.dtype, np.integer):
                raise ValueError(f"pixel values must be integers, got dtype {a.dtype}")
            if int(a.min()) < 0 or int(a.max()) > 255:
                raise ValueError("pixel values must lie in [0, 255]")
            a = a.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen_array(a))

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True, eq=False)
class Histogram:
    """256-bin intensity frequency table; ``counts[v]`` = pixels of value v."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (256,):
            raise ValueError(f"histogram must have exactly 256 bins, got shape {c.shape}")
        if int(c.min()) < 0:
            raise ValueError("histogram counts must be non-negative")
        object.__setattr__(self, "counts", _frozen_array(c))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def nonzero_bins(self) -> np.ndarray:
        return np.flatnonzero(self.counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return bool(np.array_equal(self.counts, other.counts))


class Region(NamedTuple):
    """Closed intensity interval [lower, upper] owned by one material peak."""

    lower: int
    upper: int
    peak: int


@dataclass(frozen=True)
class RegionMap:
    """Ordered intensity intervals that partition [0, 255], one per region."""

    regions: tuple[Region, ...]

    def __post_init__(self) -> None:
        regions = tuple(Region(int(r[0]), int(r[1]), int(r[2])) for r in self.regions)
        if not regions:
            raise ValueError("a region map needs at least one region")
        if regions[0].lower != 0 or regions[-1].upper != 255:
            raise ValueError("regions must cover the full intensity range [0, 255]")
        for i, r in enumerate(regions):
            if not (r.lower <= r.peak <= r.upper):
                raise ValueError(f"region {i} peak {r.peak} outside [{r.lower}, {r.upper}]")
            if i and r.lower != regions[i - 1].upper + 1:
                raise ValueError(f"regions {i - 1} and {i} are not contiguous")
        object.__setattr__(self, "regions", regions)

    def __len__(self) -> int:
        return len(self.regions)

    def __iter__(self):
        return iter(self.regions)

    def to_lut(self) -> np.ndarray:
        """Intensity -> region index lookup table of length 256."""
        lut = np.empty(256, dtype=np.int64)
        for i, r in enumerate(self.regions):
            lut[r.lower : r.upper + 1] = i
        return lut


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel region indices, optionally with the intervals behind them."""

    labels: np.ndarray
    regions: RegionMap | None = None

    def __post_init__(self) -> None:
        a = np.asarray(self.labels, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"label map must be 2-D and non-empty, got shape {a.shape}")
        if int(a.min()) < 0:
            raise ValueError("labels must be non-negative")
        if self.regions is not None and int(a.max()) >= len(self.regions):
            raise ValueError(
                f"label {int(a.max())} exceeds the {len(self.regions)} declared regions"
            )
        object.__setattr__(self, "labels", _frozen_array(a))

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def num_regions(self) -> int:
        if self.regions is not None:
            return len(self.regions)
        return int(self.labels.max()) + 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return bool(np.array_equal(self.labels, other.labels)) and self.regions == other.regions


def compute_histogram(img: GrayImage) -> Histogram:
    """Count pixels per intensity; the bin sum equals width*height."""
    return Histogram(np.bincount(img.pixels.ravel(), minlength=256))


# ---------------------------------------------------------------------------
# PGM
# ---------------------------------------------------------------------------

def _pgm_tokens(data: bytes, path: Path, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace-separated integer header fields after the magic.

    Returns the fields and the byte offset just past the single whitespace
    character that terminates the last one. '#' starts a comment to end of line.
    """
    fields: list[int] = []
    i = 2  # past the two magic bytes
    n = len(data)
    while len(fields) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i] != ord("#"):
            i += 1
        token = data[start:i]
        if not token:
            raise CorruptHeaderError(f"truncated PGM header: {path}")
        try:
            fields.append(int(token))
        except ValueError:
            raise CorruptHeaderError(
                f"non-numeric PGM header field {token!r}: {path}"
            ) from None
        if len(fields) == count:
            if i >= n or not data[i : i + 1].isspace():
                raise CorruptHeaderError(f"truncated PGM header: {path}")
            i += 1  # exactly one whitespace byte separates header from payload
    return fields, i


def _load_pgm(data: bytes, path: Path) -> GrayImage:
    binary = data[:2] == b"P5"
    (width, height, maxval), offset = _pgm_tokens(data, path, 3)
    if width < 1 or height < 1:
        raise CorruptHeaderError(f"bad PGM dimensions {width}x{height}: {path}")
    if not 1 <= maxval <= 65535:
        raise CorruptHeaderError(f"bad PGM maxval {maxval}: {path}")
    npix = width * height
    if binary:
        payload = data[offset:]
        if maxval <= 255:
            if len(payload) < npix:
                raise CorruptHeaderError(f"PGM payload shorter than declared size: {path}")
            samples = np.frombuffer(payload[:npix], dtype=np.uint8)
        else:
            if len(payload) < 2 * npix:
                raise CorruptHeaderError(f"PGM payload shorter than declared size: {path}")
            samples = np.frombuffer(payload[: 2 * npix], dtype=">u2")
    else:
        text = data[offset - 1 :]
        # P2 payload is ASCII; comments are legal there too.
        lines = [line.split(b"#", 1)[0] for line in text.splitlines()]
        try:
            values = np.array(b" ".join(lines).split(), dtype=np.int64)
        except ValueError:
            raise CorruptHeaderError(f"non-numeric PGM sample: {path}") from None
        if values.size < npix:
            raise CorruptHeaderError(f"PGM payload shorter than declared size: {path}")
        values = values[:npix]
        if int(values.min()) < 0:
            raise CorruptHeaderError(f"negative PGM sample: {path}")
        samples = values
    if int(samples.max(initial=0)) > maxval:
        raise CorruptHeaderError(f"PGM sample exceeds maxval {maxval}: {path}")
    if maxval > 255:
        samples = samples.astype(np.uint16) >> 8
    pixels = samples.astype(np.uint8).reshape(height, width)
    return GrayImage(pixels)


# ---------------------------------------------------------------------------
# PNG
# ---------------------------------------------------------------------------

def _luma(rgb: np.ndarray) -> np.ndarray:
    r = rgb[:, :, 0].astype(np.float64)
    g = rgb[:, :, 1].astype(np.float64)
    b = rgb[:, :, 2].astype(np.float64)
    y = np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5)
    return np.clip(y, 0, 255).astype(np.uint8)


def _load_png(data: bytes, path: Path) -> GrayImage:
    try:
        im = PILImage.open(io.BytesIO(data))
        im.load()
    except (UnidentifiedImageError, OSError, SyntaxError):
        raise CorruptHeaderError(f"unreadable PNG data: {path}") from None
    mode = im.mode
    if mode == "L":
        pixels = np.asarray(im, dtype=np.uint8)
    elif mode == "1":
        pixels = np.asarray(im.convert("L"), dtype=np.uint8)
    elif mode in ("I", "I;16", "I;16B", "I;16L", "I;16N"):
        arr = np.asarray(im).astype(np.uint32)
        pixels = (arr >> 8).astype(np.uint8)
    elif mode == "LA":
        pixels = np.asarray(im)[:, :, 0].astype(np.uint8)
    else:
        rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
        pixels = _luma(rgb)
    return GrayImage(pixels)


# ---------------------------------------------------------------------------
# Public I/O
# ---------------------------------------------------------------------------

def load_image(path: str | Path) -> GrayImage:
    """Load a PGM (P2/P5) or PNG file as an 8-bit grayscale image.

    Raises FileNotFoundError for missing paths, UnsupportedFormatError when
    the content is neither PGM nor PNG, and CorruptHeaderError for malformed
    files of a recognized format.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] == _PNG_MAGIC:
        return _load_png(data, path)
    if data[:2] in (b"P2", b"P5"):
        return _load_pgm(data, path)
    raise UnsupportedFormatError(f"not a PGM (P2/P5) or PNG file: {path}")


def save_image(img: GrayImage, path: str | Path) -> None:
    """Write `img` as binary PGM (.pgm) or 8-bit grayscale PNG (.png)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(img.pixels.tobytes())
    elif suffix == ".png":
        PILImage.fromarray(img.pixels, mode="L").save(path, format="PNG")
    else:
        raise UnsupportedFormatError(f"cannot write {suffix!r} files: {path}")


def save_label_map(labels: LabelMap, path: str | Path) -> None:
    """Render a label map as a paletted RGB PNG plus a .regions.txt sidecar.

    The sidecar lists one region per line as
    ``label_index lower_intensity upper_intensity peak_intensity``.
    """
    path = Path(path)
    if path.suffix.lower() != ".png":
        raise UnsupportedFormatError(f"label maps are written as PNG: {path}")
    if labels.regions is None:
        raise ValueError("label map carries no region intervals to render")
    k = labels.num_regions
    if k > len(LABEL_PALETTE):
        raise TooManyRegionsError(
            f"{k} regions exceed the {len(LABEL_PALETTE)}-entry palette"
        )
    palette = np.array(LABEL_PALETTE, dtype=np.uint8)
    rgb = palette[labels.labels]
    PILImage.fromarray(rgb, mode="RGB").save(path, format="PNG")
    sidecar = path.with_suffix(".regions.txt")
    lines = [
        f"{i} {r.lower} {r.upper} {r.peak}\n" for i, r in enumerate(labels.regions)
    ]
    with open(sidecar, "w", encoding="ascii") as fh:
        fh.writelines(lines)
