"""Synthetic IC-layer phantoms with exact per-pixel ground truth.

Phantoms stand in for real chip micrographs: each pixel belongs to one
material (the ground-truth label) and its intensity is the material's mean
plus Gaussian noise, rounded and clipped to [0, 255]. Three layouts cover the
usual layer motifs:

* ``stripes``          - one horizontal stripe per material, equal heights
  (planar layers seen face-on).
* ``rectangles-with-vias`` - a 4x4 grid of structure rectangles on a
  substrate; each rectangle carries a regular array of small via squares.
  The last material is the via material, the first is the substrate, and
  rectangles cycle through the materials in between.
* ``metal-tracks``     - Manhattan routing: horizontal and vertical tracks
  on a substrate, track materials cycling through all non-substrate
  materials. Vertical tracks paint over crossings.

Determinism: randomness comes from PCG32 (the XSH-RR 64/32 generator,
multiplier 6364136223846793005, state increment ``2*stream + 1``), one stream
per image row with ``stream = row index`` and the spec seed as the PCG32
seed. Every pixel consumes noise regardless of its sigma: row pixels are
produced pairwise by the Box-Muller transform, where pair ``t`` uses uniforms
``u1 = (out[2t] + 1) * 2**-32`` and ``u2 = (out[2t+1] + 1) * 2**-32`` to form
``sqrt(-2 ln u1) * (cos, sin)(2 pi u2)``. Arithmetic is IEEE-754 float64, so
phantoms are reproducible bit-for-bit wherever the libm log/cos/sin round the
same way (the test suite pins seed-1 values).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image import GrayImage, LabelMap

LAYOUTS = ("stripes", "rectangles-with-vias", "metal-tracks")

_PCG_MULT = np.uint64(6364136223846793005)


class PhantomSpecError(ValueError):
    """The phantom specification is inconsistent or out of range."""


@dataclass(frozen=True)
class Material:
    mean: float
    sigma: float


@dataclass(frozen=True)
class PhantomSpec:
    width: int
    height: int
    materials: tuple[Material, ...]
    layout: str = "stripes"
    via_size: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        materials = tuple(
            Material(float(m.mean), float(m.sigma)) for m in self.materials
        )
        object.__setattr__(self, "materials", materials)
        if self.width < 1 or self.height < 1:
            raise PhantomSpecError(
                f"phantom dimensions must be positive, got {self.width}x{self.height}"
            )
        if not 1 <= len(materials) <= 16:
            raise PhantomSpecError(
                f"need between 1 and 16 materials, got {len(materials)}"
            )
        means = [m.mean for m in materials]
        if len(set(means)) != len(means):
            raise PhantomSpecError("material means must be pairwise distinct")
        for m in materials:
            if not 0 <= m.mean <= 255:
                raise PhantomSpecError(f"material mean {m.mean} outside [0, 255]")
            if m.sigma < 0:
                raise PhantomSpecError(f"negative noise sigma {m.sigma}")
        if self.layout not in LAYOUTS:
            raise PhantomSpecError(
                f"unknown layout {self.layout!r}; choose one of {', '.join(LAYOUTS)}"
            )
        if self.layout == "stripes" and self.height < len(materials):
            raise PhantomSpecError(
                f"height {self.height} cannot fit {len(materials)} stripes"
            )
        if self.layout == "rectangles-with-vias":
            if self.via_size < 1:
                raise PhantomSpecError(f"via size must be positive, got {self.via_size}")
            if min(self.width, self.height) < 20:
                raise PhantomSpecError(
                    "rectangles-with-vias needs at least a 20x20 canvas"
                )
            cell = min(self.width, self.height) // 4
            rect = cell - 2 * (cell // 5)
            if len(materials) >= 3 and 2 * self.via_size > rect:
                raise PhantomSpecError(
                    f"via size {self.via_size} does not fit the {rect}px rectangles"
                )
        if self.layout == "metal-tracks" and min(self.width, self.height) < 64:
            raise PhantomSpecError("metal-tracks needs at least a 64x64 canvas")


# ---------------------------------------------------------------------------
# PCG32 noise
# ---------------------------------------------------------------------------

def _pcg32_init(seed: int, streams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inc = (streams.astype(np.uint64) << np.uint64(1)) | np.uint64(1)
    state = np.zeros_like(inc)
    state = state * _PCG_MULT + inc
    state = (state + np.uint64(seed & 0xFFFFFFFFFFFFFFFF)) * _PCG_MULT + inc
    return state, inc


def _pcg32_output(state: np.ndarray) -> np.ndarray:
    xorshifted = (((state >> np.uint64(18)) ^ state) >> np.uint64(27)).astype(np.uint32)
    rot = (state >> np.uint64(59)).astype(np.uint32)
    return (xorshifted >> rot) | (xorshifted << ((-rot) & np.uint32(31)))


def _pcg32_jumps(draws: int) -> tuple[np.ndarray, np.ndarray]:
    """Affine jump constants: state after i steps is A[i]*state0 + S[i]*inc."""
    mult = int(_PCG_MULT)
    mask = (1 << 64) - 1
    a, s = 1, 0
    avals, svals = [], []
    for _ in range(draws):
        avals.append(a)
        svals.append(s)
        s = (s + a) & mask
        a = (a * mult) & mask
    return np.array(avals, dtype=np.uint64), np.array(svals, dtype=np.uint64)


def _gaussian_field(height: int, width: int, seed: int) -> np.ndarray:
    """Standard-normal noise, one PCG32 stream per row, Box-Muller pairs."""
    npairs = -(-width // 2)
    draws = 2 * npairs
    state0, inc = _pcg32_init(seed, np.arange(height, dtype=np.uint64))
    jump_a, jump_s = _pcg32_jumps(draws)
    z = np.empty((height, draws), dtype=np.float64)
    # Chunk rows so the (rows, draws) uint64 state matrix stays small.
    chunk = max(1, (1 << 23) // draws)
    for r0 in range(0, height, chunk):
        r1 = min(r0 + chunk, height)
        states = jump_a * state0[r0:r1, None] + jump_s * inc[r0:r1, None]
        u = (_pcg32_output(states).astype(np.float64) + 1.0) * 2.0**-32  # (0, 1]
        radius = np.sqrt(-2.0 * np.log(u[:, 0::2]))
        angle = (2.0 * np.pi) * u[:, 1::2]
        z[r0:r1, 0::2] = radius * np.cos(angle)
        z[r0:r1, 1::2] = radius * np.sin(angle)
    return z[:, :width]


# ---------------------------------------------------------------------------
# Layouts
# ---------------------------------------------------------------------------

def _layout_stripes(spec: PhantomSpec) -> np.ndarray:
    rows = (np.arange(spec.height, dtype=np.int64) * len(spec.materials)) // spec.height
    return np.broadcast_to(rows[:, None], (spec.height, spec.width)).copy()


def _layout_rectangles(spec: PhantomSpec) -> np.ndarray:
    m = len(spec.materials)
    labels = np.zeros((spec.height, spec.width), dtype=np.int64)
    if m == 1:
        return labels
    rect_materials = list(range(1, m - 1)) if m >= 3 else [1]
    via_material = m - 1 if m >= 3 else None
    cell_h = spec.height // 4
    cell_w = spec.width // 4
    rect_idx = 0
    for gy in range(4):
        for gx in range(4):
            r0 = gy * cell_h + cell_h // 5
            r1 = (gy + 1) * cell_h - cell_h // 5
            c0 = gx * cell_w + cell_w // 5
            c1 = (gx + 1) * cell_w - cell_w // 5
            labels[r0:r1, c0:c1] = rect_materials[rect_idx % len(rect_materials)]
            rect_idx += 1
            if via_material is None:
                continue
            v = spec.via_size
            # Contact array: via squares on a 3*via_size pitch inside the rect.
            for vr in range(r0 + v, r1 - v + 1, 3 * v):
                for vc in range(c0 + v, c1 - v + 1, 3 * v):
                    labels[vr : vr + v, vc : vc + v] = via_material
    return labels


def _layout_tracks(spec: PhantomSpec) -> np.ndarray:
    m = len(spec.materials)
    labels = np.zeros((spec.height, spec.width), dtype=np.int64)
    if m == 1:
        return labels
    t = max(2, min(spec.height, spec.width) // 32)
    rows = np.arange(spec.height)
    cols = np.arange(spec.width)
    horiz = (rows // t) % 4 == 1
    vert = (cols // t) % 4 == 2
    track_ids_r = rows // (4 * t)
    track_ids_c = cols // (4 * t)
    # Horizontal tracks cycle even positions, vertical tracks odd positions,
    # so the >= 8 tracks per direction reach every non-substrate material.
    for r in np.flatnonzero(horiz):
        labels[r, :] = 1 + (2 * int(track_ids_r[r])) % (m - 1)
    for c in np.flatnonzero(vert):
        labels[:, c] = 1 + (2 * int(track_ids_c[c]) + 1) % (m - 1)
    return labels


_LAYOUT_FNS = {
    "stripes": _layout_stripes,
    "rectangles-with-vias": _layout_rectangles,
    "metal-tracks": _layout_tracks,
}


def generate_phantom(spec: PhantomSpec) -> tuple[GrayImage, LabelMap]:
    """Render the phantom image and its ground-truth label map."""
    labels = _LAYOUT_FNS[spec.layout](spec)
    means = np.array([m.mean for m in spec.materials], dtype=np.float64)
    sigmas = np.array([m.sigma for m in spec.materials], dtype=np.float64)
    noise = _gaussian_field(spec.height, spec.width, spec.seed)
    values = means[labels] + sigmas[labels] * noise
    pixels = np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)
    return GrayImage(pixels), LabelMap(labels)


def add_intensity_gradient(img: GrayImage, max_delta: int) -> GrayImage:
    """Add a left-to-right ramp of 0..max_delta, clipping at 255."""
    if not 0 <= max_delta <= 255:
        raise ValueError(f"gradient delta must lie in [0, 255], got {max_delta}")
    if img.width == 1 or max_delta == 0:
        return GrayImage(img.pixels)
    ramp = np.floor(np.arange(img.width) * (max_delta / (img.width - 1)) + 0.5)
    shifted = img.pixels.astype(np.float64) + ramp
    return GrayImage(np.clip(shifted, 0, 255).astype(np.uint8))


# ---------------------------------------------------------------------------
# Spec files
# ---------------------------------------------------------------------------

def parse_phantom_spec(text: str) -> PhantomSpec:
    """Parse the key-value phantom description format.

    One ``key = value`` pair per line; '#' starts a comment. Keys: width,
    height, layout, seed, via_size, and one ``material = MEAN SIGMA`` line
    per material. Width, height and at least one material are required.
    """
    fields: dict[str, str] = {}
    materials: list[Material] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PhantomSpecError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key == "material":
            parts = value.split()
            if len(parts) != 2:
                raise PhantomSpecError(f"line {lineno}: material needs 'MEAN SIGMA'")
            try:
                materials.append(Material(float(parts[0]), float(parts[1])))
            except ValueError:
                raise PhantomSpecError(
                    f"line {lineno}: non-numeric material values {value!r}"
                ) from None
        elif key in ("width", "height", "seed", "via_size"):
            try:
                fields[key] = str(int(value))
            except ValueError:
                raise PhantomSpecError(
                    f"line {lineno}: {key} must be an integer, got {value!r}"
                ) from None
        elif key == "layout":
            fields[key] = value
        else:
            raise PhantomSpecError(f"line {lineno}: unknown key {key!r}")
    for required in ("width", "height"):
        if required not in fields:
            raise PhantomSpecError(f"missing required key {required!r}")
    if not materials:
        raise PhantomSpecError("at least one material line is required")
    return PhantomSpec(
        width=int(fields["width"]),
        height=int(fields["height"]),
        materials=tuple(materials),
        layout=fields.get("layout", "stripes"),
        via_size=int(fields.get("via_size", "8")),
        seed=int(fields.get("seed", "0")),
    )


def load_phantom_spec(path: str | Path) -> PhantomSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_phantom_spec(fh.read())
