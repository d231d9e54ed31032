import numpy as np
import pytest

from has_seg import (
    Material,
    PhantomSpec,
    compute_histogram,
    filter_image,
    generate_phantom,
)

SEED1_MATERIALS = (Material(60, 12), Material(130, 12), Material(210, 12))


@pytest.fixture(scope="session")
def seed1_phantom():
    """The 512x512 three-material reference phantom, means 60/130/210, sigma 12."""
    spec = PhantomSpec(
        width=512, height=512, materials=SEED1_MATERIALS, layout="stripes", seed=1
    )
    img, truth = generate_phantom(spec)
    return spec, img, truth


@pytest.fixture(scope="session")
def seed1_filtered(seed1_phantom):
    """Merge-filtered reference phantom (kernel 3) and its histogram."""
    _, img, _ = seed1_phantom
    filtered = filter_image(img, 3)
    return filtered, compute_histogram(filtered)


@pytest.fixture(scope="session")
def seed1_sigma25():
    """Same geometry and seed with sigma 25 noise, for raw-histogram checks."""
    spec = PhantomSpec(
        width=512,
        height=512,
        materials=(Material(60, 25), Material(130, 25), Material(210, 25)),
        layout="stripes",
        seed=1,
    )
    img, truth = generate_phantom(spec)
    return spec, img, truth


def random_image(rng: np.random.Generator, max_side: int = 64, min_side: int = 2):
    """Small random test image with side lengths in [min_side, max_side]."""
    h = int(rng.integers(min_side, max_side + 1))
    w = int(rng.integers(min_side, max_side + 1))
    return rng.integers(0, 256, size=(h, w), dtype=np.uint8)
