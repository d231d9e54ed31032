"""Histogram-based auto segmentation of grayscale chip micrographs."""

from .boundaries import boundaries_distance, boundaries_histogram, segment
from .evaluation import (
    EvalConfig,
    GroundTruth,
    SeparationReport,
    baseline_anisotropic_diffusion,
    baseline_fixed_threshold,
    baseline_gaussian,
    baseline_median,
    evaluate,
    load_ground_truth,
    manhattan_separation,
    split_distributions,
)
from .image import (
    CorruptHeaderError,
    GrayImage,
    Histogram,
    LabelMap,
    Region,
    RegionMap,
    TooManyRegionsError,
    UnsupportedFormatError,
    compute_histogram,
    load_image,
    save_image,
    save_label_map,
)
from .mergefilter import (
    DifferenceDistribution,
    PatchMedian,
    difference_distribution,
    estimate_histogram,
    filter_image,
    merge_band,
    merge_threshold,
    patch_medians,
)
from .peaks import (
    AccumulatorState,
    OffsetTable,
    Peak,
    PeakSet,
    build_offset_table,
    build_side_accumulator,
    detect_peaks,
    merge_contiguous_peaks,
    scale_accumulator,
    threshold_and_join,
)
from .phantom import (
    Material,
    PhantomSpec,
    PhantomSpecError,
    add_intensity_gradient,
    generate_phantom,
    load_phantom_spec,
    parse_phantom_spec,
)

__version__ = "0.1.0"
