"""Command-line front end: segment, histogram, synth and eval subcommands.

All subcommands are deterministic functions of their input bytes, flags and
seeds. Internal band-level parallelism is capped by --threads, falling back
to the HAS_SEG_THREADS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .boundaries import boundaries_distance, boundaries_histogram, segment
from .evaluation import (
    DEFAULT_METHODS,
    EvalConfig,
    evaluate,
    load_ground_truth,
    reports_to_csv,
    reports_to_json,
)
from .image import (
    GrayImage,
    Histogram,
    compute_histogram,
    load_image,
    save_image,
    save_label_map,
)
from .mergefilter import filter_image
from .peaks import accumulator_debug, detect_peaks
from .phantom import generate_phantom, load_phantom_spec


def _default_threads() -> int:
    env = os.environ.get("HAS_SEG_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _write_histogram_csv(hist: Histogram, path: Path) -> None:
    lines = ["intensity,count"]
    lines += [f"{v},{int(hist.counts[v])}" for v in range(256)]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _write_accumulator_csv(hist: Histogram, path: Path) -> None:
    lines = ["intensity,frequency,votes,score,kept"]
    for v, freq, votes, score, kept in accumulator_debug(hist):
        lines.append(f"{v},{freq},{votes},{score},{int(kept)}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def cmd_segment(args: argparse.Namespace) -> int:
    img = load_image(args.input)
    filtered = filter_image(img, args.kernel, threads=args.threads)
    hist = compute_histogram(filtered)
    peaks = detect_peaks(hist)
    if args.rule == "distance":
        regions = boundaries_distance(peaks)
    else:
        regions = boundaries_histogram(peaks, hist)
    target = img if args.label_raw else filtered
    labels = segment(target, regions)
    inp = Path(args.input)
    out = Path(args.out) if args.out else inp.with_name(inp.stem + "_labels.png")
    save_label_map(labels, out)
    if args.debug_dump:
        _write_histogram_csv(hist, out.with_suffix(".estimated.csv"))
        _write_accumulator_csv(hist, out.with_suffix(".accumulator.csv"))
    print(f"{len(regions)} regions -> {out}")
    return 0


def cmd_histogram(args: argparse.Namespace) -> int:
    img = load_image(args.input)
    raw = compute_histogram(img)
    filtered = filter_image(img, args.kernel, threads=args.threads)
    estimated = compute_histogram(filtered)
    base = Path(args.out) if args.out else Path(args.input).with_suffix("")
    raw_path = base.parent / (base.name + ".raw.csv")
    est_path = base.parent / (base.name + ".estimated.csv")
    _write_histogram_csv(raw, raw_path)
    _write_histogram_csv(estimated, est_path)
    print(f"histograms -> {raw_path} {est_path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = load_phantom_spec(args.spec)
    img, truth = generate_phantom(spec)
    out = Path(args.out) if args.out else Path(args.spec).with_suffix(".png")
    save_image(img, out)
    truth_path = out.with_suffix(".truth.pgm")
    save_image(GrayImage(truth.labels.astype("uint8")), truth_path)
    print(f"phantom -> {out} (truth: {truth_path})")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    img = load_image(args.input)
    gt = load_ground_truth(args.truth)
    config = EvalConfig(
        methods=tuple(args.methods.split(",")) if args.methods else DEFAULT_METHODS,
        kernel=args.kernel,
        gaussian_sigma=args.sigma,
        median_window=args.window,
        ad_iterations=args.ad_iterations,
        ad_kappa=args.ad_kappa,
        ad_lambda=args.ad_lambda,
        threads=args.threads,
    )
    reports = evaluate(img, gt, config)
    base = Path(args.out) if args.out else Path(args.input).with_suffix("")
    csv_path = base.parent / (base.name + ".csv")
    json_path = base.parent / (base.name + ".json")
    csv_path.write_text(reports_to_csv(reports), encoding="ascii")
    json_path.write_text(reports_to_json(reports), encoding="ascii")
    for r in reports:
        print(f"{r.method:24s} {r.score:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="has-seg",
        description="Histogram-based auto segmentation of grayscale chip images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="output path (format chosen by extension)")
        p.add_argument(
            "--threads",
            type=int,
            default=_default_threads(),
            help="worker cap for band-parallel filtering (env: HAS_SEG_THREADS)",
        )

    p_seg = sub.add_parser("segment", help="segment an image into material regions")
    p_seg.add_argument("input", help="input PGM or PNG image")
    p_seg.add_argument("--kernel", type=int, default=2, help="block size (default 2)")
    p_seg.add_argument(
        "--rule",
        choices=("histogram", "distance"),
        default="histogram",
        help="boundary rule between peaks (default histogram)",
    )
    p_seg.add_argument(
        "--debug-dump",
        action="store_true",
        help="also write estimated-histogram and accumulator CSVs",
    )
    p_seg.add_argument(
        "--label-raw",
        action="store_true",
        help="label the raw image instead of the filtered one",
    )
    add_common(p_seg)
    p_seg.set_defaults(func=cmd_segment)

    p_hist = sub.add_parser("histogram", help="dump raw and estimated histograms")
    p_hist.add_argument("input")
    p_hist.add_argument("--kernel", type=int, default=2)
    add_common(p_hist)
    p_hist.set_defaults(func=cmd_histogram)

    p_synth = sub.add_parser("synth", help="generate a phantom from a spec file")
    p_synth.add_argument("spec", help="key-value phantom spec file")
    add_common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_eval = sub.add_parser("eval", help="score filtering methods against a mask")
    p_eval.add_argument("input")
    p_eval.add_argument("truth", help="binary mask PGM/PNG (0=background, 255=foreground)")
    p_eval.add_argument("--kernel", type=int, default=2)
    p_eval.add_argument("--sigma", type=float, default=2.0, help="gaussian sigma")
    p_eval.add_argument("--window", type=int, default=5, help="median window")
    p_eval.add_argument("--ad-iterations", type=int, default=10)
    p_eval.add_argument("--ad-kappa", type=float, default=30.0)
    p_eval.add_argument("--ad-lambda", type=float, default=0.2)
    p_eval.add_argument(
        "--methods", help="comma-separated subset of the method roster"
    )
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # every pipeline error becomes a diagnostic + exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
