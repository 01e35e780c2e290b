"""Command-line entry point.

Subcommands: sparsify, virtualpaint, dada-build, dada-apply, report, synth.
Options may also come from a flat ``key=value`` config file (--config);
explicit flags win over the file, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

from .pipeline import (
    PipelineConfig,
    build_synth_dataset,
    cmd_dada_apply,
    cmd_dada_build,
    cmd_report,
    cmd_sparsify,
    cmd_virtualpaint,
    discover_frames,
    parse_config_file,
)

log = logging.getLogger("lidarpaint")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_frames(text: str) -> tuple[str, ...]:
    text = text.strip()
    if text.startswith("@"):
        lines = Path(text[1:]).read_text().split()
        return tuple(lines)
    return tuple(t for t in text.split(",") if t)


def _parse_int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t)


_CONVERTERS = {
    "frames": _parse_frames,
    "donor_classes": _parse_int_tuple,
    "workers": int,
    "seed": int,
    "stride": int,
    "image_width": int,
    "image_height": int,
    "min_points": int,
    "max_insert": int,
    "max_range": float,
    "near_threshold": float,
    "offset_min": float,
    "offset_max": float,
    "merge_threshold": float,
    "az_res_deg": float,
    "el_res_deg": float,
    "occlusion_min": float,
    "occlusion_max": float,
    "virtual": _parse_bool,
    "paint": _parse_bool,
    "balance_classes": _parse_bool,
    "figure": _parse_bool,
    "timings": _parse_bool,
}

_CONFIG_KEYS = {f.name for f in fields(PipelineConfig)}


def _merge_settings(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    ns = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    settings: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        for key, raw in parse_config_file(config_path).items():
            if key not in _CONFIG_KEYS:
                raise SystemExit(f"unknown config key {key!r} in {config_path}")
            settings[key] = _CONVERTERS.get(key, str)(raw)
    settings.update(ns)
    return settings


def _boolopt(parser, name, help):
    parser.add_argument(name, action=argparse.BooleanOptionalAction, default=argparse.SUPPRESS, help=help)


def _add_common(parser, need_root=True):
    parser.add_argument("--root", default=argparse.SUPPRESS, required=False, help="dataset root directory")
    parser.add_argument(
        "--frames",
        type=_parse_frames,
        default=argparse.SUPPRESS,
        help="comma-separated frame ids or @file; default: discover under root",
    )
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    parser.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="parallel frame workers")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="global random seed")
    parser.add_argument("--config", default=None, help="key=value config file (flags win)")
    parser.add_argument("--timings", action="store_true", default=argparse.SUPPRESS,
                        help="record wall-clock timings in the manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lidarpaint", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sparsify", help="rasterize raw clouds into sparse depth PNGs")
    _add_common(p)
    p.add_argument("--image-width", type=int, dest="image_width", default=argparse.SUPPRESS)
    p.add_argument("--image-height", type=int, dest="image_height", default=argparse.SUPPRESS)

    p = sub.add_parser("virtualpaint", help="fuse virtual points from dense depth and paint with scores")
    _add_common(p)
    p.add_argument("--stride", type=int, default=argparse.SUPPRESS, help="depth-map sampling stride")
    p.add_argument("--max-range", type=float, dest="max_range", default=argparse.SUPPRESS)
    p.add_argument("--depth-dir", dest="depth_dir", default=argparse.SUPPRESS)
    p.add_argument("--scores-dir", dest="scores_dir", default=argparse.SUPPRESS)
    p.add_argument("--image-width", type=int, dest="image_width", default=argparse.SUPPRESS)
    p.add_argument("--image-height", type=int, dest="image_height", default=argparse.SUPPRESS)
    _boolopt(p, "--virtual", "include virtual points (default on)")
    _boolopt(p, "--paint", "append class scores (default on)")

    p = sub.add_parser("dada-build", help="build the donor database from near, dense objects")
    _add_common(p)
    p.add_argument("--source", choices=("raw", "painted"), default=argparse.SUPPRESS)
    p.add_argument("--painted-dir", dest="painted_dir", default=argparse.SUPPRESS)
    p.add_argument("--near-threshold", type=float, dest="near_threshold", default=argparse.SUPPRESS)
    p.add_argument("--min-points", type=int, dest="min_points", default=argparse.SUPPRESS)

    p = sub.add_parser("dada-apply", help="augment frames with distance-adjusted donors")
    _add_common(p)
    p.add_argument("--donors", default=argparse.SUPPRESS, help="donor database directory")
    p.add_argument("--source", choices=("raw", "painted"), default=argparse.SUPPRESS)
    p.add_argument("--painted-dir", dest="painted_dir", default=argparse.SUPPRESS)
    p.add_argument("--max-insert", type=int, dest="max_insert", default=argparse.SUPPRESS)
    p.add_argument("--offset-min", type=float, dest="offset_min", default=argparse.SUPPRESS)
    p.add_argument("--offset-max", type=float, dest="offset_max", default=argparse.SUPPRESS)
    p.add_argument("--merge-threshold", type=float, dest="merge_threshold", default=argparse.SUPPRESS)
    p.add_argument("--az-res-deg", type=float, dest="az_res_deg", default=argparse.SUPPRESS)
    p.add_argument("--el-res-deg", type=float, dest="el_res_deg", default=argparse.SUPPRESS)
    p.add_argument("--occlusion-min", type=float, dest="occlusion_min", default=argparse.SUPPRESS)
    p.add_argument("--occlusion-max", type=float, dest="occlusion_max", default=argparse.SUPPRESS)
    p.add_argument("--donor-classes", type=_parse_int_tuple, dest="donor_classes", default=argparse.SUPPRESS,
                   help="restrict donors to these class ids, e.g. 1,3")
    _boolopt(p, "--balance-classes", "interleave donor classes instead of a plain shuffle")

    p = sub.add_parser("report", help="distance-binned statistics over clouds and boxes")
    _add_common(p)
    p.add_argument("--format", choices=("text", "json", "csv"), dest="report_format", default=argparse.SUPPRESS)
    p.add_argument("--source", choices=("raw", "painted"), default=argparse.SUPPRESS)
    p.add_argument("--painted-dir", dest="painted_dir", default=argparse.SUPPRESS)
    _boolopt(p, "--figure", "render report.png next to the table (default on)")

    p = sub.add_parser("synth", help="generate a synthetic KITTI-layout dataset")
    p.add_argument("--out", required=True, help="dataset directory to create")
    p.add_argument("--count", type=int, default=4, help="number of frames")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec", default=None, help="scene spec JSON (default: built-in jittered scene)")
    p.add_argument("--classes", type=int, default=4, help="score-tensor class count")
    p.add_argument("--no-rasters", action="store_true", help="skip depth/score rendering")
    return parser


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    settings = _merge_settings(args)
    for key in ("root", "out"):
        if key not in settings:
            raise SystemExit(f"--{key} is required (flag or config file)")
    cfg = PipelineConfig(**settings)
    if not cfg.frames:
        cfg = replace(cfg, frames=discover_frames(cfg))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "synth":
        spec_json = Path(args.spec).read_text() if args.spec else None
        frames = build_synth_dataset(
            args.out,
            count=args.count,
            seed=args.seed,
            spec_json=spec_json,
            rasters=not args.no_rasters,
            num_classes=args.classes,
        )
        log.info("wrote %d synthetic frames under %s", len(frames), args.out)
        return 0

    cfg = _build_config(args)
    runner = {
        "sparsify": cmd_sparsify,
        "virtualpaint": cmd_virtualpaint,
        "dada-build": cmd_dada_build,
        "dada-apply": cmd_dada_apply,
        "report": cmd_report,
    }[args.command]
    if args.command == "dada-apply" and not cfg.donors:
        raise SystemExit("--donors is required for dada-apply")
    ok = runner(cfg)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
