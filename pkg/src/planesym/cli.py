"""Command-line interface: ``planesym classify | classify-hka | generate``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .core import SELECTABLE, get_group
from .hka import read_hka_dir, records_to_fcs
from .imageio import ImageReadError, load_image, save_png16
from .noisegen import (
    NoiseSpec, apply_noise, paper_matrix, pattern_cell, pseudo_hexagonal_cell,
    quantize, render_wallpaper,
)
from .pipeline import classify_image, residuals_from_pair
from .selection import DEFAULT_SUBSET, classify
from .spectrum import DEFAULT_MIN_AMP, InsufficientPeriodicityError

logger = logging.getLogger("planesym")

EXIT_OK, EXIT_ERROR, EXIT_PERIODICITY = 0, 1, 2
COLUMNS = ["group", "J_FC", "F_res", "phi_res", "crisp_like_suggestion", "kl_best", "G-AIC",
           "G-AW(full)", "G-AW(subset)", "E_best_j", "N", "epsilon_sq"]


def _groups(text):
    names = [g.strip() for g in text.split(",") if g.strip()]
    for g in names:
        try:
            get_group(g)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return tuple(names)


def _center(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("center must be X,Y") from None
    return x, y


def _cell(text):
    try:
        a, b, gamma = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("cell must be A,B,GAMMA") from None
    return a, b, gamma


def format_report(report, fmt: str = "csv") -> str:
    """Render a report as CSV rows or a JSON document with the same fields."""
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2, default=_json_default) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in report.rows():
        writer.writerow({k: "" if row[k] is None else row[k] for k in COLUMNS})
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_classify(args) -> int:
    for path in args.images:
        img = load_image(path)
        analysis = classify_image(img, args.selection, args.size, args.center,
                                  args.radius_cut, args.min_amp, SELECTABLE, args.subset)
        report = analysis.report
        logger.info("%s: K-L-best %s, eps^2 = %.3g", path, report.kl_best, report.epsilon_sq)
        out = args.out
        if out and len(args.images) > 1:
            out = Path(out) / f"{Path(path).stem}.{args.format}"
        _emit(format_report(report, args.format), out)
    return EXIT_OK


def cmd_classify_hka(args) -> int:
    found = read_hka_dir(args.directory)
    missing = [g for g in SELECTABLE if g not in found]
    if missing:
        logger.warning("no .hka file for %s; skipped", ", ".join(missing))
    results = {}
    for group, records in found.items():
        if get_group(group).centered or group == "p1":
            logger.warning("%s is not part of the selection set; skipped", group)
            continue
        obs, sym = records_to_fcs(records)
        if len(obs) == 0:
            logger.warning("%s: empty coefficient list; skipped", group)
            continue
        results[group] = residuals_from_pair(obs, sym, group)
    if not results:
        raise ValueError("no usable .hka files")
    _emit(format_report(classify(results, subset=args.subset), args.format), args.out)
    return EXIT_OK


def _manifest_specs(args):
    if args.matrix:
        return [NoiseSpec(s.rgb_level, s.spread_distance, args.seed) for s in paper_matrix()]
    return [NoiseSpec(args.rgb, args.spread, args.seed)]


def cmd_generate(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    m = 96
    if args.pseudo:
        cell_img = pseudo_hexagonal_cell(m, args.seed)
        group = "p2"
    else:
        group = args.group
        cell_img = pattern_cell(group, m, args.seed)
    a, b, gamma = args.cell
    repeats = (int(math.floor(args.size / a)), int(math.floor(args.size / (b * math.sin(math.radians(gamma))))))
    clean = render_wallpaper(cell_img, group, args.cell, size=args.size)
    for spec in _manifest_specs(args):
        img = quantize(apply_noise(clean, spec), 16)
        stem = f"{args.name}_rgb{spec.rgb_level:.2f}_spread{spec.spread_distance}"
        save_png16(out / f"{stem}.png", img)
        sidecar = {"group": group, "pseudo_hexagonal": bool(args.pseudo), "cell": list(args.cell),
                   "repeats": list(repeats), "size": args.size, "noise": spec.as_dict()}
        (out / f"{stem}.json").write_text(json.dumps(sidecar, indent=2) + "\n")
        logger.info("wrote %s", out / f"{stem}.png")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planesym", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--subset", type=_groups, default=DEFAULT_SUBSET,
                        help="comma-separated groups for renormalized weights (default p2,p3,p6)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", help="output file (directory when several images are given)")
        sp.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("classify", help="classify images")
    c.add_argument("images", nargs="+")
    c.add_argument("--selection", choices=("square", "circle"), default="square")
    c.add_argument("--size", type=int, default=None, help="selection side (power of two)")
    c.add_argument("--center", type=_center, default=None, help="selection centre X,Y in pixels")
    c.add_argument("--radius-cut", type=float, default=None, help="default: size/8")
    c.add_argument("--min-amp", type=float, default=DEFAULT_MIN_AMP)
    common(c)
    c.set_defaults(func=cmd_classify)

    h = sub.add_parser("classify-hka", help="classify from a directory of .hka files")
    h.add_argument("directory")
    common(h)
    h.set_defaults(func=cmd_classify_hka)

    g = sub.add_parser("generate", help="render synthetic test patterns")
    g.add_argument("--group", default="p2", choices=SELECTABLE)
    g.add_argument("--pseudo", action="store_true",
                   help="p2 pattern with strong threefold pseudosymmetry on a hexagonal cell")
    g.add_argument("--cell", type=_cell, default=(100.0, 100.0, 120.0), help="A,B,GAMMA")
    g.add_argument("--size", type=int, default=1024)
    g.add_argument("--rgb", type=float, default=0.0)
    g.add_argument("--spread", type=int, default=0)
    g.add_argument("--matrix", action="store_true", help="write the fourteen-image noise matrix")
    g.add_argument("--name", default="pattern")
    common(g)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InsufficientPeriodicityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PERIODICITY
    except (ImageReadError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
