"""figures: render the plot set from a corriter results directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import FiguresError
from .render import KINDS, render_all


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figures from corriter CSV results (no statistics recomputed).",
    )
    parser.add_argument("--in", dest="in_dir", type=Path, required=True,
                        help="results directory holding traces.csv/curves.csv")
    parser.add_argument("--out", type=Path, required=True, help="output directory for images")
    parser.add_argument("--kinds", default=None,
                        help=f"comma-separated subset of {','.join(KINDS)} (default: all)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.kinds is None:
        kinds = None
    else:
        kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
        unknown = [k for k in kinds if k not in KINDS]
        if unknown:
            print(f"error: unknown kinds {unknown}; choose from {KINDS}", file=sys.stderr)
            return 1
    if not args.in_dir.is_dir():
        print(f"error: not a results directory: {args.in_dir}", file=sys.stderr)
        return 1
    try:
        rendered, errors = render_all(args.in_dir, args.out, kinds)
    except FiguresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for kind, path in rendered.items():
        print(f"wrote {path} ({kind})")
    for kind, message in errors.items():
        print(f"failed {kind}: {message}", file=sys.stderr)
    return 0 if not errors else 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
