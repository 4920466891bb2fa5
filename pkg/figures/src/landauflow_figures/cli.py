"""Command line: ``figures <manifest.json> --panel all --out fig.png``."""

from __future__ import annotations

import argparse
import sys

from .render import PANELS, FigureDataError, render, spec_from_manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render the diagnostic panels of a scenario run from its "
                    "manifest; display only, nothing is recomputed.")
    parser.add_argument("manifest", help="path to the run's manifest.json")
    parser.add_argument("--panel", default="all",
                        help="'all' or a comma list from {a, b, c} "
                             "(a: drive vs trap frequency, b: mass-flux map, "
                             "c: energy partition)")
    parser.add_argument("--out", default="fig.png", help="output PNG path")
    args = parser.parse_args(argv)

    panels = "all" if args.panel == "all" else tuple(
        p.strip() for p in args.panel.split(",") if p.strip())
    try:
        if panels != "all" and any(p not in PANELS for p in panels):
            raise FigureDataError(
                f"unknown panel in {args.panel!r}; choose from {list(PANELS)}")
        spec = spec_from_manifest(args.manifest, panels=panels, output_path=args.out)
        info = render(spec)
    except FigureDataError as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {info.output_path} (panels: {', '.join(info.panels)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
