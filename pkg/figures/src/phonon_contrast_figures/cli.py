"""`phonon-contrast-figures render --spec <json>`"""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import SchemaError, spec_from_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonon-contrast-figures",
        description="Render figure analogues from phonon-contrast CSV outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure from a spec file")
    p_render.add_argument("--spec", required=True, help="path to the figure spec JSON")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_json(args.spec)
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    print(f"{spec.figure}: wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
