"""Command-line entry: render one figure from CSV inputs."""

import argparse
import sys
from pathlib import Path

from .figures import _BUILDERS, FigureSpec, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Render one figure from bootstrap-bound CSV results.")
    parser.add_argument("kind", choices=sorted(_BUILDERS))
    parser.add_argument("inputs", nargs="+", type=Path,
                        help="Input CSV files in the documented schemas.")
    parser.add_argument("--out", type=Path, required=True,
                        help="Output image path (PNG/SVG).")
    parser.add_argument("--no-guide", action="store_true",
                        help="Disable the non-rigorous polynomial guide "
                             "curve (bounds-vs-N only).")
    args = parser.parse_args(argv)
    spec = FigureSpec(inputs=tuple(args.inputs), kind=args.kind,
                      output=args.out, guide=not args.no_guide)
    render(spec)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
