"""Command line: one subcommand per figure recipe.

Exit codes: 0 on success, 2 on bad input (no files, empty tables, schema
mismatch). Output format follows the --out extension (.png recommended;
PNG bytes are reproducible across reruns).
"""

from __future__ import annotations

import argparse
import sys

from .io import EmptyInputError, SchemaError
from .recipes import FigureRecipe, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figrender",
        description="Render static figures from opkrylov CSV artifacts.")
    subs = parser.add_subparsers(dest="kind", required=True)

    def common(sub):
        sub.add_argument("inputs", nargs="+",
                         help="CSV artifact paths or glob patterns")
        sub.add_argument("--out", required=True, help="image file to write")
        sub.add_argument("--title", default=None)

    bn = subs.add_parser("bn-panel", help="b_n against n with cutoff line")
    common(bn)
    bn.add_argument("--cutoff", type=int, default=50,
                    help="n position of the vertical annotation")
    bn.add_argument("--logy", action="store_true")

    var = subs.add_parser("variance-sweep",
                          help="averaged variance against the swept parameter")
    common(var)
    var.add_argument("--logx", action=argparse.BooleanOptionalAction, default=None,
                     help="force or forbid a log abscissa (default: auto)")

    ov = subs.add_parser("overlap-panel", help="epsilon_n against n")
    common(ov)

    kt = subs.add_parser("kt-panel", help="phi_0(t) and K(t) panels")
    common(kt)
    kt.add_argument("--logy", action="store_true",
                    help="log scale for the K(t) panel")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    recipe = FigureRecipe(
        kind=args.kind.replace("-", "_"),
        inputs=tuple(args.inputs),
        cutoff=getattr(args, "cutoff", 50),
        logx=getattr(args, "logx", None),
        logy=getattr(args, "logy", None),
        title=args.title,
    )
    try:
        render(recipe, args.out)
    except (EmptyInputError, SchemaError, ValueError) as exc:
        print(f"figrender: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
