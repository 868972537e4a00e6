"""``qcharmlab run|list|validate``."""

import argparse
import sys

from . import errors
from .scenario import list_scenarios, run_scenario, validate


def _grid(text):
    try:
        r, a = text.lower().replace("×", "x").split("x")
        return int(r), int(a)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RxA, got {text!r}") from None


def _run(args):
    out = args.out
    if out is None:
        out = f"runs/{args.config.rsplit('/', 1)[-1].split('.')[0]}"
    report, code = run_scenario(args.config, out, args.seed, args.K_grid)
    sys.stdout.write(report.summary_table())
    print(f"artifacts in {out}")
    return code


def _list(args):
    for name in list_scenarios():
        print(name)
    return 0


def _validate(args):
    found = validate(args.config)
    for line in found:
        print(line)
    if not found:
        print("ok")
    return 1 if found else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="qcharmlab",
                                     description="Certify bi-Lipschitz bounds for harmonic maps of the disk.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a scenario config (path or bundled name)")
    p.add_argument("config")
    p.add_argument("--out", help="artifact directory (default runs/<name>)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--K-grid", type=_grid, metavar="RxA",
                   help="radial x angular resolution for the dilatation grid, e.g. 64x1024")
    p.set_defaults(func=_run)
    p = sub.add_parser("list", help="list bundled scenarios")
    p.set_defaults(func=_list)
    p = sub.add_parser("validate", help="check a config against the schema")
    p.add_argument("config")
    p.set_defaults(func=_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
