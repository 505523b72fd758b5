"""Command-line front end.

``mgtlab run CONFIG``     execute a config, print the check table, exit
                          nonzero when any check failed.
``mgtlab report PATH``    render report.txt + SVG figures from a manifest
                          (PATH may be the manifest or its directory).
``mgtlab roots ...``      one-off characteristic-root table.
``mgtlab exponents ...``  one-off interpolation-exponent feasibility.
``mgtlab schema``         the config-file schema.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import config as _config
from .params import Params


def _cmd_run(args) -> int:
    from . import experiments, reporting

    result = experiments.run(args.config, output_root=args.output_root)
    man = result.manifest
    for name, c in man.get("checks", {}).items():
        mark = "ok" if c.get("passed") else "XX"
        extra = ""
        if "value" in c and c["value"] is not None:
            extra = f"  value={c['value']:.6g}"
        if c.get("detail"):
            extra += f"  ({c['detail']})"
        print(f"[{mark}] {name}{extra}")
    print(f"{'PASS' if result.passed else 'FAIL'}  "
          f"manifest: {result.manifest_path}")
    if args.report:
        path = reporting.report(result.manifest_path)
        print(f"report:  {path}")
    return 0 if result.passed else 1


def _cmd_report(args) -> int:
    from . import reporting

    path = reporting.report(args.manifest)
    sys.stdout.write(path.read_text())
    return 0


def _cmd_roots(args) -> int:
    from .roots import solve_cubic

    params = Params(tau=args.tau, delta=args.delta)
    print(f"tau={params.tau:g} delta={params.delta:g}")
    print(f"{'|xi|':>12} {'pair':>44} {'real root':>22}")
    for xi in args.xi:
        mr = solve_cubic(params, xi)
        pair = mr.roots[0]
        real = mr.roots[2]
        print(f"{xi:>12.6g} {pair.real:>+21.12e}{pair.imag:>+21.12e}j "
              f"{real.real:>+22.12e}")
    return 0


def _cmd_exponents(args) -> int:
    from . import exponents

    s = Fraction(args.s)
    n = args.n
    b = exponents.boundary(n)
    print(f"n={n}  s={s}  boundary s=n/2-1 = {b}")
    for label, fn, kw in (("part1 (m=2)", exponents.part1_params,
                           {"m": 2}),
                          ("part2", exponents.part2_params, {})):
        sol = fn(n, s, **kw)
        if not sol.feasible:
            print(f"  {label}: infeasible ({sol.reason})")
            continue
        print(f"  {label}: feasible"
              + ("" if sol.strict else " (boundary case only)"))
        for k, v in sorted(sol.reciprocals.items()):
            print(f"      {k} = {v}")
        for k, beta in sorted(sol.betas.items()):
            print(f"      {k} = {beta.value} in [{beta.lower}, "
                  f"{beta.upper}]")
        for bad in sol.violations():
            print(f"      VIOLATION: {bad}")
    return 0


def _cmd_schema(_args) -> int:
    print(_config.describe_schema())
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mgtlab",
        description="spectral laboratory for third-order-in-time damped "
                    "acoustic waves")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment config")
    p.add_argument("config", help="path to a .cfg/.ini experiment file")
    p.add_argument("-o", "--output-root", default=None,
                   help="directory the run folder is created under "
                        "(default: MGTLAB_OUTPUT_ROOT or ./out)")
    p.add_argument("--report", action="store_true",
                   help="also render report.txt and figures")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("report", help="render report + figures")
    p.add_argument("manifest", help="manifest.json or its directory")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("roots", help="characteristic-root table")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--xi", type=float, nargs="+", required=True,
                   help="mode magnitudes")
    p.set_defaults(fn=_cmd_roots)

    p = sub.add_parser("exponents",
                       help="interpolation-exponent feasibility")
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--s", type=str, required=True,
                   help="regularity, e.g. 0.6 or 3/5")
    p.set_defaults(fn=_cmd_exponents)

    p = sub.add_parser("schema", help="print the config-file schema")
    p.set_defaults(fn=_cmd_schema)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
