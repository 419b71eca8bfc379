"""Command-line interface.

Subcommands: ``transform`` (full pipeline), ``check`` (diagnostics
only), ``solve`` (brute-force solutions), ``bench`` (synthesized
instance families). Exit codes: 0 success, 1 model rejected (problems
on stderr), 2 transformation/backend failure, 64 bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys

from .passes import PassError
from .pipeline import (PipelineConfig, ModelError, UsageError, bench,
                       check_paths, run, solve_paths, write_report)

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_PASS = 2
EXIT_USAGE = 64


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit 64
        raise UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="cpforge",
                             description="constraint-model transpiler")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("transform", help="run a transformation chain")
    tr.add_argument("--from", dest="source", default="scomma")
    tr.add_argument("--model", help="model file (.scm)")
    tr.add_argument("--data", help="data file (.scd)")
    tr.add_argument("--to", dest="target", default=None,
                    choices=["eclipse", "pivot"])
    tr.add_argument("--chain", default=None,
                    help="comma-separated pass list")
    tr.add_argument("--out", help="output file")
    tr.add_argument("--report", help="CSV timing report")
    tr.add_argument("--config", help="JSON config file (keys: source, "
                                     "data, target, chain, out, report)")

    ck = sub.add_parser("check", help="parse, inject and check a model")
    ck.add_argument("model")
    ck.add_argument("data", nargs="?")

    sol = sub.add_parser("solve", help="enumerate all solutions")
    sol.add_argument("model")
    sol.add_argument("data", nargs="?")
    sol.add_argument("--cap", type=int, default=None,
                     help="candidate-assignment cap")

    be = sub.add_parser("bench", help="run a synthesized instance family")
    be.add_argument("--family", required=True,
                    choices=["nqueens", "golfers"])
    be.add_argument("--sizes", required=True,
                    help="comma-separated instance sizes")
    be.add_argument("--chain", default="")
    be.add_argument("--target", default="eclipse",
                    choices=["eclipse", "pivot"])
    be.add_argument("--report", help="CSV report path")
    be.add_argument("--workdir", help="directory for generated files")
    return parser


def _transform_config(args) -> PipelineConfig:
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
    chain = args.chain if args.chain is not None else values.get("chain", [])
    if isinstance(chain, str):
        chain = chain.split(",")
    model = args.model or values.get("source")
    if not model:
        raise UsageError("transform needs --model (or 'source' in --config)")
    return PipelineConfig(
        model=model,
        data=args.data or values.get("data"),
        source=args.source,
        target=args.target or values.get("target", "eclipse"),
        chain=[t for t in chain if t],
        out=args.out or values.get("out"),
        report=args.report or values.get("report"),
    )


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "transform":
            config = _transform_config(args)
            report = run(config)
            for problem in report.problems:
                print(problem.line(), file=sys.stderr)
            if config.out:
                print(f"wrote {config.out} ({report.output_lines} lines, "
                      f"total {report.total:.3f}s)")
            else:
                print(f"transformed ({report.output_lines} lines, "
                      f"total {report.total:.3f}s)")
            return EXIT_OK
        if args.command == "check":
            problems, code = check_paths(args.model, args.data)
            for problem in problems:
                print(problem.line(),
                      file=sys.stderr if code else sys.stdout)
            return code
        if args.command == "solve":
            for line in solve_paths(args.model, args.data, args.cap):
                print(line)
            return EXIT_OK
        if args.command == "bench":
            sizes = [int(s) for s in args.sizes.split(",") if s]
            chain = [t for t in args.chain.split(",") if t]
            rows = bench(args.family, sizes, chain or None,
                         target=args.target, workdir=args.workdir)
            if rows:
                header = rows[0].header()
                print("\t".join(header))
                for row in rows:
                    print("\t".join(row.row()))
            if args.report:
                write_report(rows, args.report)
            return EXIT_OK
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        for problem in exc.problems:
            print(problem.line(), file=sys.stderr)
        return EXIT_MODEL
    except PassError as exc:
        print(f"transformation error: {exc}", file=sys.stderr)
        return EXIT_PASS
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
