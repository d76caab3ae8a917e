"""``branchlab`` command line.

Exit codes: 0 success, 1 parse/resolve/usage error, 2 runtime error.
Reports go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .dsl import ScenarioError, parse, round_trip
from .errors import BranchLabError
from .graph import to_dot, to_edge_list
from .runner import GRADE_SCHEMA, VERIFY_SCHEMA, execute, grade_report, run_report, verify_report
from .tolerances import DEFAULT_TOL, Tolerances

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

CONFIG_NAME = ".branchlab.toml"
_TOL_KEYS = ("eps_norm", "eps_zero", "eps_grade", "algebra_cap")

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- output formats ----------------------------------------------------------------


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def flatten(obj: Any, prefix: str = "") -> list[tuple[str, str]]:
    """Tab-delimited rows ``path<TAB>json-scalar``; lossless, see :func:`unflatten`."""
    rows: list[tuple[str, str]] = []
    if isinstance(obj, dict) and obj:
        for k, v in obj.items():
            rows.extend(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, list) and obj:
        for i, v in enumerate(obj):
            rows.extend(flatten(v, f"{prefix}[{i}]"))
    else:
        rows.append((prefix, json.dumps(obj, ensure_ascii=False, allow_nan=False)))
    return rows


def dumps_table(obj: Any) -> str:
    return "".join(f"{path}\t{value}\n" for path, value in [("path", "value"), *flatten(obj)])


def unflatten(text: str) -> Any:
    """Inverse of :func:`dumps_table`."""
    import re

    root: dict = {}
    lines = text.splitlines()[1:]
    token_re = re.compile(r"\[(\d+)\]|\.?([^.\[]+)")
    for line in lines:
        path, _, raw = line.partition("\t")
        value = json.loads(raw)
        keys: list = [int(i) if i else k for i, k in token_re.findall(path)]
        node: Any = root
        for key, nxt in zip(keys, keys[1:]):
            empty = [] if isinstance(nxt, int) else {}
            if isinstance(key, int):
                while len(node) <= key:
                    node.append(None)
                if node[key] is None:
                    node[key] = empty
                node = node[key]
            else:
                node = node.setdefault(key, empty)
        last = keys[-1]
        if isinstance(last, int):
            while len(node) <= last:
                node.append(None)
        node[last] = value
    return root


def _emit(obj: Any, fmt: str) -> None:
    sys.stdout.write(dumps_table(obj) if fmt == "table" else dumps_json(obj))


# -- config --------------------------------------------------------------------------


def load_tolerances(args: argparse.Namespace) -> Tolerances:
    values: dict[str, Any] = {}
    path = Path(args.config) if args.config else Path(CONFIG_NAME)
    if args.config or path.is_file():
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        data = data.get("tolerances", data)
        unknown = set(data) - set(_TOL_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys in {path}: {', '.join(sorted(unknown))}")
        values.update(data)
    for key in _TOL_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    try:
        return Tolerances(**{**DEFAULT_TOL.__dict__, **values})
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    scenario = parse(text)
    for w in scenario.warnings:
        print(f"{path}: warning: {w}", file=sys.stderr)
    return scenario


# -- subcommands ------------------------------------------------------------------------


def cmd_run(args) -> int:
    scenario = _load(args.path)
    tol = load_tolerances(args)
    report, ex = run_report(scenario, Path(args.path).stem, tol, args.seed_override)
    if args.export_graph:
        out = Path(args.export_graph)
        text = to_dot(ex.graph) if out.suffix == ".dot" else dumps_json(to_edge_list(ex.graph))
        out.write_text(text, encoding="utf-8", newline="\n")
    _emit(report, args.format)
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = _load(args.path)
    tol = load_tolerances(args)
    try:
        scenario.state(args.state)
    except KeyError:
        raise UsageError(f"unknown state {args.state!r}") from None
    _emit({"schema": VERIFY_SCHEMA, **verify_report(scenario, args.state, tol)}, args.format)
    return EXIT_OK


def cmd_grade(args) -> int:
    scenario = _load(args.path)
    tol = load_tolerances(args)
    try:
        scenario.step(args.measurement)
    except KeyError:
        raise UsageError(f"unknown measurement {args.measurement!r}") from None
    ex = execute(scenario, tol, args.seed_override, until=args.measurement)
    _emit({"schema": GRADE_SCHEMA, **grade_report(ex, args.measurement)}, args.format)
    return EXIT_OK


def cmd_graph(args) -> int:
    scenario = _load(args.path)
    tol = load_tolerances(args)
    ex = execute(scenario, tol, args.seed_override)
    text = to_dot(ex.graph) if args.graph_format == "dot" else dumps_json(to_edge_list(ex.graph))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_fmt(args) -> int:
    scenario = _load(args.path)
    sys.stdout.write(round_trip(scenario))
    return EXIT_OK


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="branchlab", description="Measurement-collapse branching and modal checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"tolerance config (default: ./{CONFIG_NAME} if present)")
    common.add_argument("--eps-norm", dest="eps_norm", type=float)
    common.add_argument("--eps-zero", dest="eps_zero", type=float)
    common.add_argument("--eps-grade", dest="eps_grade", type=float)
    common.add_argument("--algebra-cap", dest="algebra_cap", type=int)

    fmt = _ArgumentParser(add_help=False)
    group = fmt.add_mutually_exclusive_group()
    group.add_argument("--json", dest="format", action="store_const", const="json")
    group.add_argument("--table", dest="format", action="store_const", const="table")
    fmt.set_defaults(format="json")

    seeded = _ArgumentParser(add_help=False)
    seeded.add_argument("--seed-override", type=_seed, metavar="N", help="use seed N for every seeded step")

    p = sub.add_parser("run", parents=[common, fmt, seeded], help="execute a scenario")
    p.add_argument("path")
    p.add_argument("--export-graph", metavar="PATH", help="write the branch graph (.dot for DOT, else JSON)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", parents=[common, fmt], help="algebra report for one state")
    p.add_argument("path")
    p.add_argument("state")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("grade", parents=[common, fmt, seeded], help="grade ordering after one measurement")
    p.add_argument("path")
    p.add_argument("measurement")
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("graph", parents=[common, seeded], help="export the branch graph")
    p.add_argument("path")
    p.add_argument("--format", dest="graph_format", choices=("json", "dot"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("fmt", help="print the canonical form of a scenario")
    p.add_argument("path")
    p.set_defaults(func=cmd_fmt)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, UsageError) as exc:
        where = f"{args.path}:" if hasattr(args, "path") else ""
        print(f"{where}{exc}", file=sys.stderr)
        return EXIT_INPUT
    except BranchLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
