"""Command-line interface: plan, baseline, report, verify, gen."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compat import load_usage_model
from .errors import DocumentFormatError, InputFileError, LagliftError
from .graph import (
    graph_metrics,
    load_manifest,
    parse_dep_tree,
    resolve_graph,
    restore_edges,
)
from .harness import EcosystemParams, oracle_verify_plan, write_fixture_bundle
from .planner import (
    baseline_direct_latest,
    plan_from_payload,
    plan_to_json,
    plan_to_text,
    plan_upgrades,
)
from .registry import load_registry


class _CliUsageError(Exception):
    """Bad command line; message already includes usage text."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliUsageError(f"{message}\n{self.format_usage()}")


def _add_io_arguments(parser: argparse.ArgumentParser, usage_required: bool) -> None:
    parser.add_argument("--registry", metavar="PATH", required=True)
    parser.add_argument("--manifest", metavar="PATH")
    parser.add_argument("--tree", metavar="PATH")
    parser.add_argument("--usage", metavar="PATH", required=usage_required)
    parser.add_argument("--output", metavar="PATH")
    parser.add_argument("--format", choices=("json", "text"), default="json")


def _build_parser() -> _Parser:
    parser = _Parser(prog="laglift", description="Technical-lag mitigation planner")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    plan = sub.add_parser("plan", help="run the filtered upgrade loop")
    _add_io_arguments(plan, usage_required=True)

    baseline = sub.add_parser("baseline", help="upgrade direct dependencies to latest")
    _add_io_arguments(baseline, usage_required=False)

    report = sub.add_parser("report", help="print graph lag metrics")
    _add_io_arguments(report, usage_required=False)

    verify = sub.add_parser("verify", help="replay a saved plan with the oracle")
    verify.add_argument("plan", metavar="PLAN_PATH")
    _add_io_arguments(verify, usage_required=True)

    gen = sub.add_parser("gen", help="write a synthetic fixture bundle")
    gen.add_argument("--seed", type=int, default=0, metavar="N")
    gen.add_argument("--packages", type=int, default=6, metavar="N")
    gen.add_argument("--max-versions", type=int, default=4, metavar="N")
    gen.add_argument("--breaking-prob", type=float, default=0.2, metavar="FLOAT")
    gen.add_argument("--usage-density", type=float, default=0.5, metavar="FLOAT")
    gen.add_argument("--output", metavar="PATH", required=True)
    return parser


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFileError(f"cannot read {what} {path}: {exc}") from exc


def _load_inputs(args):
    if bool(args.manifest) == bool(args.tree):
        raise _CliUsageError("exactly one of --manifest or --tree is required")
    reg = load_registry(args.registry)
    if args.manifest:
        graph = resolve_graph(load_manifest(args.manifest), reg)
    else:
        graph = restore_edges(parse_dep_tree(_read_text(args.tree, "tree file")), reg)
    return reg, graph


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dispatch(args) -> int:
    if args.command == "gen":
        try:
            params = EcosystemParams(
                seed=args.seed,
                package_count=args.packages,
                max_versions=args.max_versions,
                breaking_probability=args.breaking_prob,
                usage_density=args.usage_density,
            )
        except ValueError as exc:
            raise _CliUsageError(str(exc)) from exc
        write_fixture_bundle(params, args.output)
        return 0

    reg, graph = _load_inputs(args)

    if args.command == "report":
        metrics = graph_metrics(graph, reg)
        if args.format == "json":
            text = json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n"
        else:
            text = (
                f"nodes: {metrics.node_count}\n"
                f"version lag: {metrics.total_version_lag}\n"
                f"time lag days: {metrics.total_time_lag_days}\n"
            )
        _emit(text, args.output)
        return 0

    if args.command == "baseline":
        plan = baseline_direct_latest(graph, reg)
        _emit(plan_to_json(plan) if args.format == "json" else plan_to_text(plan), args.output)
        return 0

    usage = load_usage_model(args.usage)

    if args.command == "plan":
        plan = plan_upgrades(graph, reg, usage)
        _emit(plan_to_json(plan) if args.format == "json" else plan_to_text(plan), args.output)
        return 0

    if args.command == "verify":
        plan_text = _read_text(args.plan, "plan file")
        try:
            payload = json.loads(plan_text)
        except json.JSONDecodeError as exc:
            raise DocumentFormatError(f"plan file {args.plan} is not valid JSON: {exc}") from exc
        plan = plan_from_payload(payload)
        verdict = oracle_verify_plan(plan, graph, reg, usage)
        if not verdict.passed:
            for divergence in verdict.divergences:
                print(f"divergence: {divergence}", file=sys.stderr)
            return 1
        if args.format == "json":
            text = json.dumps({"divergences": [], "passed": True}, indent=2, sort_keys=True) + "\n"
        else:
            text = "verdict: pass\n"
        _emit(text, args.output)
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


def run(argv: list[str]) -> int:
    """Execute the CLI; returns the process exit code."""
    try:
        args = _build_parser().parse_args(argv)
        return _dispatch(args)
    except _CliUsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (LagliftError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - invariant violations exit 2
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
