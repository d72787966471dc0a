"""Command-line driver wiring the analysis pipeline end to end.

Subcommands follow the process order: ``check`` (parse, assemble,
validate), ``gen ucas`` and ``gen scenarios`` (mechanical generation),
``classify`` (relevance partition), ``trace`` (traceability), ``stats``,
and ``export``.  Diagnostics go to stderr (``--machine`` switches them to
JSON lines); payload output goes to stdout.  Exit codes: 0 ok, 1 the
model has error diagnostics, 2 usage error.  Output is plain text and
byte-stable across runs; no styling, no network access.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import IO

from stpatrace.assemble import assemble_model, orphan_warnings
from stpatrace.canonical import factor_line, scenario_line, uca_line
from stpatrace.classify import classify_relevance, filter_sotif
from stpatrace.diagnostics import Diagnostic, emit_diagnostics, has_errors
from stpatrace.dsl import parse
from stpatrace.export import EXPORT_FORMATS, export
from stpatrace.generate import enumerate_uca_candidates, expand_loss_scenarios
from stpatrace.model import AnalysisModel, EntityId, EntityKind, ScenarioRelevance, ordered
from stpatrace.taxonomy import taxonomy_from_model
from stpatrace.trace import render_tree, stats, trace_from_loss, trace_from_trigger

_FORMAT_TOKENS = {
    "json": "json",
    "csv": "csv_matrix",
    "dot": "dot",
    "markdown": "markdown",
}


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="stpatrace",
        description="STPA-based identification and traceability of SOTIF triggering conditions",
    )
    parser.add_argument(
        "--machine",
        action="store_true",
        help="emit diagnostics as JSON lines instead of human-readable text",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="parse, assemble, and validate model files")
    check.add_argument("files", nargs="+")

    gen = commands.add_parser("gen", help="mechanical generation steps")
    gen_commands = gen.add_subparsers(dest="gen_command", required=True)
    gen_ucas = gen_commands.add_parser("ucas", help="enumerate UCA candidates")
    gen_ucas.add_argument("files", nargs="+")
    gen_ucas.add_argument(
        "--write",
        action="store_true",
        help="append newly generated declarations to the (single) input file",
    )
    gen_scenarios = gen_commands.add_parser("scenarios", help="expand loss scenario skeletons")
    gen_scenarios.add_argument("files", nargs="+")
    gen_scenarios.add_argument("--write", action="store_true")
    gen_scenarios.add_argument(
        "--merge-controller-flaws",
        action="store_true",
        help="treat control algorithm flaws and process model flaws as one factor",
    )

    classify = commands.add_parser("classify", help="summarize the SOTIF relevance partition")
    classify.add_argument("files", nargs="+")

    trace = commands.add_parser("trace", help="print the traceability tree for an id")
    trace.add_argument("files", nargs="+")
    trace.add_argument("--from", dest="from_id", required=True, metavar="ID")

    stats_cmd = commands.add_parser("stats", help="print model statistics")
    stats_cmd.add_argument("files", nargs="+")

    export_cmd = commands.add_parser("export", help="serialize the model")
    export_cmd.add_argument("files", nargs="+")
    export_cmd.add_argument(
        "--format", required=True, choices=sorted(_FORMAT_TOKENS)
    )
    export_cmd.add_argument("--out", metavar="PATH")
    return parser


def run_cli(
    argv: list[str],
    stdout: IO[str] | None = None,
    stderr: IO[str] | None = None,
) -> int:
    """Run one CLI invocation; returns the exit code."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        return _dispatch(args, out, err)
    except _UsageError as exc:
        err.write(f"error: {exc}\n")
        return 2


def _dispatch(args: argparse.Namespace, out: IO[str], err: IO[str]) -> int:
    style = "machine" if args.machine else "human"

    if args.command == "gen" and args.write and len(args.files) != 1:
        raise _UsageError("--write requires exactly one input file")

    sources = _read_files(args.files)
    diagnostics: list[Diagnostic] = []
    declarations = []
    for path, text in sources:
        decls, diags = parse(text, file=path)
        declarations.extend(decls)
        diagnostics.extend(diags)
    model, assembly_diags = assemble_model(declarations)
    diagnostics.extend(assembly_diags)

    if args.command == "check":
        diagnostics.extend(orphan_warnings(model))
        err.write(emit_diagnostics(diagnostics, style))
        return 1 if has_errors(diagnostics) else 0

    err.write(emit_diagnostics(diagnostics, style))
    if has_errors(diagnostics):
        return 1

    if args.command == "gen":
        return _run_gen(args, model, out, err, style)
    if args.command == "classify":
        return _run_classify(model, out)
    if args.command == "trace":
        return _run_trace(args, model, out)
    if args.command == "stats":
        return _run_stats(model, out)
    if args.command == "export":
        return _run_export(args, model, out)
    raise AssertionError(f"unhandled command {args.command!r}")


def _read_files(paths: list[str]) -> list[tuple[str, str]]:
    sources = []
    for path in paths:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise _UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
        sources.append((path, text))
    return sources


def _write_back(path: str, lines: list[str]) -> None:
    if not lines:
        return
    target = Path(path)
    text = target.read_text(encoding="utf-8")
    if text and not text.endswith("\n"):
        text += "\n"
    text += "".join(line + "\n" for line in lines)
    target.write_text(text, encoding="utf-8")


def _run_gen(
    args: argparse.Namespace,
    model: AnalysisModel,
    out: IO[str],
    err: IO[str],
    style: str,
) -> int:
    if args.gen_command == "ucas":
        candidates = enumerate_uca_candidates(model)
        lines = [uca_line(uca) for uca in candidates]
        if args.write:
            new = [uca_line(u) for u in candidates if u.id.text not in model.ucas]
            _write_back(args.files[0], new)
            return 0
        for line in lines:
            out.write(line + "\n")
        return 0

    taxonomy = taxonomy_from_model(model, args.merge_controller_flaws)
    scenarios, diags = expand_loss_scenarios(model, taxonomy)
    err.write(emit_diagnostics(diags, style))
    if args.write:
        new_factors = [
            factor_line(f) for f in taxonomy.factors if f.id.text not in model.factors
        ]
        new_scenarios = [
            scenario_line(s) for s in scenarios if s.id.text not in model.scenarios
        ]
        _write_back(args.files[0], new_factors + new_scenarios)
        return 0
    for scenario in scenarios:
        out.write(scenario_line(scenario) + "\n")
    return 0


def _run_classify(model: AnalysisModel, out: IO[str]) -> int:
    taxonomy = taxonomy_from_model(model)
    counts = {relevance.value: 0 for relevance in ScenarioRelevance}
    for scenario in ordered(model.scenarios):
        counts[classify_relevance(scenario, taxonomy).value] += 1
    retained, excluded = filter_sotif(model, taxonomy)
    for relevance in ScenarioRelevance:
        out.write(f"{relevance.value}: {counts[relevance.value]}\n")
    out.write(f"retained: {len(retained)}\n")
    out.write(f"excluded: {len(excluded)}\n")
    return 0


def _run_trace(args: argparse.Namespace, model: AnalysisModel, out: IO[str]) -> int:
    try:
        kind = EntityId.parse(args.from_id).kind
    except ValueError:
        raise _UsageError(f"malformed id {args.from_id!r}")
    if kind is EntityKind.LOSS:
        if args.from_id not in model.losses:
            raise _UsageError(f"unknown id {args.from_id!r}")
        tree = trace_from_loss(model, args.from_id)
    elif kind is EntityKind.TRIGGER:
        if args.from_id not in model.triggers:
            raise _UsageError(f"unknown id {args.from_id!r}")
        tree = trace_from_trigger(model, args.from_id)
    else:
        raise _UsageError("trace --from expects a loss (L-k) or trigger (TC-k) id")
    out.write(render_tree(model, tree))
    return 0


def _run_stats(model: AnalysisModel, out: IO[str]) -> int:
    report = stats(model)
    for kind in EntityKind:
        plural = {
            "loss": "losses",
            "insufficiency": "insufficiencies",
        }.get(kind.value, kind.value + "s")
        out.write(f"{plural}: {report.entity_counts[kind.value]}\n")
    out.write(f"ucas_identified: {report.ucas_identified}\n")
    out.write(f"ucas_sotif_scope: {report.ucas_sotif_scope}\n")
    out.write(f"sotif_retained: {report.sotif_retained}\n")
    out.write(f"sotif_excluded: {report.sotif_excluded}\n")
    out.write(f"trigger_links: {report.trigger_link_count}\n")
    out.write(f"max_scenarios_per_trigger: {report.max_scenarios_per_trigger}\n")
    out.write(f"max_triggers_per_scenario: {report.max_triggers_per_scenario}\n")
    out.write(f"max_chain_insufficiencies: {report.max_chain_insufficiencies}\n")
    return 0


def _run_export(args: argparse.Namespace, model: AnalysisModel, out: IO[str]) -> int:
    payload = export(model, _FORMAT_TOKENS[args.format])
    if args.out:
        Path(args.out).write_bytes(payload)
        return 0
    out.write(payload.decode("utf-8"))
    return 0


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
