"""Model exporters: lossless JSON, trigger/scenario CSV matrix, DOT, markdown.

JSON is the interchange format: ``import_json(export(model, "json"))``
reconstructs a structurally identical model, and a second export is
byte-identical.  The CSV matrix has one row per triggering condition and
one column per retained scenario; a cell lists the insufficiency ids of
the links between the two.  DOT renders the control structure with
control actions solid, feedback dashed, and other links dotted.
"""

from __future__ import annotations

import io
import json

from stpatrace.assemble import assemble_model
from stpatrace.canonical import quote
from stpatrace.classify import classify_relevance, filter_sotif
from stpatrace.diagnostics import Diagnostic
from stpatrace.dsl import parse
from stpatrace.model import (
    AnalysisModel,
    ComponentKind,
    EntityId,
    FeedbackKind,
    InvalidModelError,
    ScenarioRelevance,
    ordered,
    ordered_ids,
    ordered_links,
)
from stpatrace.taxonomy import taxonomy_from_model
from stpatrace.trace import stats

EXPORT_FORMATS = ("json", "csv_matrix", "dot", "markdown")


def export(model: AnalysisModel, format: str) -> bytes:
    """Serialize the model; raises on unsupported format tokens."""
    if format == "json":
        return _export_json(model)
    if format == "csv_matrix":
        return _export_csv_matrix(model)
    if format == "dot":
        return _export_dot(model)
    if format == "markdown":
        return _export_markdown(model)
    raise ValueError(
        f"unsupported export format {format!r}, expected one of: "
        + ", ".join(EXPORT_FORMATS)
    )


# ---------------------------------------------------------------------------
# JSON


def _export_json(model: AnalysisModel) -> bytes:
    if not model.valid:
        raise InvalidModelError("model has error diagnostics; refusing to export")
    payload = {
        "losses": [
            {"id": e.id.text, "description": e.description}
            for e in ordered(model.losses)
        ],
        "hazards": [
            {
                "id": e.id.text,
                "description": e.description,
                "losses": ordered_ids(e.losses),
            }
            for e in ordered(model.hazards)
        ],
        "behaviors": [
            {
                "id": e.id.text,
                "description": e.description,
                "hazards": ordered_ids(e.hazards),
            }
            for e in ordered(model.behaviors)
        ],
        "components": [
            {"id": e.id.text, "name": e.name, "kind": e.kind.value}
            for e in ordered(model.components)
        ],
        "actions": [
            {
                "id": e.id.text,
                "name": e.name,
                "source": e.source,
                "target": e.target,
                "behaviors": ordered_ids(e.behaviors) if e.behaviors is not None else None,
            }
            for e in ordered(model.actions)
        ],
        "feedbacks": [
            {
                "id": e.id.text,
                "name": e.name,
                "source": e.source,
                "target": e.target,
                "kind": e.kind.value,
            }
            for e in ordered(model.feedbacks)
        ],
        "factors": [
            {
                "id": e.id.text,
                "label": e.label,
                "category": e.category.value,
                "locus_kinds": sorted(
                    (k.value for k in e.locus_kinds),
                    key=lambda v: list(ComponentKind).index(ComponentKind(v)),
                ),
                "default_relevance": e.default_relevance.value,
            }
            for e in ordered(model.factors)
        ],
        "contexts": [
            {
                "id": e.id.text,
                "description": e.description,
                "applicable_behaviors": ordered_ids(e.applicable_behaviors),
            }
            for e in ordered(model.contexts)
        ],
        "ucas": [
            {
                "id": e.id.text,
                "action": e.action,
                "guide_word": e.guide_word.value,
                "behavior": e.behavior,
                "narrative": e.narrative,
                "status": e.status.value,
                "exclusion_reason": e.exclusion_reason,
            }
            for e in ordered(model.ucas)
        ],
        "scenarios": [
            {
                "id": e.id.text,
                "uca": e.uca,
                "factor": e.factor,
                "locus": e.locus,
                "context": e.context,
                "narrative": e.narrative,
                "relevance": e.relevance.value,
            }
            for e in ordered(model.scenarios)
        ],
        "triggers": [
            {"id": e.id.text, "description": e.description}
            for e in ordered(model.triggers)
        ],
        "insufficiencies": [
            {"id": e.id.text, "description": e.description, "locus": e.locus}
            for e in ordered(model.insufficiencies)
        ],
        "trigger_links": [
            {
                "trigger": link.trigger,
                "scenario": link.scenario,
                "insufficiency": link.insufficiency,
            }
            for link in ordered_links(model.links)
        ],
    }
    text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True)
    return (text + "\n").encode("utf-8")


def import_json(data: bytes) -> tuple[AnalysisModel, list[Diagnostic]]:
    """Rebuild a model from a JSON export.

    The JSON content is rendered back to canonical DSL declarations and
    assembled, so all integrity checking applies.
    """
    payload = json.loads(data.decode("utf-8"))
    lines: list[str] = []
    for record in payload.get("losses", []):
        lines.append(f"loss {record['id']} {quote(record['description'])}")
    for record in payload.get("hazards", []):
        line = f"hazard {record['id']} {quote(record['description'])}"
        if record.get("losses"):
            line += " losses=[" + ", ".join(record["losses"]) + "]"
        lines.append(line)
    for record in payload.get("behaviors", []):
        line = f"behavior {record['id']} {quote(record['description'])}"
        if record.get("hazards"):
            line += " hazards=[" + ", ".join(record["hazards"]) + "]"
        lines.append(line)
    keyword_by_kind = {
        "controller": "controller",
        "human_controller": "human",
        "sensor": "sensor",
        "actuator": "actuator",
        "process": "process",
    }
    for record in payload.get("components", []):
        keyword = keyword_by_kind[record["kind"]]
        lines.append(f"{keyword} {record['id']} {quote(record['name'])}")
    for record in payload.get("actions", []):
        line = (
            f"action {record['id']} {quote(record['name'])} "
            f"source={record['source']} target={record['target']}"
        )
        if record.get("behaviors") is not None:
            line += " behaviors=[" + ", ".join(record["behaviors"]) + "]"
        lines.append(line)
    for record in payload.get("feedbacks", []):
        lines.append(
            f"feedback {record['id']} {quote(record['name'])} "
            f"source={record['source']} target={record['target']} kind={record['kind']}"
        )
    for record in payload.get("factors", []):
        lines.append(
            f"factor {record['id']} {quote(record['label'])} "
            f"category={record['category']} "
            "locus=[" + ", ".join(record["locus_kinds"]) + "] "
            f"relevance={record['default_relevance']}"
        )
    for record in payload.get("contexts", []):
        lines.append(
            f"context {record['id']} {quote(record['description'])} "
            "behaviors=[" + ", ".join(record["applicable_behaviors"]) + "]"
        )
    for record in payload.get("ucas", []):
        line = (
            f"uca {record['id']} action={record['action']} "
            f"guide={record['guide_word']} behavior={record['behavior']} "
            f"status={record['status']}"
        )
        if record.get("exclusion_reason") is not None:
            line += f" reason={quote(record['exclusion_reason'])}"
        if record.get("narrative"):
            line += f" text {quote(record['narrative'])}"
        lines.append(line)
    for record in payload.get("scenarios", []):
        line = (
            f"scenario {record['id']} uca={record['uca']} "
            f"factor={record['factor']} locus={record['locus']}"
        )
        if record.get("context") is not None:
            line += f" context={record['context']}"
        if record.get("relevance", "needs_review") != "needs_review":
            line += f" relevance={record['relevance']}"
        if record.get("narrative"):
            line += f" text {quote(record['narrative'])}"
        lines.append(line)
    for record in payload.get("triggers", []):
        lines.append(f"trigger {record['id']} {quote(record['description'])}")
    for record in payload.get("insufficiencies", []):
        lines.append(
            f"insufficiency {record['id']} {quote(record['description'])} "
            f"locus={record['locus']}"
        )
    for record in payload.get("trigger_links", []):
        lines.append(
            f"link {record['trigger']} -> {record['scenario']} "
            f"via {record['insufficiency']}"
        )
    declarations, diagnostics = parse("\n".join(lines), file="<json>")
    model, assembly_diags = assemble_model(declarations)
    return model, diagnostics + assembly_diags


# ---------------------------------------------------------------------------
# CSV matrix


def _csv_field(value: str) -> str:
    return '"' + value.replace('"', '""') + '"'


def _export_csv_matrix(model: AnalysisModel) -> bytes:
    """Trigger x retained-scenario incidence matrix, all fields quoted."""
    if not model.valid:
        raise InvalidModelError("model has error diagnostics; refusing to export")
    taxonomy = taxonomy_from_model(model)
    retained, _ = filter_sotif(model, taxonomy)
    columns = [s.id.text for s in retained]
    cells: dict[tuple[str, str], list[str]] = {}
    for link in ordered_links(model.links):
        cells.setdefault((link.trigger, link.scenario), []).append(link.insufficiency)

    buffer = io.StringIO()
    header = ["trigger"] + columns
    buffer.write(",".join(_csv_field(field) for field in header) + "\n")
    for trigger in ordered(model.triggers):
        row = [trigger.id.text]
        for column in columns:
            row.append(";".join(cells.get((trigger.id.text, column), [])))
        buffer.write(",".join(_csv_field(field) for field in row) + "\n")
    return buffer.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# DOT


_DOT_SHAPES = {
    ComponentKind.CONTROLLER: "box",
    ComponentKind.HUMAN_CONTROLLER: "box",
    ComponentKind.SENSOR: "ellipse",
    ComponentKind.ACTUATOR: "trapezium",
    ComponentKind.PROCESS: "doubleoctagon",
}

_DOT_STYLES = {FeedbackKind.FEEDBACK: "dashed", FeedbackKind.OTHER: "dotted"}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _export_dot(model: AnalysisModel) -> bytes:
    """Control structure digraph; node keys are component names, with the
    id appended when names collide."""
    if not model.valid:
        raise InvalidModelError("model has error diagnostics; refusing to export")
    components = ordered(model.components)
    name_counts: dict[str, int] = {}
    for component in components:
        name_counts[component.name] = name_counts.get(component.name, 0) + 1
    node_key = {
        c.id.text: (
            c.name if name_counts[c.name] == 1 else f"{c.name} ({c.id.text})"
        )
        for c in components
    }

    lines = ["digraph control_structure {", "  rankdir=LR;"]
    for component in components:
        shape = _DOT_SHAPES[component.kind]
        peripheries = ", peripheries=2" if component.kind is ComponentKind.HUMAN_CONTROLLER else ""
        lines.append(
            f'  "{_dot_escape(node_key[component.id.text])}" [shape={shape}{peripheries}];'
        )
    for action in ordered(model.actions):
        source = node_key.get(action.source, action.source)
        target = node_key.get(action.target, action.target)
        lines.append(
            f'  "{_dot_escape(source)}" -> "{_dot_escape(target)}" '
            f'[label="{_dot_escape(action.name)}", style=solid];'
        )
    for feedback in ordered(model.feedbacks):
        source = node_key.get(feedback.source, feedback.source)
        target = node_key.get(feedback.target, feedback.target)
        style = _DOT_STYLES[feedback.kind]
        lines.append(
            f'  "{_dot_escape(source)}" -> "{_dot_escape(target)}" '
            f'[label="{_dot_escape(feedback.name)}", style={style}];'
        )
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Markdown


def _md_cell(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def _export_markdown(model: AnalysisModel) -> bytes:
    """Human-readable report with UCA and scenario tables."""
    if not model.valid:
        raise InvalidModelError("model has error diagnostics; refusing to export")
    taxonomy = taxonomy_from_model(model)
    report = stats(model, taxonomy)

    out: list[str] = []
    out.append("# STPA/SOTIF analysis report")
    out.append("")
    out.append("## Summary")
    out.append("")
    out.append("| metric | value |")
    out.append("| --- | --- |")
    for key, value in (
        ("losses", report.entity_counts["loss"]),
        ("hazards", report.entity_counts["hazard"]),
        ("hazardous behaviors", report.entity_counts["behavior"]),
        ("components", report.entity_counts["component"]),
        ("control actions", report.entity_counts["action"]),
        ("UCAs", report.entity_counts["uca"]),
        ("UCAs identified", report.ucas_identified),
        ("UCAs in SOTIF scope", report.ucas_sotif_scope),
        ("loss scenarios", report.scenarios_total),
        ("scenarios retained (SOTIF)", report.sotif_retained),
        ("scenarios excluded (functional safety)", report.sotif_excluded),
        ("triggering conditions", report.entity_counts["trigger"]),
        ("functional insufficiencies", report.entity_counts["insufficiency"]),
        ("trigger links", report.trigger_link_count),
        ("max scenarios per trigger", report.max_scenarios_per_trigger),
        ("max triggers per scenario", report.max_triggers_per_scenario),
        ("max insufficiencies per chain", report.max_chain_insufficiencies),
    ):
        out.append(f"| {key} | {value} |")
    out.append("")

    out.append("## Losses, hazards, and hazardous behaviors")
    out.append("")
    out.append("| id | kind | description | mapped to |")
    out.append("| --- | --- | --- | --- |")
    for loss in ordered(model.losses):
        out.append(f"| {loss.id.text} | loss | {_md_cell(loss.description)} | |")
    for hazard in ordered(model.hazards):
        refs = ", ".join(ordered_ids(hazard.losses))
        out.append(
            f"| {hazard.id.text} | hazard | {_md_cell(hazard.description)} | {refs} |"
        )
    for behavior in ordered(model.behaviors):
        refs = ", ".join(ordered_ids(behavior.hazards))
        out.append(
            f"| {behavior.id.text} | behavior | {_md_cell(behavior.description)} | {refs} |"
        )
    out.append("")

    out.append("## Unsafe control actions")
    out.append("")
    out.append("| id | action | guide word | behavior | status | narrative |")
    out.append("| --- | --- | --- | --- | --- | --- |")
    for uca in ordered(model.ucas):
        out.append(
            f"| {uca.id.text} | {uca.action} | {_md_cell(uca.guide_word.german_label)} "
            f"| {uca.behavior} | {uca.status.value} | {_md_cell(uca.narrative)} |"
        )
    out.append("")

    out.append("## Loss scenarios")
    out.append("")
    out.append("| id | uca | factor | locus | context | relevance | narrative |")
    out.append("| --- | --- | --- | --- | --- | --- | --- |")
    for scenario in ordered(model.scenarios):
        relevance = classify_relevance(scenario, taxonomy).value
        out.append(
            f"| {scenario.id.text} | {scenario.uca} | {scenario.factor} "
            f"| {scenario.locus} | {scenario.context or ''} | {relevance} "
            f"| {_md_cell(scenario.narrative)} |"
        )
    out.append("")

    out.append("## Triggering conditions")
    out.append("")
    out.append("| id | description | linked scenarios |")
    out.append("| --- | --- | --- |")
    for trigger in ordered(model.triggers):
        count = report.scenarios_per_trigger.get(trigger.id.text, 0)
        out.append(
            f"| {trigger.id.text} | {_md_cell(trigger.description)} | {count} |"
        )
    out.append("")

    out.append("## Trigger links")
    out.append("")
    out.append("| trigger | scenario | insufficiency |")
    out.append("| --- | --- | --- |")
    for link in ordered_links(model.links):
        out.append(f"| {link.trigger} | {link.scenario} | {link.insufficiency} |")
    out.append("")
    return "\n".join(out).encode("utf-8")
