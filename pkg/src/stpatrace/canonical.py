"""Canonical DSL emission: render a model (or single entities) back to text.

Canonical form is deterministic: entities grouped by kind in a fixed
section order, ordinals ascending, attributes in a fixed order, reference
lists sorted by ordinal, strings escaped, ``\\n`` line endings.
Parsing the canonical text re-assembles a structurally identical model.
"""

from __future__ import annotations

from stpatrace.model import (
    AnalysisModel,
    CausalFactor,
    Component,
    ComponentKind,
    ControlAction,
    FeedbackKind,
    FeedbackLink,
    Hazard,
    HazardousBehavior,
    Loss,
    LossScenario,
    ScenarioContext,
    ScenarioRelevance,
    TriggerLink,
    TriggeringCondition,
    FunctionalInsufficiency,
    UnsafeControlAction,
    ordered,
    ordered_ids,
    ordered_links,
)

_COMPONENT_KEYWORD = {
    ComponentKind.CONTROLLER: "controller",
    ComponentKind.HUMAN_CONTROLLER: "human",
    ComponentKind.SENSOR: "sensor",
    ComponentKind.ACTUATOR: "actuator",
    ComponentKind.PROCESS: "process",
}

_KIND_ORDER = list(ComponentKind)


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _ref_list(ids) -> str:
    return "[" + ", ".join(ordered_ids(ids)) + "]"


def loss_line(entity: Loss) -> str:
    return f"loss {entity.id.text} {quote(entity.description)}"


def hazard_line(entity: Hazard) -> str:
    line = f"hazard {entity.id.text} {quote(entity.description)}"
    if entity.losses:
        line += f" losses={_ref_list(entity.losses)}"
    return line


def behavior_line(entity: HazardousBehavior) -> str:
    line = f"behavior {entity.id.text} {quote(entity.description)}"
    if entity.hazards:
        line += f" hazards={_ref_list(entity.hazards)}"
    return line


def component_line(entity: Component) -> str:
    return f"{_COMPONENT_KEYWORD[entity.kind]} {entity.id.text} {quote(entity.name)}"


def action_line(entity: ControlAction) -> str:
    line = (
        f"action {entity.id.text} {quote(entity.name)} "
        f"source={entity.source} target={entity.target}"
    )
    if entity.behaviors is not None:
        line += f" behaviors={_ref_list(entity.behaviors)}"
    return line


def feedback_line(entity: FeedbackLink) -> str:
    return (
        f"feedback {entity.id.text} {quote(entity.name)} "
        f"source={entity.source} target={entity.target} kind={entity.kind.value}"
    )


def factor_line(entity: CausalFactor) -> str:
    kinds = ", ".join(k.value for k in _KIND_ORDER if k in entity.locus_kinds)
    return (
        f"factor {entity.id.text} {quote(entity.label)} "
        f"category={entity.category.value} locus=[{kinds}] "
        f"relevance={entity.default_relevance.value}"
    )


def context_line(entity: ScenarioContext) -> str:
    return (
        f"context {entity.id.text} {quote(entity.description)} "
        f"behaviors={_ref_list(entity.applicable_behaviors)}"
    )


def uca_line(entity: UnsafeControlAction) -> str:
    line = (
        f"uca {entity.id.text} action={entity.action} "
        f"guide={entity.guide_word.value} behavior={entity.behavior} "
        f"status={entity.status.value}"
    )
    if entity.exclusion_reason is not None:
        line += f" reason={quote(entity.exclusion_reason)}"
    if entity.narrative:
        line += f" text {quote(entity.narrative)}"
    return line


def scenario_line(entity: LossScenario) -> str:
    line = (
        f"scenario {entity.id.text} uca={entity.uca} "
        f"factor={entity.factor} locus={entity.locus}"
    )
    if entity.context is not None:
        line += f" context={entity.context}"
    if entity.relevance is not ScenarioRelevance.NEEDS_REVIEW:
        line += f" relevance={entity.relevance.value}"
    if entity.narrative:
        line += f" text {quote(entity.narrative)}"
    return line


def trigger_line(entity: TriggeringCondition) -> str:
    return f"trigger {entity.id.text} {quote(entity.description)}"


def insufficiency_line(entity: FunctionalInsufficiency) -> str:
    return (
        f"insufficiency {entity.id.text} {quote(entity.description)} "
        f"locus={entity.locus}"
    )


def link_line(link: TriggerLink) -> str:
    return f"link {link.trigger} -> {link.scenario} via {link.insufficiency}"


def to_canonical_dsl(model: AnalysisModel) -> str:
    """Render the whole model as canonical DSL text."""
    lines: list[str] = []
    lines.extend(loss_line(e) for e in ordered(model.losses))
    lines.extend(hazard_line(e) for e in ordered(model.hazards))
    lines.extend(behavior_line(e) for e in ordered(model.behaviors))
    lines.extend(component_line(e) for e in ordered(model.components))
    lines.extend(action_line(e) for e in ordered(model.actions))
    lines.extend(feedback_line(e) for e in ordered(model.feedbacks))
    lines.extend(factor_line(e) for e in ordered(model.factors))
    lines.extend(context_line(e) for e in ordered(model.contexts))
    lines.extend(uca_line(e) for e in ordered(model.ucas))
    lines.extend(scenario_line(e) for e in ordered(model.scenarios))
    lines.extend(trigger_line(e) for e in ordered(model.triggers))
    lines.extend(insufficiency_line(e) for e in ordered(model.insufficiencies))
    lines.extend(link_line(link) for link in ordered_links(model.links))
    return "".join(line + "\n" for line in lines)
