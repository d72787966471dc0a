"""Mechanical generation of UCA candidates and loss scenario skeletons.

Candidate enumeration walks the full grid control action x guide word x
hazardous behavior.  Scenario expansion walks, for every retained UCA,
the causal factors applicable to components of that UCA's control loop,
multiplied by the applicable case-distinction contexts.  Both are
deterministic and reconcile with authored entities instead of
overwriting them.
"""

from __future__ import annotations

from stpatrace.diagnostics import Diagnostic, warning
from stpatrace.model import (
    AnalysisModel,
    CausalFactor,
    Component,
    ControlAction,
    EntityId,
    EntityKind,
    FactorCategory,
    FeedbackKind,
    GuideWord,
    InvalidModelError,
    LossScenario,
    ScenarioContext,
    ScenarioRelevance,
    UcaStatus,
    UnsafeControlAction,
    next_ordinal,
    ordered,
)
from stpatrace.taxonomy import Taxonomy

UCA_TEMPLATES: dict[GuideWord, str] = {
    GuideWord.NOT_PROVIDED: "Der {controller} gibt keinen {action}. Mögliche Folge: {behavior}",
    GuideWord.PROVIDED_UNSAFE: "Der {controller} gibt einen falschen {action}. Mögliche Folge: {behavior}",
    GuideWord.WRONG_TIMING: "Der {controller} gibt den {action} zu früh oder zu spät. Mögliche Folge: {behavior}",
    GuideWord.WRONG_DURATION: "Der {controller} gibt den {action} zu lange oder zu kurz. Mögliche Folge: {behavior}",
}

SCENARIO_TEMPLATE = "{context}Kausalfaktor {factor} an Komponente {locus}. {uca}"


def _require_valid(model: AnalysisModel) -> None:
    if not model.valid:
        raise InvalidModelError("model has error diagnostics; refusing to generate")


def action_behaviors(model: AnalysisModel, action: ControlAction) -> list[str]:
    """Behavior ids an action pairs with: its narrowing, or all declared."""
    if action.behaviors is not None:
        return [b.id.text for b in ordered(model.behaviors) if b.id.text in action.behaviors]
    return [b.id.text for b in ordered(model.behaviors)]


def enumerate_uca_candidates(model: AnalysisModel) -> list[UnsafeControlAction]:
    """One UCA per (action, guide word, behavior) grid cell, in canonical order.

    Grid order is action-major, then guide word in catalog order, then
    behavior.  Authored UCAs are matched by their grid cell and returned
    as-is (keeping status and narrative); unmatched cells become fresh
    candidates with the next free ordinals.
    """
    _require_valid(model)
    authored: dict[tuple[str, GuideWord, str], UnsafeControlAction] = {}
    for uca in ordered(model.ucas):
        key = (uca.action, uca.guide_word, uca.behavior)
        authored.setdefault(key, uca)

    candidates: list[UnsafeControlAction] = []
    ordinal = next_ordinal(model.ucas)
    for action in ordered(model.actions):
        behaviors = action_behaviors(model, action)
        for guide_word in GuideWord:
            for behavior in behaviors:
                key = (action.id.text, guide_word, behavior)
                existing = authored.get(key)
                if existing is not None:
                    candidates.append(existing)
                    continue
                candidates.append(
                    UnsafeControlAction(
                        id=EntityId(EntityKind.UCA, ordinal),
                        action=action.id.text,
                        guide_word=guide_word,
                        behavior=behavior,
                        status=UcaStatus.CANDIDATE,
                    )
                )
                ordinal += 1
    return candidates


def render_uca_text(uca: UnsafeControlAction, model: AnalysisModel) -> str:
    """Authored narrative if present, else the guide word's sentence frame."""
    if uca.narrative:
        return uca.narrative
    action = model.actions.get(uca.action)
    behavior = model.behaviors.get(uca.behavior)
    if action is None or behavior is None:
        raise InvalidModelError(f"UCA {uca.id.text} has dangling references")
    controller = model.components.get(action.source)
    if controller is None:
        raise InvalidModelError(f"action {action.id.text} has a dangling source")
    return UCA_TEMPLATES[uca.guide_word].format(
        controller=controller.name,
        action=action.name,
        behavior=behavior.description,
    )


def control_loop(model: AnalysisModel, uca: UnsafeControlAction) -> dict[str, list[Component]]:
    """Control loop of a UCA, grouped by causal role.

    ``controller``: the action's source; ``feedback_path``: sources of
    feedback links into that controller; ``control_path``: the action's
    target; ``process_input``: the environment process, if designated.
    """
    action = model.actions.get(uca.action)
    if action is None:
        raise InvalidModelError(f"UCA {uca.id.text} references unknown action {uca.action}")
    source = model.components.get(action.source)
    target = model.components.get(action.target)
    if source is None or target is None:
        raise InvalidModelError(f"action {action.id.text} has dangling endpoints")
    sensors = [
        model.components[fb.source]
        for fb in ordered(model.feedbacks)
        if fb.kind is FeedbackKind.FEEDBACK
        and fb.target == action.source
        and fb.source in model.components
    ]
    process = model.environment_process
    return {
        FactorCategory.CONTROLLER.value: [source],
        FactorCategory.FEEDBACK_PATH.value: sensors,
        FactorCategory.CONTROL_PATH.value: [target],
        FactorCategory.PROCESS_INPUT.value: [process] if process is not None else [],
    }


def applicable_pairs(
    model: AnalysisModel, uca: UnsafeControlAction, taxonomy: Taxonomy
) -> list[tuple[CausalFactor, Component]]:
    """(factor, locus) pairs for one UCA: taxonomy order, then locus ordinal."""
    loop = control_loop(model, uca)
    pairs: list[tuple[CausalFactor, Component]] = []
    for factor in taxonomy.factors:
        for component in loop[factor.category.value]:
            if component.kind in factor.locus_kinds:
                pairs.append((factor, component))
    return pairs


def applicable_contexts(
    model: AnalysisModel, uca: UnsafeControlAction
) -> list[ScenarioContext]:
    return [
        ctx
        for ctx in ordered(model.contexts)
        if uca.behavior in ctx.applicable_behaviors
    ]


def render_scenario_text(
    model: AnalysisModel,
    uca: UnsafeControlAction,
    factor: CausalFactor,
    locus: Component,
    context: ScenarioContext | None,
) -> str:
    context_part = f"Kontext: {context.description} " if context is not None else ""
    return SCENARIO_TEMPLATE.format(
        context=context_part,
        factor=factor.label,
        locus=locus.name,
        uca=render_uca_text(uca, model),
    )


def expand_loss_scenarios(
    model: AnalysisModel, taxonomy: Taxonomy
) -> tuple[list[LossScenario], list[Diagnostic]]:
    """Scenario skeletons for every retained UCA, in canonical order.

    For each retained UCA, one scenario per applicable (factor, locus)
    pair and applicable context (or a single implicit default context).
    Authored scenarios are matched by (uca, factor, locus, context) and
    preserved; unmatched cells get fresh ordinals.  A retained UCA whose
    control loop matches no factor locus yields warning W201 and no
    scenarios.
    """
    _require_valid(model)
    authored: dict[tuple[str, str, str, str | None], LossScenario] = {}
    for scenario in ordered(model.scenarios):
        key = (scenario.uca, scenario.factor, scenario.locus, scenario.context)
        authored.setdefault(key, scenario)

    scenarios: list[LossScenario] = []
    diagnostics: list[Diagnostic] = []
    ordinal = next_ordinal(model.scenarios)
    for uca in ordered(model.ucas):
        if uca.status is not UcaStatus.RETAINED:
            continue
        pairs = applicable_pairs(model, uca, taxonomy)
        if not pairs:
            diagnostics.append(
                warning(
                    "W201",
                    f"control loop of {uca.id.text} matches no factor locus; "
                    "no scenarios generated",
                    uca.span,
                )
            )
            continue
        contexts: list[ScenarioContext | None] = list(applicable_contexts(model, uca))
        if not contexts:
            contexts = [None]
        for factor, locus in pairs:
            for context in contexts:
                key = (
                    uca.id.text,
                    factor.id.text,
                    locus.id.text,
                    context.id.text if context is not None else None,
                )
                existing = authored.get(key)
                if existing is not None:
                    scenarios.append(existing)
                    continue
                scenarios.append(
                    LossScenario(
                        id=EntityId(EntityKind.SCENARIO, ordinal),
                        uca=uca.id.text,
                        factor=factor.id.text,
                        locus=locus.id.text,
                        context=context.id.text if context is not None else None,
                        narrative=render_scenario_text(model, uca, factor, locus, context),
                        relevance=ScenarioRelevance.NEEDS_REVIEW,
                    )
                )
                ordinal += 1
    return scenarios, diagnostics
