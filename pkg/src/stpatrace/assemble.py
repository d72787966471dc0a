"""Assembly of declarations into an AnalysisModel, plus integrity validation.

``assemble_model`` registers every declared entity, surfaces all
integrity violations as diagnostics, and flags the model invalid iff any
error-severity diagnostic exists.  ``validate_integrity`` re-checks an
assembled model and additionally reports orphan warnings.  Both are
deterministic: the same input yields the identical diagnostic sequence.

Error codes
    E001  duplicate identifier
    E002  dangling reference
    E003  cardinality or value violation (duplicate attribute, missing
          exclusion reason, malformed identifier, bad enum value, empty
          description, wrong process count, inapplicable context)
    E004  wrong component kind at a link endpoint
Warning codes
    W101  hazard mapped to no loss
    W102  hazardous behavior mapped to no hazard
    W103  hazard not referenced by any hazardous behavior (orphan)
    W104  retained UCA with no loss scenario (orphan)
    W105  triggering condition with no trigger link (orphan)
    W301  trigger link onto a functional-safety scenario
    W302  duplicate trigger link triple
"""

from __future__ import annotations

from typing import Callable

from stpatrace.diagnostics import Diagnostic, SourceSpan, error, has_errors, warning
from stpatrace.dsl import AttrValue, Declaration
from stpatrace.model import (
    AnalysisModel,
    CausalFactor,
    Component,
    ComponentKind,
    ControlAction,
    Entity,
    EntityId,
    EntityKind,
    FactorCategory,
    FactorRelevance,
    FeedbackKind,
    FeedbackLink,
    GuideWord,
    Hazard,
    HazardousBehavior,
    ID_PREFIXES,
    Loss,
    LossScenario,
    REGISTRY_BY_KIND,
    ScenarioContext,
    ScenarioRelevance,
    TriggerLink,
    TriggeringCondition,
    FunctionalInsufficiency,
    UcaStatus,
    UnsafeControlAction,
    ordered,
)

_COMPONENT_KEYWORDS = {
    "controller": ComponentKind.CONTROLLER,
    "human": ComponentKind.HUMAN_CONTROLLER,
    "sensor": ComponentKind.SENSOR,
    "actuator": ComponentKind.ACTUATOR,
    "process": ComponentKind.PROCESS,
}

_KIND_BY_KEYWORD: dict[str, EntityKind] = {
    "loss": EntityKind.LOSS,
    "hazard": EntityKind.HAZARD,
    "behavior": EntityKind.BEHAVIOR,
    "controller": EntityKind.COMPONENT,
    "human": EntityKind.COMPONENT,
    "sensor": EntityKind.COMPONENT,
    "actuator": EntityKind.COMPONENT,
    "process": EntityKind.COMPONENT,
    "action": EntityKind.ACTION,
    "feedback": EntityKind.FEEDBACK,
    "uca": EntityKind.UCA,
    "factor": EntityKind.FACTOR,
    "context": EntityKind.CONTEXT,
    "scenario": EntityKind.SCENARIO,
    "trigger": EntityKind.TRIGGER,
    "insufficiency": EntityKind.INSUFFICIENCY,
}

ACTION_SOURCE_KINDS = frozenset({ComponentKind.CONTROLLER, ComponentKind.HUMAN_CONTROLLER})
ACTION_TARGET_KINDS = frozenset(
    {ComponentKind.CONTROLLER, ComponentKind.ACTUATOR, ComponentKind.PROCESS}
)
FEEDBACK_TARGET_KINDS = frozenset({ComponentKind.CONTROLLER, ComponentKind.HUMAN_CONTROLLER})

Locator = Callable[..., "SourceSpan | None"]


def assemble_model(
    declarations: list[Declaration],
) -> tuple[AnalysisModel, list[Diagnostic]]:
    """Assemble declarations into a model; surface integrity violations.

    Returns the model (containing exactly the declared entities that could
    be constructed) and the diagnostics in deterministic order.  The model
    is flagged invalid iff any error-severity diagnostic exists.
    """
    diagnostics: list[Diagnostic] = []
    registries: dict[EntityKind, dict[str, Entity]] = {kind: {} for kind in EntityKind}
    registered: list[tuple[Declaration, Entity]] = []
    link_decls: list[tuple[Declaration, TriggerLink]] = []

    for decl in declarations:
        if decl.keyword == "link":
            link_decls.append(
                (
                    decl,
                    TriggerLink(
                        trigger=decl.attributes["trigger"].value,  # type: ignore[arg-type]
                        scenario=decl.attributes["scenario"].value,  # type: ignore[arg-type]
                        insufficiency=decl.attributes["via"].value,  # type: ignore[arg-type]
                        span=decl.span,
                    ),
                )
            )
            continue
        entity = _build_entity(decl, diagnostics)
        if entity is None:
            continue
        registry = registries[_KIND_BY_KEYWORD[decl.keyword]]
        if entity.id.text in registry:
            diagnostics.append(
                error(
                    "E001",
                    f"duplicate identifier {entity.id.text!r}",
                    decl.id_span or decl.span,
                )
            )
            continue
        registry[entity.id.text] = entity
        registered.append((decl, entity))

    model = AnalysisModel(
        losses=registries[EntityKind.LOSS],  # type: ignore[arg-type]
        hazards=registries[EntityKind.HAZARD],  # type: ignore[arg-type]
        behaviors=registries[EntityKind.BEHAVIOR],  # type: ignore[arg-type]
        components=registries[EntityKind.COMPONENT],  # type: ignore[arg-type]
        actions=registries[EntityKind.ACTION],  # type: ignore[arg-type]
        feedbacks=registries[EntityKind.FEEDBACK],  # type: ignore[arg-type]
        ucas=registries[EntityKind.UCA],  # type: ignore[arg-type]
        factors=registries[EntityKind.FACTOR],  # type: ignore[arg-type]
        contexts=registries[EntityKind.CONTEXT],  # type: ignore[arg-type]
        scenarios=registries[EntityKind.SCENARIO],  # type: ignore[arg-type]
        triggers=registries[EntityKind.TRIGGER],  # type: ignore[arg-type]
        insufficiencies=registries[EntityKind.INSUFFICIENCY],  # type: ignore[arg-type]
        links=(),
        valid=True,
    )

    for decl, entity in registered:
        diagnostics.extend(_check_entity(model, entity, _decl_locator(decl)))

    links: list[TriggerLink] = []
    seen_triples: set[tuple[str, str, str]] = set()
    for decl, link in link_decls:
        diags, store = _check_link(model, link, _decl_locator(decl), seen_triples)
        diagnostics.extend(diags)
        if store:
            links.append(link)
            seen_triples.add(link.triple)

    diagnostics.extend(_check_process_count(model))

    valid = not has_errors(diagnostics)
    model = AnalysisModel(
        losses=model.losses,
        hazards=model.hazards,
        behaviors=model.behaviors,
        components=model.components,
        actions=model.actions,
        feedbacks=model.feedbacks,
        ucas=model.ucas,
        factors=model.factors,
        contexts=model.contexts,
        scenarios=model.scenarios,
        triggers=model.triggers,
        insufficiencies=model.insufficiencies,
        links=tuple(links),
        valid=valid,
    )
    return model, diagnostics


def validate_integrity(model: AnalysisModel) -> list[Diagnostic]:
    """Re-check every entity invariant plus orphan warnings.

    Pure and idempotent: the model is not modified and repeated calls
    yield the identical diagnostic list.
    """
    diagnostics: list[Diagnostic] = []
    for kind, registry in model.registries():
        for entity in ordered(registry):
            diagnostics.extend(_check_entity(model, entity, _entity_locator(entity)))

    seen_triples: set[tuple[str, str, str]] = set()
    for link in model.links:
        diags, store = _check_link(model, link, lambda *a, **k: link.span, seen_triples)
        diagnostics.extend(diags)
        if store:
            seen_triples.add(link.triple)

    diagnostics.extend(_check_process_count(model))
    diagnostics.extend(orphan_warnings(model))
    return diagnostics


def orphan_warnings(model: AnalysisModel) -> list[Diagnostic]:
    """Warnings for entities that exist but hang off nothing downstream."""
    diagnostics: list[Diagnostic] = []
    hazards_with_behavior = {
        hazard_id for b in model.behaviors.values() for hazard_id in b.hazards
    }
    for hazard in ordered(model.hazards):
        if hazard.id.text not in hazards_with_behavior:
            diagnostics.append(
                warning(
                    "W103",
                    f"hazard {hazard.id.text} is not referenced by any hazardous behavior",
                    hazard.span,
                )
            )
    ucas_with_scenario = {s.uca for s in model.scenarios.values()}
    for uca in ordered(model.ucas):
        if uca.status is UcaStatus.RETAINED and uca.id.text not in ucas_with_scenario:
            diagnostics.append(
                warning(
                    "W104",
                    f"retained UCA {uca.id.text} has no loss scenario",
                    uca.span,
                )
            )
    linked_triggers = {link.trigger for link in model.links}
    for trigger in ordered(model.triggers):
        if trigger.id.text not in linked_triggers:
            diagnostics.append(
                warning(
                    "W105",
                    f"triggering condition {trigger.id.text} has no trigger link",
                    trigger.span,
                )
            )
    return diagnostics


# ---------------------------------------------------------------------------
# Entity construction


def _build_entity(decl: Declaration, diagnostics: list[Diagnostic]) -> Entity | None:
    expected_kind = _KIND_BY_KEYWORD[decl.keyword]
    try:
        entity_id = EntityId.parse(decl.id)
    except ValueError:
        diagnostics.append(
            error("E003", f"malformed identifier {decl.id!r}", decl.id_span or decl.span)
        )
        return None
    if entity_id.kind is not expected_kind:
        diagnostics.append(
            error(
                "E003",
                f"identifier {decl.id!r} does not match {decl.keyword!r} "
                f"(expected prefix {ID_PREFIXES[expected_kind]})",
                decl.id_span or decl.span,
            )
        )
        return None

    description = decl.description or ""
    if decl.description is not None and not description.strip():
        diagnostics.append(
            error("E003", "empty description", decl.description_span or decl.span)
        )

    attrs = decl.attributes
    keyword = decl.keyword
    if keyword == "loss":
        return Loss(entity_id, description, span=decl.span)
    if keyword == "hazard":
        return Hazard(entity_id, description, _ref_set(attrs.get("losses")), span=decl.span)
    if keyword == "behavior":
        return HazardousBehavior(
            entity_id, description, _ref_set(attrs.get("hazards")), span=decl.span
        )
    if keyword in _COMPONENT_KEYWORDS:
        return Component(entity_id, description, _COMPONENT_KEYWORDS[keyword], span=decl.span)
    if keyword == "action":
        behaviors = attrs.get("behaviors")
        return ControlAction(
            entity_id,
            description,
            source=attrs["source"].value,  # type: ignore[arg-type]
            target=attrs["target"].value,  # type: ignore[arg-type]
            behaviors=_ref_set(behaviors) if behaviors is not None else None,
            span=decl.span,
        )
    if keyword == "feedback":
        kind = _parse_enum(FeedbackKind, attrs.get("kind"), FeedbackKind.FEEDBACK, decl, diagnostics)
        if kind is None:
            return None
        return FeedbackLink(
            entity_id,
            description,
            source=attrs["source"].value,  # type: ignore[arg-type]
            target=attrs["target"].value,  # type: ignore[arg-type]
            kind=kind,
            span=decl.span,
        )
    if keyword == "uca":
        guide = _parse_enum(GuideWord, attrs.get("guide"), None, decl, diagnostics)
        status = _parse_enum(UcaStatus, attrs.get("status"), UcaStatus.CANDIDATE, decl, diagnostics)
        if guide is None or status is None:
            return None
        reason = attrs.get("reason")
        return UnsafeControlAction(
            entity_id,
            action=attrs["action"].value,  # type: ignore[arg-type]
            guide_word=guide,
            behavior=attrs["behavior"].value,  # type: ignore[arg-type]
            narrative=_text(attrs),
            status=status,
            exclusion_reason=reason.value if reason is not None else None,  # type: ignore[arg-type]
            span=decl.span,
        )
    if keyword == "factor":
        category = _parse_enum(FactorCategory, attrs.get("category"), None, decl, diagnostics)
        relevance = _parse_enum(
            FactorRelevance, attrs.get("relevance"), FactorRelevance.NEEDS_REVIEW, decl, diagnostics
        )
        locus_kinds = _parse_locus_kinds(attrs.get("locus"), decl, diagnostics)
        if category is None or relevance is None or locus_kinds is None:
            return None
        return CausalFactor(
            entity_id, description, category, locus_kinds, relevance, span=decl.span
        )
    if keyword == "context":
        return ScenarioContext(entity_id, description, _ref_set(attrs.get("behaviors")), span=decl.span)
    if keyword == "scenario":
        relevance = _parse_enum(
            ScenarioRelevance,
            attrs.get("relevance"),
            ScenarioRelevance.NEEDS_REVIEW,
            decl,
            diagnostics,
        )
        if relevance is None:
            return None
        context = attrs.get("context")
        return LossScenario(
            entity_id,
            uca=attrs["uca"].value,  # type: ignore[arg-type]
            factor=attrs["factor"].value,  # type: ignore[arg-type]
            locus=attrs["locus"].value,  # type: ignore[arg-type]
            context=context.value if context is not None else None,  # type: ignore[arg-type]
            narrative=_text(attrs),
            relevance=relevance,
            span=decl.span,
        )
    if keyword == "trigger":
        return TriggeringCondition(entity_id, description, span=decl.span)
    if keyword == "insufficiency":
        return FunctionalInsufficiency(
            entity_id,
            description,
            locus=attrs["locus"].value,  # type: ignore[arg-type]
            span=decl.span,
        )
    raise AssertionError(f"unhandled keyword {keyword!r}")


def _ref_set(attr: AttrValue | None) -> frozenset[str]:
    if attr is None:
        return frozenset()
    assert attr.is_list
    return frozenset(ref.value for ref in attr.value)  # type: ignore[union-attr]


def _text(attrs: dict[str, AttrValue]) -> str:
    attr = attrs.get("text")
    return attr.value if attr is not None else ""  # type: ignore[return-value]


def _parse_enum(enum_cls, attr: AttrValue | None, default, decl: Declaration, diagnostics):
    """Parse an enum-valued attribute; bad values yield E003 and None."""
    if attr is None:
        return default
    try:
        return enum_cls(attr.value)
    except ValueError:
        valid = ", ".join(member.value for member in enum_cls)
        diagnostics.append(
            error(
                "E003",
                f"invalid value {attr.value!r}, expected one of: {valid}",
                attr.span,
            )
        )
        return None


def _parse_locus_kinds(
    attr: AttrValue | None, decl: Declaration, diagnostics: list[Diagnostic]
) -> frozenset[ComponentKind] | None:
    assert attr is not None and attr.is_list
    kinds: set[ComponentKind] = set()
    for ref in attr.value:  # type: ignore[union-attr]
        try:
            kinds.add(ComponentKind(ref.value))
        except ValueError:
            valid = ", ".join(member.value for member in ComponentKind)
            diagnostics.append(
                error(
                    "E003",
                    f"invalid component kind {ref.value!r}, expected one of: {valid}",
                    ref.span,
                )
            )
            return None
    if not kinds:
        diagnostics.append(error("E003", "locus kind list must not be empty", attr.span))
        return None
    return frozenset(kinds)


# ---------------------------------------------------------------------------
# Integrity checks (shared between assembly and validation)


def _decl_locator(decl: Declaration) -> Locator:
    def loc(attr: str | None = None, ref: str | None = None) -> SourceSpan | None:
        if attr is None:
            return decl.id_span or decl.span
        value = decl.attributes.get(attr)
        if value is None:
            return decl.span
        if ref is not None and value.is_list:
            for candidate in value.value:  # type: ignore[union-attr]
                if candidate.value == ref:
                    return candidate.span
        return value.span

    return loc


def _entity_locator(entity: Entity) -> Locator:
    def loc(attr: str | None = None, ref: str | None = None) -> SourceSpan | None:
        return entity.span

    return loc


def _resolve(model: AnalysisModel, kind: EntityKind, ref: str) -> Entity | None:
    return model.registry(kind).get(ref)


def _dangling(ref: str, span: SourceSpan | None) -> Diagnostic:
    return error("E002", f'unknown reference "{ref}"', span)


def _check_entity(model: AnalysisModel, entity: Entity, loc: Locator) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if isinstance(entity, (Loss, TriggeringCondition, FunctionalInsufficiency)):
        if not entity.description.strip():
            diags.append(error("E003", "empty description", loc()))
    if isinstance(entity, FunctionalInsufficiency):
        if _resolve(model, EntityKind.COMPONENT, entity.locus) is None:
            diags.append(_dangling(entity.locus, loc("locus")))
        return diags
    if isinstance(entity, Hazard):
        for ref in sorted(entity.losses):
            if _resolve(model, EntityKind.LOSS, ref) is None:
                diags.append(_dangling(ref, loc("losses", ref)))
        if not entity.losses:
            diags.append(
                warning("W101", f"hazard {entity.id.text} is mapped to no loss", loc())
            )
        return diags
    if isinstance(entity, HazardousBehavior):
        for ref in sorted(entity.hazards):
            if _resolve(model, EntityKind.HAZARD, ref) is None:
                diags.append(_dangling(ref, loc("hazards", ref)))
        if not entity.hazards:
            diags.append(
                warning(
                    "W102",
                    f"hazardous behavior {entity.id.text} is mapped to no hazard",
                    loc(),
                )
            )
        return diags
    if isinstance(entity, ControlAction):
        source = _resolve(model, EntityKind.COMPONENT, entity.source)
        target = _resolve(model, EntityKind.COMPONENT, entity.target)
        if source is None:
            diags.append(_dangling(entity.source, loc("source")))
        if target is None:
            diags.append(_dangling(entity.target, loc("target")))
        if source is not None and source.kind not in ACTION_SOURCE_KINDS:  # type: ignore[union-attr]
            diags.append(
                error(
                    "E004",
                    f"control action source must be a controller or human_controller, "
                    f"got {source.kind.value}",  # type: ignore[union-attr]
                    loc("source"),
                )
            )
        if target is not None and target.kind not in ACTION_TARGET_KINDS:  # type: ignore[union-attr]
            diags.append(
                error(
                    "E004",
                    f"control action target must be a controller, actuator, or process, "
                    f"got {target.kind.value}",  # type: ignore[union-attr]
                    loc("target"),
                )
            )
        if source is not None and target is not None and entity.source == entity.target:
            diags.append(
                error("E004", "control action source and target must differ", loc("target"))
            )
        if entity.behaviors is not None:
            for ref in sorted(entity.behaviors):
                if _resolve(model, EntityKind.BEHAVIOR, ref) is None:
                    diags.append(_dangling(ref, loc("behaviors", ref)))
        return diags
    if isinstance(entity, FeedbackLink):
        source = _resolve(model, EntityKind.COMPONENT, entity.source)
        target = _resolve(model, EntityKind.COMPONENT, entity.target)
        if source is None:
            diags.append(_dangling(entity.source, loc("source")))
        if target is None:
            diags.append(_dangling(entity.target, loc("target")))
        if (
            entity.kind is FeedbackKind.FEEDBACK
            and target is not None
            and target.kind not in FEEDBACK_TARGET_KINDS  # type: ignore[union-attr]
        ):
            diags.append(
                error(
                    "E004",
                    f"feedback target must be a controller or human_controller, "
                    f"got {target.kind.value}",  # type: ignore[union-attr]
                    loc("target"),
                )
            )
        return diags
    if isinstance(entity, UnsafeControlAction):
        if _resolve(model, EntityKind.ACTION, entity.action) is None:
            diags.append(_dangling(entity.action, loc("action")))
        if _resolve(model, EntityKind.BEHAVIOR, entity.behavior) is None:
            diags.append(_dangling(entity.behavior, loc("behavior")))
        if entity.status is UcaStatus.EXCLUDED and not (entity.exclusion_reason or "").strip():
            diags.append(
                error(
                    "E003",
                    f"excluded UCA {entity.id.text} requires an exclusion reason",
                    loc(),
                )
            )
        return diags
    if isinstance(entity, CausalFactor):
        if not entity.locus_kinds:
            diags.append(
                error("E003", f"factor {entity.id.text} has no locus kinds", loc())
            )
        return diags
    if isinstance(entity, ScenarioContext):
        for ref in sorted(entity.applicable_behaviors):
            if _resolve(model, EntityKind.BEHAVIOR, ref) is None:
                diags.append(_dangling(ref, loc("behaviors", ref)))
        if not entity.applicable_behaviors:
            diags.append(
                error(
                    "E003",
                    f"context {entity.id.text} applies to no hazardous behavior",
                    loc(),
                )
            )
        return diags
    if isinstance(entity, LossScenario):
        uca = _resolve(model, EntityKind.UCA, entity.uca)
        factor = _resolve(model, EntityKind.FACTOR, entity.factor)
        locus = _resolve(model, EntityKind.COMPONENT, entity.locus)
        if uca is None:
            diags.append(_dangling(entity.uca, loc("uca")))
        if factor is None:
            diags.append(_dangling(entity.factor, loc("factor")))
        if locus is None:
            diags.append(_dangling(entity.locus, loc("locus")))
        if factor is not None and locus is not None:
            if locus.kind not in factor.locus_kinds:  # type: ignore[union-attr]
                diags.append(
                    error(
                        "E004",
                        f"scenario locus {entity.locus} has kind {locus.kind.value}, "  # type: ignore[union-attr]
                        f"not allowed for factor {entity.factor}",
                        loc("locus"),
                    )
                )
        if entity.context is not None:
            context = _resolve(model, EntityKind.CONTEXT, entity.context)
            if context is None:
                diags.append(_dangling(entity.context, loc("context")))
            elif uca is not None and uca.behavior not in context.applicable_behaviors:  # type: ignore[union-attr]
                diags.append(
                    error(
                        "E003",
                        f"context {entity.context} is not applicable to behavior "
                        f"{uca.behavior} of {entity.uca}",  # type: ignore[union-attr]
                        loc("context"),
                    )
                )
        return diags
    return diags


def _check_link(
    model: AnalysisModel,
    link: TriggerLink,
    loc: Locator,
    seen_triples: set[tuple[str, str, str]],
) -> tuple[list[Diagnostic], bool]:
    """Check one trigger link; returns (diagnostics, store it or not)."""
    diags: list[Diagnostic] = []
    trigger = _resolve(model, EntityKind.TRIGGER, link.trigger)
    scenario = _resolve(model, EntityKind.SCENARIO, link.scenario)
    insufficiency = _resolve(model, EntityKind.INSUFFICIENCY, link.insufficiency)
    if trigger is None:
        diags.append(_dangling(link.trigger, loc("trigger")))
    if scenario is None:
        diags.append(_dangling(link.scenario, loc("scenario")))
    if insufficiency is None:
        diags.append(_dangling(link.insufficiency, loc("via")))
    if diags:
        return diags, False
    if link.triple in seen_triples:
        diags.append(
            warning(
                "W302",
                f"duplicate trigger link {link.trigger} -> {link.scenario} "
                f"via {link.insufficiency}",
                loc(),
            )
        )
        return diags, False
    if _scenario_relevance(model, scenario) is ScenarioRelevance.FUNCTIONAL_SAFETY:  # type: ignore[arg-type]
        diags.append(
            warning(
                "W301",
                f"trigger link onto functional-safety scenario {link.scenario}",
                loc(),
            )
        )
    return diags, True


def _scenario_relevance(model: AnalysisModel, scenario: LossScenario) -> ScenarioRelevance:
    """Effective relevance: an authored override wins over the factor default."""
    if scenario.relevance is not ScenarioRelevance.NEEDS_REVIEW:
        return scenario.relevance
    factor = model.factors.get(scenario.factor)
    if factor is None:
        return ScenarioRelevance.NEEDS_REVIEW
    return {
        FactorRelevance.SOTIF_CANDIDATE: ScenarioRelevance.SOTIF,
        FactorRelevance.FUNCTIONAL_SAFETY: ScenarioRelevance.FUNCTIONAL_SAFETY,
        FactorRelevance.NEEDS_REVIEW: ScenarioRelevance.NEEDS_REVIEW,
    }[factor.default_relevance]


def _check_process_count(model: AnalysisModel) -> list[Diagnostic]:
    """A model with components must designate exactly one environment process."""
    if not model.components:
        return []
    processes = [
        c for c in ordered(model.components) if c.kind is ComponentKind.PROCESS
    ]
    if len(processes) == 1:
        return []
    return [
        error(
            "E003",
            f"expected exactly one component of kind process, found {len(processes)}",
            processes[1].span if len(processes) > 1 else None,
        )
    ]
