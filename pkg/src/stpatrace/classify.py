"""SOTIF relevance classification, filtering, and trigger attachment.

A scenario's effective relevance is its causal factor's default unless
the scenario carries an authored override.  Filtering partitions all
scenarios into retained (sotif plus needs_review, conservatively) and
excluded (functional safety).  Attaching a trigger is copy-on-write:
readers of the old model never observe partial updates.
"""

from __future__ import annotations

from dataclasses import replace

from stpatrace.diagnostics import Diagnostic, error, warning
from stpatrace.model import (
    AnalysisModel,
    FactorRelevance,
    InvalidModelError,
    LossScenario,
    ScenarioRelevance,
    TriggerLink,
    UnknownReferenceError,
    ordered,
)
from stpatrace.taxonomy import Taxonomy

_RELEVANCE_BY_DEFAULT = {
    FactorRelevance.SOTIF_CANDIDATE: ScenarioRelevance.SOTIF,
    FactorRelevance.FUNCTIONAL_SAFETY: ScenarioRelevance.FUNCTIONAL_SAFETY,
    FactorRelevance.NEEDS_REVIEW: ScenarioRelevance.NEEDS_REVIEW,
}


def classify_relevance(scenario: LossScenario, taxonomy: Taxonomy) -> ScenarioRelevance:
    """Effective relevance of a scenario; an authored override wins."""
    if scenario.relevance is not ScenarioRelevance.NEEDS_REVIEW:
        return scenario.relevance
    factor = taxonomy.by_id(scenario.factor)
    if factor is None:
        raise UnknownReferenceError(
            f"scenario {scenario.id.text} references unknown factor {scenario.factor}"
        )
    return _RELEVANCE_BY_DEFAULT[factor.default_relevance]


def filter_sotif(
    model: AnalysisModel, taxonomy: Taxonomy
) -> tuple[list[LossScenario], list[LossScenario]]:
    """Partition all scenarios into (retained, excluded), in canonical order.

    needs_review counts as retained so that unreviewed candidates are
    never silently dropped.
    """
    if not model.valid:
        raise InvalidModelError("model has error diagnostics; refusing to filter")
    retained: list[LossScenario] = []
    excluded: list[LossScenario] = []
    for scenario in ordered(model.scenarios):
        if classify_relevance(scenario, taxonomy) is ScenarioRelevance.FUNCTIONAL_SAFETY:
            excluded.append(scenario)
        else:
            retained.append(scenario)
    return retained, excluded


def attach_trigger(
    model: AnalysisModel, trigger: str, scenario: str, insufficiency: str
) -> tuple[AnalysisModel, list[Diagnostic]]:
    """Return a new model with the trigger link added.

    Dangling ids yield E002 and leave the model unchanged.  A duplicate
    triple yields W302 and is not stored twice.  Linking onto a
    functional-safety scenario is allowed but suspicious (W301).
    """
    diagnostics: list[Diagnostic] = []
    if trigger not in model.triggers:
        diagnostics.append(error("E002", f'unknown reference "{trigger}"'))
    scenario_entity = model.scenarios.get(scenario)
    if scenario_entity is None:
        diagnostics.append(error("E002", f'unknown reference "{scenario}"'))
    if insufficiency not in model.insufficiencies:
        diagnostics.append(error("E002", f'unknown reference "{insufficiency}"'))
    if diagnostics:
        return model, diagnostics

    link = TriggerLink(trigger=trigger, scenario=scenario, insufficiency=insufficiency)
    if any(existing.triple == link.triple for existing in model.links):
        diagnostics.append(
            warning(
                "W302",
                f"duplicate trigger link {trigger} -> {scenario} via {insufficiency}",
            )
        )
        return model, diagnostics

    factor = model.factors.get(scenario_entity.factor)
    effective = scenario_entity.relevance
    if effective is ScenarioRelevance.NEEDS_REVIEW and factor is not None:
        effective = _RELEVANCE_BY_DEFAULT[factor.default_relevance]
    if effective is ScenarioRelevance.FUNCTIONAL_SAFETY:
        diagnostics.append(
            warning(
                "W301",
                f"trigger link onto functional-safety scenario {scenario}",
            )
        )
    return replace(model, links=model.links + (link,)), diagnostics
