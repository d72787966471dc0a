"""Causal factor taxonomies used to expand loss scenarios.

The built-in default covers the classic causal areas of a control loop:
flaws inside the controller, inadequacies on the feedback path,
faults on the control path, and disturbing inputs to the controlled
process.  A model may declare its own ``factor`` entities, which then
replace the default for generation.
"""

from __future__ import annotations

from dataclasses import dataclass

from stpatrace.model import (
    AnalysisModel,
    CausalFactor,
    ComponentKind,
    EntityId,
    EntityKind,
    FactorCategory,
    FactorRelevance,
    next_ordinal,
    ordered,
)

MERGEABLE_CONTROLLER_FLAWS = ("control_algorithm_flaw", "process_model_flaw")
MERGED_CONTROLLER_FLAW = "controller_functional_flaw"


@dataclass(frozen=True)
class Taxonomy:
    """Ordered causal factor catalog driving scenario expansion."""

    factors: tuple[CausalFactor, ...]
    merge_controller_flaws: bool = False

    def by_id(self, factor_id: str) -> CausalFactor | None:
        for factor in self.factors:
            if factor.id.text == factor_id:
                return factor
        return None

    def by_label(self, label: str) -> CausalFactor | None:
        for factor in self.factors:
            if factor.label == label:
                return factor
        return None


# label, category, locus kinds, default relevance
_DEFAULT_SPECS: list[tuple[str, FactorCategory, tuple[ComponentKind, ...], FactorRelevance]] = [
    ("control_algorithm_flaw", FactorCategory.CONTROLLER, (ComponentKind.CONTROLLER,), FactorRelevance.SOTIF_CANDIDATE),
    ("process_model_flaw", FactorCategory.CONTROLLER, (ComponentKind.CONTROLLER,), FactorRelevance.SOTIF_CANDIDATE),
    ("controller_physical_failure", FactorCategory.CONTROLLER, (ComponentKind.CONTROLLER,), FactorRelevance.FUNCTIONAL_SAFETY),
    ("sensor_insufficiency", FactorCategory.FEEDBACK_PATH, (ComponentKind.SENSOR,), FactorRelevance.SOTIF_CANDIDATE),
    ("sensor_physical_failure", FactorCategory.FEEDBACK_PATH, (ComponentKind.SENSOR,), FactorRelevance.FUNCTIONAL_SAFETY),
    ("feedback_transmission_failure", FactorCategory.FEEDBACK_PATH, (ComponentKind.SENSOR,), FactorRelevance.FUNCTIONAL_SAFETY),
    ("feedback_inadequate", FactorCategory.FEEDBACK_PATH, (ComponentKind.SENSOR,), FactorRelevance.SOTIF_CANDIDATE),
    ("actuator_physical_failure", FactorCategory.CONTROL_PATH, (ComponentKind.ACTUATOR,), FactorRelevance.FUNCTIONAL_SAFETY),
    ("command_transmission_failure", FactorCategory.CONTROL_PATH, (ComponentKind.CONTROLLER, ComponentKind.ACTUATOR, ComponentKind.PROCESS), FactorRelevance.FUNCTIONAL_SAFETY),
    ("actuator_response_inadequate", FactorCategory.CONTROL_PATH, (ComponentKind.ACTUATOR,), FactorRelevance.SOTIF_CANDIDATE),
    ("process_disturbance", FactorCategory.PROCESS_INPUT, (ComponentKind.PROCESS,), FactorRelevance.SOTIF_CANDIDATE),
    ("other_controller_interference", FactorCategory.PROCESS_INPUT, (ComponentKind.PROCESS,), FactorRelevance.NEEDS_REVIEW),
]


def default_taxonomy(merge_controller_flaws: bool = False) -> Taxonomy:
    """The built-in causal factor catalog, in its fixed order.

    With ``merge_controller_flaws`` the two controller flaw factors are
    replaced by the single ``controller_functional_flaw``.
    """
    specs = list(_DEFAULT_SPECS)
    if merge_controller_flaws:
        # Merged factor takes the lead position; the remaining order is kept.
        merged = (
            MERGED_CONTROLLER_FLAW,
            FactorCategory.CONTROLLER,
            (ComponentKind.CONTROLLER,),
            FactorRelevance.SOTIF_CANDIDATE,
        )
        specs = [merged] + [s for s in _DEFAULT_SPECS if s[0] not in MERGEABLE_CONTROLLER_FLAWS]
    factors = tuple(
        CausalFactor(
            id=EntityId(EntityKind.FACTOR, ordinal),
            label=label,
            category=category,
            locus_kinds=frozenset(kinds),
            default_relevance=relevance,
        )
        for ordinal, (label, category, kinds, relevance) in enumerate(specs, start=1)
    )
    return Taxonomy(factors=factors, merge_controller_flaws=merge_controller_flaws)


def merge_taxonomy(taxonomy: Taxonomy) -> Taxonomy:
    """Replace the two mergeable controller flaw factors by a single one.

    The merged factor takes the position of the first of the pair, the
    union of their locus kinds, and the more conservative (retained-side)
    relevance.  Its id is a fresh ordinal unless a factor with the merged
    label already exists.  Without the pair the taxonomy is returned with
    only the flag set.
    """
    labels = {f.label for f in taxonomy.factors}
    if not all(label in labels for label in MERGEABLE_CONTROLLER_FLAWS):
        return Taxonomy(taxonomy.factors, merge_controller_flaws=True)
    pair = [f for f in taxonomy.factors if f.label in MERGEABLE_CONTROLLER_FLAWS]
    existing = next(
        (f for f in taxonomy.factors if f.label == MERGED_CONTROLLER_FLAW), None
    )
    if existing is not None:
        merged = existing
    else:
        max_ordinal = max(f.id.ordinal for f in taxonomy.factors)
        relevances = {f.default_relevance for f in pair}
        if FactorRelevance.SOTIF_CANDIDATE in relevances:
            relevance = FactorRelevance.SOTIF_CANDIDATE
        elif FactorRelevance.NEEDS_REVIEW in relevances:
            relevance = FactorRelevance.NEEDS_REVIEW
        else:
            relevance = FactorRelevance.FUNCTIONAL_SAFETY
        merged = CausalFactor(
            id=EntityId(EntityKind.FACTOR, max_ordinal + 1),
            label=MERGED_CONTROLLER_FLAW,
            category=FactorCategory.CONTROLLER,
            locus_kinds=frozenset().union(*(f.locus_kinds for f in pair)),
            default_relevance=relevance,
        )
    factors: list[CausalFactor] = []
    replaced = False
    for factor in taxonomy.factors:
        if factor.label in MERGEABLE_CONTROLLER_FLAWS:
            if not replaced:
                factors.append(merged)
                replaced = True
            continue
        if factor.label == MERGED_CONTROLLER_FLAW and existing is not None and replaced:
            continue
        factors.append(factor)
    return Taxonomy(tuple(factors), merge_controller_flaws=True)


def taxonomy_from_model(
    model: AnalysisModel, merge_controller_flaws: bool = False
) -> Taxonomy:
    """The model's declared factors in ordinal order, or the default.

    When the model declares no factors, default factor ids are shifted
    past any ordinals already in use so they can be injected safely.
    """
    declared = ordered(model.factors)
    if declared:
        taxonomy = Taxonomy(tuple(declared), merge_controller_flaws=False)
    else:
        taxonomy = default_taxonomy(False)
        offset = next_ordinal(model.factors) - 1
        if offset:
            taxonomy = Taxonomy(
                tuple(
                    CausalFactor(
                        id=EntityId(EntityKind.FACTOR, f.id.ordinal + offset),
                        label=f.label,
                        category=f.category,
                        locus_kinds=f.locus_kinds,
                        default_relevance=f.default_relevance,
                    )
                    for f in taxonomy.factors
                ),
                merge_controller_flaws=False,
            )
    if merge_controller_flaws:
        taxonomy = merge_taxonomy(taxonomy)
    return taxonomy
