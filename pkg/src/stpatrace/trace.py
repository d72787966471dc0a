"""Traceability trees and model statistics.

Trace trees are first-visit spanning trees over the reachability closure
of the chain loss - hazard - behavior - UCA - scenario - (insufficiency,
trigger), in either direction.  Every tree edge corresponds to a stored
relation and every reachable entity appears exactly once, so the node
count equals the size of the reachability set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from stpatrace.classify import classify_relevance, filter_sotif
from stpatrace.model import (
    AnalysisModel,
    EntityId,
    EntityKind,
    InvalidModelError,
    UcaStatus,
    UnknownReferenceError,
    lookup,
    ordered,
    ordered_ids,
)
from stpatrace.taxonomy import Taxonomy, taxonomy_from_model


@dataclass(frozen=True)
class TraceTree:
    """Spanning tree of a traceability closure rooted at one entity."""

    root: str
    children: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def nodes(self) -> set[str]:
        collected = {self.root}
        for parent, kids in self.children.items():
            collected.add(parent)
            collected.update(kids)
        return collected

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def edges(self) -> list[tuple[str, str]]:
        return [
            (parent, child)
            for parent in sorted(self.children)
            for child in self.children[parent]
        ]


def _first_visit_tree(root: str, neighbors) -> TraceTree:
    """Breadth-first spanning tree; each node is attached at first visit."""
    children: dict[str, tuple[str, ...]] = {}
    visited = {root}
    queue = [root]
    while queue:
        node = queue.pop(0)
        kids = []
        for child in neighbors(node):
            if child in visited:
                continue
            visited.add(child)
            kids.append(child)
            queue.append(child)
        if kids:
            children[node] = tuple(kids)
    return TraceTree(root=root, children=children)


def trace_from_loss(model: AnalysisModel, loss: str) -> TraceTree:
    """Downstream closure loss -> hazards -> behaviors -> UCAs -> scenarios
    -> insufficiencies -> triggers, with children ordered by id ordinal."""
    if loss not in model.losses:
        raise UnknownReferenceError(f'unknown reference "{loss}"')

    # Level sets of the closure.  Links are filtered to scenarios inside
    # the closure so that a shared insufficiency cannot smuggle in
    # triggers whose only connection runs through an unreachable scenario.
    hazards = {h.id.text for h in model.hazards.values() if loss in h.losses}
    behaviors = {
        b.id.text for b in model.behaviors.values() if b.hazards & hazards
    }
    ucas = {u.id.text for u in model.ucas.values() if u.behavior in behaviors}
    scenarios = {s.id.text for s in model.scenarios.values() if s.uca in ucas}
    links = [link for link in model.links if link.scenario in scenarios]

    def neighbors(node: str) -> list[str]:
        kind = EntityId.parse(node).kind
        if kind is EntityKind.LOSS:
            return ordered_ids(hazards)
        if kind is EntityKind.HAZARD:
            return ordered_ids(
                b.id.text
                for b in model.behaviors.values()
                if b.id.text in behaviors and node in b.hazards
            )
        if kind is EntityKind.BEHAVIOR:
            return ordered_ids(
                u.id.text for u in model.ucas.values() if u.behavior == node
            )
        if kind is EntityKind.UCA:
            return ordered_ids(
                s.id.text for s in model.scenarios.values() if s.uca == node
            )
        if kind is EntityKind.SCENARIO:
            return ordered_ids(
                {link.insufficiency for link in links if link.scenario == node}
            )
        if kind is EntityKind.INSUFFICIENCY:
            return ordered_ids(
                {link.trigger for link in links if link.insufficiency == node}
            )
        return []

    return _first_visit_tree(loss, neighbors)


def trace_from_trigger(model: AnalysisModel, trigger: str) -> TraceTree:
    """Reverse closure trigger -> scenarios -> UCAs -> behaviors -> hazards
    -> losses, with children ordered by id ordinal."""
    if trigger not in model.triggers:
        raise UnknownReferenceError(f'unknown reference "{trigger}"')

    def neighbors(node: str) -> list[str]:
        kind = EntityId.parse(node).kind
        if kind is EntityKind.TRIGGER:
            return ordered_ids(
                {link.scenario for link in model.links if link.trigger == node}
            )
        if kind is EntityKind.SCENARIO:
            scenario = model.scenarios.get(node)
            return [scenario.uca] if scenario is not None else []
        if kind is EntityKind.UCA:
            uca = model.ucas.get(node)
            return [uca.behavior] if uca is not None else []
        if kind is EntityKind.BEHAVIOR:
            behavior = model.behaviors.get(node)
            return ordered_ids(behavior.hazards) if behavior is not None else []
        if kind is EntityKind.HAZARD:
            hazard = model.hazards.get(node)
            return ordered_ids(hazard.losses) if hazard is not None else []
        return []

    return _first_visit_tree(trigger, neighbors)


@dataclass(frozen=True)
class StatsReport:
    """Exact counts over one model."""

    entity_counts: dict[str, int]
    ucas_by_status: dict[str, int]
    ucas_identified: int
    ucas_sotif_scope: int
    scenarios_total: int
    sotif_retained: int
    sotif_excluded: int
    scenarios_per_trigger: dict[str, int]
    triggers_per_scenario: dict[str, int]
    trigger_link_count: int
    max_scenarios_per_trigger: int
    max_triggers_per_scenario: int
    max_chain_insufficiencies: int


def stats(model: AnalysisModel, taxonomy: Taxonomy | None = None) -> StatsReport:
    """Compute the statistics report; pure."""
    if not model.valid:
        raise InvalidModelError("model has error diagnostics; refusing to report")
    if taxonomy is None:
        taxonomy = taxonomy_from_model(model)

    entity_counts = {
        kind.value: len(registry) for kind, registry in model.registries()
    }
    ucas_by_status = {status.value: 0 for status in UcaStatus}
    for uca in model.ucas.values():
        ucas_by_status[uca.status.value] += 1
    ucas_identified = (
        ucas_by_status[UcaStatus.RETAINED.value] + ucas_by_status[UcaStatus.EXCLUDED.value]
    )
    retained, excluded = filter_sotif(model, taxonomy)

    scenarios_per_trigger: dict[str, int] = {
        t.id.text: 0 for t in ordered(model.triggers)
    }
    triggers_per_scenario: dict[str, int] = {
        s.id.text: 0 for s in ordered(model.scenarios)
    }
    pairs: dict[tuple[str, str], set[str]] = {}
    seen_pairs: set[tuple[str, str]] = set()
    for link in model.links:
        pair = (link.trigger, link.scenario)
        pairs.setdefault(pair, set()).add(link.insufficiency)
        if pair not in seen_pairs:
            seen_pairs.add(pair)
            scenarios_per_trigger[link.trigger] += 1
            triggers_per_scenario[link.scenario] += 1

    return StatsReport(
        entity_counts=entity_counts,
        ucas_by_status=ucas_by_status,
        ucas_identified=ucas_identified,
        ucas_sotif_scope=ucas_by_status[UcaStatus.RETAINED.value],
        scenarios_total=len(model.scenarios),
        sotif_retained=len(retained),
        sotif_excluded=len(excluded),
        scenarios_per_trigger=scenarios_per_trigger,
        triggers_per_scenario=triggers_per_scenario,
        trigger_link_count=len(model.links),
        max_scenarios_per_trigger=max(scenarios_per_trigger.values(), default=0),
        max_triggers_per_scenario=max(triggers_per_scenario.values(), default=0),
        max_chain_insufficiencies=max((len(v) for v in pairs.values()), default=0),
    )


def entity_display(model: AnalysisModel, entity_id: str) -> str:
    """Short human-readable line for one entity in trace output."""
    entity = lookup(model, entity_id)
    if entity is None:
        return entity_id
    text = (
        getattr(entity, "description", None)
        or getattr(entity, "name", None)
        or getattr(entity, "narrative", "")
    )
    return f"{entity_id} {text}".rstrip()


def render_tree(model: AnalysisModel, tree: TraceTree) -> str:
    """Indented text rendering of a trace tree, depth-first."""
    lines: list[str] = []

    def walk(node: str, depth: int) -> None:
        lines.append("  " * depth + entity_display(model, node))
        for child in tree.children.get(node, ()):
            walk(child, depth + 1)

    walk(tree.root, 0)
    return "".join(line + "\n" for line in lines)
