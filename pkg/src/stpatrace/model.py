"""Domain entities and the relational analysis model.

An :class:`AnalysisModel` is the validated registry of everything one
analysis knows: losses, hazards, hazardous behaviors, the control
structure, unsafe control actions, causal factors, loss scenarios,
triggering conditions, functional insufficiencies, and the links that
tie triggers to scenarios.  Models are immutable after assembly; every
operation on an assembled model is a pure read.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

from stpatrace.diagnostics import SourceSpan


class StpaError(Exception):
    """Base class for errors raised by this package."""


class InvalidModelError(StpaError):
    """An operation that requires a valid model was given an invalid one."""


class UnknownReferenceError(StpaError):
    """An identifier did not resolve to a registered entity."""


class EntityKind(str, Enum):
    LOSS = "loss"
    HAZARD = "hazard"
    BEHAVIOR = "behavior"
    COMPONENT = "component"
    ACTION = "action"
    FEEDBACK = "feedback"
    UCA = "uca"
    FACTOR = "factor"
    CONTEXT = "context"
    SCENARIO = "scenario"
    TRIGGER = "trigger"
    INSUFFICIENCY = "insufficiency"


ID_PREFIXES: dict[EntityKind, str] = {
    EntityKind.LOSS: "L",
    EntityKind.HAZARD: "H",
    EntityKind.BEHAVIOR: "HB",
    EntityKind.COMPONENT: "C",
    EntityKind.ACTION: "CA",
    EntityKind.FEEDBACK: "FB",
    EntityKind.UCA: "UCA",
    EntityKind.FACTOR: "CF",
    EntityKind.CONTEXT: "CTX",
    EntityKind.SCENARIO: "LS",
    EntityKind.TRIGGER: "TC",
    EntityKind.INSUFFICIENCY: "FI",
}

_KIND_BY_PREFIX = {prefix: kind for kind, prefix in ID_PREFIXES.items()}
_ID_RE = re.compile(r"^([A-Z]+)-([0-9]+)$")


@dataclass(frozen=True, order=True)
class EntityId:
    """Typed identifier with canonical text form ``<PREFIX>-<ordinal>``."""

    kind: EntityKind
    ordinal: int

    def __post_init__(self) -> None:
        if self.ordinal < 1:
            raise ValueError(f"ordinal must be positive, got {self.ordinal}")

    @property
    def text(self) -> str:
        return f"{ID_PREFIXES[self.kind]}-{self.ordinal}"

    @classmethod
    def parse(cls, text: str) -> "EntityId":
        match = _ID_RE.match(text)
        if not match:
            raise ValueError(f"malformed identifier {text!r}")
        prefix, ordinal = match.group(1), int(match.group(2))
        kind = _KIND_BY_PREFIX.get(prefix)
        if kind is None:
            raise ValueError(f"unknown identifier prefix {prefix!r} in {text!r}")
        if ordinal < 1:
            raise ValueError(f"identifier ordinal must be positive in {text!r}")
        return cls(kind, ordinal)

    def __str__(self) -> str:
        return self.text


class ComponentKind(str, Enum):
    CONTROLLER = "controller"
    HUMAN_CONTROLLER = "human_controller"
    SENSOR = "sensor"
    ACTUATOR = "actuator"
    PROCESS = "process"


class FeedbackKind(str, Enum):
    FEEDBACK = "feedback"
    OTHER = "other"


class GuideWord(str, Enum):
    """The four deviation categories applied to a control action."""

    NOT_PROVIDED = "not_provided"
    PROVIDED_UNSAFE = "provided_unsafe"
    WRONG_TIMING = "wrong_timing"
    WRONG_DURATION = "wrong_duration"

    @property
    def german_label(self) -> str:
        return _GUIDE_WORD_GERMAN[self]

    @property
    def english_label(self) -> str:
        return _GUIDE_WORD_ENGLISH[self]


_GUIDE_WORD_GERMAN = {
    GuideWord.NOT_PROVIDED: "Keine Bereitstellung",
    GuideWord.PROVIDED_UNSAFE: "Falsche Bereitstellung",
    GuideWord.WRONG_TIMING: "Zu frühe oder zu späte Bereitstellung",
    GuideWord.WRONG_DURATION: "Zu lange oder zu kurze Bereitstellung",
}

_GUIDE_WORD_ENGLISH = {
    GuideWord.NOT_PROVIDED: "not provided",
    GuideWord.PROVIDED_UNSAFE: "provided unsafely",
    GuideWord.WRONG_TIMING: "provided too early or too late",
    GuideWord.WRONG_DURATION: "applied too long or too briefly",
}


class UcaStatus(str, Enum):
    CANDIDATE = "candidate"
    RETAINED = "retained"
    EXCLUDED = "excluded"


class FactorRelevance(str, Enum):
    SOTIF_CANDIDATE = "sotif_candidate"
    FUNCTIONAL_SAFETY = "functional_safety"
    NEEDS_REVIEW = "needs_review"


class ScenarioRelevance(str, Enum):
    SOTIF = "sotif"
    FUNCTIONAL_SAFETY = "functional_safety"
    NEEDS_REVIEW = "needs_review"


class FactorCategory(str, Enum):
    CONTROLLER = "controller"
    FEEDBACK_PATH = "feedback_path"
    CONTROL_PATH = "control_path"
    PROCESS_INPUT = "process_input"


@dataclass(frozen=True)
class Loss:
    id: EntityId
    description: str
    span: SourceSpan | None = None


@dataclass(frozen=True)
class Hazard:
    id: EntityId
    description: str
    losses: frozenset[str] = frozenset()
    span: SourceSpan | None = None


@dataclass(frozen=True)
class HazardousBehavior:
    id: EntityId
    description: str
    hazards: frozenset[str] = frozenset()
    span: SourceSpan | None = None


@dataclass(frozen=True)
class Component:
    id: EntityId
    name: str
    kind: ComponentKind
    span: SourceSpan | None = None


@dataclass(frozen=True)
class ControlAction:
    id: EntityId
    name: str
    source: str
    target: str
    # Optional narrowing of the behaviors candidate generation pairs with
    # this action; None means all declared behaviors apply.
    behaviors: frozenset[str] | None = None
    span: SourceSpan | None = None


@dataclass(frozen=True)
class FeedbackLink:
    id: EntityId
    name: str
    source: str
    target: str
    kind: FeedbackKind = FeedbackKind.FEEDBACK
    span: SourceSpan | None = None


@dataclass(frozen=True)
class UnsafeControlAction:
    id: EntityId
    action: str
    guide_word: GuideWord
    behavior: str
    narrative: str = ""
    status: UcaStatus = UcaStatus.CANDIDATE
    exclusion_reason: str | None = None
    span: SourceSpan | None = None


@dataclass(frozen=True)
class CausalFactor:
    id: EntityId
    label: str
    category: FactorCategory
    locus_kinds: frozenset[ComponentKind]
    default_relevance: FactorRelevance = FactorRelevance.NEEDS_REVIEW
    span: SourceSpan | None = None


@dataclass(frozen=True)
class ScenarioContext:
    id: EntityId
    description: str
    applicable_behaviors: frozenset[str]
    span: SourceSpan | None = None


@dataclass(frozen=True)
class LossScenario:
    id: EntityId
    uca: str
    factor: str
    locus: str
    context: str | None = None
    narrative: str = ""
    relevance: ScenarioRelevance = ScenarioRelevance.NEEDS_REVIEW
    span: SourceSpan | None = None


@dataclass(frozen=True)
class TriggeringCondition:
    id: EntityId
    description: str
    span: SourceSpan | None = None


@dataclass(frozen=True)
class FunctionalInsufficiency:
    id: EntityId
    description: str
    locus: str
    span: SourceSpan | None = None


@dataclass(frozen=True)
class TriggerLink:
    trigger: str
    scenario: str
    insufficiency: str
    span: SourceSpan | None = None

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.trigger, self.scenario, self.insufficiency)


Entity = Union[
    Loss,
    Hazard,
    HazardousBehavior,
    Component,
    ControlAction,
    FeedbackLink,
    UnsafeControlAction,
    CausalFactor,
    ScenarioContext,
    LossScenario,
    TriggeringCondition,
    FunctionalInsufficiency,
]

# Registry attribute on AnalysisModel for each entity kind.
REGISTRY_BY_KIND: dict[EntityKind, str] = {
    EntityKind.LOSS: "losses",
    EntityKind.HAZARD: "hazards",
    EntityKind.BEHAVIOR: "behaviors",
    EntityKind.COMPONENT: "components",
    EntityKind.ACTION: "actions",
    EntityKind.FEEDBACK: "feedbacks",
    EntityKind.UCA: "ucas",
    EntityKind.FACTOR: "factors",
    EntityKind.CONTEXT: "contexts",
    EntityKind.SCENARIO: "scenarios",
    EntityKind.TRIGGER: "triggers",
    EntityKind.INSUFFICIENCY: "insufficiencies",
}


@dataclass(frozen=True)
class AnalysisModel:
    """Immutable registry of all entities and relations of one analysis.

    Registries map canonical id text to the entity.  Treat the contained
    dicts as read-only; ``attach_trigger`` and friends return new models
    instead of mutating.
    """

    losses: dict[str, Loss] = field(default_factory=dict)
    hazards: dict[str, Hazard] = field(default_factory=dict)
    behaviors: dict[str, HazardousBehavior] = field(default_factory=dict)
    components: dict[str, Component] = field(default_factory=dict)
    actions: dict[str, ControlAction] = field(default_factory=dict)
    feedbacks: dict[str, FeedbackLink] = field(default_factory=dict)
    ucas: dict[str, UnsafeControlAction] = field(default_factory=dict)
    factors: dict[str, CausalFactor] = field(default_factory=dict)
    contexts: dict[str, ScenarioContext] = field(default_factory=dict)
    scenarios: dict[str, LossScenario] = field(default_factory=dict)
    triggers: dict[str, TriggeringCondition] = field(default_factory=dict)
    insufficiencies: dict[str, FunctionalInsufficiency] = field(default_factory=dict)
    links: tuple[TriggerLink, ...] = ()
    valid: bool = True

    def registry(self, kind: EntityKind) -> dict[str, Entity]:
        return getattr(self, REGISTRY_BY_KIND[kind])

    def registries(self) -> Iterable[tuple[EntityKind, dict[str, Entity]]]:
        for kind in EntityKind:
            yield kind, self.registry(kind)

    @property
    def environment_process(self) -> Component | None:
        """The single component of kind process, if exactly one exists."""
        processes = [
            c for c in ordered(self.components) if c.kind is ComponentKind.PROCESS
        ]
        return processes[0] if len(processes) == 1 else None


def ordered(registry: dict[str, Entity]) -> list[Entity]:
    """Entities of one registry in canonical (ordinal) order."""
    return sorted(registry.values(), key=lambda e: e.id.ordinal)


def ordered_ids(ids: Iterable[str]) -> list[str]:
    """Id texts sorted by (kind, ordinal); malformed ids sort last, textually."""

    def key(text: str):
        try:
            eid = EntityId.parse(text)
            return (0, eid.kind.value, eid.ordinal, text)
        except ValueError:
            return (1, "", 0, text)

    return sorted(ids, key=key)


def ordered_links(links: Iterable[TriggerLink]) -> list[TriggerLink]:
    """Links in canonical order: trigger, scenario, then insufficiency ordinal."""

    def key(link: TriggerLink):
        return tuple(
            (eid.kind.value, eid.ordinal)
            for eid in (
                EntityId.parse(link.trigger),
                EntityId.parse(link.scenario),
                EntityId.parse(link.insufficiency),
            )
        )

    return sorted(links, key=key)


def lookup(model: AnalysisModel, entity_id: EntityId | str) -> Entity | None:
    """Return the entity with the given id, or None; never raises."""
    if isinstance(entity_id, EntityId):
        kind, text = entity_id.kind, entity_id.text
    else:
        try:
            kind = EntityId.parse(entity_id).kind
        except ValueError:
            return None
        text = entity_id
    return model.registry(kind).get(text)


def next_ordinal(registry: dict[str, Entity]) -> int:
    """Next free ordinal for generated entities of a registry."""
    if not registry:
        return 1
    return max(e.id.ordinal for e in registry.values()) + 1
