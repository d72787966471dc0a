"""STPA-based identification and traceability of SOTIF triggering conditions.

The pipeline: parse ``.stpa`` model files, assemble and validate the
entity/relation registry, mechanically enumerate unsafe control action
candidates and loss scenario skeletons, filter the SOTIF-relevant
scenarios, link triggering conditions through functional
insufficiencies, and report traceability.
"""

from stpatrace.assemble import assemble_model, orphan_warnings, validate_integrity
from stpatrace.canonical import to_canonical_dsl
from stpatrace.classify import attach_trigger, classify_relevance, filter_sotif
from stpatrace.diagnostics import (
    Diagnostic,
    Severity,
    SourceSpan,
    emit_diagnostics,
    has_errors,
)
from stpatrace.dsl import Declaration, parse, tokenize
from stpatrace.export import export, import_json
from stpatrace.generate import (
    enumerate_uca_candidates,
    expand_loss_scenarios,
    render_uca_text,
)
from stpatrace.model import (
    AnalysisModel,
    CausalFactor,
    Component,
    ComponentKind,
    ControlAction,
    EntityId,
    EntityKind,
    FactorCategory,
    FactorRelevance,
    FeedbackKind,
    FeedbackLink,
    FunctionalInsufficiency,
    GuideWord,
    Hazard,
    HazardousBehavior,
    InvalidModelError,
    Loss,
    LossScenario,
    ScenarioContext,
    ScenarioRelevance,
    StpaError,
    TriggerLink,
    TriggeringCondition,
    UcaStatus,
    UnknownReferenceError,
    UnsafeControlAction,
    lookup,
)
from stpatrace.taxonomy import Taxonomy, default_taxonomy, merge_taxonomy, taxonomy_from_model
from stpatrace.trace import (
    StatsReport,
    TraceTree,
    stats,
    trace_from_loss,
    trace_from_trigger,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisModel",
    "CausalFactor",
    "Component",
    "ComponentKind",
    "ControlAction",
    "Declaration",
    "Diagnostic",
    "EntityId",
    "EntityKind",
    "FactorCategory",
    "FactorRelevance",
    "FeedbackKind",
    "FeedbackLink",
    "FunctionalInsufficiency",
    "GuideWord",
    "Hazard",
    "HazardousBehavior",
    "InvalidModelError",
    "Loss",
    "LossScenario",
    "ScenarioContext",
    "ScenarioRelevance",
    "Severity",
    "SourceSpan",
    "StatsReport",
    "StpaError",
    "Taxonomy",
    "TraceTree",
    "TriggerLink",
    "TriggeringCondition",
    "UcaStatus",
    "UnknownReferenceError",
    "UnsafeControlAction",
    "assemble_model",
    "attach_trigger",
    "classify_relevance",
    "default_taxonomy",
    "emit_diagnostics",
    "enumerate_uca_candidates",
    "expand_loss_scenarios",
    "export",
    "filter_sotif",
    "has_errors",
    "import_json",
    "lookup",
    "merge_taxonomy",
    "orphan_warnings",
    "parse",
    "render_uca_text",
    "stats",
    "taxonomy_from_model",
    "to_canonical_dsl",
    "tokenize",
    "trace_from_loss",
    "trace_from_trigger",
    "validate_integrity",
]
