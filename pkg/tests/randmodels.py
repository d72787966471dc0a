"""Seeded random model construction for property tests.

Models are valid by construction (no error diagnostics); orphan warnings
are allowed.  Construction emits DSL text so that every random model also
exercises the parser and assembler.
"""

from __future__ import annotations

import random

from stpatrace.canonical import factor_line, quote, scenario_line
from stpatrace.generate import expand_loss_scenarios
from stpatrace.model import AnalysisModel, ordered
from stpatrace.taxonomy import taxonomy_from_model

GUIDES = ["not_provided", "provided_unsafe", "wrong_timing", "wrong_duration"]
CATEGORIES = ["controller", "feedback_path", "control_path", "process_input"]
RELEVANCES = ["sotif_candidate", "functional_safety", "needs_review"]
COMPONENT_KINDS = ["controller", "human_controller", "sensor", "actuator", "process"]


def _ref_list(ids: list[str]) -> str:
    return "[" + ", ".join(ids) + "]"


def random_base(rng: random.Random) -> str:
    """DSL text for a small, structurally valid model without scenarios."""
    lines: list[str] = []

    n_losses = rng.randint(1, 2)
    for i in range(1, n_losses + 1):
        lines.append(f"loss L-{i} {quote(f'Verlust {i}')}")

    n_hazards = rng.randint(1, 2)
    for i in range(1, n_hazards + 1):
        losses = sorted({rng.randint(1, n_losses) for _ in range(rng.randint(1, n_losses))})
        refs = _ref_list([f"L-{k}" for k in losses])
        lines.append(f"hazard H-{i} {quote(f'Gefährdung {i}')} losses={refs}")

    n_behaviors = rng.randint(1, 3)
    for i in range(1, n_behaviors + 1):
        hazards = sorted({rng.randint(1, n_hazards) for _ in range(rng.randint(1, n_hazards))})
        refs = _ref_list([f"H-{k}" for k in hazards])
        lines.append(f"behavior HB-{i} {quote(f'Verhalten {i}')} hazards={refs}")

    ordinal = 0

    def component(keyword: str, name: str) -> str:
        nonlocal ordinal
        ordinal += 1
        lines.append(f"{keyword} C-{ordinal} {quote(name)}")
        return f"C-{ordinal}"

    process = component("process", "Prozess")
    controllers = [
        component("controller", f"Regler {i}") for i in range(1, rng.randint(1, 2) + 1)
    ]
    sensors = [component("sensor", f"Sensor {i}") for i in range(rng.randint(0, 2))]
    actuators = [
        component("actuator", f"Aktuator {i}") for i in range(1, rng.randint(1, 2) + 1)
    ]
    humans = [component("human", "Bediener")] if rng.random() < 0.4 else []

    fb_ordinal = 0
    for sensor in sensors:
        fb_ordinal += 1
        target = rng.choice(controllers + humans)
        lines.append(
            f"feedback FB-{fb_ordinal} {quote('Messdaten')} source={sensor} "
            f"target={target} kind=feedback"
        )
    if sensors and rng.random() < 0.5:
        fb_ordinal += 1
        lines.append(
            f"feedback FB-{fb_ordinal} {quote('Beobachtung')} source={process} "
            f"target={sensors[0]} kind=other"
        )

    n_actions = rng.randint(1, 3)
    actions = []
    for i in range(1, n_actions + 1):
        source = rng.choice(controllers + humans)
        targets = [c for c in controllers if c != source] + actuators + [process]
        target = rng.choice(targets)
        lines.append(
            f"action CA-{i} {quote(f'Aktion {i}')} source={source} target={target}"
        )
        actions.append(f"CA-{i}")

    n_factors = rng.randint(1, 4)
    for i in range(1, n_factors + 1):
        category = rng.choice(CATEGORIES)
        kinds = rng.sample(COMPONENT_KINDS, rng.randint(1, 2))
        relevance = rng.choice(RELEVANCES)
        lines.append(
            f"factor CF-{i} {quote(f'faktor_{i}')} category={category} "
            f"locus=[{', '.join(sorted(kinds))}] relevance={relevance}"
        )

    for i in range(1, rng.randint(0, 2) + 1):
        behaviors = sorted(
            {rng.randint(1, n_behaviors) for _ in range(rng.randint(1, n_behaviors))}
        )
        refs = _ref_list([f"HB-{k}" for k in behaviors])
        lines.append(f"context CTX-{i} {quote(f'Kontext {i}')} behaviors={refs}")

    grid = [
        (action, guide, f"HB-{b}")
        for action in actions
        for guide in GUIDES
        for b in range(1, n_behaviors + 1)
    ]
    cells = rng.sample(grid, rng.randint(0, min(6, len(grid))))
    for i, (action, guide, behavior) in enumerate(cells, start=1):
        status = rng.choice(["candidate", "retained", "retained", "excluded"])
        line = (
            f"uca UCA-{i} action={action} guide={guide} behavior={behavior} "
            f"status={status}"
        )
        if status == "excluded":
            line += f" reason={quote('aus dem Betrachtungsumfang genommen')}"
        lines.append(line)

    return "".join(line + "\n" for line in lines)


def random_full(rng: random.Random, base_model: AnalysisModel, base_text: str) -> str:
    """Extend a base model with generated scenarios, triggers, and links."""
    taxonomy = taxonomy_from_model(base_model)
    scenarios, _ = expand_loss_scenarios(base_model, taxonomy)
    lines = []
    declared = set(base_model.factors)
    lines.extend(
        factor_line(f) for f in taxonomy.factors if f.id.text not in declared
    )
    for scenario in scenarios:
        if rng.random() < 0.15:
            # Authored relevance override.
            override = rng.choice(["sotif", "functional_safety"])
            line = (
                f"scenario {scenario.id.text} uca={scenario.uca} "
                f"factor={scenario.factor} locus={scenario.locus}"
            )
            if scenario.context is not None:
                line += f" context={scenario.context}"
            line += f" relevance={override}"
        else:
            line = scenario_line(scenario)
        lines.append(line)

    n_triggers = rng.randint(0, 3)
    for i in range(1, n_triggers + 1):
        lines.append(f"trigger TC-{i} {quote(f'Umstand {i}')}")
    components = [c.id.text for c in ordered(base_model.components)]
    n_fis = rng.randint(0, 2)
    for i in range(1, n_fis + 1):
        locus = rng.choice(components)
        lines.append(
            f"insufficiency FI-{i} {quote(f'Insuffizienz {i}')} locus={locus}"
        )
    if n_triggers and n_fis and scenarios:
        combos = [
            (f"TC-{t}", s.id.text, f"FI-{f}")
            for t in range(1, n_triggers + 1)
            for s in scenarios
            for f in range(1, n_fis + 1)
        ]
        for trigger, scenario_id, fi in rng.sample(combos, rng.randint(0, min(8, len(combos)))):
            lines.append(f"link {trigger} -> {scenario_id} via {fi}")

    return base_text + "".join(line + "\n" for line in lines)
