"""Relevance classification, SOTIF filtering, trigger attachment."""

from __future__ import annotations

import random

import pytest

from stpatrace.classify import attach_trigger, classify_relevance, filter_sotif
from stpatrace.model import (
    FactorRelevance,
    ScenarioRelevance,
    UnknownReferenceError,
)
from stpatrace.taxonomy import taxonomy_from_model
from conftest import load_model
from randmodels import random_base, random_full


def brute_force_relevance(model, scenario) -> str:
    """Independent oracle for a scenario's effective relevance class."""
    if scenario.relevance.value != "needs_review":
        return scenario.relevance.value
    factor = model.factors[scenario.factor]
    return {
        "sotif_candidate": "sotif",
        "functional_safety": "functional_safety",
        "needs_review": "needs_review",
    }[factor.default_relevance.value]


class TestClassifyRelevance:
    def test_transmission_failure_is_functional_safety(self, corpus_model):
        taxonomy = taxonomy_from_model(corpus_model)
        scenario = next(
            s for s in corpus_model.scenarios.values() if s.factor == "CF-5"
        )
        assert classify_relevance(scenario, taxonomy) is ScenarioRelevance.FUNCTIONAL_SAFETY

    def test_sensor_insufficiency_is_sotif(self, corpus_model):
        taxonomy = taxonomy_from_model(corpus_model)
        scenario = corpus_model.scenarios["LS-7"]
        assert scenario.factor == "CF-4"
        assert classify_relevance(scenario, taxonomy) is ScenarioRelevance.SOTIF

    def test_authored_override_wins_over_functional_safety_default(self, corpus_model):
        taxonomy = taxonomy_from_model(corpus_model)
        scenario = corpus_model.scenarios["LS-53"]
        factor = taxonomy.by_id(scenario.factor)
        assert factor.default_relevance is FactorRelevance.FUNCTIONAL_SAFETY
        assert classify_relevance(scenario, taxonomy) is ScenarioRelevance.SOTIF

    def test_unknown_factor_raises(self, corpus_model):
        taxonomy = taxonomy_from_model(corpus_model)
        scenario = corpus_model.scenarios["LS-1"]
        broken = type(scenario)(
            id=scenario.id,
            uca=scenario.uca,
            factor="CF-99",
            locus=scenario.locus,
        )
        with pytest.raises(UnknownReferenceError):
            classify_relevance(broken, taxonomy)


class TestFilterSotif:
    def test_corpus_partition_is_55_48(self, corpus_model):
        taxonomy = taxonomy_from_model(corpus_model)
        retained, excluded = filter_sotif(corpus_model, taxonomy)
        assert len(retained) == 55
        assert len(excluded) == 48

    def test_all_sotif_taxonomy_excludes_nothing(self):
        model, _ = load_model(
            'loss L-1 "Verlust"\n'
            'hazard H-1 "Gefährdung" losses=[L-1]\n'
            'behavior HB-1 "Verhalten" hazards=[H-1]\n'
            'process C-1 "Umgebung"\n'
            'controller C-2 "Regler"\n'
            'actuator C-3 "Aktuator"\n'
            'action CA-1 "Befehl" source=C-2 target=C-3\n'
            'factor CF-1 "a" category=controller locus=[controller] relevance=sotif_candidate\n'
            'factor CF-2 "b" category=control_path locus=[actuator] relevance=sotif_candidate\n'
            "uca UCA-1 action=CA-1 guide=not_provided behavior=HB-1 status=retained\n"
            "scenario LS-1 uca=UCA-1 factor=CF-1 locus=C-2\n"
            "scenario LS-2 uca=UCA-1 factor=CF-2 locus=C-3\n"
        )
        retained, excluded = filter_sotif(model, taxonomy_from_model(model))
        assert len(retained) == 2 and excluded == []

    def test_partition_property_randomized(self):
        rng = random.Random(4242)
        for _ in range(100):
            base_text = random_base(rng)
            model, diags = load_model(base_text)
            assert not [d for d in diags if d.is_error]
            full_text = random_full(rng, model, base_text)
            full, fdiags = load_model(full_text)
            assert not [d for d in fdiags if d.is_error], fdiags[:3]
            taxonomy = taxonomy_from_model(full)
            retained, excluded = filter_sotif(full, taxonomy)
            assert len(retained) + len(excluded) == len(full.scenarios)
            retained_ids = {s.id.text for s in retained}
            excluded_ids = {s.id.text for s in excluded}
            assert retained_ids.isdisjoint(excluded_ids)
            for scenario in retained:
                assert brute_force_relevance(full, scenario) != "functional_safety"
            for scenario in excluded:
                assert brute_force_relevance(full, scenario) == "functional_safety"


class TestAttachTrigger:
    def test_sun_glare_chain_is_stored_in_corpus(self, corpus_model):
        triples = {link.triple for link in corpus_model.links}
        assert ("TC-5", "LS-7", "FI-1") in triples
        trigger = corpus_model.triggers["TC-5"]
        assert trigger.description == "tiefstehende Sonne"
        insufficiency = corpus_model.insufficiencies["FI-1"]
        assert "Blendung" in insufficiency.description

    def test_attach_stores_new_link(self, corpus_model):
        new_model, diags = attach_trigger(corpus_model, "TC-12", "LS-7", "FI-4")
        assert diags == []
        assert len(new_model.links) == len(corpus_model.links) + 1
        # Copy-on-write: the original is untouched.
        assert ("TC-12", "LS-7", "FI-4") not in {l.triple for l in corpus_model.links}

    def test_duplicate_triple_is_w302_and_not_stored(self, corpus_model):
        new_model, diags = attach_trigger(corpus_model, "TC-5", "LS-7", "FI-1")
        assert [d.code for d in diags] == ["W302"]
        assert len(new_model.links) == len(corpus_model.links)

    def test_dangling_id_is_e002(self, corpus_model):
        new_model, diags = attach_trigger(corpus_model, "TC-99", "LS-7", "FI-1")
        assert [d.code for d in diags] == ["E002"]
        assert new_model is corpus_model

    def test_link_onto_functional_safety_scenario_is_w301(self, corpus_model):
        # LS-5 is a controller_physical_failure scenario (functional safety).
        scenario = corpus_model.scenarios["LS-5"]
        assert corpus_model.factors[scenario.factor].default_relevance is (
            FactorRelevance.FUNCTIONAL_SAFETY
        )
        new_model, diags = attach_trigger(corpus_model, "TC-1", "LS-5", "FI-1")
        assert [d.code for d in diags] == ["W301"]
        assert len(new_model.links) == len(corpus_model.links) + 1

    def test_fourteen_distinct_triggers_on_one_scenario(self, corpus_model):
        linked = {l.trigger for l in corpus_model.links if l.scenario == "LS-7"}
        assert len(linked) == 14

    def test_attach_does_not_change_any_relevance(self, corpus_model):
        taxonomy = taxonomy_from_model(corpus_model)
        before = {
            s.id.text: classify_relevance(s, taxonomy)
            for s in corpus_model.scenarios.values()
        }
        new_model, _ = attach_trigger(corpus_model, "TC-12", "LS-8", "FI-4")
        after = {
            s.id.text: classify_relevance(s, taxonomy)
            for s in new_model.scenarios.values()
        }
        assert before == after

    def test_no_functional_safety_scenario_without_override_is_retained(self):
        rng = random.Random(5150)
        for _ in range(50):
            base_text = random_base(rng)
            model, _ = load_model(base_text)
            full_text = random_full(rng, model, base_text)
            full, diags = load_model(full_text)
            assert not [d for d in diags if d.is_error]
            taxonomy = taxonomy_from_model(full)
            retained, _ = filter_sotif(full, taxonomy)
            for scenario in retained:
                if scenario.relevance is ScenarioRelevance.NEEDS_REVIEW:
                    factor = taxonomy.by_id(scenario.factor)
                    assert factor.default_relevance is not FactorRelevance.FUNCTIONAL_SAFETY
