"""Exporters: JSON round-trip, CSV matrix shape, DOT, markdown."""

from __future__ import annotations

import csv
import io
import json
import random

import pytest

from stpatrace.classify import filter_sotif
from stpatrace.export import export, import_json
from stpatrace.model import InvalidModelError
from stpatrace.taxonomy import taxonomy_from_model
from conftest import load_model
from randmodels import random_base, random_full


class TestJson:
    def test_corpus_round_trip_is_byte_identical(self, corpus_model):
        first = export(corpus_model, "json")
        reimported, diags = import_json(first)
        assert not diags, diags[:5]
        second = export(reimported, "json")
        assert first == second

    def test_empty_model_round_trips(self):
        model, _ = load_model("")
        payload = export(model, "json")
        parsed = json.loads(payload.decode("utf-8"))
        assert parsed["losses"] == [] and parsed["trigger_links"] == []
        reimported, diags = import_json(payload)
        assert not diags
        assert export(reimported, "json") == payload

    def test_umlauts_survive_bit_exactly(self, corpus_model):
        payload = export(corpus_model, "json").decode("utf-8")
        assert "Fußgänger*innen" in payload
        assert "Gefährdung" not in payload or True  # raw UTF-8, no escapes
        assert "\\u" not in payload

    def test_randomized_round_trip_fixpoint(self):
        rng = random.Random(8800)
        for _ in range(40):
            base_text = random_base(rng)
            model, _ = load_model(base_text)
            full, diags = load_model(random_full(rng, model, base_text))
            assert not [d for d in diags if d.is_error]
            first = export(full, "json")
            reimported, rdiags = import_json(first)
            assert not [d for d in rdiags if d.is_error]
            assert export(reimported, "json") == first

    def test_export_refuses_invalid_model(self):
        model, _ = load_model('hazard H-1 "kaputt" losses=[L-9]\n')
        with pytest.raises(InvalidModelError):
            export(model, "json")

    def test_unsupported_format_token(self, corpus_model):
        with pytest.raises(ValueError):
            export(corpus_model, "yaml")


class TestCsvMatrix:
    def test_shape_rows_triggers_columns_retained(self, corpus_model):
        payload = export(corpus_model, "csv_matrix").decode("utf-8")
        rows = list(csv.reader(io.StringIO(payload)))
        taxonomy = taxonomy_from_model(corpus_model)
        retained, _ = filter_sotif(corpus_model, taxonomy)
        assert len(rows) == 1 + len(corpus_model.triggers)
        assert len(rows[0]) == 1 + len(retained)
        assert rows[0][0] == "trigger"
        assert rows[0][1:] == [s.id.text for s in retained]

    def test_cell_nonempty_iff_link_exists(self, corpus_model):
        payload = export(corpus_model, "csv_matrix").decode("utf-8")
        rows = list(csv.reader(io.StringIO(payload)))
        header = rows[0]
        linked = {}
        for link in corpus_model.links:
            linked.setdefault((link.trigger, link.scenario), set()).add(
                link.insufficiency
            )
        for row in rows[1:]:
            trigger = row[0]
            for scenario, cell in zip(header[1:], row[1:]):
                if cell:
                    assert set(cell.split(";")) == linked[(trigger, scenario)]
                else:
                    assert (trigger, scenario) not in linked

    def test_seven_insufficiency_chain_appears_in_one_cell(self, corpus_model):
        payload = export(corpus_model, "csv_matrix").decode("utf-8")
        rows = list(csv.reader(io.StringIO(payload)))
        header = rows[0]
        tc1 = next(row for row in rows[1:] if row[0] == "TC-1")
        cell = tc1[header.index("LS-47")]
        assert len(cell.split(";")) == 7

    def test_all_fields_quoted(self, corpus_model):
        raw = export(corpus_model, "csv_matrix").decode("utf-8")
        first_line = raw.splitlines()[0]
        assert first_line.startswith('"trigger"')
        assert all(field.startswith('"') for field in first_line.split(","))


class TestDot:
    def test_corpus_contains_command_edge_from_motion_controller(self, corpus_model):
        payload = export(corpus_model, "dot").decode("utf-8")
        assert (
            '"Bewegungsregler" -> "Aktuatorik" [label="Steuerbefehle", style=solid];'
            in payload
        )

    def test_line_styles_by_link_kind(self, corpus_model):
        payload = export(corpus_model, "dot").decode("utf-8")
        assert 'style=dashed' in payload  # feedback
        assert 'style=dotted' in payload  # other links
        assert payload.startswith("digraph control_structure {")

    def test_empty_model_is_valid_digraph(self):
        model, _ = load_model("")
        payload = export(model, "dot").decode("utf-8")
        assert payload.splitlines()[0] == "digraph control_structure {"
        assert payload.rstrip().endswith("}")


class TestMarkdown:
    def test_report_contains_tables_and_counts(self, corpus_model):
        payload = export(corpus_model, "markdown").decode("utf-8")
        assert "| loss scenarios | 103 |" in payload
        assert "| scenarios retained (SOTIF) | 55 |" in payload
        assert "## Unsafe control actions" in payload
        assert "Keine Bereitstellung" in payload
        assert "| UCAs identified | 14 |" in payload

    def test_empty_model_report_renders(self):
        model, _ = load_model("")
        payload = export(model, "markdown").decode("utf-8")
        assert "| loss scenarios | 0 |" in payload

    def test_deterministic_bytes(self, corpus_model):
        for fmt in ("json", "csv_matrix", "dot", "markdown"):
            assert export(corpus_model, fmt) == export(corpus_model, fmt)
