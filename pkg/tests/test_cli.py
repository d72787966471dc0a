"""Command-line driver: subcommand contracts, exit codes, determinism."""

from __future__ import annotations

import io
import json
import shutil
from pathlib import Path

from stpatrace.cli import run_cli
from conftest import CORPUS_PATH, DATA, load_model


def run(argv: list[str]) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


CORPUS = str(CORPUS_PATH)


class TestCheck:
    def test_corpus_is_clean_exit_zero(self):
        code, out, err = run(["check", CORPUS])
        assert code == 0
        assert out == "" and err == ""

    def test_empty_file_exit_zero(self, tmp_path: Path):
        empty = tmp_path / "empty.stpa"
        empty.write_text("", encoding="utf-8")
        code, out, err = run(["check", str(empty)])
        assert code == 0 and err == ""

    def test_error_diagnostics_exit_one(self):
        code, _, err = run(["check", str(DATA / "model.stpa")])
        assert code == 1
        assert 'error[E002]: unknown reference "UCA-9"' in err

    def test_warnings_alone_keep_exit_zero(self, tmp_path: Path):
        f = tmp_path / "w.stpa"
        f.write_text('hazard H-1 "ohne Verlust"\n', encoding="utf-8")
        code, _, err = run(["check", str(f)])
        assert code == 0
        assert "warning[W101]" in err
        assert "warning[W103]" in err

    def test_machine_diagnostics_are_json_lines(self):
        code, _, err = run(["--machine", "check", str(DATA / "model.stpa")])
        assert code == 1
        records = [json.loads(line) for line in err.splitlines()]
        assert any(r["code"] == "E002" and r["line"] == 14 for r in records)

    def test_unreadable_file_exit_two(self):
        code, _, err = run(["check", "/nonexistent/nope.stpa"])
        assert code == 2
        assert "cannot read" in err


class TestGen:
    def test_gen_ucas_mini_prints_four_candidates(self):
        code, out, err = run(["gen", "ucas", str(DATA / "mini.stpa")])
        assert code == 0 and err == ""
        lines = out.splitlines()
        assert len(lines) == 4
        assert all(line.startswith("uca UCA-") for line in lines)

    def test_gen_ucas_corpus_prints_24(self):
        code, out, _ = run(["gen", "ucas", CORPUS])
        assert code == 0
        assert len(out.splitlines()) == 24

    def test_gen_write_then_regen_is_noop(self, tmp_path: Path):
        work = tmp_path / "work.stpa"
        shutil.copy(DATA / "mini.stpa", work)
        code, out, _ = run(["gen", "ucas", str(work), "--write"])
        assert code == 0 and out == ""
        model, diags = load_model(work.read_text(encoding="utf-8"), str(work))
        assert not diags and len(model.ucas) == 4

        before = work.read_text(encoding="utf-8")
        code, out, _ = run(["gen", "ucas", str(work), "--write"])
        assert code == 0
        assert work.read_text(encoding="utf-8") == before

    def test_gen_scenarios_write_then_regen_is_noop(self, tmp_path: Path):
        work = tmp_path / "work.stpa"
        text = (DATA / "mini.stpa").read_text(encoding="utf-8")
        text += (
            "uca UCA-1 action=CA-1 guide=not_provided behavior=HB-1 status=retained\n"
        )
        work.write_text(text, encoding="utf-8")
        code, _, _ = run(["gen", "scenarios", str(work), "--write"])
        assert code == 0
        model, diags = load_model(work.read_text(encoding="utf-8"), str(work))
        assert not [d for d in diags if d.is_error]
        # Default taxonomy was injected alongside the scenarios.
        assert len(model.factors) == 12
        assert len(model.scenarios) > 0

        before = work.read_text(encoding="utf-8")
        code, _, _ = run(["gen", "scenarios", str(work), "--write"])
        assert work.read_text(encoding="utf-8") == before

    def test_gen_write_requires_single_file(self):
        code, _, err = run(["gen", "ucas", CORPUS, CORPUS, "--write"])
        assert code == 2
        assert "exactly one input file" in err

    def test_merge_flag_reduces_corpus_expansion(self):
        code, plain, _ = run(["gen", "scenarios", CORPUS])
        code2, merged, _ = run(["gen", "scenarios", CORPUS, "--merge-controller-flaws"])
        assert code == 0 and code2 == 0
        assert len(plain.splitlines()) == 103
        assert len(merged.splitlines()) == 86


class TestClassify:
    def test_corpus_partition_summary(self):
        code, out, _ = run(["classify", CORPUS])
        assert code == 0
        assert "sotif: 55" in out
        assert "functional_safety: 48" in out
        assert "retained: 55" in out
        assert "excluded: 48" in out


class TestTrace:
    def test_trace_from_loss(self):
        code, out, _ = run(["trace", CORPUS, "--from", "L-1"])
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("L-1 ")
        assert any(line.strip().startswith("TC-5 ") for line in lines)

    def test_trace_from_trigger(self):
        code, out, _ = run(["trace", CORPUS, "--from", "TC-1"])
        assert code == 0
        scenario_lines = [
            line for line in out.splitlines() if line.startswith("  LS-")
        ]
        assert len(scenario_lines) == 41

    def test_trace_from_other_kind_is_usage_error(self):
        code, _, err = run(["trace", CORPUS, "--from", "UCA-1"])
        assert code == 2
        assert "loss" in err and "trigger" in err

    def test_trace_unknown_id_is_usage_error(self):
        code, _, err = run(["trace", CORPUS, "--from", "L-9"])
        assert code == 2


class TestStats:
    def test_corpus_stats_lines(self):
        code, out, _ = run(["stats", CORPUS])
        assert code == 0
        assert "scenarios: 103\n" in out
        assert "sotif_retained: 55\n" in out
        assert "triggers: 18\n" in out
        assert "ucas_identified: 14\n" in out
        assert "ucas_sotif_scope: 12\n" in out


class TestExport:
    def test_export_json_to_file(self, tmp_path: Path):
        target = tmp_path / "model.json"
        code, out, _ = run(["export", CORPUS, "--format", "json", "--out", str(target)])
        assert code == 0 and out == ""
        payload = json.loads(target.read_text(encoding="utf-8"))
        assert len(payload["scenarios"]) == 103

    def test_export_formats_to_stdout(self):
        for fmt in ("json", "csv", "dot", "markdown"):
            code, out, _ = run(["export", CORPUS, "--format", fmt])
            assert code == 0 and out

    def test_export_bad_format_is_usage_error(self):
        code, _, err = run(["export", CORPUS, "--format", "yaml"])
        assert code == 2


class TestDeterminism:
    def test_every_subcommand_is_byte_stable(self):
        invocations = [
            ["check", CORPUS],
            ["gen", "ucas", CORPUS],
            ["gen", "scenarios", CORPUS],
            ["gen", "scenarios", CORPUS, "--merge-controller-flaws"],
            ["classify", CORPUS],
            ["trace", CORPUS, "--from", "L-1"],
            ["trace", CORPUS, "--from", "TC-1"],
            ["stats", CORPUS],
            ["export", CORPUS, "--format", "json"],
            ["export", CORPUS, "--format", "csv"],
            ["export", CORPUS, "--format", "dot"],
            ["export", CORPUS, "--format", "markdown"],
        ]
        for argv in invocations:
            first = run(argv)
            second = run(argv)
            assert first == second, argv
