from __future__ import annotations

from pathlib import Path

import pytest

from stpatrace.assemble import assemble_model
from stpatrace.diagnostics import Diagnostic
from stpatrace.dsl import parse
from stpatrace.model import AnalysisModel

ROOT = Path(__file__).resolve().parent.parent
CORPUS_PATH = ROOT / "corpus" / "automated_driving.stpa"
DATA = Path(__file__).resolve().parent / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"


def load_model(text: str, file: str = "<test>") -> tuple[AnalysisModel, list[Diagnostic]]:
    declarations, parse_diags = parse(text, file)
    model, assembly_diags = assemble_model(declarations)
    return model, parse_diags + assembly_diags


@pytest.fixture(scope="session")
def corpus_text() -> str:
    return CORPUS_PATH.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus_model(corpus_text: str) -> AnalysisModel:
    model, diags = load_model(corpus_text, str(CORPUS_PATH))
    assert not diags, diags[:5]
    return model
