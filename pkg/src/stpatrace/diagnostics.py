"""Source-located diagnostics shared by the lexer, parser, assembler, and checkers."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    """Region of one source line; line and column are 1-based."""

    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if self.column < 1:
            raise ValueError(f"column must be >= 1, got {self.column}")
        if self.length < 0:
            raise ValueError(f"length must be >= 0, got {self.length}")


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    location: SourceSpan | None = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR


def error(code: str, message: str, location: SourceSpan | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, location)


def warning(code: str, message: str, location: SourceSpan | None = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, location)


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


def emit_diagnostics(diagnostics: list[Diagnostic], style: str = "human") -> str:
    """Render diagnostics, one per line, preserving input order.

    ``human`` lines look like ``file:line:col: severity[code]: message``;
    diagnostics without a location drop the position prefix.  ``machine``
    emits one JSON object per line with the keys file, line, column,
    severity, code, and message (null where no location is known).
    """
    if style not in ("human", "machine"):
        raise ValueError(f"unsupported diagnostic style: {style!r}")
    lines = []
    for diag in diagnostics:
        if style == "human":
            prefix = ""
            if diag.location is not None:
                loc = diag.location
                prefix = f"{loc.file}:{loc.line}:{loc.column}: "
            lines.append(f"{prefix}{diag.severity.value}[{diag.code}]: {diag.message}")
        else:
            loc = diag.location
            record = {
                "file": loc.file if loc else None,
                "line": loc.line if loc else None,
                "column": loc.column if loc else None,
                "severity": diag.severity.value,
                "code": diag.code,
                "message": diag.message,
            }
            lines.append(json.dumps(record, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)
