"""Lexer and parser for the ``.stpa`` authoring language.

The language is line oriented: every declaration is one logical line.
A declaration starts with a keyword, followed by an identifier, an
optional description string, and ``key=value`` attributes.  Reference
lists are written ``[ID, ID, ...]``, free narrative text as a trailing
``text "..."`` attribute, and trigger links as
``link TC-x -> LS-y via FI-z``.  ``#`` starts a comment that runs to the
end of the line.  Keywords are English; payload strings may be any
language and are stored verbatim.

Parsing recovers after an erroneous line: one diagnostic is reported per
bad line and later declarations are still produced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from stpatrace.diagnostics import Diagnostic, SourceSpan, error

KEYWORDS = frozenset(
    {
        "loss",
        "hazard",
        "behavior",
        "controller",
        "human",
        "sensor",
        "actuator",
        "process",
        "action",
        "feedback",
        "uca",
        "factor",
        "context",
        "scenario",
        "trigger",
        "insufficiency",
        "link",
    }
)

# Identifiers: word characters, with interior dashes only when followed by
# another word character so that `TC-1->LS-2` splits into ident/arrow/ident.
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*")


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    STRING = "string"
    EQUALS = "equals"
    ARROW = "arrow"
    LBRACKET = "lbracket"
    RBRACKET = "rbracket"
    COMMA = "comma"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: str
    span: SourceSpan


@dataclass(frozen=True)
class Ref:
    """A referenced identifier with the span of its lexeme."""

    value: str
    span: SourceSpan


@dataclass(frozen=True)
class AttrValue:
    """Attribute payload: a scalar string or a list of references."""

    value: str | tuple[Ref, ...]
    span: SourceSpan

    @property
    def is_list(self) -> bool:
        return isinstance(self.value, tuple)


@dataclass(frozen=True)
class Declaration:
    keyword: str
    id: str
    span: SourceSpan
    id_span: SourceSpan | None = None
    description: str | None = None
    description_span: SourceSpan | None = None
    attributes: dict[str, AttrValue] = field(default_factory=dict)


def tokenize(source: str, file: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    """Split source text into tokens; every token carries a SourceSpan."""
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    for line_no, raw_line in enumerate(source.split("\n"), start=1):
        line = raw_line.rstrip("\r")
        pos = 0
        at_line_start = True
        while pos < len(line):
            ch = line[pos]
            if ch in " \t":
                pos += 1
                continue
            if ch == "#":
                break
            col = pos + 1
            if ch == '"':
                value, end, closed = _scan_string(line, pos)
                span = SourceSpan(file, line_no, col, end - pos)
                if not closed:
                    diagnostics.append(
                        error("E100", "unterminated string literal", span)
                    )
                    break
                tokens.append(Token(TokenKind.STRING, value, span))
                pos = end
                at_line_start = False
                continue
            match = _IDENT_RE.match(line, pos)
            if match:
                word = match.group(0)
                span = SourceSpan(file, line_no, col, len(word))
                kind = (
                    TokenKind.KEYWORD
                    if at_line_start and word in KEYWORDS
                    else TokenKind.IDENT
                )
                tokens.append(Token(kind, word, span))
                pos = match.end()
                at_line_start = False
                continue
            if ch == "-" and pos + 1 < len(line) and line[pos + 1] == ">":
                tokens.append(Token(TokenKind.ARROW, "->", SourceSpan(file, line_no, col, 2)))
                pos += 2
                at_line_start = False
                continue
            single = {
                "=": TokenKind.EQUALS,
                "[": TokenKind.LBRACKET,
                "]": TokenKind.RBRACKET,
                ",": TokenKind.COMMA,
            }.get(ch)
            if single is not None:
                tokens.append(Token(single, ch, SourceSpan(file, line_no, col, 1)))
                pos += 1
                at_line_start = False
                continue
            diagnostics.append(
                error("E101", f"illegal character {ch!r}", SourceSpan(file, line_no, col, 1))
            )
            pos += 1
            at_line_start = False
    return tokens, diagnostics


def _scan_string(line: str, start: int) -> tuple[str, int, bool]:
    """Scan a quoted string starting at ``line[start] == '"'``.

    Returns (value, end position after the closing quote, closed flag).
    ``\\"`` and ``\\\\`` are unescaped; any other backslash pair is kept.
    """
    chars: list[str] = []
    pos = start + 1
    while pos < len(line):
        ch = line[pos]
        if ch == "\\" and pos + 1 < len(line):
            nxt = line[pos + 1]
            if nxt in ('"', "\\"):
                chars.append(nxt)
            else:
                chars.append(ch)
                chars.append(nxt)
            pos += 2
            continue
        if ch == '"':
            return "".join(chars), pos + 1, True
        chars.append(ch)
        pos += 1
    return "".join(chars), pos, False


# Attribute grammar per declaration keyword: which key=value attributes are
# allowed, which of them are reference lists, and which are required.
_SCALAR_ATTRS: dict[str, frozenset[str]] = {
    "loss": frozenset(),
    "hazard": frozenset(),
    "behavior": frozenset(),
    "controller": frozenset(),
    "human": frozenset(),
    "sensor": frozenset(),
    "actuator": frozenset(),
    "process": frozenset(),
    "action": frozenset({"source", "target"}),
    "feedback": frozenset({"source", "target", "kind"}),
    "uca": frozenset({"action", "guide", "behavior", "status", "reason"}),
    "factor": frozenset({"category", "relevance"}),
    "context": frozenset(),
    "scenario": frozenset({"uca", "factor", "locus", "context", "relevance"}),
    "trigger": frozenset(),
    "insufficiency": frozenset({"locus"}),
}

_LIST_ATTRS: dict[str, frozenset[str]] = {
    "loss": frozenset(),
    "hazard": frozenset({"losses"}),
    "behavior": frozenset({"hazards"}),
    "controller": frozenset(),
    "human": frozenset(),
    "sensor": frozenset(),
    "actuator": frozenset(),
    "process": frozenset(),
    "action": frozenset({"behaviors"}),
    "feedback": frozenset(),
    "uca": frozenset(),
    "factor": frozenset({"locus"}),
    "context": frozenset({"behaviors"}),
    "scenario": frozenset(),
    "trigger": frozenset(),
    "insufficiency": frozenset(),
}

_TEXT_ATTR_KEYWORDS = frozenset({"uca", "scenario"})

_REQUIRED_ATTRS: dict[str, tuple[str, ...]] = {
    "loss": (),
    "hazard": (),
    "behavior": (),
    "controller": (),
    "human": (),
    "sensor": (),
    "actuator": (),
    "process": (),
    "action": ("source", "target"),
    "feedback": ("source", "target"),
    "uca": ("action", "guide", "behavior"),
    "factor": ("category", "locus"),
    "context": ("behaviors",),
    "scenario": ("uca", "factor", "locus"),
    "trigger": (),
    "insufficiency": ("locus",),
}

# Keywords whose declarations require a description (or name) string.
_DESCRIPTION_REQUIRED = frozenset(
    {
        "loss",
        "hazard",
        "behavior",
        "controller",
        "human",
        "sensor",
        "actuator",
        "process",
        "action",
        "feedback",
        "factor",
        "context",
        "trigger",
        "insufficiency",
    }
)


def parse(source: str, file: str = "<input>") -> tuple[list[Declaration], list[Diagnostic]]:
    """Parse source text into declarations in source order.

    A bad line yields one diagnostic and no declaration; parsing then
    continues with the next line.
    """
    tokens, diagnostics = tokenize(source, file)
    bad_lines = {d.location.line for d in diagnostics if d.location is not None}

    lines: dict[int, list[Token]] = {}
    for token in tokens:
        lines.setdefault(token.span.line, []).append(token)

    declarations: list[Declaration] = []
    for line_no in sorted(lines):
        if line_no in bad_lines:
            continue
        line_tokens = lines[line_no]
        decl, diags = _parse_line(line_tokens)
        diagnostics.extend(diags)
        if decl is not None:
            declarations.append(decl)
    return declarations, diagnostics


def _parse_line(tokens: list[Token]) -> tuple[Declaration | None, list[Diagnostic]]:
    head = tokens[0]
    if head.kind is not TokenKind.KEYWORD:
        return None, [error("E110", f"unknown keyword {head.value!r}", head.span)]
    if head.value == "link":
        return _parse_link(tokens)
    return _parse_entity(tokens)


def _parse_link(tokens: list[Token]) -> tuple[Declaration | None, list[Diagnostic]]:
    head = tokens[0]
    rest = tokens[1:]
    shape_ok = (
        len(rest) == 5
        and rest[0].kind is TokenKind.IDENT
        and rest[1].kind is TokenKind.ARROW
        and rest[2].kind is TokenKind.IDENT
        and rest[3].kind is TokenKind.IDENT
        and rest[3].value == "via"
        and rest[4].kind is TokenKind.IDENT
    )
    if not shape_ok:
        return None, [
            error(
                "E112",
                "malformed link declaration, expected: link TC-x -> LS-y via FI-z",
                head.span,
            )
        ]
    attributes = {
        "trigger": AttrValue(rest[0].value, rest[0].span),
        "scenario": AttrValue(rest[2].value, rest[2].span),
        "via": AttrValue(rest[4].value, rest[4].span),
    }
    decl = Declaration(
        keyword="link",
        id="",
        span=head.span,
        attributes=attributes,
    )
    return decl, []


def _parse_entity(tokens: list[Token]) -> tuple[Declaration | None, list[Diagnostic]]:
    head = tokens[0]
    keyword = head.value
    if len(tokens) < 2 or tokens[1].kind is not TokenKind.IDENT:
        return None, [
            error("E111", f"missing identifier after {keyword!r}", head.span)
        ]
    ident = tokens[1]
    pos = 2

    description: str | None = None
    description_span: SourceSpan | None = None
    if pos < len(tokens) and tokens[pos].kind is TokenKind.STRING:
        description = tokens[pos].value
        description_span = tokens[pos].span
        pos += 1

    attributes: dict[str, AttrValue] = {}
    diagnostics: list[Diagnostic] = []
    scalar_attrs = _SCALAR_ATTRS[keyword]
    list_attrs = _LIST_ATTRS[keyword]

    while pos < len(tokens):
        token = tokens[pos]
        if token.kind not in (TokenKind.IDENT, TokenKind.KEYWORD):
            return None, [
                error("E112", f"unexpected token {token.value!r}", token.span)
            ]
        name = token.value
        # Trailing free text: `text "..."` without an equals sign.
        if name == "text" and keyword in _TEXT_ATTR_KEYWORDS:
            if pos + 1 >= len(tokens) or tokens[pos + 1].kind is not TokenKind.STRING:
                return None, [
                    error("E112", "expected string after 'text'", token.span)
                ]
            value = AttrValue(tokens[pos + 1].value, tokens[pos + 1].span)
            pos += 2
        else:
            if name not in scalar_attrs and name not in list_attrs:
                return None, [
                    error(
                        "E112",
                        f"unknown attribute {name!r} for {keyword!r}",
                        token.span,
                    )
                ]
            if pos + 1 >= len(tokens) or tokens[pos + 1].kind is not TokenKind.EQUALS:
                return None, [
                    error("E112", f"expected '=' after attribute {name!r}", token.span)
                ]
            value, new_pos, diag = _parse_attr_value(tokens, pos + 2, name, name in list_attrs)
            if diag is not None:
                return None, [diag]
            assert value is not None
            pos = new_pos
        if name in attributes:
            # Cardinality violation: the same attribute twice on one line
            # (e.g. a UCA with two guide words).  First value wins.
            diagnostics.append(
                error("E003", f"duplicate attribute {name!r}", token.span)
            )
            continue
        attributes[name] = value

    missing = [
        name for name in _REQUIRED_ATTRS[keyword] if name not in attributes
    ]
    if description is None and keyword in _DESCRIPTION_REQUIRED:
        missing.insert(0, "description")
    if missing:
        return None, [
            error(
                "E111",
                f"missing required attribute(s) for {keyword!r}: " + ", ".join(missing),
                head.span,
            )
        ]

    decl = Declaration(
        keyword=keyword,
        id=ident.value,
        span=head.span,
        id_span=ident.span,
        description=description,
        description_span=description_span,
        attributes=attributes,
    )
    return decl, diagnostics


def _parse_attr_value(
    tokens: list[Token], pos: int, name: str, is_list: bool
) -> tuple[AttrValue | None, int, Diagnostic | None]:
    if pos >= len(tokens):
        anchor = tokens[-1]
        return None, pos, error(
            "E112", f"missing value for attribute {name!r}", anchor.span
        )
    token = tokens[pos]
    if is_list:
        if token.kind is not TokenKind.LBRACKET:
            return None, pos, error(
                "E112", f"attribute {name!r} expects a reference list", token.span
            )
        refs: list[Ref] = []
        pos += 1
        expect_ref = True
        while pos < len(tokens):
            token = tokens[pos]
            if token.kind is TokenKind.RBRACKET:
                if expect_ref and refs:
                    return None, pos, error(
                        "E112", "trailing comma in reference list", token.span
                    )
                value_span = refs[0].span if refs else token.span
                return AttrValue(tuple(refs), value_span), pos + 1, None
            if expect_ref:
                if token.kind is not TokenKind.IDENT:
                    return None, pos, error(
                        "E112",
                        f"expected identifier in reference list, got {token.value!r}",
                        token.span,
                    )
                refs.append(Ref(token.value, token.span))
                expect_ref = False
            else:
                if token.kind is not TokenKind.COMMA:
                    return None, pos, error(
                        "E112",
                        f"expected ',' or ']' in reference list, got {token.value!r}",
                        token.span,
                    )
                expect_ref = True
            pos += 1
        return None, pos, error(
            "E112", f"unterminated reference list for {name!r}", tokens[-1].span
        )
    if token.kind in (TokenKind.IDENT, TokenKind.STRING):
        return AttrValue(token.value, token.span), pos + 1, None
    return None, pos, error(
        "E112", f"malformed value for attribute {name!r}", token.span
    )
