"""Text format for goal models: lexer, parser, and canonical serializer.

The format is line-oriented only in its comments (``#`` to end of line);
tokens may otherwise be separated by any whitespace.  Parsing is total: on
an error the parser records a positioned diagnostic and resynchronizes at
the next top-level keyword, so one bad declaration cannot hide findings in
the rest of the file.

Grammar::

    model        := "model" STRING decl*
    decl         := goal | obstacle | obstruction
    goal         := "goal" IDENT "{" goal_attr* "}"
    goal_attr    := "name:" STRING | "category:" STRING | "definition:" STRING
                  | "formal:" STRING | "rds:" NUMBER | "weight:" NUMBER | refine
    obstacle     := "obstacle" IDENT "{" obs_attr* "}"
    obs_attr     := "name:" STRING | "definition:" STRING | "formal:" STRING
                  | "probability:" NUMBER | refine
    refine       := "refine" "and" ("conditional" NUMBER)? "{" IDENT ("," IDENT)* "}"
                  | "refine" "or" "{" orchild ("," orchild)* "}"
    orchild      := IDENT ("@" NUMBER)?
    obstruction  := "obstructs" IDENT "->" IDENT ("conditional" NUMBER)?
    IDENT        := [A-Za-z_][A-Za-z0-9_]*
    NUMBER       := decimal literal (digits with an optional fraction part)
    STRING       := double-quoted, backslash escapes \\" and \\\\
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .model import (
    Diagnostic,
    GoalModel,
    GoalNode,
    NodeId,
    ObstacleNode,
    Obstruction,
    Refinement,
    RefinementKind,
    Severity,
    SourcePosition,
    build_model,
    refinement_map,
)

# Codes of diagnostics produced by the lexer or by grammar handling; the
# cli module maps these to its "parse failure" exit code.
SYNTAX_CODES = frozenset({"bad-char", "bad-number", "bad-escape", "unterminated-string", "syntax-error"})

_TOP_KEYWORDS = frozenset({"goal", "obstacle", "obstructs"})
_STRING_GOAL_ATTRS = {"name", "category", "definition", "formal"}
_NUMBER_GOAL_ATTRS = {"rds", "weight"}
_STRING_OBS_ATTRS = {"name", "definition", "formal"}
_NUMBER_OBS_ATTRS = {"probability"}


class TokenType(Enum):
    IDENT = "identifier"
    STRING = "string"
    NUMBER = "number"
    LBRACE = "'{'"
    RBRACE = "'}'"
    LBRACKET = "'['"
    RBRACKET = "']'"
    COMMA = "','"
    COLON = "':'"
    AT = "'@'"
    ARROW = "'->'"
    EOF = "end of input"


@dataclass(frozen=True, slots=True)
class Token:
    type: TokenType
    text: str
    value: str | float
    pos: SourcePosition

    def describe(self) -> str:
        if self.type in (TokenType.IDENT, TokenType.NUMBER, TokenType.STRING):
            return f"{self.type.value} {self.text!r}"
        return self.type.value


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    """Shared lexical layer for the model and tactic-catalog formats.

    Always returns a token list ending in EOF; lexical problems become
    diagnostics and scanning continues.
    """
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def pos() -> SourcePosition:
        return SourcePosition(line, col)

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    single = {
        "{": TokenType.LBRACE,
        "}": TokenType.RBRACE,
        "[": TokenType.LBRACKET,
        "]": TokenType.RBRACKET,
        ",": TokenType.COMMA,
        ":": TokenType.COLON,
        "@": TokenType.AT,
    }

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance()
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                advance()
            continue
        start = pos()
        if ch in single:
            tokens.append(Token(single[ch], ch, ch, start))
            advance()
            continue
        if ch == "-":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(Token(TokenType.ARROW, "->", "->", start))
                advance(2)
            else:
                diagnostics.append(
                    Diagnostic(Severity.ERROR, "bad-char", "unexpected character '-'", start)
                )
                advance()
            continue
        if ch == '"':
            advance()
            chunks: list[str] = []
            closed = False
            while i < n:
                c = text[i]
                if c == '"':
                    advance()
                    closed = True
                    break
                if c == "\n":
                    break
                if c == "\\":
                    if i + 1 < n and text[i + 1] in ('"', "\\"):
                        chunks.append(text[i + 1])
                        advance(2)
                        continue
                    diagnostics.append(
                        Diagnostic(
                            Severity.ERROR,
                            "bad-escape",
                            "only \\\" and \\\\ escapes are recognized",
                            pos(),
                        )
                    )
                    advance()
                    continue
                chunks.append(c)
                advance()
            if not closed:
                diagnostics.append(
                    Diagnostic(Severity.ERROR, "unterminated-string", "string never closed", start)
                )
            value = "".join(chunks)
            tokens.append(Token(TokenType.STRING, value, value, start))
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            lexeme = text[i:j]
            # A number must end at a delimiter; trailing junk like "0.5x"
            # or "1.2.3" is one bad token, not several.
            k = j
            while k < n and (text[k].isalnum() or text[k] in "._"):
                k += 1
            if k != j:
                diagnostics.append(
                    Diagnostic(
                        Severity.ERROR, "bad-number", f"malformed number {text[i:k]!r}", start
                    )
                )
            tokens.append(Token(TokenType.NUMBER, text[i:k], float(lexeme), start))
            advance(k - i)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            lexeme = text[i:j]
            tokens.append(Token(TokenType.IDENT, lexeme, lexeme, start))
            advance(j - i)
            continue
        diagnostics.append(
            Diagnostic(Severity.ERROR, "bad-char", f"unexpected character {ch!r}", start)
        )
        advance()
    tokens.append(Token(TokenType.EOF, "", "", pos()))
    return tokens, diagnostics


class TokenCursor:
    """Cursor over a token list with the error-recovery helpers shared by
    the model parser and the tactic-catalog parser."""

    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]) -> None:
        self.tokens = tokens
        self.index = 0
        self.diagnostics = diagnostics

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def at(self, ttype: TokenType, value: str | None = None) -> bool:
        tok = self.current
        return tok.type is ttype and (value is None or tok.value == value)

    def take(self) -> Token:
        tok = self.current
        if tok.type is not TokenType.EOF:
            self.index += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> None:
        tok = tok or self.current
        self.diagnostics.append(Diagnostic(Severity.ERROR, "syntax-error", message, tok.pos))

    def expect(self, ttype: TokenType, what: str) -> Token | None:
        if self.current.type is ttype:
            return self.take()
        self.error(f"expected {what}, found {self.current.describe()}")
        return None

    def skip_to(self, keywords: frozenset[str], *, stop_after_rbrace: bool = False) -> None:
        """Resynchronize: advance until a top-level keyword or EOF."""
        while self.current.type is not TokenType.EOF:
            tok = self.current
            if tok.type is TokenType.IDENT and tok.value in keywords:
                return
            self.take()
            if stop_after_rbrace and tok.type is TokenType.RBRACE:
                return


class _ModelParser:
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]) -> None:
        self.cur = TokenCursor(tokens, diagnostics)
        self.diagnostics = diagnostics
        self.name = "model"
        self.goals: list[GoalNode] = []
        self.obstacles: list[ObstacleNode] = []
        self.refinements: list[Refinement] = []
        self.obstructions: list[Obstruction] = []
        self.positions: dict[str, SourcePosition] = {}
        self.references: dict[str, SourcePosition] = {}

    # -- small helpers -----------------------------------------------------

    def _check_unit(self, token: Token, what: str, subject: str) -> float:
        value = float(token.value)
        if not 0.0 <= value <= 1.0:
            self.diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "prob-range",
                    f"{what} must lie in [0,1], got {token.text}",
                    token.pos,
                    subject=subject,
                )
            )
        return value

    def _note_ref(self, ident: Token) -> str:
        self.references.setdefault(str(ident.value), ident.pos)
        return str(ident.value)

    # -- grammar ------------------------------------------------------------

    def parse(self) -> None:
        cur = self.cur
        if cur.at(TokenType.IDENT, "model"):
            cur.take()
            name_tok = cur.expect(TokenType.STRING, "the model name string")
            if name_tok is not None:
                self.name = str(name_tok.value)
        else:
            cur.error("a model file starts with: model \"<name>\"")
            cur.skip_to(_TOP_KEYWORDS)
        while not cur.at(TokenType.EOF):
            tok = cur.current
            if cur.at(TokenType.IDENT, "goal"):
                self._parse_node(is_goal=True)
            elif cur.at(TokenType.IDENT, "obstacle"):
                self._parse_node(is_goal=False)
            elif cur.at(TokenType.IDENT, "obstructs"):
                self._parse_obstruction()
            else:
                cur.error(f"expected a declaration, found {tok.describe()}")
                cur.take()
                cur.skip_to(_TOP_KEYWORDS)

    def _parse_node(self, *, is_goal: bool) -> None:
        cur = self.cur
        keyword = cur.take()  # 'goal' | 'obstacle'
        ident = cur.expect(TokenType.IDENT, f"an identifier after '{keyword.value}'")
        if ident is None:
            cur.skip_to(_TOP_KEYWORDS)
            return
        node_id = str(ident.value)
        self.positions.setdefault(node_id, ident.pos)
        attrs: dict[str, object] = {}
        attr_positions: dict[str, SourcePosition] = {}
        if cur.expect(TokenType.LBRACE, "'{'") is None:
            cur.skip_to(_TOP_KEYWORDS)
            return
        string_attrs = _STRING_GOAL_ATTRS if is_goal else _STRING_OBS_ATTRS
        number_attrs = _NUMBER_GOAL_ATTRS if is_goal else _NUMBER_OBS_ATTRS
        while True:
            if cur.at(TokenType.RBRACE):
                cur.take()
                break
            if cur.at(TokenType.EOF):
                cur.error(f"block of {node_id!r} never closed")
                break
            if cur.at(TokenType.IDENT, "refine"):
                refinement = self._parse_refine(node_id)
                if refinement is not None:
                    self.refinements.append(refinement)
                continue
            tok = cur.current
            if tok.type is TokenType.IDENT and tok.value in (string_attrs | number_attrs):
                cur.take()
                if cur.expect(TokenType.COLON, f"':' after {tok.value!r}") is None:
                    cur.skip_to(_TOP_KEYWORDS, stop_after_rbrace=True)
                    return
                key = str(tok.value)
                if key in string_attrs:
                    value_tok = cur.expect(TokenType.STRING, f"a string value for {key!r}")
                else:
                    value_tok = cur.expect(TokenType.NUMBER, f"a number value for {key!r}")
                if value_tok is None:
                    cur.skip_to(_TOP_KEYWORDS, stop_after_rbrace=True)
                    return
                if key in attrs:
                    self.diagnostics.append(
                        Diagnostic(
                            Severity.ERROR,
                            "duplicate-attr",
                            f"attribute {key!r} set twice in {node_id!r}",
                            tok.pos,
                            subject=node_id,
                        )
                    )
                    continue
                if key in number_attrs and key != "weight":
                    attrs[key] = self._check_unit(value_tok, f"{key} of {node_id!r}", node_id)
                else:
                    attrs[key] = value_tok.value
                attr_positions[key] = value_tok.pos
                continue
            cur.error(
                f"expected an attribute or '}}' in the block of {node_id!r}, "
                f"found {tok.describe()}"
            )
            cur.skip_to(_TOP_KEYWORDS, stop_after_rbrace=True)
            return
        if is_goal:
            self.goals.append(
                GoalNode(
                    id=node_id,
                    name=attrs.get("name"),  # type: ignore[arg-type]
                    category=attrs.get("category"),  # type: ignore[arg-type]
                    definition=attrs.get("definition"),  # type: ignore[arg-type]
                    formal_spec=attrs.get("formal"),  # type: ignore[arg-type]
                    rds=attrs.get("rds"),  # type: ignore[arg-type]
                    weight=attrs.get("weight"),  # type: ignore[arg-type]
                )
            )
        else:
            self.obstacles.append(
                ObstacleNode(
                    id=node_id,
                    name=attrs.get("name"),  # type: ignore[arg-type]
                    definition=attrs.get("definition"),  # type: ignore[arg-type]
                    formal_spec=attrs.get("formal"),  # type: ignore[arg-type]
                    probability=attrs.get("probability"),  # type: ignore[arg-type]
                )
            )

    def _parse_refine(self, parent: str) -> Refinement | None:
        cur = self.cur
        cur.take()  # 'refine'
        kind_tok = cur.current
        if not (cur.at(TokenType.IDENT, "and") or cur.at(TokenType.IDENT, "or")):
            cur.error(f"expected 'and' or 'or' after 'refine', found {kind_tok.describe()}")
            cur.skip_to(_TOP_KEYWORDS, stop_after_rbrace=True)
            return None
        cur.take()
        kind = RefinementKind(str(kind_tok.value))
        and_conditional: float | None = None
        if kind is RefinementKind.AND and cur.at(TokenType.IDENT, "conditional"):
            cur.take()
            num = cur.expect(TokenType.NUMBER, "a number after 'conditional'")
            if num is None:
                return None
            and_conditional = self._check_unit(num, f"conditional of {parent!r}", parent)
        if cur.expect(TokenType.LBRACE, "'{' opening the child list") is None:
            return None
        children: list[str] = []
        or_conditionals: list[float | None] = []
        while True:
            ident = cur.expect(TokenType.IDENT, "a child identifier")
            if ident is None:
                cur.skip_to(_TOP_KEYWORDS, stop_after_rbrace=True)
                return None
            children.append(self._note_ref(ident))
            conditional: float | None = None
            if kind is RefinementKind.OR and cur.at(TokenType.AT):
                cur.take()
                num = cur.expect(TokenType.NUMBER, "a number after '@'")
                if num is None:
                    return None
                conditional = self._check_unit(
                    num, f"conditional of child {ident.value!r}", parent
                )
            or_conditionals.append(conditional)
            if cur.at(TokenType.COMMA):
                cur.take()
                continue
            if cur.expect(TokenType.RBRACE, "',' or '}' in the child list") is None:
                cur.skip_to(_TOP_KEYWORDS, stop_after_rbrace=True)
                return None
            break
        if kind is RefinementKind.AND:
            return Refinement(parent, kind, tuple(children), and_conditional=and_conditional)
        return Refinement(parent, kind, tuple(children), or_conditionals=tuple(or_conditionals))

    def _parse_obstruction(self) -> None:
        cur = self.cur
        cur.take()  # 'obstructs'
        source = cur.expect(TokenType.IDENT, "an obstacle identifier after 'obstructs'")
        if source is None:
            cur.skip_to(_TOP_KEYWORDS)
            return
        if cur.expect(TokenType.ARROW, "'->'") is None:
            cur.skip_to(_TOP_KEYWORDS)
            return
        target = cur.expect(TokenType.IDENT, "a goal identifier after '->'")
        if target is None:
            cur.skip_to(_TOP_KEYWORDS)
            return
        conditional: float | None = None
        if cur.at(TokenType.IDENT, "conditional"):
            cur.take()
            num = cur.expect(TokenType.NUMBER, "a number after 'conditional'")
            if num is None:
                cur.skip_to(_TOP_KEYWORDS)
                return
            conditional = self._check_unit(
                num,
                f"conditional of obstruction {source.value!r} -> {target.value!r}",
                str(source.value),
            )
        self.obstructions.append(
            Obstruction(self._note_ref(source), self._note_ref(target), conditional)
        )


def parse(text: str) -> GoalModel | list[Diagnostic]:
    """Parse model text; returns the model or the full diagnostic list.

    A returned model passed all structural checks with no errors.  On
    failure every diagnostic carries a source position: parse-level ones
    point inside the offending token, and structural ones point at the
    declaration (or first reference) of the node they concern.
    """
    tokens, diagnostics = tokenize(text)
    parser = _ModelParser(tokens, diagnostics)
    parser.parse()

    result = build_model(
        parser.goals,
        parser.obstacles,
        parser.refinements,
        parser.obstructions,
        name=parser.name,
        positions=parser.positions,
    )
    parse_level = {(d.code, d.subject) for d in diagnostics}
    structural: list[Diagnostic] = []
    if isinstance(result, list):
        positions = dict(parser.positions)
        for node_id, position in parser.references.items():
            positions.setdefault(node_id, position)
        for diag in result:
            if (diag.code, diag.subject) in parse_level:
                continue  # the parser already reported it at the exact token
            if diag.location is None and diag.subject in positions:
                diag = dataclasses.replace(diag, location=positions[diag.subject])
            structural.append(diag)
    if diagnostics or any(d.is_error for d in structural):
        merged = diagnostics + structural
        merged.sort(
            key=lambda d: (
                d.location is None,
                d.location.line if d.location else 0,
                d.location.column if d.location else 0,
                d.code,
            )
        )
        return merged
    assert isinstance(result, GoalModel)
    return result


def format_number(value: float) -> str:
    """Minimal-digit decimal that parses back to exactly ``value``."""
    return np.format_float_positional(float(value), unique=True, trim="-")


def _quote(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise ValueError("the format cannot represent strings containing newlines")
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _refine_text(refinement: Refinement) -> str:
    if refinement.kind is RefinementKind.AND:
        head = "refine and"
        if refinement.and_conditional is not None:
            head += f" conditional {format_number(refinement.and_conditional)}"
        body = ", ".join(refinement.children)
        return f"{head} {{ {body} }}"
    conditionals = refinement.or_conditionals or (None,) * len(refinement.children)
    entries = [
        child if cond is None else f"{child}@{format_number(cond)}"
        for child, cond in zip(refinement.children, conditionals)
    ]
    return "refine or { " + ", ".join(entries) + " }"


def serialize(model: GoalModel) -> str:
    """Canonical text for a model: declarations sorted by kind then id,
    attributes in a fixed order, numbers with minimal digits.

    ``parse(serialize(m))`` equals ``m`` for every valid model whose string
    attributes contain no newlines (the format has no escape for them).
    """
    refinements = refinement_map(model)
    paragraphs = [f"model {_quote(model.name)}"]

    for goal in model.goals:
        lines = []
        if goal.name is not None:
            lines.append(f"  name: {_quote(goal.name)}")
        if goal.category is not None:
            lines.append(f"  category: {_quote(goal.category)}")
        if goal.definition is not None:
            lines.append(f"  definition: {_quote(goal.definition)}")
        if goal.formal_spec is not None:
            lines.append(f"  formal: {_quote(goal.formal_spec)}")
        if goal.rds is not None:
            lines.append(f"  rds: {format_number(goal.rds)}")
        if goal.weight is not None:
            lines.append(f"  weight: {format_number(goal.weight)}")
        if goal.id in refinements:
            lines.append(f"  {_refine_text(refinements[goal.id])}")
        paragraphs.append(_block("goal", goal.id, lines))

    for obstacle in model.obstacles:
        lines = []
        if obstacle.name is not None:
            lines.append(f"  name: {_quote(obstacle.name)}")
        if obstacle.definition is not None:
            lines.append(f"  definition: {_quote(obstacle.definition)}")
        if obstacle.formal_spec is not None:
            lines.append(f"  formal: {_quote(obstacle.formal_spec)}")
        if obstacle.probability is not None:
            lines.append(f"  probability: {format_number(obstacle.probability)}")
        if obstacle.id in refinements:
            lines.append(f"  {_refine_text(refinements[obstacle.id])}")
        paragraphs.append(_block("obstacle", obstacle.id, lines))

    for link in model.obstructions:
        line = f"obstructs {link.obstacle} -> {link.goal}"
        if link.conditional is not None:
            line += f" conditional {format_number(link.conditional)}"
        paragraphs.append(line)

    return "\n\n".join(paragraphs) + "\n"


def _block(keyword: str, node_id: str, lines: list[str]) -> str:
    if not lines:
        return f"{keyword} {node_id} {{}}"
    return f"{keyword} {node_id} {{\n" + "\n".join(lines) + "\n}"
