"""Resolution-tactic catalog: loading, matching, serializing.

A tactic names a countermeasure, describes it, and lists the obstacles it
resolves by display name.  Matching is by normalized name only (case
folded, whitespace collapsed): no fuzzy matching, so an obstacle the
catalog does not mention simply gets no suggestions.

Catalog format (``#`` comments, same lexical rules as the model format)::

    tactic STRING "{"
        "definition" ":" STRING
        "resolves" ":" "[" STRING ("," STRING)* "]"
    "}"
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable

from .model import Diagnostic, Severity
from .parser import Token, TokenCursor, TokenType, tokenize

_TACTIC_KEYWORD = frozenset({"tactic"})


def normalize(name: str) -> str:
    """Canonical matching key: whitespace collapsed, case folded."""
    return " ".join(name.split()).casefold()


@dataclass(frozen=True, slots=True)
class Tactic:
    """One countermeasure; ``resolves`` holds normalized obstacle keys,
    ``resolves_display`` the spellings to show and serialize."""

    name: str
    definition: str
    resolves: frozenset[str]
    resolves_display: tuple[str, ...]


def _make_tactic(name: str, definition: str, resolves: list[str]) -> Tactic:
    display = sorted(set(resolves), key=lambda s: (s.casefold(), s))
    return Tactic(
        name=name,
        definition=definition,
        resolves=frozenset(normalize(s) for s in resolves),
        resolves_display=tuple(display),
    )


def load_catalog(text: str) -> list[Tactic] | list[Diagnostic]:
    """Parse catalog text into tactics, or the error diagnostics.

    Errors: lexical/syntax problems and duplicate tactic names.  A failed
    block is skipped and parsing resumes at the next ``tactic`` keyword,
    so one broken entry cannot hide the rest.
    """
    tokens, diagnostics = tokenize(text)
    cur = TokenCursor(tokens, diagnostics)
    tactics: list[Tactic] = []
    seen: dict[str, Token] = {}
    while not cur.at(TokenType.EOF):
        if not cur.at(TokenType.IDENT, "tactic"):
            cur.error(f"expected 'tactic', found {cur.current.describe()}")
            cur.take()
            cur.skip_to(_TACTIC_KEYWORD)
            continue
        cur.take()
        name_tok = cur.expect(TokenType.STRING, "the tactic name string")
        if name_tok is None or cur.expect(TokenType.LBRACE, "'{'") is None:
            cur.skip_to(_TACTIC_KEYWORD)
            continue
        definition = _expect_string_field(cur, "definition")
        if definition is None:
            cur.skip_to(_TACTIC_KEYWORD)
            continue
        resolves = _expect_resolves(cur)
        if resolves is None or cur.expect(TokenType.RBRACE, "'}'") is None:
            cur.skip_to(_TACTIC_KEYWORD)
            continue
        name = str(name_tok.value)
        if name in seen:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "duplicate-tactic",
                    f"tactic {name!r} declared twice",
                    name_tok.pos,
                    subject=name,
                )
            )
            continue
        seen[name] = name_tok
        tactics.append(_make_tactic(name, str(definition.value), resolves))
    if diagnostics:
        return diagnostics
    return tactics


def _expect_string_field(cur: TokenCursor, key: str) -> Token | None:
    if cur.expect(TokenType.IDENT, f"'{key}'") is None:
        return None
    if cur.expect(TokenType.COLON, f"':' after '{key}'") is None:
        return None
    return cur.expect(TokenType.STRING, f"a string value for '{key}'")


def _expect_resolves(cur: TokenCursor) -> list[str] | None:
    if cur.expect(TokenType.IDENT, "'resolves'") is None:
        return None
    if cur.expect(TokenType.COLON, "':' after 'resolves'") is None:
        return None
    if cur.expect(TokenType.LBRACKET, "'['") is None:
        return None
    names: list[str] = []
    while True:
        tok = cur.expect(TokenType.STRING, "an obstacle name string")
        if tok is None:
            return None
        names.append(str(tok.value))
        if cur.at(TokenType.COMMA):
            cur.take()
            continue
        if cur.expect(TokenType.RBRACKET, "',' or ']'") is None:
            return None
        return names


def match_tactics(
    obstacle_names: Iterable[str], catalog: Iterable[Tactic]
) -> dict[str, list[str]]:
    """For each queried obstacle display name, the lexicographically sorted
    names of the tactics whose resolves set contains it (after
    normalization).  Unknown names map to empty lists."""
    tactics = list(catalog)
    return {
        name: sorted(t.name for t in tactics if normalize(name) in t.resolves)
        for name in obstacle_names
    }


def serialize_catalog(catalog: Iterable[Tactic]) -> str:
    """Canonical catalog text; load of the output reproduces it exactly."""
    from .parser import _quote

    blocks = []
    for tactic in catalog:
        keys = ", ".join(_quote(k) for k in tactic.resolves_display)
        blocks.append(
            f"tactic {_quote(tactic.name)} {{\n"
            f"  definition: {_quote(tactic.definition)}\n"
            f"  resolves: [{keys}]\n"
            f"}}"
        )
    return "\n\n".join(blocks) + "\n" if blocks else ""


def default_catalog() -> list[Tactic]:
    """The catalog bundled with the package."""
    text = (resources.files("goalrisk") / "data" / "tactics.gt").read_text("utf-8")
    catalog = load_catalog(text)
    if catalog and isinstance(catalog[0], Diagnostic):
        raise RuntimeError(f"bundled catalog is invalid: {catalog[0]}")
    return catalog  # type: ignore[return-value]
