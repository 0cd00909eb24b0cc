"""Parse IF/THEN part text into connector trees, and format trees back.

Grammar (connectors are case-insensitive standalone words, AND binds
tightest, then XOR, then OR, all left-associative):

    part     := or_expr
    or_expr  := xor_expr (OR xor_expr)*
    xor_expr := and_expr (XOR and_expr)*
    and_expr := atom (AND atom)*
    atom     := '(' or_expr ')' | statement

A statement is a maximal run of non-connector, non-parenthesis text whose
tokenization is non-empty.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .model import And, Atom, Or, PartExpr, Statement, Xor, tokenize

DEFAULT_NESTING_LIMIT = 32


class ParseErrorKind(enum.Enum):
    EMPTY = "empty"
    UNBALANCED_PAREN = "unbalanced_paren"
    DANGLING_CONNECTOR = "dangling_connector"
    EMPTY_STATEMENT = "empty_statement"
    TOO_DEEP = "too_deep"


_KIND_MESSAGES = {
    ParseErrorKind.EMPTY: "no statements in part",
    ParseErrorKind.UNBALANCED_PAREN: "unbalanced or misplaced parenthesis",
    ParseErrorKind.DANGLING_CONNECTOR: "connector without a statement on both sides",
    ParseErrorKind.EMPTY_STATEMENT: "empty statement",
    ParseErrorKind.TOO_DEEP: "parenthesis nesting too deep",
}


class ParseError(Exception):
    """A part failed to parse. `position` is a character offset into the input."""

    def __init__(self, kind: ParseErrorKind, position: int):
        self.kind = kind
        self.position = position
        super().__init__(f"{_KIND_MESSAGES[kind]} (at offset {position})")


# Lexer token kinds
_LPAREN = "("
_RPAREN = ")"
_CONNECTOR = "connector"
_STMT = "statement"

_LEX_RE = re.compile(r"\(|\)|\b(?:and|or|xor)\b", re.IGNORECASE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    pos: int
    # connector name ("and"/"or"/"xor") or the fragment's Statement
    value: object = None


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []

    def fragment(start: int, end: int) -> None:
        raw = text[start:end]
        if tokenize(raw):
            offset = start + (len(raw) - len(raw.lstrip()))
            toks.append(_Tok(_STMT, offset, Statement.from_text(raw.strip())))

    last = 0
    for m in _LEX_RE.finditer(text):
        fragment(last, m.start())
        tok = m.group(0)
        if tok == "(":
            toks.append(_Tok(_LPAREN, m.start()))
        elif tok == ")":
            toks.append(_Tok(_RPAREN, m.start()))
        else:
            toks.append(_Tok(_CONNECTOR, m.start(), tok.lower()))
        last = m.end()
    fragment(last, len(text))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], end: int, nesting_limit: int):
        self._toks = toks
        self._i = 0
        self._end = end
        self._depth = 0
        self._limit = nesting_limit

    def peek(self) -> _Tok | None:
        return self._toks[self._i] if self._i < len(self._toks) else None

    def prev(self) -> _Tok | None:
        return self._toks[self._i - 1] if self._i > 0 else None

    def advance(self) -> _Tok:
        tok = self._toks[self._i]
        self._i += 1
        return tok

    def parse(self) -> PartExpr:
        expr = self.or_expr()
        leftover = self.peek()
        if leftover is not None:
            # Balanced counts can still leave a stray ')' or a group glued to
            # a statement without a connector; both involve a parenthesis.
            raise ParseError(ParseErrorKind.UNBALANCED_PAREN, leftover.pos)
        return expr

    def _binary_chain(self, sub, keyword: str, node_type) -> PartExpr:
        expr = sub()
        while True:
            tok = self.peek()
            if tok is None or tok.kind != _CONNECTOR or tok.value != keyword:
                return expr
            self.advance()
            expr = node_type(expr, sub())

    def or_expr(self) -> PartExpr:
        return self._binary_chain(self.xor_expr, "or", Or)

    def xor_expr(self) -> PartExpr:
        return self._binary_chain(self.and_expr, "xor", Xor)

    def and_expr(self) -> PartExpr:
        return self._binary_chain(self.atom, "and", And)

    def atom(self) -> PartExpr:
        tok = self.peek()
        if tok is None:
            prev = self.prev()
            if prev is not None and prev.kind == _CONNECTOR:
                raise ParseError(ParseErrorKind.DANGLING_CONNECTOR, prev.pos)
            raise ParseError(ParseErrorKind.UNBALANCED_PAREN, self._end)
        if tok.kind == _CONNECTOR:
            raise ParseError(ParseErrorKind.DANGLING_CONNECTOR, tok.pos)
        if tok.kind == _RPAREN:
            prev = self.prev()
            if prev is not None and prev.kind == _CONNECTOR:
                raise ParseError(ParseErrorKind.DANGLING_CONNECTOR, prev.pos)
            if prev is not None and prev.kind == _LPAREN:
                raise ParseError(ParseErrorKind.EMPTY_STATEMENT, tok.pos)
            raise ParseError(ParseErrorKind.UNBALANCED_PAREN, tok.pos)
        if tok.kind == _LPAREN:
            self.advance()
            self._depth += 1
            if self._depth > self._limit:
                raise ParseError(ParseErrorKind.TOO_DEEP, tok.pos)
            expr = self.or_expr()
            closing = self.peek()
            if closing is None or closing.kind != _RPAREN:
                pos = closing.pos if closing is not None else self._end
                raise ParseError(ParseErrorKind.UNBALANCED_PAREN, pos)
            self.advance()
            self._depth -= 1
            return expr
        stmt_tok = self.advance()
        return Atom(stmt_tok.value)


def parse_part(text: str, nesting_limit: int = DEFAULT_NESTING_LIMIT) -> PartExpr:
    """Parse the surface text of an IF or THEN part.

    Raises ParseError with a kind and character offset on bad input.
    """
    toks = _lex(text)
    if not toks:
        raise ParseError(ParseErrorKind.EMPTY, 0)
    return _Parser(toks, len(text), nesting_limit).parse()


def flatten_statements(expr: PartExpr) -> list[Statement]:
    """All atom leaves in left-to-right order, duplicates removed."""
    seen: set[tuple[str, ...]] = set()
    out: list[Statement] = []
    stack: list[PartExpr] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            if node.statement.tokens not in seen:
                seen.add(node.statement.tokens)
                out.append(node.statement)
        else:
            stack.append(node.right)
            stack.append(node.left)
    return out


_PRECEDENCE = {Or: 1, Xor: 2, And: 3}
_KEYWORD = {Or: "OR", Xor: "XOR", And: "AND"}


def _prec(node: PartExpr) -> int:
    return 4 if isinstance(node, Atom) else _PRECEDENCE[type(node)]


def format_part(expr: PartExpr) -> str:
    """Canonical text for an expression.

    Statements render as space-joined tokens, connectors uppercase, and
    parentheses appear only where precedence or associativity requires
    them, so parse_part(format_part(e)) is structurally equal to e.
    """
    stack: list[tuple[PartExpr, bool]] = [(expr, False)]
    vals: list[str] = []
    while stack:
        node, visited = stack.pop()
        if isinstance(node, Atom):
            vals.append(" ".join(node.statement.tokens))
        elif visited:
            right = vals.pop()
            left = vals.pop()
            prec = _prec(node)
            if _prec(node.left) < prec:
                left = f"({left})"
            if _prec(node.right) <= prec:  # left-associative: keep right nesting explicit
                right = f"({right})"
            vals.append(f"{left} {_KEYWORD[type(node)]} {right}")
        else:
            stack.append((node, True))
            stack.append((node.right, False))
            stack.append((node.left, False))
    return vals[0]
