"""Core domain types: tokens, statements, connector trees, rules, users, votes.

Everything in here is an immutable value, safe to share between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# A token is a normalized word: lowercased, punctuation-stripped, no whitespace.
# Plain strings keep the rest of the code idiomatic; `tokenize` is the one
# place tokens are made.
Token = str

UserId = int
RuleId = int

# Reserved connector keywords. Never valid as tokens.
CONNECTORS = frozenset({"and", "or", "xor"})

# Words are alphanumeric runs; a decimal point survives only between digits,
# so "3.5" stays one token while "end." splits cleanly.
_TOKEN_RE = re.compile(r"\d+\.\d+|[^\W_]+")

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")


def tokenize(text: str) -> list[Token]:
    """Split text into normalized tokens.

    Lowercases, treats every non-alphanumeric character as a separator
    (except a decimal point inside a number), drops empty fragments, and
    drops standalone connector keywords so the result is always a valid
    fact/token list. Preserves order. Empty input gives an empty list.
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in CONNECTORS]


def is_number_token(token: Token) -> bool:
    return _NUMBER_RE.fullmatch(token) is not None


@dataclass(frozen=True)
class Statement:
    """An atomic multi-token statement inside a rule part.

    Equality and hashing use the token list only; display_text preserves the
    author's original spelling for presentation.
    """

    tokens: tuple[Token, ...]
    display_text: str

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("statement must contain at least one token")

    @classmethod
    def from_text(cls, text: str) -> Statement:
        toks = tuple(tokenize(text))
        if not toks:
            raise ValueError(f"no tokens in statement text: {text!r}")
        return cls(tokens=toks, display_text=text)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Statement):
            return NotImplemented
        return self.tokens == other.tokens

    def __hash__(self) -> int:
        return hash(self.tokens)

    def __repr__(self) -> str:
        return f"Statement({' '.join(self.tokens)!r})"


@dataclass(frozen=True)
class Atom:
    statement: Statement


@dataclass(frozen=True)
class And:
    left: "PartExpr"
    right: "PartExpr"


@dataclass(frozen=True)
class Or:
    left: "PartExpr"
    right: "PartExpr"


@dataclass(frozen=True)
class Xor:
    left: "PartExpr"
    right: "PartExpr"


# A rule part is a boolean connector tree over atomic statements.
PartExpr = Atom | And | Or | Xor


def evaluate(expr: PartExpr, facts: set[Token]) -> bool:
    """Evaluate a part expression against a fact set.

    An atom is true iff every one of its tokens is present in `facts`
    (subset semantics). And/Or are standard; Xor is true iff exactly one
    operand is true. Iterative so arbitrarily long connector chains cannot
    overflow the interpreter stack.
    """
    stack: list[tuple[PartExpr, bool]] = [(expr, False)]
    vals: list[bool] = []
    while stack:
        node, visited = stack.pop()
        if isinstance(node, Atom):
            vals.append(all(t in facts for t in node.statement.tokens))
        elif visited:
            right = vals.pop()
            left = vals.pop()
            if isinstance(node, And):
                vals.append(left and right)
            elif isinstance(node, Or):
                vals.append(left or right)
            else:
                vals.append(left != right)
        else:
            stack.append((node, True))
            stack.append((node.right, False))
            stack.append((node.left, False))
    return vals[0]


@dataclass(frozen=True)
class Rule:
    """An authored IF..THEN rule.

    if_expr/then_expr are the parsed forms of if_text/then_text. `seq` is
    the insertion sequence number; it shares the rule-id counter and is
    never reused after deletion.
    """

    id: RuleId
    author: UserId
    if_expr: PartExpr
    if_text: str
    then_expr: PartExpr
    then_text: str
    seq: int


@dataclass(frozen=True)
class UserAccount:
    """A registered contributor. Only a salted iterated hash is kept."""

    id: UserId
    name: str
    email: str
    salt: bytes
    password_hash: bytes
    iterations: int


@dataclass(frozen=True)
class Vote:
    """A ±1 assessment of a rule by a non-author."""

    voter: UserId
    rule: RuleId
    value: int

    def __post_init__(self) -> None:
        if self.value not in (-1, 1):
            raise ValueError(f"vote value must be -1 or +1, got {self.value}")
