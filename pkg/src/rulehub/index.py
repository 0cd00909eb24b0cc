"""Inverted index over rule parts, built from scratch.

Each posting maps a statement token to the ids of rules whose IF (or THEN)
part contains a statement using that token. The index accelerates two
queries: conjunctive browse search and candidate lookup for the dialog
engine. Candidate lookup returns a superset that the caller narrows by
exact evaluation; any IF tree that evaluates true over a fact set must
contain at least one leaf whose tokens are all facts, so indexing leaf
tokens cannot miss a firing rule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .model import Rule, RuleId, Token, evaluate
from .parser import flatten_statements

if TYPE_CHECKING:
    from .store import Store


class IndexError_(Exception):
    pass


class AlreadyIndexed(IndexError_):
    pass


class NotIndexed(IndexError_):
    pass


@dataclass
class Posting:
    if_rules: set[RuleId] = field(default_factory=set)
    then_rules: set[RuleId] = field(default_factory=set)

    def empty(self) -> bool:
        return not self.if_rules and not self.then_rules


def _part_tokens(rule: Rule) -> tuple[set[Token], set[Token]]:
    if_tokens: set[Token] = set()
    for stmt in flatten_statements(rule.if_expr):
        if_tokens.update(stmt.tokens)
    then_tokens: set[Token] = set()
    for stmt in flatten_statements(rule.then_expr):
        then_tokens.update(stmt.tokens)
    return if_tokens, then_tokens


class Index:
    def __init__(self) -> None:
        self.postings: dict[Token, Posting] = {}
        self.indexed: set[RuleId] = set()

    def insert(self, rule: Rule) -> None:
        if rule.id in self.indexed:
            raise AlreadyIndexed(f"rule {rule.id} is already indexed")
        if_tokens, then_tokens = _part_tokens(rule)
        for token in if_tokens:
            self.postings.setdefault(token, Posting()).if_rules.add(rule.id)
        for token in then_tokens:
            self.postings.setdefault(token, Posting()).then_rules.add(rule.id)
        self.indexed.add(rule.id)

    def remove(self, rule: Rule) -> None:
        if rule.id not in self.indexed:
            raise NotIndexed(f"rule {rule.id} is not indexed")
        if_tokens, then_tokens = _part_tokens(rule)
        for token in if_tokens:
            posting = self.postings[token]
            posting.if_rules.discard(rule.id)
            if posting.empty():
                del self.postings[token]
        for token in then_tokens:
            posting = self.postings.get(token)
            if posting is None:
                continue
            posting.then_rules.discard(rule.id)
            if posting.empty():
                del self.postings[token]
        self.indexed.discard(rule.id)

    # -- queries -------------------------------------------------------------

    def search(self, store: "Store", query_tokens: list[Token]) -> list[RuleId]:
        """Rules mentioning every query token in IF or THEN, ranked."""
        if not query_tokens:
            return []
        result: set[RuleId] | None = None
        for token in query_tokens:
            posting = self.postings.get(token)
            matches = (posting.if_rules | posting.then_rules) if posting else set()
            result = matches if result is None else (result & matches)
            if not result:
                return []
        assert result is not None
        return sorted(result, key=store.ranking_key)

    def candidates_for(self, facts: set[Token]) -> set[RuleId]:
        """Superset of firing rules: any rule with an IF leaf token in facts."""
        out: set[RuleId] = set()
        for token in facts:
            posting = self.postings.get(token)
            if posting:
                out |= posting.if_rules
        return out

    def firing_rules(self, store: "Store", facts: set[Token]) -> list[RuleId]:
        """Rules whose IF part evaluates true over the facts, ranked."""
        firing = [
            rid for rid in self.candidates_for(facts)
            if evaluate(store.get_rule(rid).if_expr, facts)
        ]
        return sorted(firing, key=store.ranking_key)

    # -- maintenance helpers ---------------------------------------------------

    def copy(self) -> "Index":
        dup = Index()
        for token, posting in self.postings.items():
            dup.postings[token] = Posting(set(posting.if_rules), set(posting.then_rules))
        dup.indexed = set(self.indexed)
        return dup

    def snapshot(self) -> bytes:
        """Canonical serialization, for equivalence checks in tests."""
        state = {
            token: {
                "if": sorted(posting.if_rules),
                "then": sorted(posting.then_rules),
            }
            for token, posting in self.postings.items()
        }
        return json.dumps(
            {"postings": state, "indexed": sorted(self.indexed)},
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8")
