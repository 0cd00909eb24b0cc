"""Interactive elimination dialog over the rule base.

A session starts from a query, collects the rules whose IF part holds over
the query tokens, and proposes their conclusions one at a time for a yes/no
answer. Plain sessions finish at the first acceptance. Chained sessions fold
each accepted conclusion back into the fact set, which can unlock further
rules, until the depth budget or the candidate supply runs out.

Sessions work against a snapshot of the rule base taken at start, so rules
added or re-voted mid-session never change a running dialog. Thread safety
is the caller's concern; the service serializes answers per session.
"""

from __future__ import annotations

import secrets
from collections import deque
from dataclasses import dataclass, field

from .index import Index
from .model import Rule, RuleId, Token, evaluate, tokenize
from .parser import flatten_statements, format_part
from .store import Store

DEFAULT_MAX_DEPTH = 5

AWAITING = "awaiting"
FINISHED = "finished"
EXHAUSTED = "exhausted"


class DialogError(Exception):
    pass


class EmptyQuery(DialogError):
    pass


class SessionFinished(DialogError):
    pass


class UnknownSession(DialogError):
    pass


@dataclass(frozen=True)
class Propose:
    rule: RuleId
    conclusion_text: str


@dataclass(frozen=True)
class Result:
    text: str


@dataclass(frozen=True)
class NoResult:
    pass


Outcome = Propose | Result | NoResult


@dataclass
class _RuleView:
    """Frozen picture of the rule base at session start."""

    rules: dict[RuleId, Rule]
    keys: dict[RuleId, tuple[int, int, RuleId]]
    index: Index

    def firing(self, facts: set[Token]) -> list[RuleId]:
        candidates = self.index.candidates_for(facts)
        firing = [rid for rid in candidates if evaluate(self.rules[rid].if_expr, facts)]
        return sorted(firing, key=lambda rid: self.keys[rid])


@dataclass
class DialogSession:
    id: str
    facts: set[Token]
    pending: deque[RuleId]
    proposed: set[RuleId]
    accepted: list[tuple[RuleId, str]]
    chain: bool
    depth_remaining: int
    view: _RuleView
    state: str = AWAITING
    awaiting_rule: RuleId | None = None
    result: Result | NoResult | None = None
    # conclusion keys already accepted, so equivalent conclusions are not re-proposed
    _taken: set[str] = field(default_factory=set)


def rank_candidates(store: Store, rule_ids: set[RuleId]) -> list[RuleId]:
    """Order rule ids by author authority desc, then score desc, then id asc."""
    keys = {rid: store.ranking_key(rid) for rid in rule_ids}
    return sorted(rule_ids, key=keys.__getitem__)


def _capture(store: Store, index: Index) -> _RuleView:
    rules = {r.id: r for r in store.live_rules()}
    keys = {rid: store.ranking_key(rid) for rid in rules}
    return _RuleView(rules=rules, keys=keys, index=index.copy())


def _propose_next(session: DialogSession) -> Propose:
    rid = session.pending.popleft()
    session.awaiting_rule = rid
    session.state = AWAITING
    return Propose(rule=rid, conclusion_text=session.view.rules[rid].then_text)


def _exhaust(session: DialogSession) -> NoResult:
    session.state = EXHAUSTED
    session.awaiting_rule = None
    session.result = NoResult()
    return session.result


def start_session(
    store: Store,
    index: Index,
    query_text: str,
    chain: bool = False,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> tuple[DialogSession, Outcome]:
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    facts = set(tokenize(query_text))
    if not facts:
        raise EmptyQuery("query contains no usable words")
    view = _capture(store, index)
    session = DialogSession(
        id=secrets.token_urlsafe(16),
        facts=facts,
        pending=deque(view.firing(facts)),
        proposed=set(),
        accepted=[],
        chain=chain,
        depth_remaining=max_depth,
        view=view,
    )
    if session.pending:
        return session, _propose_next(session)
    return session, _exhaust(session)


def answer(session: DialogSession, accept: bool) -> Outcome:
    if session.state != AWAITING or session.awaiting_rule is None:
        raise SessionFinished(f"session is {session.state}")
    rid = session.awaiting_rule
    session.awaiting_rule = None
    session.proposed.add(rid)

    if not accept:
        if session.pending:
            return _propose_next(session)
        return _exhaust(session)

    rule = session.view.rules[rid]
    session.accepted.append((rid, rule.then_text))

    if not session.chain:
        session.state = FINISHED
        session.result = Result(text=rule.then_text)
        return session.result

    session._taken.add(format_part(rule.then_expr))
    for stmt in flatten_statements(rule.then_expr):
        session.facts.update(stmt.tokens)
    session.depth_remaining -= 1

    already_queued = set(session.pending)
    for cand in session.view.firing(session.facts):
        if cand in session.proposed or cand in already_queued:
            continue
        if format_part(session.view.rules[cand].then_expr) in session._taken:
            continue
        session.pending.append(cand)
        already_queued.add(cand)

    if session.pending and session.depth_remaining > 0:
        return _propose_next(session)
    session.state = FINISHED
    session.result = Result(text=session.accepted[-1][1])
    return session.result
