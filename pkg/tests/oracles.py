"""Independent reference implementations used to check the real modules.

Everything here is written the dumb way on purpose: recursion instead of
explicit stacks, linear scans instead of the index, from-scratch vote sums
instead of the store's incremental bookkeeping. Where outputs must agree
with the package, only the package's *data types* are reused, never its
algorithms.
"""

from __future__ import annotations

import random
import re

from rulehub.model import And, Atom, Or, PartExpr, Statement, Xor


def eval_reference(expr: PartExpr, facts: set[str]) -> bool:
    if isinstance(expr, Atom):
        return set(expr.statement.tokens) <= facts
    left = eval_reference(expr.left, facts)
    right = eval_reference(expr.right, facts)
    if isinstance(expr, And):
        return left and right
    if isinstance(expr, Or):
        return left or right
    return left != right


def leaf_tokens(expr: PartExpr) -> set[str]:
    if isinstance(expr, Atom):
        return set(expr.statement.tokens)
    return leaf_tokens(expr.left) | leaf_tokens(expr.right)


def sexpr(expr: PartExpr) -> str:
    """Structural key, independent of the package's formatter."""
    if isinstance(expr, Atom):
        return "(atom " + " ".join(expr.statement.tokens) + ")"
    op = {And: "and", Or: "or", Xor: "xor"}[type(expr)]
    return f"({op} {sexpr(expr.left)} {sexpr(expr.right)})"


def random_tree(rng: random.Random, vocab: list[str], depth: int) -> PartExpr:
    if depth <= 0 or rng.random() < 0.4:
        n = rng.randint(1, min(3, len(vocab)))
        toks = tuple(rng.sample(vocab, n))
        return Atom(Statement(tokens=toks, display_text=" ".join(toks)))
    ctor = rng.choice([And, Or, Xor])
    return ctor(random_tree(rng, vocab, depth - 1), random_tree(rng, vocab, depth - 1))


# -- store-level brute force ---------------------------------------------------


def brute_score(store, rule_id: int) -> int:
    return sum(v.value for v in store.votes.values() if v.rule == rule_id)


def brute_authority(store, user_id: int) -> int:
    mine = {rid for rid, r in store.rules.items() if r.author == user_id}
    return sum(v.value for v in store.votes.values() if v.rule in mine)


def brute_key(store, rule_id: int) -> tuple[int, int, int]:
    rule = store.rules[rule_id]
    return (-brute_authority(store, rule.author), -brute_score(store, rule_id), rule_id)


def scan_search(store, query_tokens: list[str]) -> list[int]:
    """Linear scan: rules whose IF∪THEN leaf tokens contain every query token."""
    if not query_tokens:
        return []
    hits = []
    for rule in store.rules.values():
        pool = leaf_tokens(rule.if_expr) | leaf_tokens(rule.then_expr)
        if all(t in pool for t in query_tokens):
            hits.append(rule.id)
    return sorted(hits, key=lambda rid: brute_key(store, rid))


def scan_firing(store, facts: set[str]) -> list[int]:
    hits = [rid for rid, r in store.rules.items() if eval_reference(r.if_expr, facts)]
    return sorted(hits, key=lambda rid: brute_key(store, rid))


def chain_fixpoint(rules, start_facts: set[str], max_rounds: int = 1000) -> set[str]:
    """Forward-chaining closure: structural keys of every conclusion reachable
    by repeatedly firing rules and asserting their conclusion tokens."""
    facts = set(start_facts)
    taken: set[str] = set()
    for _ in range(max_rounds):
        newly = [
            r for r in rules
            if sexpr(r.then_expr) not in taken and eval_reference(r.if_expr, facts)
        ]
        if not newly:
            break
        for r in newly:
            taken.add(sexpr(r.then_expr))
            facts |= leaf_tokens(r.then_expr)
    return taken


# -- minimal Turtle well-formedness checker -------------------------------------

_PREFIX_LINE = re.compile(r"^@prefix (?:owl|rdf|rdfs|xsd|): <[^<>\s]+> \.$")
_CLASS_LINE = re.compile(r"^:(\w+) a owl:Class \.$")
_OBJ_PROP_LINE = re.compile(
    r"^:(\w+) a owl:ObjectProperty ; rdfs:domain :(\w+) ; rdfs:range :(\w+) \.$"
)
_DATA_PROP_LINE = re.compile(
    r"^:(\w+) a owl:DatatypeProperty ; rdfs:domain :(\w+) ; rdfs:range xsd:(?:string|decimal) \.$"
)


def validate_turtle(text: str) -> list[str]:
    """Line-grammar check for the documents this package emits.

    Returns a list of problems; empty means well-formed. Also enforces
    referential closure: every domain/range local name must be declared
    as a class in the same document.
    """
    problems: list[str] = []
    if not text.endswith("\n"):
        problems.append("missing trailing newline")
    lines = text.split("\n")[:-1]
    classes: set[str] = set()
    referenced: set[str] = set()
    section = "prefix"
    prefix_count = 0
    for i, line in enumerate(lines, start=1):
        if section == "prefix":
            if _PREFIX_LINE.match(line):
                prefix_count += 1
                continue
            if line == "":
                section = "axioms"
                continue
            problems.append(f"line {i}: expected @prefix or blank separator: {line!r}")
            continue
        if line == "":
            problems.append(f"line {i}: unexpected blank line in axiom section")
            continue
        m = _CLASS_LINE.match(line)
        if m:
            classes.add(m.group(1))
            continue
        m = _OBJ_PROP_LINE.match(line)
        if m:
            referenced.update({m.group(2), m.group(3)})
            continue
        m = _DATA_PROP_LINE.match(line)
        if m:
            referenced.add(m.group(2))
            continue
        problems.append(f"line {i}: not a recognized axiom: {line!r}")
    if prefix_count != 5:
        problems.append(f"expected 5 @prefix lines, saw {prefix_count}")
    for name in sorted(referenced - classes):
        problems.append(f"domain/range :{name} has no class declaration")
    return problems


# -- shared scenario builders ----------------------------------------------------


def seed_flight_rules(store) -> int:
    """The worked example: one author, three rules fly→bird/plane/rocket."""
    author = store.register_user("Alice", "alice@example.com", "flightpass1")
    for conclusion in ("bird", "plane", "rocket"):
        store.add_rule(author, "fly", conclusion)
    return author


def build_index(store):
    from rulehub.index import Index

    idx = Index()
    for rule in store.live_rules():
        idx.insert(rule)
    return idx
