from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from rulehub.model import (
    And,
    Atom,
    Or,
    Statement,
    Vote,
    Xor,
    evaluate,
    is_number_token,
    tokenize,
)

from oracles import eval_reference, random_tree


def test_tokenize_lowercases_and_strips_punctuation():
    assert tokenize("Fly!") == ["fly"]
    assert tokenize("Heavy  rain, really.") == ["heavy", "rain", "really"]
    assert tokenize("it's") == ["it", "s"]


def test_tokenize_keeps_decimal_numbers_whole():
    assert tokenize("3.5 birds") == ["3.5", "birds"]
    assert tokenize("end.") == ["end"]
    assert tokenize("v1.2 spec") == ["v1", "2", "spec"]


def test_tokenize_drops_connector_keywords():
    assert tokenize("bird AND plane or rocket XOR x") == ["bird", "plane", "rocket", "x"]
    assert tokenize("sandy band xored") == ["sandy", "band", "xored"]


def test_tokenize_empty():
    assert tokenize("") == []
    assert tokenize("   !?  ") == []
    assert tokenize("and or xor") == []


def test_is_number_token():
    assert is_number_token("3")
    assert is_number_token("3.5")
    assert not is_number_token("3.5.1")
    assert not is_number_token("x3")


def test_statement_equality_ignores_display_text():
    a = Statement.from_text("Heavy Rain")
    b = Statement.from_text("heavy   rain!")
    assert a == b
    assert hash(a) == hash(b)
    assert a.display_text == "Heavy Rain"


def test_statement_rejects_empty():
    with pytest.raises(ValueError):
        Statement.from_text("  !! ")
    with pytest.raises(ValueError):
        Statement(tokens=(), display_text="")


def atom(*tokens: str) -> Atom:
    return Atom(Statement(tokens=tokens, display_text=" ".join(tokens)))


def test_atom_needs_every_token():
    expr = atom("heavy", "rain")
    assert evaluate(expr, {"heavy", "rain", "x"})
    assert not evaluate(expr, {"heavy"})
    assert not evaluate(expr, set())


def test_connectives():
    a, b = atom("a"), atom("b")
    table = [
        (set(), False, False, False),
        ({"a"}, False, True, True),
        ({"b"}, False, True, True),
        ({"a", "b"}, True, True, False),
    ]
    for facts, want_and, want_or, want_xor in table:
        assert evaluate(And(a, b), facts) is want_and
        assert evaluate(Or(a, b), facts) is want_or
        assert evaluate(Xor(a, b), facts) is want_xor


def test_xor_chain_is_parity():
    # left-assoc xor chain over n atoms is true iff an odd number hold
    names = ["a", "b", "c", "d"]
    expr = atom(names[0])
    for n in names[1:]:
        expr = Xor(expr, atom(n))
    for bits in range(16):
        facts = {n for i, n in enumerate(names) if bits >> i & 1}
        assert evaluate(expr, facts) == (len(facts) % 2 == 1)


def test_deep_chain_does_not_overflow():
    expr = atom("x0")
    for i in range(1, 30_000):
        expr = And(expr, atom(f"x{i}"))
    assert evaluate(expr, {f"x{i}" for i in range(30_000)})


VOCAB = ["a", "b", "c", "d", "e", "f"]


def statements():
    return st.lists(st.sampled_from(VOCAB), min_size=1, max_size=3, unique=True).map(
        lambda toks: Atom(Statement(tokens=tuple(toks), display_text=" ".join(toks)))
    )


def trees():
    return st.recursive(
        statements(),
        lambda children: st.one_of(
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Xor, children, children),
        ),
        max_leaves=12,
    )


@given(trees(), st.sets(st.sampled_from(VOCAB)))
def test_evaluate_matches_reference(expr, facts):
    assert evaluate(expr, facts) == eval_reference(expr, facts)


@given(trees(), st.sets(st.sampled_from(VOCAB)))
def test_evaluate_is_deterministic(expr, facts):
    assert evaluate(expr, facts) == evaluate(expr, facts)


def monotone_trees():
    # no xor: these should be monotone in the fact set
    return st.recursive(
        statements(),
        lambda children: st.one_of(
            st.builds(And, children, children),
            st.builds(Or, children, children),
        ),
        max_leaves=12,
    )


@given(monotone_trees(), st.sets(st.sampled_from(VOCAB)), st.sets(st.sampled_from(VOCAB)))
def test_and_or_trees_are_monotone(expr, facts, extra):
    assert evaluate(expr, facts) <= evaluate(expr, facts | extra)


def test_randomized_reference_agreement():
    rng = random.Random(1207)
    vocab = [f"w{i}" for i in range(10)]
    for _ in range(300):
        expr = random_tree(rng, vocab, depth=4)
        facts = set(rng.sample(vocab, rng.randint(0, len(vocab))))
        assert evaluate(expr, facts) == eval_reference(expr, facts)


def test_vote_value_validation():
    Vote(voter=1, rule=2, value=1)
    Vote(voter=1, rule=2, value=-1)
    with pytest.raises(ValueError):
        Vote(voter=1, rule=2, value=0)
    with pytest.raises(ValueError):
        Vote(voter=1, rule=2, value=2)
