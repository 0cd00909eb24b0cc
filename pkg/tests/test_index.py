from __future__ import annotations

import random

import pytest

from rulehub.index import AlreadyIndexed, Index, NotIndexed
from rulehub.model import tokenize

from oracles import scan_firing, scan_search
from test_store import random_ops, register


def seed(store, rows):
    (uid,) = register(store)
    idx = Index()
    ids = []
    for if_text, then_text in rows:
        rid = store.add_rule(uid, if_text, then_text)
        idx.insert(store.get_rule(rid))
        ids.append(rid)
    return idx, ids


def test_postings_split_if_and_then_sides(store):
    idx, (rid,) = seed(store, [("heavy rain", "wet street")])
    assert idx.postings["rain"].if_rules == {rid}
    assert idx.postings["rain"].then_rules == set()
    assert idx.postings["wet"].then_rules == {rid}
    assert idx.postings["wet"].if_rules == set()


def test_double_insert_and_missing_remove_are_errors(store):
    idx, (rid,) = seed(store, [("a", "b")])
    rule = store.get_rule(rid)
    with pytest.raises(AlreadyIndexed):
        idx.insert(rule)
    idx.remove(rule)
    with pytest.raises(NotIndexed):
        idx.remove(rule)


def test_remove_is_inverse_of_insert(store):
    idx, ids = seed(store, [("a AND b", "c"), ("b OR d", "a"), ("x y", "z")])
    baseline = idx.snapshot()
    extra = store.add_rule(1, "a XOR q", "b r")
    rule = store.get_rule(extra)
    idx.insert(rule)
    assert idx.snapshot() != baseline
    idx.remove(rule)
    assert idx.snapshot() == baseline


def test_remove_drops_empty_postings(store):
    idx, (rid,) = seed(store, [("lonely", "word")])
    idx.remove(store.get_rule(rid))
    assert idx.postings == {}


def test_search_requires_every_token(store):
    idx, ids = seed(store, [
        ("heavy rain", "wet street"),
        ("heavy snow", "white street"),
        ("sun", "dry street"),
    ])
    assert idx.search(store, ["heavy"]) == [ids[0], ids[1]]
    assert idx.search(store, ["heavy", "rain"]) == [ids[0]]
    assert idx.search(store, ["heavy", "sun"]) == []
    assert idx.search(store, []) == []
    assert idx.search(store, ["absent"]) == []


def test_search_matches_then_side_too(store):
    idx, ids = seed(store, [("fly", "bird"), ("swim", "fish")])
    assert idx.search(store, ["bird"]) == [ids[0]]
    assert idx.search(store, ["fly", "bird"]) == [ids[0]]


def test_firing_needs_exact_evaluation_not_just_overlap(store):
    idx, ids = seed(store, [("a AND b", "x"), ("a OR b", "y"), ("a b", "z")])
    # facts {a}: rule 1 needs both, rule 3's two-token statement needs both
    assert idx.firing_rules(store, {"a"}) == [ids[1]]
    assert idx.firing_rules(store, {"a", "b"}) == ids
    assert idx.firing_rules(store, set()) == []


def test_candidates_for_is_a_superset_of_firing(store):
    idx, ids = seed(store, [("a AND b", "x"), ("c", "y")])
    facts = {"a"}
    candidates = idx.candidates_for(facts)
    firing = set(idx.firing_rules(store, facts))
    assert firing <= candidates
    assert candidates == {ids[0]}


def test_copy_is_independent(store):
    idx, ids = seed(store, [("a", "b")])
    dup = idx.copy()
    assert dup.snapshot() == idx.snapshot()
    extra = store.add_rule(1, "c", "d")
    idx.insert(store.get_rule(extra))
    assert extra in idx.indexed
    assert extra not in dup.indexed


def test_ranking_orders_search_results(store):
    a1, a2, a3, voter, voter2 = register(store, 5)
    idx = Index()
    r1 = store.add_rule(a1, "fly", "bird")
    r2 = store.add_rule(a2, "fly", "plane")
    r3 = store.add_rule(a3, "fly", "rocket")
    for r in (r1, r2, r3):
        idx.insert(store.get_rule(r))
    assert idx.search(store, ["fly"]) == [r1, r2, r3]
    store.cast_vote(voter, r3, 1)
    assert idx.search(store, ["fly"]) == [r3, r1, r2]
    store.cast_vote(voter, r2, 1)
    store.cast_vote(voter2, r2, 1)
    assert idx.search(store, ["fly"]) == [r2, r3, r1]


def mirror_index(store) -> Index:
    idx = Index()
    for rule in store.live_rules():
        idx.insert(rule)
    return idx


def test_random_equivalence_with_linear_scan(tmp_path):
    rng = random.Random(905)
    from rulehub.store import Store

    words = [f"w{i}" for i in range(12)]
    for trial in range(15):
        store = Store(tmp_path / f"d{trial}")
        random_ops(store, rng, steps=60)
        idx = mirror_index(store)
        for _ in range(20):
            query = rng.sample(words, rng.randint(1, 3))
            assert idx.search(store, query) == scan_search(store, query)
            facts = set(rng.sample(words, rng.randint(0, 6)))
            assert idx.firing_rules(store, facts) == scan_firing(store, facts)
        store.close()


def test_index_stays_consistent_under_mutation(store):
    rng = random.Random(77)
    users = register(store, 3)
    idx = Index()
    live = []
    for step in range(120):
        if rng.random() < 0.6 or not live:
            rid = store.add_rule(
                rng.choice(users),
                " OR ".join(rng.sample("abcdefgh", rng.randint(1, 3))),
                rng.choice("uvwxyz"),
            )
            idx.insert(store.get_rule(rid))
            live.append(rid)
        else:
            rid = live.pop(rng.randrange(len(live)))
            rule = store.get_rule(rid)
            store.delete_rule(rule.author, rid)
            idx.remove(rule)
        assert idx.snapshot() == mirror_index(store).snapshot()
