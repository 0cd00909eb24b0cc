from __future__ import annotations

import base64
import json
import random
import re
import time

import pytest

from rulehub.parser import ParseErrorKind
from rulehub.store import (
    BadCredentials,
    BadToken,
    BadValue,
    DuplicateEmail,
    Forbidden,
    InvalidEmail,
    InvalidName,
    NotFound,
    PartParseError,
    ReplayError,
    SelfVote,
    Store,
    UnknownUser,
    WeakPassword,
)

from oracles import brute_authority, brute_key, brute_score


def register(store, n=1, prefix="u"):
    return [
        store.register_user(f"{prefix}{i}", f"{prefix}{i}@example.com", f"pass-{prefix}{i}-123")
        for i in range(n)
    ]


def test_register_and_authenticate(store):
    uid = store.register_user("Anna", "anna@example.com", "s3cretpass")
    token = store.authenticate("anna@example.com", "s3cretpass")
    assert store.check_token(token.token) == uid
    assert store.get_user(uid).name == "Anna"


def test_email_lookup_is_case_insensitive(store):
    register(store)
    assert store.user_by_email("U0@EXAMPLE.COM").name == "u0"
    with pytest.raises(DuplicateEmail):
        store.register_user("copy", "U0@example.COM", "password1")


def test_registration_validation(store):
    with pytest.raises(InvalidName):
        store.register_user("", "x@example.com", "password1")
    for bad in ["no-at-sign", "@nolocal.io", "nodomain@", "two@@example.com", "a@b@c"]:
        with pytest.raises(InvalidEmail):
            store.register_user("x", bad, "password1")
    with pytest.raises(WeakPassword):
        store.register_user("x", "x@example.com", "short")


def test_bad_credentials_do_not_reveal_which_part_failed(store):
    register(store)
    with pytest.raises(BadCredentials) as unknown_email:
        store.authenticate("ghost@example.com", "whateverpass")
    with pytest.raises(BadCredentials) as wrong_password:
        store.authenticate("u0@example.com", "wrongpass99")
    assert str(unknown_email.value) == str(wrong_password.value)
    assert type(unknown_email.value) is type(wrong_password.value)


def test_tokens_expire(tmp_path):
    with Store(tmp_path / "d", token_ttl=0.05) as store:
        register(store)
        token = store.authenticate("u0@example.com", "pass-u0-123")
        assert store.check_token(token.token) == 1
        time.sleep(0.08)
        with pytest.raises(BadToken):
            store.check_token(token.token)


def test_unknown_token_rejected(store):
    with pytest.raises(BadToken):
        store.check_token("made-up-token")


def test_password_material_is_salted_and_hashed(store):
    a = store.register_user("a", "a@example.com", "samepassword")
    b = store.register_user("b", "b@example.com", "samepassword")
    ua, ub = store.get_user(a), store.get_user(b)
    assert ua.salt != ub.salt
    assert ua.password_hash != ub.password_hash
    assert len(ua.salt) >= 16
    assert ua.iterations >= 100_000


def test_add_rule_rejects_bad_parts(store):
    (uid,) = register(store)
    with pytest.raises(PartParseError) as info:
        store.add_rule(uid, "fly", "AND bird")
    assert info.value.part == "then"
    assert info.value.error.kind is ParseErrorKind.DANGLING_CONNECTOR
    with pytest.raises(PartParseError) as info:
        store.add_rule(uid, "", "bird")
    assert info.value.part == "if"
    with pytest.raises(UnknownUser):
        store.add_rule(99, "fly", "bird")


def test_rule_ids_are_sequential_and_never_reused(store):
    (uid,) = register(store)
    r1 = store.add_rule(uid, "a", "b")
    r2 = store.add_rule(uid, "c", "d")
    store.delete_rule(uid, r2)
    r3 = store.add_rule(uid, "e", "f")
    assert (r1, r2, r3) == (1, 2, 3)
    assert [r.id for r in store.live_rules()] == [1, 3]


def test_delete_permissions(store):
    author, stranger, admin = register(store, 3)
    rid = store.add_rule(author, "a", "b")
    with pytest.raises(Forbidden):
        store.delete_rule(stranger, rid)
    store.grant_admin(admin)
    store.delete_rule(admin, rid)
    with pytest.raises(NotFound):
        store.delete_rule(author, rid)


def test_vote_rules(store):
    author, voter = register(store, 2)
    rid = store.add_rule(author, "a", "b")
    with pytest.raises(SelfVote):
        store.cast_vote(author, rid, 1)
    with pytest.raises(BadValue):
        store.cast_vote(voter, rid, 0)
    with pytest.raises(NotFound):
        store.cast_vote(voter, 99, 1)
    store.cast_vote(voter, rid, 1)
    assert store.rule_score(rid) == 1
    assert store.user_authority(author) == 1


def test_revote_replaces_rather_than_accumulates(store):
    author, voter = register(store, 2)
    rid = store.add_rule(author, "a", "b")
    store.cast_vote(voter, rid, 1)
    store.cast_vote(voter, rid, 1)
    assert store.rule_score(rid) == 1
    store.cast_vote(voter, rid, -1)
    assert store.rule_score(rid) == -1
    assert store.user_authority(author) == -1


def test_deleting_a_rule_removes_its_votes_and_authority(store):
    author, voter = register(store, 2)
    rid = store.add_rule(author, "a", "b")
    keep = store.add_rule(author, "c", "d")
    store.cast_vote(voter, rid, 1)
    store.cast_vote(voter, keep, 1)
    store.delete_rule(author, rid)
    assert store.user_authority(author) == 1
    assert brute_authority(store, author) == 1
    assert all(v.rule != rid for v in store.votes.values())


def test_scores_match_brute_force_after_random_ops(store):
    rng = random.Random(7)
    users = register(store, 6)
    rules = []
    for _ in range(25):
        rules.append(store.add_rule(rng.choice(users), rng.choice("abcdef"), rng.choice("uvwxyz")))
    for _ in range(200):
        rid = rng.choice(rules)
        if rid in store.rules:
            author = store.get_rule(rid).author
            voters = [u for u in users if u != author]
            store.cast_vote(rng.choice(voters), rid, rng.choice([-1, 1]))
        if rng.random() < 0.1:
            victim = rng.choice(rules)
            if victim in store.rules:
                store.delete_rule(store.get_rule(victim).author, victim)
    for rid in list(store.rules):
        assert store.rule_score(rid) == brute_score(store, rid)
        assert store.ranking_key(rid) == brute_key(store, rid)
    for uid in users:
        assert store.user_authority(uid) == brute_authority(store, uid)


RFC3339 = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(?:\.\d+)?Z$")


def test_log_schema(store, tmp_path):
    users = register(store, 2)
    rid = store.add_rule(users[0], "heavy rain", "wet AND street")
    store.cast_vote(users[1], rid, 1)
    store.delete_rule(users[0], rid)
    lines = store.log_path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5
    kinds = []
    for i, line in enumerate(lines, start=1):
        record = json.loads(line)
        assert set(record) == {"seq", "at", "event"}
        assert record["seq"] == i
        assert RFC3339.match(record["at"])
        kinds.append(record["event"]["kind"])
    assert kinds == ["user_registered", "user_registered", "rule_added", "vote_cast",
                     "rule_deleted"]
    reg = json.loads(lines[0])["event"]
    assert set(reg) == {"kind", "user_id", "name", "email", "salt_b64", "hash_b64", "iterations"}
    base64.b64decode(reg["salt_b64"])
    added = json.loads(lines[2])["event"]
    assert set(added) == {"kind", "rule_id", "author", "if_text", "then_text"}
    voted = json.loads(lines[3])["event"]
    assert set(voted) == {"kind", "voter", "rule_id", "value"}
    deleted = json.loads(lines[4])["event"]
    assert set(deleted) == {"kind", "rule_id", "caller"}


def test_log_never_contains_plaintext_passwords(store):
    store.register_user("a", "a@example.com", "hunter2hunter2")
    raw = store.log_path.read_bytes()
    assert b"hunter2" not in raw


def test_unknown_event_kind_aborts_replay(tmp_path):
    data = tmp_path / "d"
    with Store(data) as store:
        register(store)
    with open(data / "events.log", "a", encoding="utf-8") as f:
        f.write(json.dumps({"seq": 2, "at": "2026-01-01T00:00:00Z",
                            "event": {"kind": "user_renamed", "user_id": 1}}) + "\n")
    with pytest.raises(ReplayError, match="user_renamed"):
        Store(data)


def test_corrupt_log_line_aborts_replay(tmp_path):
    data = tmp_path / "d"
    with Store(data) as store:
        register(store)
    with open(data / "events.log", "a", encoding="utf-8") as f:
        f.write("{not json\n")
    with pytest.raises(ReplayError):
        Store(data)


def random_ops(store, rng: random.Random, steps: int) -> None:
    users: list[int] = []
    rules: list[int] = []
    words = [f"w{i}" for i in range(12)]

    def part():
        n = rng.randint(1, 3)
        return f" {rng.choice(['AND', 'OR', 'XOR'])} ".join(rng.sample(words, n))

    for _ in range(steps):
        roll = rng.random()
        if roll < 0.12 or not users:
            uid = store.register_user(
                f"user{len(users)}", f"user{len(users)}@example.com", f"password{len(users)}"
            )
            users.append(uid)
        elif roll < 0.55:
            rules.append(store.add_rule(rng.choice(users), part(), part()))
        elif roll < 0.85 and rules:
            rid = rng.choice(rules)
            try:
                author = store.get_rule(rid).author
            except NotFound:
                continue
            candidates = [u for u in users if u != author]
            if candidates:
                store.cast_vote(rng.choice(candidates), rid, rng.choice([-1, 1]))
        elif rules:
            rid = rng.choice(rules)
            try:
                store.delete_rule(store.get_rule(rid).author, rid)
            except NotFound:
                pass


def test_replay_reproduces_state_byte_for_byte(tmp_path):
    data = tmp_path / "d"
    store = Store(data)
    random_ops(store, random.Random(2026), steps=120)
    before = store.snapshot()
    store.close()
    reopened = Store(data)
    assert reopened.snapshot() == before
    # and the store still accepts writes after replay
    uid = reopened.register_user("late", "late@example.com", "password99")
    assert uid == reopened.next_user_id - 1
    reopened.close()


def test_admin_flag_survives_reopen(tmp_path):
    data = tmp_path / "d"
    with Store(data) as store:
        (uid,) = register(store)
        store.grant_admin(uid)
    with Store(data) as reopened:
        assert reopened.is_admin(1)
