"""Durable system of record for users, rules, and votes.

State lives in memory and is reconstructed at startup by replaying an
append-only JSONL event log. Every mutation appends (and flushes) its event
before returning, so an acknowledged operation survives a crash. All
mutations are serialized through one lock; rule/user/vote values handed out
are immutable.

Log format, one JSON object per line (LF-terminated, UTF-8):

    {"seq": <int>, "at": "<RFC3339 UTC>", "event": {"kind": ..., ...}}

Event kinds and their fields:
    user_registered {user_id, name, email, salt_b64, hash_b64, iterations}
    rule_added      {rule_id, author, if_text, then_text}
    rule_deleted    {rule_id, caller}
    vote_cast       {voter, rule_id, value}

Unknown kinds abort replay (versioning error). Admin grants are deliberately
not log events (the schema above is closed); they live in a sidecar
admins.json next to the log.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .model import Rule, RuleId, UserAccount, UserId, Vote
from .parser import ParseError, parse_part

PBKDF2_ITERATIONS = 100_000
SALT_BYTES = 16
MIN_PASSWORD_LENGTH = 8
DEFAULT_TOKEN_TTL = 24 * 3600.0

LOG_FILENAME = "events.log"
ADMINS_FILENAME = "admins.json"

_EVENT_KINDS = frozenset({"user_registered", "rule_added", "rule_deleted", "vote_cast"})


class StoreError(Exception):
    pass


class DuplicateEmail(StoreError):
    pass


class InvalidEmail(StoreError):
    pass


class InvalidName(StoreError):
    pass


class WeakPassword(StoreError):
    pass


class BadCredentials(StoreError):
    pass


class BadToken(StoreError):
    pass


class UnknownUser(StoreError):
    pass


class NotFound(StoreError):
    pass


class Forbidden(StoreError):
    pass


class SelfVote(StoreError):
    pass


class BadValue(StoreError):
    pass


class PartParseError(StoreError):
    """A rule part failed to parse; `part` is "if" or "then"."""

    def __init__(self, part: str, error: ParseError):
        self.part = part
        self.error = error
        super().__init__(f"{part.upper()} part: {error}")


class ReplayError(StoreError):
    pass


@dataclass(frozen=True)
class SessionToken:
    token: str
    user: UserId
    expires_at: float


def _hash_password(password: str, salt: bytes, iterations: int) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)


def _rfc3339_now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


class Store:
    """Event-sourced store rooted at a data directory."""

    def __init__(self, data_dir: str | Path, token_ttl: float = DEFAULT_TOKEN_TTL):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.data_dir / LOG_FILENAME
        self.token_ttl = token_ttl

        self._lock = threading.RLock()
        self.users: dict[str, UserAccount] = {}  # keyed by lowercased email
        self.users_by_id: dict[UserId, UserAccount] = {}
        self.rules: dict[RuleId, Rule] = {}
        self.votes: dict[tuple[UserId, RuleId], Vote] = {}
        self.next_seq = 1
        self.next_user_id = 1
        self.admins: set[UserId] = set()
        self._scores: dict[RuleId, int] = {}
        self._authority: dict[UserId, int] = {}
        self._tokens: dict[str, SessionToken] = {}
        self._event_seq = 0

        self._replay()
        self._load_admins()
        self._log_file = open(self.log_path, "a", encoding="utf-8")

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        with self._lock:
            if not self._log_file.closed:
                self._log_file.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- registration and authentication ------------------------------------

    def register_user(self, name: str, email: str, password: str) -> UserId:
        if not name:
            raise InvalidName("name must be non-empty")
        local, sep, domain = email.partition("@")
        if not sep or not local or not domain or "@" in domain:
            raise InvalidEmail(f"not a plausible email: {email!r}")
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        with self._lock:
            if email.lower() in self.users:
                raise DuplicateEmail(f"email already registered: {email}")
            salt = secrets.token_bytes(SALT_BYTES)
            pw_hash = _hash_password(password, salt, PBKDF2_ITERATIONS)
            user_id = self.next_user_id
            self._commit({
                "kind": "user_registered",
                "user_id": user_id,
                "name": name,
                "email": email,
                "salt_b64": base64.b64encode(salt).decode("ascii"),
                "hash_b64": base64.b64encode(pw_hash).decode("ascii"),
                "iterations": PBKDF2_ITERATIONS,
            })
            return user_id

    def authenticate(self, email: str, password: str) -> SessionToken:
        with self._lock:
            account = self.users.get(email.lower())
        if account is None:
            # Burn comparable work for unknown emails so timing does not
            # reveal which addresses exist; the error is identical either way.
            _hash_password(password, b"\x00" * SALT_BYTES, PBKDF2_ITERATIONS)
            raise BadCredentials("bad credentials")
        candidate = _hash_password(password, account.salt, account.iterations)
        if not hmac.compare_digest(candidate, account.password_hash):
            raise BadCredentials("bad credentials")
        token = SessionToken(
            token=secrets.token_urlsafe(32),
            user=account.id,
            expires_at=time.time() + self.token_ttl,
        )
        with self._lock:
            self._tokens[token.token] = token
        return token

    def check_token(self, token: str) -> UserId:
        with self._lock:
            entry = self._tokens.get(token)
            if entry is None:
                raise BadToken("unknown token")
            if entry.expires_at <= time.time():
                del self._tokens[token]
                raise BadToken("expired token")
            return entry.user

    # -- rules and votes -----------------------------------------------------

    def add_rule(self, author: UserId, if_text: str, then_text: str) -> RuleId:
        with self._lock:
            if author not in self.users_by_id:
                raise UnknownUser(f"no such user: {author}")
            for part, text in (("if", if_text), ("then", then_text)):
                try:
                    parse_part(text)
                except ParseError as err:
                    raise PartParseError(part, err) from err
            rule_id = self.next_seq
            self._commit({
                "kind": "rule_added",
                "rule_id": rule_id,
                "author": author,
                "if_text": if_text,
                "then_text": then_text,
            })
            return rule_id

    def delete_rule(self, caller: UserId, rule_id: RuleId) -> None:
        with self._lock:
            rule = self.rules.get(rule_id)
            if rule is None:
                raise NotFound(f"no such rule: {rule_id}")
            if caller != rule.author and caller not in self.admins:
                raise Forbidden("only the author or an admin may delete a rule")
            self._commit({"kind": "rule_deleted", "rule_id": rule_id, "caller": caller})

    def cast_vote(self, voter: UserId, rule_id: RuleId, value: int) -> None:
        if value not in (-1, 1):
            raise BadValue(f"vote value must be -1 or +1, got {value!r}")
        with self._lock:
            rule = self.rules.get(rule_id)
            if rule is None:
                raise NotFound(f"no such rule: {rule_id}")
            if voter not in self.users_by_id:
                raise UnknownUser(f"no such user: {voter}")
            if voter == rule.author:
                raise SelfVote("authors cannot vote on their own rules")
            self._commit({"kind": "vote_cast", "voter": voter, "rule_id": rule_id, "value": value})

    # -- derived scores ------------------------------------------------------

    def rule_score(self, rule_id: RuleId) -> int:
        with self._lock:
            if rule_id not in self.rules:
                raise NotFound(f"no such rule: {rule_id}")
            return self._scores.get(rule_id, 0)

    def user_authority(self, user_id: UserId) -> int:
        with self._lock:
            if user_id not in self.users_by_id:
                raise UnknownUser(f"no such user: {user_id}")
            return self._authority.get(user_id, 0)

    def ranking_key(self, rule_id: RuleId) -> tuple[int, int, RuleId]:
        """Sort key for candidate ordering: authority desc, score desc, id asc."""
        with self._lock:
            rule = self.rules.get(rule_id)
            if rule is None:
                raise NotFound(f"no such rule: {rule_id}")
            return (-self._authority.get(rule.author, 0), -self._scores.get(rule_id, 0), rule_id)

    # -- lookups -------------------------------------------------------------

    def get_rule(self, rule_id: RuleId) -> Rule:
        with self._lock:
            rule = self.rules.get(rule_id)
            if rule is None:
                raise NotFound(f"no such rule: {rule_id}")
            return rule

    def get_user(self, user_id: UserId) -> UserAccount:
        with self._lock:
            account = self.users_by_id.get(user_id)
            if account is None:
                raise UnknownUser(f"no such user: {user_id}")
            return account

    def user_by_email(self, email: str) -> UserAccount:
        with self._lock:
            account = self.users.get(email.lower())
            if account is None:
                raise UnknownUser(f"no user with email: {email}")
            return account

    def live_rules(self) -> list[Rule]:
        with self._lock:
            return sorted(self.rules.values(), key=lambda r: r.seq)

    # -- admins --------------------------------------------------------------

    def grant_admin(self, user_id: UserId) -> None:
        with self._lock:
            if user_id not in self.users_by_id:
                raise UnknownUser(f"no such user: {user_id}")
            self.admins.add(user_id)
            self._save_admins()

    def is_admin(self, user_id: UserId) -> bool:
        with self._lock:
            return user_id in self.admins

    # -- snapshot ------------------------------------------------------------

    def snapshot(self) -> bytes:
        """Canonical serialization of the whole state, for replay-equivalence checks."""
        with self._lock:
            state = {
                "users": [
                    {
                        "id": u.id,
                        "name": u.name,
                        "email": u.email,
                        "salt_b64": base64.b64encode(u.salt).decode("ascii"),
                        "hash_b64": base64.b64encode(u.password_hash).decode("ascii"),
                        "iterations": u.iterations,
                    }
                    for u in sorted(self.users_by_id.values(), key=lambda u: u.id)
                ],
                "rules": [
                    {
                        "id": r.id,
                        "author": r.author,
                        "if_text": r.if_text,
                        "then_text": r.then_text,
                        "seq": r.seq,
                    }
                    for r in sorted(self.rules.values(), key=lambda r: r.id)
                ],
                "votes": [
                    {"voter": v.voter, "rule_id": v.rule, "value": v.value}
                    for v in sorted(self.votes.values(), key=lambda v: (v.voter, v.rule))
                ],
                "next_seq": self.next_seq,
                "next_user_id": self.next_user_id,
                "admins": sorted(self.admins),
            }
        return json.dumps(state, sort_keys=True, separators=(",", ":")).encode("utf-8")

    # -- event machinery -----------------------------------------------------

    def _commit(self, event: dict) -> None:
        """Apply an event to memory, then append it durably. Caller holds the lock."""
        self._apply(event)
        self._event_seq += 1
        line = json.dumps(
            {"seq": self._event_seq, "at": _rfc3339_now(), "event": event},
            separators=(",", ":"),
        )
        self._log_file.write(line + "\n")
        self._log_file.flush()
        os.fsync(self._log_file.fileno())

    def _apply(self, event: dict) -> None:
        kind = event["kind"]
        if kind == "user_registered":
            account = UserAccount(
                id=event["user_id"],
                name=event["name"],
                email=event["email"],
                salt=base64.b64decode(event["salt_b64"]),
                password_hash=base64.b64decode(event["hash_b64"]),
                iterations=event["iterations"],
            )
            self.users[account.email.lower()] = account
            self.users_by_id[account.id] = account
            self._authority.setdefault(account.id, 0)
            self.next_user_id = max(self.next_user_id, account.id + 1)
        elif kind == "rule_added":
            rule_id = event["rule_id"]
            rule = Rule(
                id=rule_id,
                author=event["author"],
                if_expr=parse_part(event["if_text"]),
                if_text=event["if_text"],
                then_expr=parse_part(event["then_text"]),
                then_text=event["then_text"],
                seq=rule_id,
            )
            self.rules[rule_id] = rule
            self._scores[rule_id] = 0
            self.next_seq = max(self.next_seq, rule_id + 1)
        elif kind == "rule_deleted":
            rule_id = event["rule_id"]
            rule = self.rules.pop(rule_id)
            self._authority[rule.author] -= self._scores.pop(rule_id, 0)
            for key in [k for k in self.votes if k[1] == rule_id]:
                del self.votes[key]
        elif kind == "vote_cast":
            voter, rule_id, value = event["voter"], event["rule_id"], event["value"]
            prior = self.votes.get((voter, rule_id))
            delta = value - (prior.value if prior else 0)
            self.votes[(voter, rule_id)] = Vote(voter=voter, rule=rule_id, value=value)
            self._scores[rule_id] += delta
            self._authority[self.rules[rule_id].author] += delta
        else:
            raise ReplayError(f"unknown event kind: {kind!r}")

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as err:
                    raise ReplayError(f"{self.log_path}:{lineno}: bad JSON: {err}") from err
                event = record.get("event")
                if not isinstance(event, dict) or event.get("kind") not in _EVENT_KINDS:
                    kind = event.get("kind") if isinstance(event, dict) else None
                    raise ReplayError(
                        f"{self.log_path}:{lineno}: unknown event kind {kind!r} "
                        "(log written by a newer version?)"
                    )
                self._apply(event)
                self._event_seq = record.get("seq", self._event_seq + 1)

    # -- admin sidecar -------------------------------------------------------

    def _admins_path(self) -> Path:
        return self.data_dir / ADMINS_FILENAME

    def _load_admins(self) -> None:
        path = self._admins_path()
        if path.exists():
            data = json.loads(path.read_text(encoding="utf-8"))
            self.admins = set(data.get("admins", []))

    def _save_admins(self) -> None:
        tmp = self._admins_path().with_suffix(".tmp")
        tmp.write_text(json.dumps({"admins": sorted(self.admins)}) + "\n", encoding="utf-8")
        tmp.replace(self._admins_path())
