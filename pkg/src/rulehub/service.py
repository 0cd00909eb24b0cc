"""JSON-over-HTTP facade over the store, index, dialog engine, and ontology.

Built on the stdlib threading HTTP server: requests are handled on worker
threads, store+index mutations are serialized through one writer lock, and
each dialog session has its own lock so concurrent answers to one session
are ordered. Search, dialog, and ontology export are anonymous; rule
mutations and voting require `Authorization: Bearer <token>`.

Error bodies are JSON {"code", "message"} plus an optional "detail" object.
The code set is closed: invalid_body, empty_query, weak_password,
invalid_email, invalid_name, bad_value, invalid_query, bad_credentials,
bad_token, forbidden, self_vote, not_found, unknown_session,
duplicate_email, session_finished, parse_error, method_not_allowed.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import re
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import dialog
from .dialog import DialogSession, NoResult, Propose, Result
from .index import Index
from .model import tokenize
from .ontology import DEFAULT_BASE_IRI, Lexicon, generate, to_turtle
from .store import (
    BadCredentials,
    BadToken,
    BadValue,
    DuplicateEmail,
    Forbidden,
    InvalidEmail,
    InvalidName,
    NotFound,
    PartParseError,
    SelfVote,
    Store,
    WeakPassword,
)

logger = logging.getLogger("rulehub.service")

DEFAULT_PORT = 8080
DEFAULT_CHAIN_DEPTH = 5
DEFAULT_TOKEN_TTL = 24 * 3600.0
SESSION_TTL = 30 * 60.0  # dialog abandonment timeout
MAX_BODY_BYTES = 1 << 20
DEFAULT_SEARCH_LIMIT = 50


@dataclass
class ServiceConfig:
    port: int = DEFAULT_PORT
    data_dir: Path = Path("data")
    lexicon_path: Path | None = None
    base_iri: str = DEFAULT_BASE_IRI
    chain_depth: int = DEFAULT_CHAIN_DEPTH
    token_ttl: float = DEFAULT_TOKEN_TTL
    ui_dir: Path | None = None

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ServiceConfig":
        env = os.environ if env is None else env
        cfg = cls()
        if "RH_PORT" in env:
            cfg.port = int(env["RH_PORT"])
        if "RH_DATA_DIR" in env:
            cfg.data_dir = Path(env["RH_DATA_DIR"])
        if "RH_LEXICON" in env:
            cfg.lexicon_path = Path(env["RH_LEXICON"])
        if "RH_BASE_IRI" in env:
            cfg.base_iri = env["RH_BASE_IRI"]
        if "RH_CHAIN_DEPTH" in env:
            cfg.chain_depth = int(env["RH_CHAIN_DEPTH"])
        if "RH_TOKEN_TTL" in env:
            cfg.token_ttl = float(env["RH_TOKEN_TTL"])
        if "RH_UI_DIR" in env:
            cfg.ui_dir = Path(env["RH_UI_DIR"])
        return cfg


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _rfc3339(epoch: float) -> str:
    return (
        datetime.fromtimestamp(epoch, tz=timezone.utc)
        .isoformat(timespec="seconds")
        .replace("+00:00", "Z")
    )


def outcome_to_json(outcome: Propose | Result | NoResult) -> dict:
    if isinstance(outcome, Propose):
        return {
            "type": "propose",
            "rule": outcome.rule,
            "conclusion": outcome.conclusion_text,
            "prompt": outcome.conclusion_text + ", isn't it?",
        }
    if isinstance(outcome, Result):
        return {"type": "result", "text": outcome.text}
    return {"type": "no_result"}


def _accepted_to_json(session: DialogSession) -> list[dict]:
    return [{"rule": rid, "text": text} for rid, text in session.accepted]


@dataclass
class _SessionSlot:
    session: DialogSession
    lock: threading.Lock
    deadline: float


class Service:
    """Owns the store, the live index, dialog sessions, and config."""

    def __init__(self, store: Store, index: Index, lexicon: Lexicon, config: ServiceConfig):
        self.store = store
        self.index = index
        self.lexicon = lexicon
        self.config = config
        self.write_lock = threading.Lock()
        self.sessions: dict[str, _SessionSlot] = {}
        self.sessions_lock = threading.Lock()

    @classmethod
    def open(cls, config: ServiceConfig) -> "Service":
        store = Store(config.data_dir, token_ttl=config.token_ttl)
        index = Index()
        for rule in store.live_rules():
            index.insert(rule)
        lexicon = (
            Lexicon.from_file(config.lexicon_path)
            if config.lexicon_path is not None
            else Lexicon.default()
        )
        return cls(store, index, lexicon, config)

    def close(self) -> None:
        self.store.close()

    # -- handlers (return (status, payload); None payload = no body) ----------

    def register(self, body: dict) -> tuple[int, dict]:
        name = _req_str(body, "name")
        email = _req_str(body, "email")
        password = _req_str(body, "password")
        try:
            with self.write_lock:
                user_id = self.store.register_user(name, email, password)
        except DuplicateEmail as err:
            raise ApiError(409, "duplicate_email", str(err)) from err
        except WeakPassword as err:
            raise ApiError(400, "weak_password", str(err)) from err
        except InvalidEmail as err:
            raise ApiError(400, "invalid_email", str(err)) from err
        except InvalidName as err:
            raise ApiError(400, "invalid_name", str(err)) from err
        return 201, {"user_id": user_id}

    def login(self, body: dict) -> tuple[int, dict]:
        email = _req_str(body, "email")
        password = _req_str(body, "password")
        try:
            token = self.store.authenticate(email, password)
        except BadCredentials as err:
            raise ApiError(401, "bad_credentials", "bad credentials") from err
        return 200, {"token": token.token, "expires_at": _rfc3339(token.expires_at)}

    def add_rule(self, caller: int, body: dict) -> tuple[int, dict]:
        if_text = _req_str(body, "if")
        then_text = _req_str(body, "then")
        try:
            with self.write_lock:
                rule_id = self.store.add_rule(caller, if_text, then_text)
                self.index.insert(self.store.get_rule(rule_id))
        except PartParseError as err:
            raise ApiError(
                422,
                "parse_error",
                f"cannot parse {err.part.upper()} part: {err.error}",
                detail={
                    "part": err.part,
                    "kind": err.error.kind.value,
                    "position": err.error.position,
                },
            ) from err
        return 201, {"rule_id": rule_id}

    def get_rule(self, rule_id: int) -> tuple[int, dict]:
        try:
            rule = self.store.get_rule(rule_id)
        except NotFound as err:
            raise ApiError(404, "not_found", str(err)) from err
        return 200, self._rule_json(rule)

    def delete_rule(self, caller: int, rule_id: int) -> tuple[int, None]:
        try:
            with self.write_lock:
                rule = self.store.get_rule(rule_id)
                self.store.delete_rule(caller, rule_id)
                self.index.remove(rule)
        except NotFound as err:
            raise ApiError(404, "not_found", str(err)) from err
        except Forbidden as err:
            raise ApiError(403, "forbidden", str(err)) from err
        return 204, None

    def vote(self, caller: int, rule_id: int, body: dict) -> tuple[int, None]:
        value = body.get("value")
        if not isinstance(value, int) or isinstance(value, bool):
            raise ApiError(400, "bad_value", "vote value must be -1 or 1")
        try:
            with self.write_lock:
                self.store.cast_vote(caller, rule_id, value)
        except BadValue as err:
            raise ApiError(400, "bad_value", str(err)) from err
        except NotFound as err:
            raise ApiError(404, "not_found", str(err)) from err
        except SelfVote as err:
            raise ApiError(403, "self_vote", str(err)) from err
        return 204, None

    def search(self, query: dict[str, list[str]]) -> tuple[int, dict]:
        q = query.get("q", [""])[0]
        offset = _query_int(query, "offset", 0)
        limit = _query_int(query, "limit", DEFAULT_SEARCH_LIMIT)
        if offset < 0 or limit < 0:
            raise ApiError(400, "invalid_query", "offset and limit must be non-negative")
        ids = self.index.search(self.store, tokenize(q))
        page = ids[offset:offset + limit]
        return 200, {"rules": [self._rule_json(self.store.get_rule(rid)) for rid in page]}

    def dialog_start(self, body: dict) -> tuple[int, dict]:
        query = _req_str(body, "query")
        chain = body.get("chain", False)
        if not isinstance(chain, bool):
            raise ApiError(400, "invalid_body", "chain must be a boolean")
        max_depth = body.get("max_depth", self.config.chain_depth)
        if not isinstance(max_depth, int) or isinstance(max_depth, bool) or max_depth < 1:
            raise ApiError(400, "invalid_body", "max_depth must be an integer >= 1")
        self._purge_sessions()
        try:
            with self.write_lock:
                session, outcome = dialog.start_session(
                    self.store, self.index, query, chain=chain, max_depth=max_depth
                )
        except dialog.EmptyQuery as err:
            raise ApiError(400, "empty_query", str(err)) from err
        with self.sessions_lock:
            self.sessions[session.id] = _SessionSlot(
                session=session, lock=threading.Lock(), deadline=time.time() + SESSION_TTL
            )
        return 200, {
            "session": session.id,
            "outcome": outcome_to_json(outcome),
            "accepted": _accepted_to_json(session),
        }

    def dialog_answer(self, session_id: str, body: dict) -> tuple[int, dict]:
        accept = body.get("accept")
        if not isinstance(accept, bool):
            raise ApiError(400, "invalid_body", "accept must be a boolean")
        self._purge_sessions()
        with self.sessions_lock:
            slot = self.sessions.get(session_id)
        if slot is None:
            raise ApiError(404, "unknown_session", f"no such session: {session_id}")
        with slot.lock:
            try:
                outcome = dialog.answer(slot.session, accept)
            except dialog.SessionFinished as err:
                raise ApiError(409, "session_finished", str(err)) from err
            slot.deadline = time.time() + SESSION_TTL
            return 200, {
                "outcome": outcome_to_json(outcome),
                "accepted": _accepted_to_json(slot.session),
            }

    def ontology_turtle(self) -> str:
        return to_turtle(generate(self.store.live_rules(), self.lexicon, self.config.base_iri))

    # -- internals -------------------------------------------------------------

    def _rule_json(self, rule) -> dict:
        return {
            "rule_id": rule.id,
            "if": rule.if_text,
            "then": rule.then_text,
            "score": self.store.rule_score(rule.id),
            "author_name": self.store.get_user(rule.author).name,
            "authority": self.store.user_authority(rule.author),
        }

    def _purge_sessions(self) -> None:
        now = time.time()
        with self.sessions_lock:
            dead = [sid for sid, slot in self.sessions.items() if slot.deadline < now]
            for sid in dead:
                del self.sessions[sid]

    def authenticate(self, header: str | None) -> int:
        if not header or not header.startswith("Bearer "):
            raise ApiError(401, "bad_token", "missing or malformed Authorization header")
        try:
            return self.store.check_token(header[len("Bearer "):])
        except BadToken as err:
            raise ApiError(401, "bad_token", str(err)) from err


def _req_str(body: dict, key: str) -> str:
    value = body.get(key)
    if not isinstance(value, str):
        raise ApiError(400, "invalid_body", f"field {key!r} must be a string")
    return value


def _query_int(query: dict[str, list[str]], key: str, default: int) -> int:
    raw = query.get(key)
    if raw is None:
        return default
    try:
        return int(raw[0])
    except ValueError as err:
        raise ApiError(400, "invalid_query", f"{key} must be an integer") from err


# -- HTTP plumbing --------------------------------------------------------------

_ROUTES: list[tuple[str, re.Pattern[str], str]] = [
    ("POST", re.compile(r"^/api/register$"), "register"),
    ("POST", re.compile(r"^/api/login$"), "login"),
    ("POST", re.compile(r"^/api/rules$"), "add_rule"),
    ("GET", re.compile(r"^/api/rules/(\d+)$"), "get_rule"),
    ("DELETE", re.compile(r"^/api/rules/(\d+)$"), "delete_rule"),
    ("POST", re.compile(r"^/api/rules/(\d+)/vote$"), "vote"),
    ("GET", re.compile(r"^/api/search$"), "search"),
    ("POST", re.compile(r"^/api/dialog$"), "dialog_start"),
    ("POST", re.compile(r"^/api/dialog/([A-Za-z0-9_\-]+)/answer$"), "dialog_answer"),
    ("GET", re.compile(r"^/api/ontology$"), "ontology"),
]

# Endpoints that mutate and therefore demand a valid bearer token up front.
_AUTH_REQUIRED = {"add_rule", "delete_rule", "vote"}

_CORS_HEADERS = {
    "Access-Control-Allow-Origin": "*",
    "Access-Control-Allow-Methods": "GET, POST, DELETE, OPTIONS",
    "Access-Control-Allow-Headers": "Authorization, Content-Type",
}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "rulehub"

    @property
    def service(self) -> Service:
        return self.server.service  # type: ignore[attr-defined]

    def log_message(self, format: str, *args) -> None:
        logger.debug("%s %s", self.address_string(), format % args)

    # -- verbs --

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_DELETE(self) -> None:
        self._dispatch("DELETE")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        for name, value in _CORS_HEADERS.items():
            self.send_header(name, value)
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- dispatch --

    def _dispatch(self, method: str) -> None:
        try:
            # Drain the body up front so early errors (401 before routing,
            # validation failures) leave the connection clean for keep-alive.
            self._read_body()
            parsed = urlparse(self.path)
            path = parsed.path
            for route_method, pattern, name in _ROUTES:
                match = pattern.match(path)
                if not match:
                    continue
                if route_method != method:
                    continue
                self._handle_route(name, match, parsed.query)
                return
            if any(p.match(path) for _, p, _ in _ROUTES):
                raise ApiError(405, "method_not_allowed", f"{method} not supported here")
            if method == "GET" and self.service.config.ui_dir is not None:
                self._serve_static(path)
                return
            raise ApiError(404, "not_found", f"no such endpoint: {path}")
        except ApiError as err:
            self._send_error(err)
        except BrokenPipeError:
            pass
        except Exception:
            logger.exception("unhandled error for %s %s", method, self.path)
            self._send_error(ApiError(500, "internal_error", "internal server error"))

    def _handle_route(self, name: str, match: re.Match[str], query_string: str) -> None:
        svc = self.service
        caller: int | None = None
        if name in _AUTH_REQUIRED:
            caller = svc.authenticate(self.headers.get("Authorization"))

        if name == "register":
            status, payload = svc.register(self._json_body())
        elif name == "login":
            status, payload = svc.login(self._json_body())
        elif name == "add_rule":
            status, payload = svc.add_rule(caller, self._json_body())
        elif name == "get_rule":
            status, payload = svc.get_rule(int(match.group(1)))
        elif name == "delete_rule":
            status, payload = svc.delete_rule(caller, int(match.group(1)))
        elif name == "vote":
            status, payload = svc.vote(caller, int(match.group(1)), self._json_body())
        elif name == "search":
            status, payload = svc.search(parse_qs(query_string))
        elif name == "dialog_start":
            status, payload = svc.dialog_start(self._json_body())
        elif name == "dialog_answer":
            status, payload = svc.dialog_answer(match.group(1), self._json_body())
        elif name == "ontology":
            body = svc.ontology_turtle().encode("utf-8")
            self._send_raw(200, body, "text/turtle; charset=utf-8")
            return
        else:  # pragma: no cover
            raise AssertionError(name)
        self._send_json(status, payload)

    # -- request/response helpers --

    def _read_body(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY_BYTES:
            self.close_connection = True
            raise ApiError(400, "invalid_body", "request body too large")
        self._raw_body = self.rfile.read(length) if length else b""

    def _json_body(self) -> dict:
        if not self._raw_body:
            return {}
        try:
            body = json.loads(self._raw_body)
        except json.JSONDecodeError as err:
            raise ApiError(400, "invalid_body", f"request body is not valid JSON: {err}") from err
        if not isinstance(body, dict):
            raise ApiError(400, "invalid_body", "request body must be a JSON object")
        return body

    def _send_json(self, status: int, payload: dict | None) -> None:
        if payload is None:
            self.send_response(status)
            for name, value in _CORS_HEADERS.items():
                self.send_header(name, value)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        self._send_raw(status, body, "application/json; charset=utf-8")

    def _send_raw(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in _CORS_HEADERS.items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_error(self, err: ApiError) -> None:
        payload: dict = {"code": err.code, "message": err.message}
        if err.detail is not None:
            payload["detail"] = err.detail
        try:
            self._send_json(err.status, payload)
        except BrokenPipeError:
            pass

    def _serve_static(self, path: str) -> None:
        root = self.service.config.ui_dir
        assert root is not None
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        root_resolved = root.resolve()
        if not target.is_relative_to(root_resolved):
            raise ApiError(404, "not_found", "no such file")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise ApiError(404, "not_found", "no such file")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send_raw(200, target.read_bytes(), ctype)


def make_server(service: Service, port: int | None = None) -> ThreadingHTTPServer:
    """Bind the service; pass port 0 for an ephemeral port (tests)."""
    bind_port = service.config.port if port is None else port
    server = ThreadingHTTPServer(("", bind_port), _Handler)
    server.daemon_threads = True
    server.service = service  # type: ignore[attr-defined]
    return server
