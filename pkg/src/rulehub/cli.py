"""Operator command line: serve, init-admin, import, export-rules, export-ontology.

Every subcommand takes a file lock inside the data directory so an offline
command never races a running server (and vice versa). Exit codes: 0 success,
1 usage/operational error, 2 data error (bad input lines, duplicate email).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from filelock import FileLock, Timeout

from .ontology import Lexicon, generate, to_turtle
from .service import Service, ServiceConfig, make_server
from .store import DuplicateEmail, PartParseError, Store, StoreError, UnknownUser

LOCK_FILENAME = "rulehub.lock"


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # data errors, so remap.
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="rulehub", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--data-dir", type=Path, default=None, help="data directory (RH_DATA_DIR)")

    serve = sub.add_parser("serve", help="run the HTTP service")
    add_common(serve)
    serve.add_argument("--port", type=int, default=None, help="listen port (RH_PORT)")
    serve.add_argument("--lexicon", type=Path, default=None, help="POS lexicon TSV (RH_LEXICON)")
    serve.add_argument("--base-iri", default=None, help="ontology base IRI (RH_BASE_IRI)")
    serve.add_argument(
        "--chain-depth", type=int, default=None, help="default chain depth (RH_CHAIN_DEPTH)"
    )
    serve.add_argument(
        "--token-ttl", type=float, default=None, help="login token TTL seconds (RH_TOKEN_TTL)"
    )
    serve.add_argument("--ui-dir", type=Path, default=None, help="static web UI dir (RH_UI_DIR)")
    serve.set_defaults(func=cmd_serve)

    init_admin = sub.add_parser("init-admin", help="create an administrator account")
    add_common(init_admin)
    init_admin.add_argument("--name", required=True)
    init_admin.add_argument("--email", required=True)
    init_admin.add_argument("--password", required=True)
    init_admin.set_defaults(func=cmd_init_admin)

    imp = sub.add_parser("import", help="bulk-load rules from JSONL")
    add_common(imp)
    imp.add_argument("--file", required=True, type=Path, help='JSONL of {"if","then"} lines')
    imp.add_argument("--as", dest="author_email", required=True, metavar="EMAIL",
                     help="author for the imported rules")
    imp.set_defaults(func=cmd_import)

    exp = sub.add_parser("export-rules", help="dump live rules as JSONL")
    add_common(exp)
    exp.add_argument("--file", required=True, type=Path)
    exp.set_defaults(func=cmd_export_rules)

    expo = sub.add_parser("export-ontology", help="write the rule-base ontology as Turtle")
    add_common(expo)
    expo.add_argument("--file", required=True, type=Path)
    expo.add_argument("--lexicon", type=Path, default=None, help="POS lexicon TSV (RH_LEXICON)")
    expo.add_argument("--base-iri", default=None, help="ontology base IRI (RH_BASE_IRI)")
    expo.set_defaults(func=cmd_export_ontology)

    return parser


def _config_from(args: argparse.Namespace) -> ServiceConfig:
    """Env first, explicit flags override."""
    cfg = ServiceConfig.from_env()
    for attr, flag in (
        ("data_dir", "data_dir"),
        ("port", "port"),
        ("lexicon_path", "lexicon"),
        ("base_iri", "base_iri"),
        ("chain_depth", "chain_depth"),
        ("token_ttl", "token_ttl"),
        ("ui_dir", "ui_dir"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attr, value)
    return cfg


def _lock_for(data_dir: Path) -> FileLock:
    data_dir.mkdir(parents=True, exist_ok=True)
    return FileLock(str(data_dir / LOCK_FILENAME), timeout=0)


def _locked(data_dir: Path):
    lock = _lock_for(data_dir)
    try:
        lock.acquire()
    except Timeout:
        print(f"rulehub: data dir {data_dir} is locked by another process", file=sys.stderr)
        raise SystemExit(1) from None
    return lock


def cmd_serve(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    lock = _locked(cfg.data_dir)
    try:
        service = Service.open(cfg)
        try:
            server = make_server(service)
            host, port = server.server_address[:2]
            print(f"rulehub serving on http://{host or '0.0.0.0'}:{port}", flush=True)
            try:
                server.serve_forever()
            except KeyboardInterrupt:
                pass
            finally:
                server.server_close()
        finally:
            service.close()
    finally:
        lock.release()
    return 0


def cmd_init_admin(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    lock = _locked(cfg.data_dir)
    try:
        with Store(cfg.data_dir) as store:
            try:
                user_id = store.register_user(args.name, args.email, args.password)
            except DuplicateEmail as err:
                print(f"rulehub: {err}", file=sys.stderr)
                return 2
            except StoreError as err:
                print(f"rulehub: {err}", file=sys.stderr)
                return 2
            store.grant_admin(user_id)
            print(f"admin user {user_id} created")
            return 0
    finally:
        lock.release()


def cmd_import(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    try:
        lines = args.file.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        print(f"rulehub: cannot read {args.file}: {err}", file=sys.stderr)
        return 1
    lock = _locked(cfg.data_dir)
    try:
        with Store(cfg.data_dir) as store:
            try:
                author = store.user_by_email(args.author_email)
            except UnknownUser as err:
                print(f"rulehub: {err}", file=sys.stderr)
                return 2
            imported = 0
            failed = 0
            for lineno, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    if not isinstance(record, dict):
                        raise ValueError("expected a JSON object")
                    if_text, then_text = record["if"], record["then"]
                    if not isinstance(if_text, str) or not isinstance(then_text, str):
                        raise ValueError('"if" and "then" must be strings')
                    store.add_rule(author.id, if_text, then_text)
                except (ValueError, KeyError, PartParseError) as err:
                    print(f"{args.file}:{lineno}: {err}", file=sys.stderr)
                    failed += 1
                    continue
                imported += 1
            print(f"imported {imported} rules, {failed} failed")
            return 2 if failed else 0
    finally:
        lock.release()


def cmd_export_rules(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    lock = _locked(cfg.data_dir)
    try:
        with Store(cfg.data_dir) as store:
            with open(args.file, "w", encoding="utf-8") as out:
                for rule in store.live_rules():
                    out.write(json.dumps(
                        {"if": rule.if_text, "then": rule.then_text}, ensure_ascii=False
                    ) + "\n")
            print(f"exported {len(store.live_rules())} rules")
            return 0
    finally:
        lock.release()


def cmd_export_ontology(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    lock = _locked(cfg.data_dir)
    try:
        with Store(cfg.data_dir) as store:
            lexicon = (
                Lexicon.from_file(cfg.lexicon_path)
                if cfg.lexicon_path is not None
                else Lexicon.default()
            )
            turtle = to_turtle(generate(store.live_rules(), lexicon, cfg.base_iri))
            args.file.write_text(turtle, encoding="utf-8")
            print(f"wrote {args.file}")
            return 0
    finally:
        lock.release()


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
