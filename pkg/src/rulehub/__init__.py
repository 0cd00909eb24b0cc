"""Collective knowledge base: contributed IF..THEN rules, elimination
dialogs over them, contributor-vote ranking, and OWL/Turtle export."""

from .dialog import (
    DialogSession,
    EmptyQuery,
    NoResult,
    Propose,
    Result,
    SessionFinished,
    UnknownSession,
    answer,
    rank_candidates,
    start_session,
)
from .index import AlreadyIndexed, Index, NotIndexed
from .model import (
    And,
    Atom,
    Or,
    PartExpr,
    Rule,
    RuleId,
    Statement,
    Token,
    UserAccount,
    UserId,
    Vote,
    Xor,
    evaluate,
    tokenize,
)
from .ontology import (
    ClassDecl,
    DatatypePropertyDecl,
    Lexicon,
    ObjectPropertyDecl,
    Ontology,
    PosTag,
    generate,
    map_statement,
    pos_tag,
    to_turtle,
)
from .parser import (
    ParseError,
    ParseErrorKind,
    flatten_statements,
    format_part,
    parse_part,
)
from .store import Store

__version__ = "0.1.0"

__all__ = [
    "And",
    "AlreadyIndexed",
    "Atom",
    "ClassDecl",
    "DatatypePropertyDecl",
    "DialogSession",
    "EmptyQuery",
    "Index",
    "Lexicon",
    "NoResult",
    "NotIndexed",
    "ObjectPropertyDecl",
    "Ontology",
    "Or",
    "ParseError",
    "ParseErrorKind",
    "PartExpr",
    "PosTag",
    "Propose",
    "Result",
    "Rule",
    "RuleId",
    "SessionFinished",
    "Statement",
    "Store",
    "Token",
    "UnknownSession",
    "UserAccount",
    "UserId",
    "Vote",
    "Xor",
    "answer",
    "evaluate",
    "flatten_statements",
    "format_part",
    "generate",
    "map_statement",
    "parse_part",
    "pos_tag",
    "rank_candidates",
    "start_session",
    "to_turtle",
    "tokenize",
    "__version__",
]
