"""Compile the rule base into an OWL ontology serialized as Turtle.

Pipeline: flatten every rule part into its atomic statements (connectors
contribute nothing), tag each token with a part of speech, then map each
statement through a small clause table into class / property declarations.
Output is deterministic: axioms are deduplicated into a set and serialized
in a fixed order, so the same rule base always yields the same bytes.

Tagging is lexicon-plus-suffix-heuristics rather than a statistical model:
deterministic, auditable, and replaceable by pointing the service at a TSV
lexicon file (one "word<TAB>tag" per line, tags noun/verb/adjective/other,
'#' comments allowed).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

from .model import Rule, Statement, Token, is_number_token
from .parser import flatten_statements

DEFAULT_BASE_IRI = "http://example.org/ck#"

XSD_STRING = "xsd:string"
XSD_DECIMAL = "xsd:decimal"


class PosTag(enum.Enum):
    NOUN = "noun"
    VERB = "verb"
    ADJECTIVE = "adjective"
    NUMBER_LITERAL = "number"
    OTHER = "other"


class LexiconError(Exception):
    pass


# Small built-in word list. Nouns are the default tag, so only words that
# must NOT read as nouns need listing. Deliberately modest; deployments with
# richer vocabularies supply their own file.
_BUILTIN_VERBS = (
    "is are was were be been am has have had do does did "
    "eat eats ate fly flies flew go goes went run runs ran "
    "make makes made take takes took see sees saw give gives gave "
    "need needs want wants use uses cause causes become becomes"
)
_BUILTIN_ADJECTIVES = (
    "big small heavy light hot cold new old good bad "
    "fast slow high low wet dry dark bright strong weak "
    "red green blue black white"
)
_BUILTIN_OTHER = (
    "a an the it its this that these those "
    "in on at by for with from to of over under "
    "if then not no yes very some all any"
)


@dataclass(frozen=True)
class Lexicon:
    """Case-insensitive word -> tag table; entries win over suffix rules."""

    entries: dict[str, PosTag]
    source: str

    def lookup(self, word: str) -> PosTag | None:
        return self.entries.get(word.lower())

    @classmethod
    def default(cls) -> Lexicon:
        entries: dict[str, PosTag] = {}
        for word in _BUILTIN_VERBS.split():
            entries[word] = PosTag.VERB
        for word in _BUILTIN_ADJECTIVES.split():
            entries[word] = PosTag.ADJECTIVE
        for word in _BUILTIN_OTHER.split():
            entries[word] = PosTag.OTHER
        return cls(entries=entries, source="<built-in>")

    @classmethod
    def from_file(cls, path: str | Path) -> Lexicon:
        tag_names = {
            "noun": PosTag.NOUN,
            "verb": PosTag.VERB,
            "adjective": PosTag.ADJECTIVE,
            "other": PosTag.OTHER,
        }
        entries: dict[str, PosTag] = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"{path}:{lineno}: expected 'word<TAB>tag', got {line!r}")
            word, tag = parts[0].strip(), parts[1].strip().lower()
            if not word:
                raise LexiconError(f"{path}:{lineno}: empty word")
            if tag not in tag_names:
                raise LexiconError(
                    f"{path}:{lineno}: unknown tag {tag!r} (want noun/verb/adjective/other)"
                )
            entries[word.lower()] = tag_names[tag]
        return cls(entries=entries, source=str(path))


def pos_tag(token: Token, lexicon: Lexicon) -> PosTag:
    """Tag one token. Total: every token gets exactly one tag.

    Order: numeric literal, lexicon entry, suffix heuristics, noun default.
    """
    if is_number_token(token):
        return PosTag.NUMBER_LITERAL
    hit = lexicon.lookup(token)
    if hit is not None:
        return hit
    if token.endswith(("ing", "ed")):
        return PosTag.VERB
    if token.endswith(("ous", "ful", "ive", "al")):
        return PosTag.ADJECTIVE
    if token.endswith("ly"):
        return PosTag.OTHER
    return PosTag.NOUN


# -- OWL axioms ---------------------------------------------------------------


@dataclass(frozen=True)
class ClassDecl:
    iri: str


@dataclass(frozen=True)
class ObjectPropertyDecl:
    iri: str
    domain_iri: str
    range_iri: str


@dataclass(frozen=True)
class DatatypePropertyDecl:
    iri: str
    domain_iri: str
    range: str  # xsd:string or xsd:decimal


OwlAxiom = ClassDecl | ObjectPropertyDecl | DatatypePropertyDecl

# Serialization order is (kind, iri); kind strings sort class < datatype < object.
_KIND_ORDER = {
    ClassDecl: "class",
    DatatypePropertyDecl: "datatype-property",
    ObjectPropertyDecl: "object-property",
}


@dataclass(frozen=True)
class Ontology:
    axioms: frozenset[OwlAxiom]
    base_iri: str


def class_name(token: Token) -> str:
    """CamelCase class name for a (single-word, lowercase) token."""
    return token.replace(".", "_").capitalize()


def property_name(token: Token) -> str:
    """lowerCamelCase property name; single-word tokens stay lowercase."""
    return token.replace(".", "_").lower()


def map_statement(statement: Statement, lexicon: Lexicon, base_iri: str) -> list[OwlAxiom]:
    """Apply the statement -> axiom clause table.

    (a) a single-token statement is always one class, whatever its POS;
    (b) every noun becomes a class;
    (c) a verb between nouns becomes an object property linking the nearest
        noun on each side;
    (d) an adjective immediately before a noun becomes a string-valued
        "has<Adjective>" datatype property on that noun;
    (e) a number literal next to a noun becomes a decimal-valued
        "hasQuantity" property on that noun (preceding noun wins a tie);
    anything else maps to nothing. Clauses apply in table order, each
    scanning left to right; duplicates collapse keeping first position.
    """
    tokens = statement.tokens
    if not tokens:
        raise ValueError("empty statement")

    def cls_iri(token: Token) -> str:
        return base_iri + class_name(token)

    if len(tokens) == 1:
        return [ClassDecl(iri=cls_iri(tokens[0]))]

    tags = [pos_tag(t, lexicon) for t in tokens]
    axioms: list[OwlAxiom] = []

    for token, tag in zip(tokens, tags):
        if tag is PosTag.NOUN:
            axioms.append(ClassDecl(iri=cls_iri(token)))

    for i, (token, tag) in enumerate(zip(tokens, tags)):
        if tag is not PosTag.VERB:
            continue
        before = next((j for j in range(i - 1, -1, -1) if tags[j] is PosTag.NOUN), None)
        after = next((j for j in range(i + 1, len(tokens)) if tags[j] is PosTag.NOUN), None)
        if before is not None and after is not None:
            axioms.append(ObjectPropertyDecl(
                iri=base_iri + property_name(token),
                domain_iri=cls_iri(tokens[before]),
                range_iri=cls_iri(tokens[after]),
            ))

    for i, (token, tag) in enumerate(zip(tokens, tags)):
        if tag is PosTag.ADJECTIVE and i + 1 < len(tokens) and tags[i + 1] is PosTag.NOUN:
            axioms.append(DatatypePropertyDecl(
                iri=base_iri + "has" + class_name(token),
                domain_iri=cls_iri(tokens[i + 1]),
                range=XSD_STRING,
            ))

    for i, (token, tag) in enumerate(zip(tokens, tags)):
        if tag is not PosTag.NUMBER_LITERAL:
            continue
        if i > 0 and tags[i - 1] is PosTag.NOUN:
            noun = tokens[i - 1]
        elif i + 1 < len(tokens) and tags[i + 1] is PosTag.NOUN:
            noun = tokens[i + 1]
        else:
            continue
        axioms.append(DatatypePropertyDecl(
            iri=base_iri + "hasQuantity",
            domain_iri=cls_iri(noun),
            range=XSD_DECIMAL,
        ))

    seen: set[OwlAxiom] = set()
    out: list[OwlAxiom] = []
    for axiom in axioms:
        if axiom not in seen:
            seen.add(axiom)
            out.append(axiom)
    return out


def generate(rules: list[Rule], lexicon: Lexicon, base_iri: str = DEFAULT_BASE_IRI) -> Ontology:
    """Map every distinct statement of every rule part; order never matters."""
    statements: dict[tuple[Token, ...], Statement] = {}
    for rule in rules:
        for expr in (rule.if_expr, rule.then_expr):
            for stmt in flatten_statements(expr):
                statements.setdefault(stmt.tokens, stmt)
    axioms: set[OwlAxiom] = set()
    for stmt in statements.values():
        axioms.update(map_statement(stmt, lexicon, base_iri))
    return Ontology(axioms=frozenset(axioms), base_iri=base_iri)


# -- Turtle serialization -----------------------------------------------------

_PREFIX_BLOCK = (
    "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
    "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
    "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
    "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"
)


def _local(iri: str, base_iri: str) -> str:
    if not iri.startswith(base_iri):
        raise ValueError(f"IRI {iri!r} is outside base {base_iri!r}")
    return iri[len(base_iri):]


def to_turtle(ontology: Ontology) -> str:
    """Serialize deterministically; same ontology, same bytes."""
    base = ontology.base_iri
    lines = [_PREFIX_BLOCK + f"@prefix : <{base}> .\n"]
    ordered = sorted(ontology.axioms, key=lambda a: (_KIND_ORDER[type(a)], a.iri))
    if ordered:
        lines.append("\n")
    for axiom in ordered:
        if isinstance(axiom, ClassDecl):
            lines.append(f":{_local(axiom.iri, base)} a owl:Class .\n")
        elif isinstance(axiom, ObjectPropertyDecl):
            lines.append(
                f":{_local(axiom.iri, base)} a owl:ObjectProperty ; "
                f"rdfs:domain :{_local(axiom.domain_iri, base)} ; "
                f"rdfs:range :{_local(axiom.range_iri, base)} .\n"
            )
        else:
            lines.append(
                f":{_local(axiom.iri, base)} a owl:DatatypeProperty ; "
                f"rdfs:domain :{_local(axiom.domain_iri, base)} ; "
                f"rdfs:range {axiom.range} .\n"
            )
    return "".join(lines)
