"""Concrete syntax for schemas, facts, secrecy views, and queries.

The surface language is Datalog-flavoured: predicate and view names are
identifiers, uppercase-initial identifiers in argument position are
variables, lowercase identifiers are symbol constants, `null` is the
null constant, integers and double-quoted strings are constants of their
respective sorts.  Comments run from `%` to end of line.

    schema file:  relation NAME(col:sort, ...). ...
    facts file:   [@TID] NAME(term, ...). ...
    views file:   NAME(VARS) :- ATOM, ..., BUILTIN, ... . ...
    query:        ?(VARS) :- ATOM, ..., BUILTIN, ... .

Built-ins are `=`, `!=` (also spelled `<>`), `<`, `>`, `<=`, `>=`,
`isnull(T)`, `isnotnull(T)`.  The parser is reentrant and keeps no
global state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ParseError, SemanticError
from .model import COLUMN_SORTS, Instance, NULL, Relation, Row, Schema, Value, value_fits_sort

COMPARISONS = ("=", "!=", "<", ">", "<=", ">=")
ORDER_OPS = ("<", ">", "<=", ">=")
UNARY_BUILTINS = ("isnull", "isnotnull")


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def token(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: Value

    def token(self) -> str:
        return self.value.token()


Term = Var | Const


@dataclass(frozen=True, slots=True)
class Atom:
    """A database atom: predicate applied to terms."""

    pred: str
    args: tuple[Term, ...]

    def token(self) -> str:
        return f"{self.pred}({', '.join(t.token() for t in self.args)})"


@dataclass(frozen=True, slots=True)
class BuiltinAtom:
    """A built-in atom: a binary comparison or a unary null check."""

    op: str
    args: tuple[Term, ...]

    def token(self) -> str:
        if self.op in UNARY_BUILTINS:
            return f"{self.op}({self.args[0].token()})"
        return f"{self.args[0].token()} {self.op} {self.args[1].token()}"


@dataclass(frozen=True, slots=True)
class ViewDef:
    """A secrecy view: head variables, body atoms, built-in conjunction."""

    name: str
    head: tuple[Var, ...]
    body: tuple[Atom, ...]
    phi: tuple[BuiltinAtom, ...]

    def token(self) -> str:
        head = f"{self.name}({', '.join(v.name for v in self.head)})"
        return _rule_token(head, self.body, self.phi)


@dataclass(frozen=True, slots=True)
class Query:
    """A conjunctive query; body variables outside the projection list are
    implicitly existential.  The projection list may repeat variables."""

    out: tuple[Var, ...]
    body: tuple[Atom, ...]
    builtins: tuple[BuiltinAtom, ...]

    @property
    def free_vars(self) -> frozenset:
        return frozenset(v.name for v in self.out)

    def token(self) -> str:
        return _rule_token(f"?({', '.join(v.name for v in self.out)})",
                           self.body, self.builtins)


def _rule_token(head: str, body, builtins) -> str:
    items = [a.token() for a in body] + [b.token() for b in builtins]
    return f"{head} :- {', '.join(items)}."


class QueryClass(enum.Enum):
    CONJ_SIGMA = "conj-sigma"
    CONJ_NULL_SQL = "conj-null-sql"
    CONJ_NULL_GENERAL = "conj-null-general"


# --------------------------------------------------------------------------
# tokenizer

_PUNCT = (":-", "<=", ">=", "!=", "<>", "(", ")", ",", ".", "=", "<", ">", "@", "?", ":", "|")


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # upper | lower | int | str | punct | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            chunks: list[str] = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    chunks.append(text[j + 1])
                    j += 2
                else:
                    chunks.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError("unterminated string", line, col)
            tokens.append(_Token("str", "".join(chunks), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "upper" if word[0].isupper() or word[0] == "_" else "lower"
            tokens.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for punct in _PUNCT:
            if text.startswith(punct, i):
                tokens.append(_Token("punct", punct, line, col))
                i += len(punct)
                col += len(punct)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    def expect_name(self, what: str) -> _Token:
        tok = self.next()
        if tok.kind not in ("lower", "upper"):
            raise ParseError(f"expected {what}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"

    # ---- shared pieces -------------------------------------------------

    def parse_term(self) -> Term:
        tok = self.next()
        if tok.kind == "upper":
            return Var(tok.text)
        if tok.kind == "int":
            return Const(Value.of_int(int(tok.text)))
        if tok.kind == "str":
            return Const(Value.of_str(tok.text))
        if tok.kind == "lower":
            if tok.text == "null":
                return Const(NULL)
            return Const(Value.of_sym(tok.text))
        raise ParseError(f"expected a term, found {tok.text or 'end of input'!r}",
                         tok.line, tok.col)

    def parse_term_list(self) -> tuple[Term, ...]:
        self.expect("(")
        if self.peek().text == ")":
            self.next()
            return ()
        terms = [self.parse_term()]
        while self.peek().text == ",":
            self.next()
            terms.append(self.parse_term())
        self.expect(")")
        return tuple(terms)

    def parse_var_list(self) -> tuple[Var, ...]:
        terms = self.parse_term_list()
        out: list[Var] = []
        for term in terms:
            if not isinstance(term, Var):
                raise ParseError(f"head terms must be variables, found {term.token()!r}",
                                 self.peek().line, self.peek().col)
            out.append(term)
        return tuple(out)

    def parse_body(self) -> tuple[tuple[Atom, ...], tuple[BuiltinAtom, ...]]:
        atoms: list[Atom] = []
        builtins: list[BuiltinAtom] = []
        while True:
            tok = self.peek()
            if tok.kind == "lower" and tok.text.lower() in UNARY_BUILTINS:
                op = self.next().text.lower()
                args = self.parse_term_list()
                if len(args) != 1:
                    raise ParseError(f"{op} takes one argument", tok.line, tok.col)
                builtins.append(BuiltinAtom(op, args))
            elif tok.kind in ("lower", "upper") and self.peek(1).text == "(":
                name = self.next().text
                atoms.append(Atom(name, self.parse_term_list()))
            else:
                left = self.parse_term()
                op_tok = self.next()
                op = "!=" if op_tok.text == "<>" else op_tok.text
                if op not in COMPARISONS:
                    raise ParseError(f"expected comparison, found {op_tok.text!r}",
                                     op_tok.line, op_tok.col)
                right = self.parse_term()
                builtins.append(BuiltinAtom(op, (left, right)))
            if self.peek().text == ",":
                self.next()
                continue
            break
        return tuple(atoms), tuple(builtins)


# --------------------------------------------------------------------------
# schema and facts

def parse_schema(text: str) -> Schema:
    """Parse `relation NAME(col:sort, ...).` declarations into a Schema."""
    parser = _Parser(text)
    relations: list[Relation] = []
    seen: set[str] = set()
    while not parser.at_eof():
        kw = parser.next()
        if kw.text != "relation":
            raise ParseError(f"expected 'relation', found {kw.text!r}", kw.line, kw.col)
        name_tok = parser.expect_name("relation name")
        parser.expect("(")
        columns: list[tuple[str, str]] = []
        while True:
            col_tok = parser.expect_name("column name")
            parser.expect(":")
            sort_tok = parser.expect_name("column sort")
            if sort_tok.text not in COLUMN_SORTS:
                raise ParseError(f"unknown sort {sort_tok.text!r}", sort_tok.line, sort_tok.col)
            columns.append((col_tok.text, sort_tok.text))
            if parser.peek().text == ",":
                parser.next()
                continue
            break
        parser.expect(")")
        parser.expect(".")
        if name_tok.text in seen:
            raise ParseError(f"duplicate relation {name_tok.text}", name_tok.line, name_tok.col)
        seen.add(name_tok.text)
        relations.append(Relation(name_tok.text, tuple(columns)))
    return Schema(relations)


def print_schema(schema: Schema) -> str:
    lines = []
    for rel in schema.relations:
        cols = ", ".join(f"{name}:{sort}" for name, sort in rel.columns)
        lines.append(f"relation {rel.name}({cols}).")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_facts(text: str, schema: Schema) -> Instance:
    """Parse ground facts into an Instance.

    Tuple ids are taken from an explicit `@TID` prefix when present and
    assigned 1.. per relation in file order otherwise; mixing both styles
    within one relation is rejected when ids collide.
    """
    parser = _Parser(text)
    rows: dict[str, list[Row]] = {name: [] for name in schema.names()}
    auto: dict[str, int] = {name: 0 for name in schema.names()}
    explicit: dict[str, set[int]] = {name: set() for name in schema.names()}
    while not parser.at_eof():
        tid = None
        if parser.peek().text == "@":
            at = parser.next()
            tid_tok = parser.next()
            if tid_tok.kind != "int" or int(tid_tok.text) < 1:
                raise ParseError("expected positive tuple id after '@'", at.line, at.col)
            tid = int(tid_tok.text)
        name_tok = parser.expect_name("relation name")
        if not schema.has_relation(name_tok.text):
            raise ParseError(f"unknown relation {name_tok.text}", name_tok.line, name_tok.col)
        rel = schema.relation(name_tok.text)
        terms = parser.parse_term_list()
        parser.expect(".")
        if len(terms) != rel.arity:
            raise ParseError(
                f"{rel.name} expects {rel.arity} values, got {len(terms)}",
                name_tok.line, name_tok.col)
        values = []
        for pos, term in enumerate(terms, 1):
            if not isinstance(term, Const):
                raise ParseError(f"facts must be ground, found variable {term.token()}",
                                 name_tok.line, name_tok.col)
            if not value_fits_sort(term.value, rel.sort_at(pos)):
                raise ParseError(
                    f"value {term.value.token()} does not fit column "
                    f"{rel.name}[{pos}]:{rel.sort_at(pos)}",
                    name_tok.line, name_tok.col)
            values.append(term.value)
        if tid is None:
            auto[rel.name] += 1
            while auto[rel.name] in explicit[rel.name]:
                auto[rel.name] += 1
            tid = auto[rel.name]
        elif tid in explicit[rel.name] or any(r.tid == tid for r in rows[rel.name]):
            raise ParseError(f"duplicate tuple id {rel.name}#{tid}",
                             name_tok.line, name_tok.col)
        explicit[rel.name].add(tid)
        rows[rel.name].append(Row(tid, tuple(values)))
    return Instance(schema, rows)


def print_facts(instance: Instance) -> str:
    lines = []
    for name in instance.schema.names():
        for row in instance.rows(name):
            args = ", ".join(v.token() for v in row.values)
            lines.append(f"@{row.tid} {name}({args}).")
    return "\n".join(lines) + ("\n" if lines else "")


# --------------------------------------------------------------------------
# views and queries

def _check_rule(body: tuple[Atom, ...], builtins: tuple[BuiltinAtom, ...],
                schema: Schema, allow_null_builtins: bool) -> None:
    if not body:
        raise SemanticError("rule body must contain at least one database atom")
    var_sorts: dict[str, set[str]] = {}
    for atom in body:
        rel = schema.relation(atom.pred)
        if len(atom.args) != rel.arity:
            raise SemanticError(
                f"{atom.pred} expects {rel.arity} arguments, got {len(atom.args)}")
        for pos, term in enumerate(atom.args, 1):
            sort = rel.sort_at(pos)
            if isinstance(term, Const):
                if not value_fits_sort(term.value, sort):
                    raise SemanticError(
                        f"constant {term.token()} does not fit {atom.pred}[{pos}]:{sort}")
            else:
                var_sorts.setdefault(term.name, set()).add(sort)
    body_vars = set(var_sorts)
    for b in builtins:
        for term in b.args:
            if isinstance(term, Var) and term.name not in body_vars:
                raise SemanticError(
                    f"variable {term.name} of built-in {b.token()!r} "
                    "does not occur in any body atom")
            if isinstance(term, Const) and term.value.is_null and not allow_null_builtins:
                raise SemanticError(
                    "null may not appear in a view built-in; "
                    "views are defined over plain comparisons")
        if b.op in UNARY_BUILTINS and not allow_null_builtins:
            raise SemanticError(
                f"{b.op} may not appear in a view definition")
        if b.op in ORDER_OPS:
            for term in b.args:
                if isinstance(term, Var):
                    sorts = var_sorts[term.name]
                    if sorts and "any" not in sorts and "int" not in sorts:
                        raise SemanticError(
                            f"order comparison on non-int variable {term.name}")
                elif not term.value.is_null and term.value.kind != "int":
                    raise SemanticError(
                        f"order comparison on non-int constant {term.token()}")


def parse_view(text: str, schema: Schema) -> ViewDef:
    """Parse a single secrecy-view rule, checking safety and sorts."""
    views = parse_views(text, schema)
    if len(views) != 1:
        raise SemanticError(f"expected exactly one view rule, found {len(views)}")
    return views[0]


def parse_views(text: str, schema: Schema) -> list[ViewDef]:
    parser = _Parser(text)
    views: list[ViewDef] = []
    names: set[str] = set()
    while not parser.at_eof():
        name_tok = parser.expect_name("view name")
        head = parser.parse_var_list()
        parser.expect(":-")
        body, phi = parser.parse_body()
        parser.expect(".")
        _check_rule(body, phi, schema, allow_null_builtins=False)
        body_vars = {t.name for a in body for t in a.args if isinstance(t, Var)}
        for var in head:
            if var.name not in body_vars:
                raise SemanticError(
                    f"head variable {var.name} of view {name_tok.text} "
                    "does not occur in the body")
        if schema.has_relation(name_tok.text):
            raise SemanticError(f"view name {name_tok.text} clashes with a relation")
        if name_tok.text in names:
            raise SemanticError(f"duplicate view name {name_tok.text}")
        names.add(name_tok.text)
        views.append(ViewDef(name_tok.text, head, body, phi))
    return views


def print_view(view: ViewDef) -> str:
    return view.token()


def parse_query(text: str, schema: Schema) -> Query:
    """Parse `?(VARS) :- body.` into a Query, checking safety and sorts."""
    parser = _Parser(text)
    parser.expect("?")
    out = parser.parse_var_list()
    parser.expect(":-")
    body, builtins = parser.parse_body()
    parser.expect(".")
    if not parser.at_eof():
        tok = parser.peek()
        raise ParseError(f"unexpected input after query: {tok.text!r}", tok.line, tok.col)
    _check_rule(body, builtins, schema, allow_null_builtins=True)
    body_vars = {t.name for a in body for t in a.args if isinstance(t, Var)}
    for var in out:
        if var.name not in body_vars:
            raise SemanticError(f"free variable {var.name} does not occur in the body")
    return Query(out, body, builtins)


def print_query(query: Query) -> str:
    return query.token()


def view_as_query(view: ViewDef) -> Query:
    """The conjunctive query computing the view's extension."""
    return Query(view.head, view.body, view.phi)


def classify_query(query: Query) -> QueryClass:
    """Syntactic class of a query.

    A query mentioning null in an (in)equality is outside the SQL-like
    class; one that never mentions null at all (nor the null checks) is a
    plain conjunctive query.
    """
    mentions_null = any(
        isinstance(t, Const) and t.value.is_null
        for a in query.body for t in a.args)
    has_null_check = False
    for b in query.builtins:
        null_arg = any(isinstance(t, Const) and t.value.is_null for t in b.args)
        if b.op in UNARY_BUILTINS:
            has_null_check = True
        if null_arg:
            if b.op in ("=", "!="):
                return QueryClass.CONJ_NULL_GENERAL
            mentions_null = True
    if mentions_null or has_null_check:
        return QueryClass.CONJ_NULL_SQL
    return QueryClass.CONJ_SIGMA
