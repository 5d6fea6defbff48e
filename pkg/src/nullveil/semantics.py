"""The two evaluation semantics for conjunctive queries with nulls.

`eval_classical` treats null as an ordinary constant: it joins and
compares syntactically, so `null = null` holds.  `eval_n` reconstructs
the SQL behaviour of NULL: a comparison with a null operand never holds,
`isnull`/`isnotnull` are the only ways to test for null, and *relevant*
variables - those occurring at least twice in the query matrix, not
counting null checks and comparisons against the null constant - never
bind null at all.  Under both, order comparisons with a null operand are
false.

`rewrite_query` turns a query into one whose classical evaluation agrees
with the SQL-like one, by guarding every relevant variable with
`v != null` and lowering the unary null checks to (in)equalities.  The
equivalence holds for SQL-like queries, i.e. those that do not already
compare terms against the null constant with `=` or `!=`.

Everything here is pure over immutable instances; evaluations can run
concurrently.
"""

from __future__ import annotations

from typing import Iterator

from .errors import SemanticError
from .lang import (Atom, BuiltinAtom, Const, Query, Term, UNARY_BUILTINS, Var,
                   ViewDef, view_as_query)
from .model import Instance, NULL, Value

AnswerSet = frozenset  # of tuple[Value, ...]

Assignment = dict  # var name -> Value


def relevant_vars(query: Query | ViewDef) -> frozenset:
    """Variables occurring at least twice in the quantifier-free matrix.

    Occurrences inside `isnull(v)`, `isnotnull(v)` and comparisons with
    an explicit null operand do not count; projection (head) occurrences
    do not count either.
    """
    if isinstance(query, ViewDef):
        query = view_as_query(query)
    counts: dict[str, int] = {}
    for atom in query.body:
        for term in atom.args:
            if isinstance(term, Var):
                counts[term.name] = counts.get(term.name, 0) + 1
    for b in query.builtins:
        if b.op in UNARY_BUILTINS:
            continue
        if any(isinstance(t, Const) and t.value.is_null for t in b.args):
            continue
        for term in b.args:
            if isinstance(term, Var):
                counts[term.name] = counts.get(term.name, 0) + 1
    return frozenset(name for name, n in counts.items() if n >= 2)


def term_value(term: Term, env: Assignment) -> Value:
    return env[term.name] if isinstance(term, Var) else term.value


def _order_holds(op: str, left: Value, right: Value) -> bool:
    """Order comparison; false whenever an operand is null, error on
    unordered kinds (only integers carry an order)."""
    if left.is_null or right.is_null:
        return False
    if left.kind != "int" or right.kind != "int":
        raise SemanticError(
            f"order comparison {op} on unordered values "
            f"{left.token()}, {right.token()}")
    a, b = left.payload, right.payload
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def builtin_classical(b: BuiltinAtom, env: Assignment) -> bool:
    """Built-in truth with null as an ordinary constant (syntactic =, !=)."""
    if b.op == "isnull":
        return term_value(b.args[0], env).is_null
    if b.op == "isnotnull":
        return not term_value(b.args[0], env).is_null
    left = term_value(b.args[0], env)
    right = term_value(b.args[1], env)
    if b.op == "=":
        return left == right
    if b.op == "!=":
        return left != right
    return _order_holds(b.op, left, right)


def builtin_n(b: BuiltinAtom, env: Assignment) -> bool:
    """Built-in truth under the SQL-like semantics: comparisons require
    both operands non-null; only isnull/isnotnull see the null itself."""
    if b.op in UNARY_BUILTINS:
        return builtin_classical(b, env)
    left = term_value(b.args[0], env)
    right = term_value(b.args[1], env)
    if b.op == "=":
        return left == right and not left.is_null
    if b.op == "!=":
        return left != right and not left.is_null and not right.is_null
    return _order_holds(b.op, left, right)


_NEGATION = {"=": "!=", "!=": "=", "<": ">=", ">": "<=", "<=": ">", ">=": "<",
             "isnull": "isnotnull", "isnotnull": "isnull"}


def negate_builtin(b: BuiltinAtom) -> BuiltinAtom:
    """Complementary built-in; with order ops false on null in both
    polarities, double negation is *not* the identity on null operands."""
    return BuiltinAtom(_NEGATION[b.op], b.args)


def iter_matches(instance: Instance, atoms: tuple[Atom, ...],
                 env: Assignment | None = None) -> Iterator[tuple[Assignment, tuple]]:
    """Enumerate assignments satisfying the atom list syntactically.

    Yields (assignment, picks) where picks gives the (relation, tid)
    matched by each atom in order.  Null matches only the null constant,
    exactly like any other constant.
    """
    base_env: Assignment = dict(env) if env else {}

    def recurse(i: int, env: Assignment, picks: tuple):
        if i == len(atoms):
            yield env, picks
            return
        atom = atoms[i]
        for row in instance.rows(atom.pred):
            bound = env
            ok = True
            for term, value in zip(atom.args, row.values):
                if isinstance(term, Const):
                    if term.value != value:
                        ok = False
                        break
                else:
                    existing = bound.get(term.name)
                    if existing is None:
                        if bound is env:
                            bound = dict(env)
                        bound[term.name] = value
                    elif existing != value:
                        ok = False
                        break
            if ok:
                yield from recurse(i + 1, bound, picks + ((atom.pred, row.tid),))

    yield from recurse(0, base_env, ())


def _project(query: Query, env: Assignment) -> tuple[Value, ...]:
    return tuple(env[v.name] for v in query.out)


def eval_classical(instance: Instance, query: Query) -> AnswerSet:
    """Standard conjunctive-query evaluation, null as ordinary constant."""
    answers = set()
    for env, _ in iter_matches(instance, query.body):
        if all(builtin_classical(b, env) for b in query.builtins):
            answers.add(_project(query, env))
    return frozenset(answers)


def eval_n(instance: Instance, query: Query) -> AnswerSet:
    """SQL-like evaluation: relevant variables (free or quantified) never
    bind null, and built-ins follow the null-rejecting semantics."""
    relevant = relevant_vars(query)
    answers = set()
    for env, _ in iter_matches(instance, query.body):
        if any(env[name].is_null for name in relevant):
            continue
        if all(builtin_n(b, env) for b in query.builtins):
            answers.add(_project(query, env))
    return frozenset(answers)


def rewrite_query(query: Query) -> Query:
    """Classical equivalent of a query under the SQL-like semantics.

    Lowers isnull/isnotnull to (in)equality against null and appends one
    `v != null` guard per relevant variable.
    """
    relevant = relevant_vars(query)
    builtins = []
    for b in query.builtins:
        if b.op == "isnull":
            builtins.append(BuiltinAtom("=", (b.args[0], Const(NULL))))
        elif b.op == "isnotnull":
            builtins.append(BuiltinAtom("!=", (b.args[0], Const(NULL))))
        else:
            builtins.append(b)
    for name in sorted(relevant):
        builtins.append(BuiltinAtom("!=", (Var(name), Const(NULL))))
    return Query(query.out, query.body, tuple(builtins))


def boolean_answer(answers: AnswerSet) -> bool:
    """Yes/no reading of a boolean (zero projection) query's answer set."""
    return tuple() in answers
