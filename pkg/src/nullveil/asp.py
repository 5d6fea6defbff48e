"""Compilation of an instance plus secrecy views into an annotated
disjunctive logic program whose stable models are the secrecy instances.

Tuple lifecycle is tracked through predicate-name suffixes standing for
four annotations: `_a` marks the freshly written (nulled) version of a
tuple, `_u` a tuple that has been overwritten, `_t` anything old or new,
and `_s` what survives into the secrecy instance (old or new and never
overwritten).  Per view, a disjunctive rule fires on every violating
match - comparisons hold, no combination variable is null, and some head
variable is non-null (witnessed by an auxiliary per-view predicate over
the head variables) - and chooses either one whole-atom secrecy-side
update or one combination-side update.  Collection rules then mark the
originals of chosen updates as overwritten.

Queries are answered cautiously: the query is rewritten to its classical
form, retargeted at `_s` atoms under a fresh `ans` head, and the answers
true in every stable model are returned; they must coincide with the
secret answers computed from the materialised secrecy instances.

Export produces solver-ready text for the dlv and clingo dialects
(predicates lowercased, disjunction `v` respectively `|`); denial
constraints state, one per head variable, that no body match may leave
that variable non-null.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import CrossCheckError, DialectError, SemanticError, UnsupportedRuleError
from .lang import (Atom, BuiltinAtom, COMPARISONS, Const, Query, UNARY_BUILTINS,
                   Var, ViewDef, _Parser)
from .model import Instance, NULL, Row
from .semantics import AnswerSet, relevant_vars, rewrite_query
from .solver import GAtom, Literal, Rule, ground, stable_models
from .views import attr_sets, head_atom_sets


class Annotation(enum.Enum):
    A = "a"  # is being updated (new atom)
    U = "u"  # has been updated (old atom)
    T = "t"  # is new or old
    S = "s"  # stays in the secrecy instance


ANS_PRED = "ans"
AUX_PREFIX = "aux_"


@dataclass(frozen=True, slots=True)
class AnnotatedProgram:
    """The compiled program plus what it was compiled from."""

    rules: tuple[Rule, ...]
    base: Instance
    views: tuple[ViewDef, ...]


def _ann(pred: str, annotation: Annotation) -> str:
    return f"{pred}_{annotation.value}"


def _lower_atom(atom: Atom) -> Atom:
    return Atom(atom.pred.lower(), atom.args)


def _annotated(atom: Atom, annotation: Annotation) -> Atom:
    return Atom(_ann(atom.pred, annotation), atom.args)


def _not_null(name: str) -> BuiltinAtom:
    return BuiltinAtom("!=", (Var(name), Const(NULL)))


def _reserved_names(instance: Instance, views) -> dict[str, str]:
    """Map every predicate name the program will use to its source; a
    clash means the compilation cannot keep predicates apart."""
    names: dict[str, str] = {ANS_PRED: "query head"}
    def claim(name: str, source: str):
        if name in names:
            raise UnsupportedRuleError(
                f"predicate name clash: {name!r} used by {source} and {names[name]}")
        names[name] = source
    for rel in instance.schema.relations:
        low = rel.name.lower()
        claim(low, f"relation {rel.name}")
        for annotation in Annotation:
            claim(_ann(low, annotation), f"relation {rel.name}")
    for view in views:
        claim(AUX_PREFIX + view.name.lower(), f"view {view.name}")
    return names


def compile_program(instance: Instance, views) -> AnnotatedProgram:
    """Build the secrecy program for `instance` and the view set."""
    views = tuple(views)
    _reserved_names(instance, views)
    rules: list[Rule] = []

    for name in instance.schema.names():
        low = name.lower()
        for row in instance.rows(name):
            rules.append(Rule((Atom(low, tuple(Const(v) for v in row.values)),), ()))

    for view in views:
        rules.extend(_view_rules(view))

    for rel in instance.schema.relations:
        low = rel.name.lower()
        args = tuple(Var(f"X{i}") for i in range(1, rel.arity + 1))
        plain = Atom(low, args)
        rules.append(Rule((_annotated(plain, Annotation.T),), (Literal(plain),)))
        rules.append(Rule((_annotated(plain, Annotation.T),),
                          (Literal(_annotated(plain, Annotation.A)),)))
    for rel in instance.schema.relations:
        low = rel.name.lower()
        args = tuple(Var(f"X{i}") for i in range(1, rel.arity + 1))
        plain = Atom(low, args)
        rules.append(Rule((_annotated(plain, Annotation.S),),
                          (Literal(_annotated(plain, Annotation.T)),
                           Literal(_annotated(plain, Annotation.U), negated=True))))
    return AnnotatedProgram(tuple(rules), instance, views)


def _dedupe(atoms):
    seen = set()
    out = []
    for atom in atoms:
        if atom not in seen:
            seen.add(atom)
            out.append(atom)
    return tuple(out)


def _view_rules(view: ViewDef) -> list[Rule]:
    low_view = ViewDef(view.name.lower(), view.head,
                       tuple(_lower_atom(a) for a in view.body), view.phi)
    sets = attr_sets(low_view)
    heads = head_atom_sets(low_view)
    relevant = relevant_vars(low_view)
    head_names = list(dict.fromkeys(v.name for v in low_view.head))
    body_t = tuple(Literal(_annotated(a, Annotation.T)) for a in low_view.body)
    c_guards = tuple(_not_null(v) for v in sorted(relevant))
    aux_atom = Atom(AUX_PREFIX + low_view.name, tuple(low_view.head))
    aux_lit = Literal(aux_atom)
    cp_a = tuple(_annotated(a, Annotation.A) for a in heads.cp)
    sp_a = tuple(_annotated(a, Annotation.A) for a in heads.sp)

    rules: list[Rule] = []
    update_body = body_t + low_view.phi + c_guards + (aux_lit,)
    if sets.combination & sets.secrecy:
        if cp_a:
            rules.append(Rule(_dedupe(cp_a), update_body))
    else:
        for sp in sp_a:
            rules.append(Rule(_dedupe((sp,) + cp_a), update_body))
    for name in head_names:
        rules.append(Rule((aux_atom,), body_t + low_view.phi + (_not_null(name),)))

    head_set = {v.name for v in low_view.head}
    for atom in low_view.body:
        nulled = _null_occurrences(atom, head_set)
        if nulled is None:
            continue
        s_guards = tuple(
            _not_null(n) for n in sorted(
                {t.name for t in atom.args if isinstance(t, Var)} & head_set))
        rules.append(Rule(
            (_annotated(atom, Annotation.U),),
            body_t + low_view.phi + c_guards + (aux_lit,)
            + (Literal(_annotated(nulled, Annotation.A)),) + s_guards))
    for atom in low_view.body:
        nulled = _null_occurrences(atom, set(relevant))
        if nulled is None:
            continue
        rules.append(Rule(
            (_annotated(atom, Annotation.U),),
            body_t + low_view.phi + c_guards + (aux_lit,)
            + (Literal(_annotated(nulled, Annotation.A)),)))
    return rules


def _null_occurrences(atom: Atom, names: set) -> Atom | None:
    args = tuple(
        Const(NULL) if isinstance(t, Var) and t.name in names else t
        for t in atom.args)
    return None if args == atom.args else Atom(atom.pred, args)


def compile_query_program(query: Query) -> Rule:
    """Rewrite the query classically and retarget it at surviving atoms."""
    rewritten = rewrite_query(query)
    body = tuple(Literal(_annotated(_lower_atom(a), Annotation.S))
                 for a in rewritten.body) + rewritten.builtins
    return Rule((Atom(ANS_PRED, tuple(rewritten.out)),), body)


# --------------------------------------------------------------------------
# model interpretation

def _srows_by_relation(model: frozenset, instance: Instance) -> dict[str, list]:
    by_rel: dict[str, list] = {name: [] for name in instance.schema.names()}
    lows = {name.lower() + "_s": name for name in instance.schema.names()}
    for pred, args in model:
        name = lows.get(pred)
        if name is not None:
            by_rel[name].append(args)
    for name in by_rel:
        by_rel[name] = sorted(set(by_rel[name]),
                              key=lambda vs: [v.sort_key() for v in vs])
    return by_rel


def _assign_rows(base_rows: tuple[Row, ...], srows: list) -> list | None:
    """Give every base tuple one surviving row it dominates, using every
    surviving row at least once; None when no such assignment exists."""
    def dominates(values, srow):
        return all(a == b or a.is_null for a, b in zip(srow, values))

    candidates = [[s for s in srows if dominates(row.values, s)] for row in base_rows]
    chosen: list = [None] * len(base_rows)

    def search(i: int) -> bool:
        if i == len(base_rows):
            return set(chosen) >= set(map(tuple, srows))
        for srow in candidates[i]:
            chosen[i] = tuple(srow)
            if search(i + 1):
                return True
        chosen[i] = None
        return False

    if len(srows) > len(base_rows):
        return None
    return chosen if search(0) else None


def models_to_instances(models, base: Instance) -> list[Instance]:
    """Read one instance off each stable model by projecting to the
    surviving (`_s`) atoms; tuple ids are recovered by matching each base
    tuple with a surviving row it dominates."""
    instances = []
    for model in models:
        by_rel = _srows_by_relation(model, base)
        rows: dict[str, list[Row]] = {}
        for name in base.schema.names():
            base_rows = base.rows(name)
            assigned = _assign_rows(base_rows, by_rel[name])
            if assigned is None:
                raise SemanticError(
                    f"surviving atoms of {name} are not traceable to base tuples")
            rows[name] = [Row(row.tid, values)
                          for row, values in zip(base_rows, assigned)]
        instances.append(Instance(base.schema, rows))
    return instances


def cautious_answers(instance: Instance, views, query: Query,
                     max_nodes: int | None = None) -> AnswerSet:
    """Query answers true in every stable model of the secrecy program."""
    program = compile_program(instance, views)
    query_rule = compile_query_program(query)
    ground_rules = ground(program.rules + (query_rule,))
    kwargs = {} if max_nodes is None else {"max_nodes": max_nodes}
    models = stable_models(ground_rules, **kwargs)
    if not models:
        raise CrossCheckError("secrecy program has no stable models")
    answer_sets = [
        frozenset(args for pred, args in model if pred == ANS_PRED)
        for model in models]
    answers = answer_sets[0]
    for ans in answer_sets[1:]:
        answers &= ans
    return frozenset(answers)


# --------------------------------------------------------------------------
# denial constraints and export

def to_denial_constraints(view: ViewDef) -> list[str]:
    """One denial constraint per head variable: no body match satisfying
    the comparisons may leave that variable non-null."""
    var_order = list(dict.fromkeys(
        t.name for a in view.body for t in a.args if isinstance(t, Var)))
    conjuncts = [a.token() for a in view.body]
    conjuncts += [_pretty_builtin(b) for b in view.phi]
    out = []
    for name in dict.fromkeys(v.name for v in view.head):
        parts = conjuncts + [f"{name} ≠ null"]
        out.append(f"¬∃{' '.join(var_order)} ({' ∧ '.join(parts)})")
    return out


def _pretty_builtin(b: BuiltinAtom) -> str:
    if b.op in UNARY_BUILTINS:
        return b.token()
    op = {"!=": "≠", "<=": "≤", ">=": "≥"}.get(b.op, b.op)
    return f"{b.args[0].token()} {op} {b.args[1].token()}"


DIALECTS = ("dlv", "clingo")


def _export_term(term) -> str:
    if isinstance(term, Var):
        return term.name
    return term.value.token()


def _export_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.pred
    return f"{atom.pred}({','.join(_export_term(t) for t in atom.args)})"


def _export_body_item(item) -> str:
    if isinstance(item, Literal):
        return ("not " if item.negated else "") + _export_atom(item.atom)
    if item.op in UNARY_BUILTINS:
        return f"{item.op}({_export_term(item.args[0])})"
    return f"{_export_term(item.args[0])} {item.op} {_export_term(item.args[1])}"


def export_rule(rule: Rule, dialect: str) -> str:
    sep = " v " if dialect == "dlv" else " | "
    head = sep.join(_export_atom(a) for a in rule.head)
    if not rule.body:
        return f"{head}."
    body = ", ".join(_export_body_item(e) for e in rule.body)
    if not rule.head:
        return f":- {body}."
    return f"{head} :- {body}."


def export_program(program: AnnotatedProgram | tuple, dialect: str) -> str:
    """Solver-ready program text; dialect is `dlv` or `clingo`."""
    if dialect not in DIALECTS:
        raise DialectError(f"unsupported dialect {dialect!r}")
    rules = program.rules if isinstance(program, AnnotatedProgram) else tuple(program)
    return "\n".join(export_rule(r, dialect) for r in rules) + "\n"


# --------------------------------------------------------------------------
# program text and answer-set parsing (dialect-neutral subset)

def parse_program_text(text: str) -> list[Rule]:
    """Parse exported program text back into rules; accepts both the dlv
    `v` and the clingo `|` disjunction separators."""
    parser = _Parser(text)
    rules: list[Rule] = []
    while not parser.at_eof():
        head: list[Atom] = []
        if parser.peek().text != ":-":
            head.append(_parse_program_atom(parser))
            while parser.peek().text == "|" or parser.peek().text == "v":
                parser.next()
                head.append(_parse_program_atom(parser))
        body: list = []
        if parser.peek().text == ":-":
            parser.next()
            while True:
                body.append(_parse_body_item(parser))
                if parser.peek().text == ",":
                    parser.next()
                    continue
                break
        parser.expect(".")
        rules.append(Rule(tuple(head), tuple(body)))
    return rules


def _parse_program_atom(parser: _Parser) -> Atom:
    name = parser.expect_name("predicate").text
    args = parser.parse_term_list() if parser.peek().text == "(" else ()
    return Atom(name, args)


def _parse_body_item(parser: _Parser):
    tok = parser.peek()
    if tok.text == "not":
        parser.next()
        return Literal(_parse_program_atom(parser), negated=True)
    if tok.kind == "lower" and tok.text in UNARY_BUILTINS:
        parser.next()
        args = parser.parse_term_list()
        return BuiltinAtom(tok.text, args)
    if tok.kind in ("lower", "upper") and parser.peek(1).text == "(":
        return Literal(_parse_program_atom(parser))
    left = parser.parse_term()
    op_tok = parser.next()
    op = "!=" if op_tok.text == "<>" else op_tok.text
    if op not in COMPARISONS:
        raise SemanticError(f"expected comparison, found {op_tok.text!r}")
    right = parser.parse_term()
    return BuiltinAtom(op, (left, right))


def parse_answer_sets(text: str) -> list[frozenset]:
    """Parse solver output into sets of ground atoms.

    Accepts brace-wrapped answer sets (`{a(1), b}` - dlv style) and
    clingo's plain output where a line `Answer: N` is followed by a line
    of space-separated atoms.
    """
    answer_sets: list[frozenset] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("{"):
            end = line.rfind("}")
            if end == -1:
                raise SemanticError(f"unterminated answer set line: {line!r}")
            answer_sets.append(_parse_ground_atoms(line[1:end]))
        elif line.startswith("Answer:"):
            i += 1
            if i < len(lines):
                answer_sets.append(_parse_ground_atoms(lines[i].strip()))
        i += 1
    return answer_sets


def _parse_ground_atoms(text: str) -> frozenset:
    parser = _Parser(text)
    atoms: set[GAtom] = set()
    while not parser.at_eof():
        atom = _parse_program_atom(parser)
        values = []
        for term in atom.args:
            if isinstance(term, Var):
                raise SemanticError(f"answer-set atom is not ground: {atom.token()}")
            values.append(term.value)
        atoms.add((atom.pred, tuple(values)))
        if parser.peek().text == ",":
            parser.next()
    return frozenset(atoms)
