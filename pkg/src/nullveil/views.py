"""Static analysis of secrecy views and the admissibility checks.

A secrecy view is *null* on an instance when its SQL-like extension is
empty or consists of the single all-null row; an instance is *admissible*
for a view set when every view is null on it.  Admissibility is decided
twice: directly, by evaluating each view under the SQL-like semantics,
and classically, through a universally quantified sentence saying that
every body match either binds some combination variable to null, binds
every head variable to null, or falsifies the comparison conjunction.
The two routes must agree; a disagreement is an internal fault and is
reported as such rather than silently picking one side.

Attribute sets locate the cells an update may touch: *combination*
attributes are the positions of relevant (join/comparison) variables,
*secrecy* attributes the positions of head variables.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CrossCheckError
from .lang import Atom, Const, Var, ViewDef, view_as_query
from .model import Instance, NULL
from .semantics import (builtin_classical, eval_n, iter_matches, negate_builtin,
                        relevant_vars)


@dataclass(frozen=True, slots=True)
class AttrSets:
    """Positions (relation, 1-based index) a view makes update-relevant."""

    combination: frozenset
    secrecy: frozenset

    @property
    def srelevant(self) -> frozenset:
        return self.combination | self.secrecy


@dataclass(frozen=True, slots=True)
class HeadAtomSets:
    """Body atoms with update targets nulled out, used as rule heads.

    `cp` nulls every combination-variable occurrence of an atom, `sp`
    every head-variable occurrence; atoms without such variables are
    omitted.
    """

    cp: tuple[Atom, ...]
    sp: tuple[Atom, ...]


def attr_sets(view: ViewDef) -> AttrSets:
    relevant = relevant_vars(view)
    head = {v.name for v in view.head}
    combination = set()
    secrecy = set()
    for atom in view.body:
        for pos, term in enumerate(atom.args, 1):
            if not isinstance(term, Var):
                continue
            if term.name in relevant:
                combination.add((atom.pred, pos))
            if term.name in head:
                secrecy.add((atom.pred, pos))
    return AttrSets(frozenset(combination), frozenset(secrecy))


def _nulled(atom: Atom, names: set) -> Atom | None:
    args = tuple(
        Const(NULL) if isinstance(t, Var) and t.name in names else t
        for t in atom.args)
    if args == atom.args:
        return None
    return Atom(atom.pred, args)


def head_atom_sets(view: ViewDef) -> HeadAtomSets:
    relevant = set(relevant_vars(view))
    head = {v.name for v in view.head}
    cp = tuple(a for a in (_nulled(atom, relevant) for atom in view.body) if a)
    sp = tuple(a for a in (_nulled(atom, head) for atom in view.body) if a)
    return HeadAtomSets(cp, sp)


def is_null_view(instance: Instance, view: ViewDef) -> bool:
    """True iff the view's SQL-like extension is empty or all-null."""
    answers = eval_n(instance, view_as_query(view))
    all_null_row = (NULL,) * len(view.head)
    return answers <= {all_null_row}


def null_view_sentence_holds(instance: Instance, view: ViewDef) -> bool:
    """Classical check that the view is null: for every body match, some
    combination variable is null, or all head variables are, or some
    comparison conjunct fails (negated member-wise, null treated as an
    ordinary constant)."""
    relevant = relevant_vars(view)
    head = tuple(v.name for v in view.head)
    negated = [negate_builtin(b) for b in view.phi]
    for env, _ in iter_matches(instance, view.body):
        if any(env[name].is_null for name in relevant):
            continue
        if all(env[name].is_null for name in head):
            continue
        if any(builtin_classical(b, env) for b in negated):
            continue
        return False
    return True


def is_admissible(instance: Instance, views, cross_check: bool = True) -> bool:
    """True iff every view in `views` is null on `instance`.

    With `cross_check` (the default) the classical sentence route is
    evaluated as well and must agree.
    """
    direct = all(is_null_view(instance, v) for v in views)
    if cross_check:
        classical = all(null_view_sentence_holds(instance, v) for v in views)
        if direct != classical:
            raise CrossCheckError(
                "admissibility checks disagree: "
                f"direct={direct} sentence={classical} on {instance!r}")
    return direct
