"""Grounder and stable-model enumerator for disjunctive programs.

Rules are disjunctions of atoms over a body of positive atoms, default-
negated atoms and built-in comparisons.  Grounding instantiates rules
bottom-up over the atoms that can possibly be derived (facts plus heads
of rules whose positive bodies are possibly derivable), evaluating
built-ins away: a false built-in deletes the instance, a true one is
dropped.  Null is an ordinary constant here; order comparisons that
involve null or unordered values simply fail.

Model search is a clause-level DPLL enumeration.  Each ground rule gets
an auxiliary variable equivalent to its body; clauses additionally
require every true atom to have some rule with a true body and the atom
in its head, a necessary condition for stability that prunes the search
without excluding any stable model.  Every surviving total assignment is
then verified to be a minimal model of the program's reduct.

Grounding and model checking are pure; candidate checks could run
concurrently and the model set merges order-independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import BoundExceededError, SemanticError, UnsupportedRuleError
from .lang import Atom, BuiltinAtom, Const, Var
from .model import Value
from .semantics import builtin_classical

DEFAULT_SEARCH_BOUND = 1 << 20

GAtom = tuple  # (pred, tuple[Value, ...])
StableModel = frozenset  # of GAtom


@dataclass(frozen=True, slots=True)
class Literal:
    """A possibly default-negated database atom in a rule body."""

    atom: Atom
    negated: bool = False

    def token(self) -> str:
        return ("not " if self.negated else "") + self.atom.token()


@dataclass(frozen=True, slots=True)
class Rule:
    """A disjunctive rule; an empty head is an integrity constraint.

    The body keeps its written order and mixes literals with built-ins;
    safety requires every head, negated and built-in variable to occur in
    some positive body atom.
    """

    head: tuple[Atom, ...]
    body: tuple  # of Literal | BuiltinAtom

    def pos_atoms(self) -> tuple[Atom, ...]:
        return tuple(e.atom for e in self.body
                     if isinstance(e, Literal) and not e.negated)

    def neg_atoms(self) -> tuple[Atom, ...]:
        return tuple(e.atom for e in self.body
                     if isinstance(e, Literal) and e.negated)

    def builtins(self) -> tuple[BuiltinAtom, ...]:
        return tuple(e for e in self.body if isinstance(e, BuiltinAtom))

    def is_fact(self) -> bool:
        return len(self.head) == 1 and not self.body


def rule(head: Iterable[Atom], body: Iterable = ()) -> Rule:
    return Rule(tuple(head), tuple(body))


def fact(atom: Atom) -> Rule:
    return Rule((atom,), ())


@dataclass(frozen=True, slots=True)
class GroundRule:
    """A rule instance with built-ins already evaluated away."""

    head: tuple  # of GAtom
    pos: tuple   # of GAtom
    neg: tuple   # of GAtom


def _atom_vars(atom: Atom) -> set:
    return {t.name for t in atom.args if isinstance(t, Var)}


def _check_safety(r: Rule) -> None:
    bound = set()
    for atom in r.pos_atoms():
        bound |= _atom_vars(atom)
    unsafe = set()
    for atom in r.head:
        unsafe |= _atom_vars(atom) - bound
    for atom in r.neg_atoms():
        unsafe |= _atom_vars(atom) - bound
    for b in r.builtins():
        for t in b.args:
            if isinstance(t, Var) and t.name not in bound:
                unsafe.add(t.name)
    if unsafe:
        raise UnsupportedRuleError(
            f"unsafe rule: variables {sorted(unsafe)} not bound by a positive atom")


def _ground_atom(atom: Atom, env: dict) -> GAtom:
    return (atom.pred, tuple(
        env[t.name] if isinstance(t, Var) else t.value for t in atom.args))


def _builtin_holds(b: BuiltinAtom, env: dict) -> bool:
    try:
        return builtin_classical(b, env)
    except SemanticError:
        return False  # unordered operands never satisfy an order comparison


def _match(atoms: tuple[Atom, ...], by_pred: dict, env: dict, i: int) -> Iterator[dict]:
    if i == len(atoms):
        yield env
        return
    atom = atoms[i]
    for gargs in by_pred.get(atom.pred, ()):
        bound = env
        ok = True
        for term, value in zip(atom.args, gargs):
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
            yield from _match(atoms, by_pred, bound, i + 1)


def _gatom_key(gatom: GAtom) -> tuple:
    return (gatom[0], tuple(v.sort_key() for v in gatom[1]))


def _ground_rule_key(gr: GroundRule) -> tuple:
    return (tuple(map(_gatom_key, gr.head)),
            tuple(map(_gatom_key, gr.pos)),
            tuple(map(_gatom_key, gr.neg)))


def ground(rules: Iterable[Rule], max_rules: int = 1_000_000) -> list[GroundRule]:
    """Instantiate `rules` over the possibly-derivable atoms.

    Saturates: an atom is possibly derivable when it heads a rule all of
    whose positive body atoms are; negation does not gate possibility.
    Output is canonically sorted and duplicate-free.
    """
    rules = list(rules)
    for r in rules:
        _check_safety(r)
    by_pred: dict[str, list] = {}
    possible: set[GAtom] = set()
    seen: set[GroundRule] = set()
    out: list[GroundRule] = []

    def add_possible(gatom: GAtom) -> bool:
        if gatom in possible:
            return False
        possible.add(gatom)
        by_pred.setdefault(gatom[0], []).append(gatom[1])
        return True

    changed = True
    while changed:
        changed = False
        for r in rules:
            for env in _match(r.pos_atoms(), by_pred, {}, 0):
                if not all(_builtin_holds(b, env) for b in r.builtins()):
                    continue
                gr = GroundRule(
                    tuple(_ground_atom(a, env) for a in r.head),
                    tuple(_ground_atom(a, env) for a in r.pos_atoms()),
                    tuple(_ground_atom(a, env) for a in r.neg_atoms()))
                if gr in seen:
                    continue
                seen.add(gr)
                out.append(gr)
                if len(out) > max_rules:
                    raise BoundExceededError(
                        f"ground program exceeds {max_rules} rules")
                for h in gr.head:
                    if add_possible(h):
                        changed = True
    out.sort(key=_ground_rule_key)
    return out


# --------------------------------------------------------------------------
# stable-model enumeration

_UNDEF, _FALSE, _TRUE = -1, 0, 1


class _Enumerator:
    """DPLL over clauses with per-clause satisfied/unassigned counters and
    a queue of clauses that became unit."""

    def __init__(self, nvars: int, clauses: list[list[int]], max_nodes: int):
        self.nvars = nvars
        self.unsat = any(not c for c in clauses)
        self.clauses = [c for c in clauses if c]
        self.occ_pos: list[list[int]] = [[] for _ in range(nvars + 1)]
        self.occ_neg: list[list[int]] = [[] for _ in range(nvars + 1)]
        for idx, clause in enumerate(self.clauses):
            for lit in clause:
                (self.occ_pos if lit > 0 else self.occ_neg)[abs(lit)].append(idx)
        self.sat_count = [0] * len(self.clauses)
        self.unassigned = [len(c) for c in self.clauses]
        self.assign = [_UNDEF] * (nvars + 1)
        self.trail: list[int] = []
        self.pending: list[int] = []
        self.max_nodes = max_nodes
        self.nodes = 0

    def _set(self, var: int, value: int) -> bool:
        """Assign, update counters, queue clauses turned unit; False on conflict."""
        self.assign[var] = value
        self.trail.append(var)
        sat_occ = self.occ_pos[var] if value == _TRUE else self.occ_neg[var]
        other_occ = self.occ_neg[var] if value == _TRUE else self.occ_pos[var]
        for idx in sat_occ:
            self.sat_count[idx] += 1
            self.unassigned[idx] -= 1
        ok = True
        for idx in other_occ:
            self.unassigned[idx] -= 1
            if self.sat_count[idx] == 0:
                if self.unassigned[idx] == 0:
                    ok = False
                elif self.unassigned[idx] == 1:
                    self.pending.append(idx)
        return ok

    def _undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            var = self.trail.pop()
            value = self.assign[var]
            self.assign[var] = _UNDEF
            sat_occ = self.occ_pos[var] if value == _TRUE else self.occ_neg[var]
            other_occ = self.occ_neg[var] if value == _TRUE else self.occ_pos[var]
            for idx in sat_occ:
                self.sat_count[idx] -= 1
                self.unassigned[idx] += 1
            for idx in other_occ:
                self.unassigned[idx] += 1

    def _drain(self) -> bool:
        """Process queued unit clauses to fixpoint; False on conflict."""
        while self.pending:
            idx = self.pending.pop()
            if self.sat_count[idx] > 0 or self.unassigned[idx] != 1:
                continue  # stale entry
            for lit in self.clauses[idx]:
                var = abs(lit)
                if self.assign[var] == _UNDEF:
                    if not self._set(var, _TRUE if lit > 0 else _FALSE):
                        return False
                    break
        return True

    def enumerate(self, branch_vars: list[int]) -> Iterator[list[int]]:
        """Yield complete assignments (live assign arrays) of all classical
        models, branching only on `branch_vars`."""
        if self.unsat:
            return
        self.pending = [idx for idx, clause in enumerate(self.clauses)
                        if len(clause) == 1]
        if not self._drain():
            return
        yield from self._search(branch_vars, 0)

    def _search(self, branch_vars: list[int], i: int) -> Iterator[list[int]]:
        while i < len(branch_vars) and self.assign[branch_vars[i]] != _UNDEF:
            i += 1
        if i == len(branch_vars):
            yield self.assign
            return
        var = branch_vars[i]
        for value in (_FALSE, _TRUE):
            self.nodes += 1
            if self.nodes > self.max_nodes:
                raise BoundExceededError(
                    f"stable-model search exceeded {self.max_nodes} nodes")
            mark = len(self.trail)
            self.pending.clear()
            if self._set(var, value) and self._drain():
                yield from self._search(branch_vars, i + 1)
            self._undo_to(mark)


def _satisfiable(nvars: int, clauses: list[list[int]]) -> bool:
    """Plain DPLL satisfiability for the reduct-minimality subproblem."""
    solver = _Enumerator(nvars, clauses, max_nodes=1 << 22)
    for _ in solver.enumerate(list(range(1, nvars + 1))):
        return True
    return False


def _possible_atoms(ground_rules: list[GroundRule]) -> set:
    possible: set[GAtom] = set()
    changed = True
    while changed:
        changed = False
        for gr in ground_rules:
            if all(p in possible for p in gr.pos):
                for h in gr.head:
                    if h not in possible:
                        possible.add(h)
                        changed = True
    return possible


def _is_minimal_model(model: frozenset, reduct: list[tuple]) -> bool:
    """No proper subset of `model` satisfies the (positive) reduct."""
    if not model:
        return True
    atoms = sorted(model, key=_gatom_key)
    ids = {a: i + 1 for i, a in enumerate(atoms)}
    clauses: list[list[int]] = [[-ids[a] for a in atoms]]  # at least one atom off
    for head, pos in reduct:
        if not all(p in model for p in pos):
            continue  # some positive atom false under every subset
        clause = [-ids[p] for p in pos] + [ids[h] for h in head if h in model]
        clauses.append(clause)
    return not _satisfiable(len(atoms), clauses)


def stable_models(ground_rules: list[GroundRule],
                  max_nodes: int = DEFAULT_SEARCH_BOUND) -> list[frozenset]:
    """All stable models of the ground program: models that are minimal
    models of their own reduct.  Deterministic canonical output order."""
    possible = _possible_atoms(ground_rules)
    atoms = sorted(possible, key=_gatom_key)
    atom_id = {a: i + 1 for i, a in enumerate(atoms)}

    usable: list[GroundRule] = []
    for gr in ground_rules:
        if not all(p in possible for p in gr.pos):
            continue  # body can never hold
        neg = tuple(n for n in gr.neg if n in possible)
        head = gr.head
        if set(head) & set(gr.pos):
            continue  # tautological: a positive body atom reappears in the head
        usable.append(GroundRule(head, gr.pos, neg))

    nvars = len(atoms) + len(usable)
    clauses: list[list[int]] = []
    head_rules: dict[GAtom, list[int]] = {a: [] for a in atoms}
    for r_idx, gr in enumerate(usable):
        body_var = len(atoms) + r_idx + 1
        body_def = [body_var]
        for p in gr.pos:
            clauses.append([-body_var, atom_id[p]])
            body_def.append(-atom_id[p])
        for n in gr.neg:
            clauses.append([-body_var, -atom_id[n]])
            body_def.append(atom_id[n])
        clauses.append(body_def)
        clauses.append([-body_var] + [atom_id[h] for h in gr.head])
        for h in gr.head:
            head_rules[h].append(body_var)
    for a in atoms:
        clauses.append([-atom_id[a]] + head_rules[a])  # true atoms need support

    enumerator = _Enumerator(nvars, clauses, max_nodes)
    reduct_input = [(gr.head, gr.pos) for gr in usable]
    models: list[frozenset] = []
    for assign in enumerator.enumerate(list(range(1, len(atoms) + 1))):
        model = frozenset(a for a in atoms if assign[atom_id[a]] == _TRUE)
        reduct = [(head, pos) for (head, pos), gr in zip(reduct_input, usable)
                  if not any(n in model for n in gr.neg)]
        if _is_minimal_model(model, reduct):
            models.append(model)
    models.sort(key=lambda m: tuple(sorted(map(_gatom_key, m))))
    return models
