"""Information orders and enumeration of secrecy instances.

A secrecy instance of a base instance D is an id-correlated null
degradation of D that is admissible for the view set and whose set of
nulled cells is inclusion-minimal among such degradations.  Enumeration
sweeps subsets of a candidate cell pool in increasing size, skipping
supersets of already-kept sets; the skip is sound with no monotonicity
assumption, because a superset of an admissible set is never
inclusion-minimal whatever its own admissibility.  A final pass
re-verifies admissibility, strict minimality and pairwise
incomparability of everything kept.

Two candidate pools exist: the default pool restricted to combination
and secrecy positions of tuples participating in potentially violating
body matches (mirroring the shape of the compiled update program), and
an exhaustive pool of every non-null cell, kept as an independent
brute-force oracle for testing.  On views whose bodies hold no
constants the two agree; a body constant can make nulling the matched
cell admissible in a way only the exhaustive pool surfaces.

Subset tests only read the immutable base instance, so they may run
concurrently and merge results before the final minimality pass.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

from .errors import BoundExceededError, CrossCheckError
from .lang import Var, ViewDef
from .model import Cell, ChangeSet, Instance, Row, apply_changes, diff_changes, sorted_cells
from .semantics import builtin_classical, iter_matches, relevant_vars
from .views import is_admissible

DEFAULT_ORACLE_CELL_BOUND = 16
DEFAULT_CELL_BOUND = 24


class EnumerationMode(enum.Enum):
    TARGETED = "targeted"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True, slots=True)
class SecrecySolution:
    """An inclusion-minimal admissible change set with its instance."""

    changes: ChangeSet
    instance: Instance

    def sort_key(self) -> tuple:
        return sorted_cells(self.changes)


def tuple_leq(t1, t2) -> bool:
    """Componentwise information order: each position equal or null on
    the left.  `(a, null)` is below `(a, b)`; the order is reflexive."""
    v1 = t1.values if isinstance(t1, Row) else tuple(t1)
    v2 = t2.values if isinstance(t2, Row) else tuple(t2)
    if len(v1) != len(v2):
        raise ValueError(f"length mismatch: {len(v1)} vs {len(v2)}")
    return all(a == b or a.is_null for a, b in zip(v1, v2))


def instance_leq_D(base: Instance, d1: Instance, d2: Instance) -> bool:
    """Closeness-to-base order on correlated null degradations of `base`:
    d1 is below d2 when d1's change set is contained in d2's."""
    changes1 = diff_changes(base, d1)
    changes2 = diff_changes(base, d2)
    return changes1 <= changes2


def _potential_violations(instance: Instance, view: ViewDef):
    """Body matches that could force an update: comparisons hold with
    null as ordinary constant and no combination variable binds null."""
    relevant = relevant_vars(view)
    for env, picks in iter_matches(instance, view.body):
        if any(env[name].is_null for name in relevant):
            continue
        if not all(builtin_classical(b, env) for b in view.phi):
            continue
        yield env, picks


def candidate_cells(instance: Instance, views, mode: EnumerationMode) -> frozenset:
    """Cells an update may null.  The default pool collects, per
    potentially violating match, the combination- and secrecy-variable
    positions of the matched tuples; the exhaustive pool is every
    non-null cell."""
    if mode is EnumerationMode.EXHAUSTIVE:
        return frozenset(instance.cells())
    cells = set()
    for view in views:
        targets = set(relevant_vars(view)) | {v.name for v in view.head}
        for _, picks in _potential_violations(instance, view):
            for atom, (rel, tid) in zip(view.body, picks):
                row = instance.row(rel, tid)
                for pos, term in enumerate(atom.args, 1):
                    if (isinstance(term, Var) and term.name in targets
                            and not row.values[pos - 1].is_null):
                        cells.add(Cell(rel, tid, pos))
    return frozenset(cells)


def _minimal_sweep(instance: Instance, views, cells: tuple[Cell, ...],
                   cross_check: bool) -> list[frozenset]:
    """All inclusion-minimal admissible subsets of `cells`.

    Sweeping sizes upward, a subset containing an already-kept set is not
    minimal regardless of its own admissibility, so it is skipped without
    testing; every kept set is therefore minimal and every minimal set is
    reached.
    """
    kept: list[frozenset] = []
    for size in range(len(cells) + 1):
        for combo in combinations(cells, size):
            changes = frozenset(combo)
            if any(k <= changes for k in kept):
                continue
            if is_admissible(apply_changes(instance, changes), views,
                             cross_check=cross_check):
                kept.append(changes)
    return kept


def enumerate_secrecy_instances(instance: Instance, views,
                                mode: EnumerationMode = EnumerationMode.TARGETED,
                                max_cells: int = DEFAULT_CELL_BOUND) -> list[SecrecySolution]:
    """All secrecy instances of `instance` for the view set, in canonical
    change-set order.  An admissible instance yields the single
    empty-change solution."""
    cells = sorted_cells(candidate_cells(instance, views, mode))
    if len(cells) > max_cells:
        raise BoundExceededError(
            f"{len(cells)} candidate cells exceed the bound {max_cells}")
    kept = _minimal_sweep(instance, views, cells, cross_check=False)
    _verify_solutions(instance, views, kept)
    solutions = [SecrecySolution(c, apply_changes(instance, c)) for c in kept]
    solutions.sort(key=SecrecySolution.sort_key)
    return solutions


def _verify_solutions(instance: Instance, views, kept: list[frozenset]) -> None:
    """Re-verify admissibility, strict minimality (no one-cell-removed
    subset admissible) and pairwise incomparability of the kept sets;
    a failure here would mean the sweep itself is broken."""
    for changes in kept:
        if not is_admissible(apply_changes(instance, changes), views, cross_check=False):
            raise CrossCheckError(f"kept change set is not admissible: {set(changes)}")
        for cell in changes:
            smaller = changes - {cell}
            if is_admissible(apply_changes(instance, smaller), views, cross_check=False):
                raise CrossCheckError(
                    f"kept change set is not minimal: {set(changes)} minus {cell.token()}")
    for a in kept:
        for b in kept:
            if a != b and a <= b:
                raise CrossCheckError("kept change sets are not pairwise incomparable")


def oracle_secrecy_instances(instance: Instance, views,
                             max_cells: int = DEFAULT_ORACLE_CELL_BOUND) -> list[SecrecySolution]:
    """Ground-truth enumeration: scan the powerset of all non-null cells,
    keep admissible change sets, filter to inclusion-minimal ones.
    Admissibility runs with its built-in cross check.  Supersets of kept
    sets are skipped for the same minimality reason as in the sweep."""
    cells = sorted_cells(instance.cells())
    if len(cells) > max_cells:
        raise BoundExceededError(
            f"{len(cells)} non-null cells exceed the oracle bound {max_cells}")
    minimal = _minimal_sweep(instance, views, cells, cross_check=True)
    solutions = [SecrecySolution(c, apply_changes(instance, c)) for c in minimal]
    solutions.sort(key=SecrecySolution.sort_key)
    return solutions
