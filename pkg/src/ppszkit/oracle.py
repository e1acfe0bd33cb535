"""Ground-truth satisfiability: DPLL, model enumeration, frozen variables, SL(F)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cnf import Assignment, CnfFormula, ContractViolation, lit_key, var

ENUM_CAP = 20


class EnumerationCapError(RuntimeError):
    pass


class UnsatisfiableError(ValueError):
    pass


@dataclass(frozen=True)
class FrozenPartition:
    frozen: frozenset[int]
    non_frozen: frozenset[int]


def _simplify(clauses: list[tuple[int, ...]], lit: int) -> list[tuple[int, ...]] | None:
    out = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            c = tuple(x for x in c if x != -lit)
            if not c:
                return None
        out.append(c)
    return out


def _dpll(clauses, assigned: dict[int, bool]) -> dict[int, bool] | None:
    assigned = dict(assigned)
    while True:
        unit = next((c[0] for c in clauses if len(c) == 1), None)
        if unit is None:
            break
        clauses = _simplify(clauses, unit)
        if clauses is None:
            return None
        assigned[var(unit)] = unit > 0
    if not clauses:
        return assigned
    shortest = min(len(c) for c in clauses)
    lit = min((l for c in clauses if len(c) == shortest for l in c), key=lit_key)
    for choice in (lit, -lit):
        rest = _simplify(clauses, choice)
        if rest is None:
            continue
        res = _dpll(rest, {**assigned, var(choice): choice > 0})
        if res is not None:
            return res
    return None


def dpll_solve(f: CnfFormula) -> Assignment | None:
    """A satisfying total assignment on V(F), or None.  Unconstrained variables get 0."""
    if f.has_empty_clause:
        return None
    res = _dpll(list(f.sorted_clauses), {})
    if res is None:
        return None
    return Assignment({v: res.get(v, False) for v in f.variables})


def is_satisfiable(f: CnfFormula) -> bool:
    return dpll_solve(f) is not None


def _clause_masks(f: CnfFormula, order: tuple[int, ...]):
    index = {v: i for i, v in enumerate(order)}
    pos = np.zeros(f.m, dtype=np.uint64)
    neg = np.zeros(f.m, dtype=np.uint64)
    for j, c in enumerate(f.sorted_clauses):
        for l in c:
            b = np.uint64(1) << np.uint64(index[var(l)])
            if l > 0:
                pos[j] |= b
            else:
                neg[j] |= b
    return pos, neg


def sat_masks(f: CnfFormula, cap: int = ENUM_CAP) -> np.ndarray:
    """Models of F as uint64 masks; bit i is the value of ``f.sorted_vars[i]``."""
    if f.n > cap:
        raise EnumerationCapError(f"n(F)={f.n} exceeds enumeration cap {cap}")
    pos, neg = _clause_masks(f, f.sorted_vars)
    return _kernels.sat_masks(pos, neg, f.n)


def enumerate_sat(f: CnfFormula, cap: int = ENUM_CAP) -> set[Assignment]:
    order = f.sorted_vars
    return {Assignment.from_mask(order, int(a)) for a in sat_masks(f, cap)}


class SolutionSet:
    """sat(F) as a mask array, answering questions about restrictions of F.

    A restriction by a partial assignment ``rho`` (given as the pair of masks
    ``dom``/``val`` over ``order``) has as models exactly the rows of sat(F)
    agreeing with ``rho``, projected away from ``dom``.
    """

    def __init__(self, f: CnfFormula, cap: int = ENUM_CAP):
        self.order = f.sorted_vars
        self.index = {v: i for i, v in enumerate(self.order)}
        self.masks = sat_masks(f, cap)
        self.full = (1 << len(self.order)) - 1

    def __len__(self) -> int:
        return int(self.masks.size)

    def bit(self, v: int) -> int:
        return 1 << self.index[v]

    def lit_masks(self, lits) -> tuple[int, int]:
        dom = val = 0
        for l in lits:
            b = self.bit(var(l))
            dom |= b
            if l > 0:
                val |= b
        return dom, val

    @staticmethod
    def select(rows: np.ndarray, dom: int, val: int) -> np.ndarray:
        return rows[(rows & np.uint64(dom)) == np.uint64(val)]

    def agree(self, rows: np.ndarray) -> tuple[int, int]:
        """(bits equal to 1 in every row, bits equal to 1 in some row)."""
        if rows.size == 0:
            return self.full, 0
        return int(np.bitwise_and.reduce(rows)), int(np.bitwise_or.reduce(rows))

    def sl_count(self, rows: np.ndarray, dom: int) -> int:
        """|SL| of the restriction whose models are ``rows`` and whose removed variables are ``dom``."""
        if rows.size == 0:
            return 0
        andm, orm = self.agree(rows)
        free = self.full & ~dom
        non_frozen = (orm & ~andm) & free
        return (free.bit_count() + non_frozen.bit_count())


def _require_sat(models) -> None:
    if len(models) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")


def frozen_partition(f: CnfFormula, cap: int = ENUM_CAP) -> FrozenPartition:
    if f.n <= cap:
        ss = SolutionSet(f, cap)
        _require_sat(ss.masks)
        andm, orm = ss.agree(ss.masks)
        frozen = {v for v in f.variables if not (orm & ~andm) & ss.bit(v)}
    else:
        if not is_satisfiable(f):
            raise UnsatisfiableError("formula is unsatisfiable")
        frozen = {v for v in f.variables
                  if not (is_satisfiable(f.restrict(v)) and is_satisfiable(f.restrict(-v)))}
    return FrozenPartition(frozenset(frozen), frozenset(f.variables - frozen))


def satisfying_literals(f: CnfFormula, cap: int = ENUM_CAP) -> frozenset[int]:
    """SL(F): literals l over V(F) such that F^[l] is satisfiable."""
    if f.n <= cap:
        ss = SolutionSet(f, cap)
        _require_sat(ss.masks)
        andm, orm = ss.agree(ss.masks)
        out = set()
        for v in f.variables:
            b = ss.bit(v)
            if orm & b:
                out.add(v)
            if not andm & b:
                out.add(-v)
        return frozenset(out)
    if not is_satisfiable(f):
        raise UnsatisfiableError("formula is unsatisfiable")
    return frozenset(l for v in f.variables for l in (v, -v) if is_satisfiable(f.restrict(l)))


def check_assignment_total(f: CnfFormula, alpha) -> None:
    missing = f.variables - set(alpha)
    if missing:
        raise ContractViolation(f"assignment not total on V(F); missing {sorted(missing)[:5]}")
