"""s-implication: literals forced by some subformula of at most s clauses."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .cnf import Assignment, CnfFormula, ContractViolation, lit_key, restrict_with_dirty, var

DEFAULT_S = 3
S_CAP = 6


@dataclass(frozen=True)
class ImplicationConfig:
    s: int = DEFAULT_S
    cap: int = S_CAP

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("s must be non-negative")
        if self.s > self.cap:
            raise ValueError(f"s={self.s} exceeds the configured cap {self.cap}")


@dataclass(frozen=True)
class FixpointResult:
    residual: CnfFormula
    fixed: tuple[int, ...]  # literals, in the order they were set
    contradiction: bool

    @property
    def fixed_assignment(self) -> Assignment:
        return Assignment.from_literals(self.fixed)


def _models_imply(clauses: tuple[tuple[int, ...], ...], lit: int) -> bool:
    """True iff every assignment satisfying ``clauses`` sets ``lit`` true."""
    vs = sorted({var(l) for c in clauses for l in c} | {var(lit)})
    for bits in itertools.product((False, True), repeat=len(vs)):
        a = dict(zip(vs, bits))
        if a[var(lit)] == (lit > 0):
            continue
        if all(any(a[var(l)] == (l > 0) for l in c) for c in clauses):
            return False
    return True


def is_s_implied(f: CnfFormula, lit: int, s: int) -> bool:
    """Reference check by plain subset enumeration, G ranging over all |G| <= s."""
    if var(lit) not in f.variables:
        raise ContractViolation(f"variable {var(lit)} not in formula")
    clauses = f.sorted_clauses
    for size in range(1, min(s, len(clauses)) + 1):
        for g in itertools.combinations(clauses, size):
            if _models_imply(g, lit):
                return True
    return False


@lru_cache(maxsize=8192)
def _arrays(f: CnfFormula):
    """Kernel view: 1-based local variable ids, padded literal matrix, occurrence CSR."""
    order = f.sorted_vars
    index = {v: i + 1 for i, v in enumerate(order)}
    clauses = f.sorted_clauses
    m = len(clauses)
    w = max((len(c) for c in clauses), default=0)
    lits = np.zeros((m, max(w, 1)), dtype=np.int64)
    width = np.zeros(m, dtype=np.int64)
    occ: list[list[int]] = [[] for _ in order]
    for ci, c in enumerate(clauses):
        width[ci] = len(c)
        for j, l in enumerate(c):
            li = index[var(l)]
            lits[ci, j] = li if l > 0 else -li
            occ[li - 1].append(ci)
    occ_ptr = np.zeros(len(order) + 1, dtype=np.int64)
    occ_ptr[1:] = np.cumsum([len(o) for o in occ])
    occ_idx = np.array([c for o in occ for c in o], dtype=np.int64)
    cindex = {c: i for i, c in enumerate(clauses)}
    return order, cindex, lits, width, occ_ptr, occ_idx


def _implied_from(f: CnfFormula, s: int, seeds) -> tuple[set[int], bool]:
    """(implied literals, some subset unsatisfiable) over subsets touching ``seeds``."""
    if s <= 0 or not f.clauses:
        return set(), False
    order, cindex, lits, width, occ_ptr, occ_idx = _arrays(f)
    if seeds is None:
        seed_idx = np.arange(len(cindex), dtype=np.int64)
    else:
        seed_idx = np.array(sorted(cindex[c] for c in seeds), dtype=np.int64)
        if seed_idx.size == 0:
            return set(), False
    pos, neg, unsat = _kernels.implied_literals(lits, width, occ_ptr, occ_idx, seed_idx, s, len(order))
    if unsat:
        return {v for v in order} | {-v for v in order}, True
    out = {order[i] for i in np.flatnonzero(pos)}
    out |= {-order[i] for i in np.flatnonzero(neg)}
    return out, False


def s_implied_literals(f: CnfFormula, s: int, naive: bool = False) -> set[int]:
    """All s-implied literals over V(F); both polarities of a variable may appear."""
    if naive:
        return {l for v in f.variables for l in (v, -v) if is_s_implied(f, l, s)}
    return _implied_from(f, s, None)[0]


def _first(lits) -> int:
    return min(lits, key=lit_key)


def _fixpoint(f: CnfFormula, s: int, seeds, pending: set[int] | None = None) -> FixpointResult:
    pending = set(pending or ())
    fixed: list[int] = []
    cur = f
    while True:
        if s > 0 and (seeds is None or seeds):
            new, unsat = _implied_from(cur, s, seeds)
            if unsat and cur.variables:
                return FixpointResult(cur, tuple(fixed), True)
            pending |= new
        if any(-l in pending for l in pending):
            return FixpointResult(cur, tuple(fixed), True)
        if not pending:
            return FixpointResult(cur, tuple(fixed), False)
        lit = _first(pending)
        pending.discard(lit)
        cur, seeds = restrict_with_dirty(cur, lit)
        fixed.append(lit)


def _fixpoint_naive(f: CnfFormula, s: int) -> FixpointResult:
    cur = f
    fixed: list[int] = []
    while True:
        imp = s_implied_literals(cur, s, naive=True)
        if any(-l in imp for l in imp):
            return FixpointResult(cur, tuple(fixed), True)
        if not imp:
            return FixpointResult(cur, tuple(fixed), False)
        lit = _first(imp)
        cur = cur.restrict(lit)
        fixed.append(lit)


def fix_implied(f: CnfFormula, s: int, mode: str = "incremental") -> FixpointResult:
    """Restrict by s-implied literals (lowest variable, positive first) until none remain.

    ``mode`` is ``incremental`` (re-test only subsets touching truncated
    clauses), ``full`` (recompute every step) or ``naive`` (reference subset
    enumeration, small formulas only).
    """
    if mode == "incremental":
        return _fixpoint(f, s, None)
    if mode == "full":
        cur = f
        fixed: list[int] = []
        while True:
            imp, unsat = _implied_from(cur, s, None)
            if (unsat and cur.variables) or any(-l in imp for l in imp):
                return FixpointResult(cur, tuple(fixed), True)
            if not imp:
                return FixpointResult(cur, tuple(fixed), False)
            lit = _first(imp)
            cur = cur.restrict(lit)
            fixed.append(lit)
    if mode == "naive":
        return _fixpoint_naive(f, s)
    raise ValueError(f"unknown fixpoint mode {mode!r}")


def fix_after_restrict(f: CnfFormula, lit: int, s: int) -> FixpointResult:
    """Fixpoint of F^[lit] for an s-implication free F; only truncated clauses seed the search."""
    g, dirty = restrict_with_dirty(f, lit)
    return _fixpoint(g, s, dirty)
