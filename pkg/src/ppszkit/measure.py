"""Exact rational computation of p(F, alpha), pguessed, cost and psuccess.

Every probability here is a :class:`fractions.Fraction`.  Recursions memoize
on canonical restricted formulas, with caches that live for one top-level
call only.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .cnf import Assignment, CnfFormula, ContractViolation, is_satisfied_by, restrict, var
from .engine import Engine, MaskFormula
from .implication import FixpointResult, _fixpoint, s_implied_literals
from .oracle import ENUM_CAP, SolutionSet, UnsatisfiableError
from .ppsz import ppsz_random

PERM_CAP = 8


@dataclass(frozen=True)
class CostValue:
    value: Fraction
    s_bound_used: Fraction

    def __float__(self) -> float:
        return float(self.value)


class _Context:
    """Caches shared by the recursions below for one formula and one s.

    A child context (``parent``, ``lit``) describes F^[lit] inside the parent's
    engine and solution set, so residuals and memo tables are shared.
    """

    def __init__(self, f: CnfFormula, s: int, cap: int = ENUM_CAP,
                 parent: "_Context | None" = None, lit: int | None = None):
        self.s = s
        if parent is None:
            self.engine = Engine(f, s)
            self.sols = SolutionSet(f, cap)
            self.rows = self.sols.masks
            self._guess_memo: dict = {}
            self._succ_memo: dict = {}
        else:
            if var(lit) not in parent.f.variables:
                raise ContractViolation("child literal must mention a variable of the parent")
            self.engine, self.sols = parent.engine, parent.sols
            b = self.sols.bit(var(lit))
            self.rows = self.sols.select(parent.rows, b, b if lit > 0 else 0)
            self._guess_memo, self._succ_memo = parent._guess_memo, parent._succ_memo
        self.f = f
        self.varmask = sum(self.sols.bit(v) for v in f.variables)
        self._root = None

    def child(self, lit: int) -> "_Context":
        return _Context(restrict(self.f, lit), self.s, parent=self, lit=lit)

    def root(self):
        """Closure of F: (residual, fixed codes, contradiction)."""
        if self._root is None:
            self._root = self.engine.fix(self.engine.encode(self.f))
        return self._root

    def sl_codes(self, rows: np.ndarray, varmask: int) -> list[int]:
        andm, orm = self.sols.agree(rows)
        out = []
        for b in _bits(varmask):
            if (orm >> b) & 1:
                out.append(b + 1)
            if not (andm >> b) & 1:
                out.append(-(b + 1))
        return out

    def sl(self) -> list[int]:
        """SL(F) as signed variable ids."""
        return [self.engine.to_lit(c) for c in self.sl_codes(self.rows, self.varmask)]

    def frozen_mask(self) -> int:
        andm, orm = self.sols.agree(self.rows)
        return self.varmask & ~(orm & ~andm)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


_FACT = [math.factorial(i) for i in range(64)]
_DFACT = [(2 ** i) * math.factorial(i) for i in range(64)]


def _alpha_lits(f: CnfFormula, alpha: Mapping[int, bool]) -> dict[int, int]:
    missing = f.variables - set(alpha)
    if missing:
        raise ContractViolation(f"assignment not total on V(F); missing {sorted(missing)[:5]}")
    return {v: (v if alpha[v] else -v) for v in f.variables}


def _require_model(f: CnfFormula, alpha: Mapping[int, bool]) -> None:
    if not is_satisfied_by(f, alpha):
        raise ContractViolation("alpha does not satisfy F")


# -------------------------------------------------------------- p(F, alpha)

def assign_satisfiable_literals(f: CnfFormula, rng: np.random.Generator, cap: int = ENUM_CAP) -> Assignment:
    """Sample the process that repeatedly restricts by a uniform literal of SL(F)."""
    sols = SolutionSet(f, cap)
    if len(sols) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    rows = sols.masks
    free = list(sols.order)
    out: dict[int, bool] = {}
    while free:
        andm, orm = sols.agree(rows)
        sl = []
        for v in free:
            b = sols.bit(v)
            if orm & b:
                sl.append(v)
            if not andm & b:
                sl.append(-v)
        lit = sl[int(rng.integers(len(sl)))]
        b = sols.bit(var(lit))
        rows = sols.select(rows, b, b if lit > 0 else 0)
        out[var(lit)] = lit > 0
        free.remove(var(lit))
    return Assignment(out)


def p_exact(f: CnfFormula, alpha: Mapping[int, bool], cap: int = ENUM_CAP) -> Fraction:
    """Probability that the SL-sampling process outputs alpha (restricted to V(F))."""
    _alpha_lits(f, alpha)
    sols = SolutionSet(f, cap)
    if len(sols) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    target = Assignment({v: alpha[v] for v in f.variables}).to_mask(sols.order)
    if not np.any(sols.masks == np.uint64(target)):
        return Fraction(0)
    memo: dict[int, Fraction] = {}
    full = sols.full

    def rec(dom: int) -> Fraction:
        if dom == full:
            return Fraction(1)
        got = memo.get(dom)
        if got is not None:
            return got
        rows = sols.select(sols.masks, dom, target & dom)
        free = [v for v in sols.order if not dom & sols.bit(v)]
        andm, orm = sols.agree(rows)
        size = sum(1 + ((orm & ~andm) >> sols.index[v] & 1) for v in free)
        total = sum((rec(dom | sols.bit(v)) for v in free), Fraction(0))
        memo[dom] = res = total / size
        return res

    return rec(0)


def p_distribution(f: CnfFormula, cap: int = ENUM_CAP) -> dict[Assignment, Fraction]:
    """The full output distribution of the SL-sampling process, computed forward."""
    sols = SolutionSet(f, cap)
    if len(sols) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    return {Assignment.from_mask(sols.order, m): p for m, p in _p_forward(sols).items()}


def _p_forward(sols: SolutionSet, rows: np.ndarray | None = None,
               varmask: int | None = None) -> dict[int, Fraction]:
    """Output distribution over the models in ``rows``, keyed by model mask."""
    if rows is None:
        rows, varmask = sols.masks, sols.full
    bits = _bits(varmask)
    states: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    for _ in bits:
        nxt: dict[tuple[int, int], Fraction] = {}
        for (dom, val), pr in states.items():
            sub = sols.select(rows, dom, val)
            andm, orm = sols.agree(sub)
            moves = []
            for b in bits:
                bit = 1 << b
                if dom & bit:
                    continue
                if orm & bit:
                    moves.append((dom | bit, val | bit))
                if not andm & bit:
                    moves.append((dom | bit, val))
            q = pr / len(moves)
            for key in moves:
                nxt[key] = nxt.get(key, Fraction(0)) + q
        states = nxt
    if not bits:
        return {int(rows[0]) & varmask: Fraction(1)} if len(rows) else {}
    return {val: p for (_, val), p in states.items()}


# ------------------------------------------------------------- pguessed
#
# For a residual R with n variables, H(R) = n! * pguessed(R, . , alpha) is an
# integer vector:  H(R)[x] = (n-1)! + sum_y H(R_y)[x] * (n-1)! / n(R_y)!.

def _guess_vector(ctx: _Context, mf: MaskFormula, aval: int) -> np.ndarray:
    key = (mf, aval & mf.varmask)
    got = ctx._guess_memo.get(key)
    if got is not None:
        return got
    width = len(ctx.engine.order)
    n = mf.n
    acc = np.zeros(width, dtype=np.int64 if width <= 20 else object)
    if n:
        scale = _FACT[n - 1]
        for b in _bits(mf.varmask):
            code = b + 1 if (aval >> b) & 1 else -(b + 1)
            child, _, contra = ctx.engine.step(mf, code)
            if contra or child.has_empty_clause:
                raise AssertionError("restriction by a literal of a model became unsatisfiable")
            acc += _guess_vector(ctx, child, aval) * (scale // _FACT[child.n])
            acc[b] += scale
    ctx._guess_memo[key] = acc
    return acc


def _alpha_mask(ctx: _Context, alpha: Mapping[int, bool]) -> int:
    return sum(ctx.sols.bit(v) for v in ctx.f.variables if alpha[v])


def guess_probabilities(f: CnfFormula, alpha: Mapping[int, bool], s: int,
                        ctx: _Context | None = None) -> dict[int, Fraction]:
    """pguessed(F, x, alpha, s) for all x in V(F), via the first-variable recursion."""
    _alpha_lits(f, alpha)
    _require_model(f, alpha)
    if ctx is None:
        ctx = _Context(f, s, cap=max(f.n, ENUM_CAP))
    r, _, contra = ctx.root()
    if contra:
        raise AssertionError("implication contradiction on a satisfiable formula")
    h = _guess_vector(ctx, r, _alpha_mask(ctx, alpha))
    den = _FACT[r.n]
    return {v: Fraction(int(h[ctx.sols.index[v]]), den) for v in f.variables}


def pguessed_exact_rec(f: CnfFormula, x: int, alpha: Mapping[int, bool], s: int) -> Fraction:
    """pguessed for an s-implication free F, by recursion over the first variable of pi."""
    _require_model(f, alpha)
    if s_implied_literals(f, s):
        raise ContractViolation("F is not s-implication free; apply fix_implied first")
    if x not in f.variables:
        return Fraction(0)
    return guess_probabilities(f, alpha, s)[x]


def guess_counts_perm(f: CnfFormula, alpha: Mapping[int, bool], s: int,
                      cap: int = PERM_CAP) -> dict[int, Fraction]:
    """pguessed for all x by simulating the run for every permutation.

    A simulated state is (current formula, variables not yet visited); its
    future does not depend on the order that led there, so guess counts are
    memoised per state.  Uses the reference restriction/fixpoint route.
    """
    if f.n > cap:
        raise ValueError(f"n(F)={f.n} exceeds permutation cap {cap}")
    alits = _alpha_lits(f, alpha)
    _require_model(f, alpha)
    order = f.sorted_vars
    pos = {v: i for i, v in enumerate(order)}
    fix_memo: dict[CnfFormula, FixpointResult] = {}
    memo: dict[tuple[CnfFormula, frozenset], np.ndarray] = {}
    fact = [math.factorial(i) for i in range(f.n + 1)]

    def count(cur: CnfFormula, remaining: frozenset) -> np.ndarray:
        key = (cur, remaining)
        got = memo.get(key)
        if got is not None:
            return got
        res = fix_memo.get(cur)
        if res is None:
            res = fix_memo[cur] = _fixpoint(cur, s, None)
        if res.contradiction or res.residual.has_empty_clause:
            raise AssertionError("run with beta = model failed")
        g = res.residual
        out = np.zeros(len(order), dtype=np.int64)
        for y in remaining:
            rest = remaining - {y}
            if y in g.variables:
                out[pos[y]] += fact[len(rest)]
                out += count(restrict(g, alits[y]), rest)
            else:
                out += count(g, rest)
        memo[key] = out
        return out

    counts = count(f, frozenset(order))
    total = fact[f.n]
    return {v: Fraction(int(counts[pos[v]]), total) for v in order}


def pguessed_exact_perm(f: CnfFormula, x: int, alpha: Mapping[int, bool], s: int,
                        cap: int = PERM_CAP) -> Fraction:
    """Fraction of the n! permutations for which x is guessed when beta = alpha."""
    if x not in f.variables:
        _require_model(f, alpha)
        return Fraction(0)
    return guess_counts_perm(f, alpha, s, cap)[x]


# ------------------------------------------------------------------ cost

def cost_vector(f: CnfFormula, s: int, s_bound: Fraction, cap: int = ENUM_CAP,
                ctx: _Context | None = None) -> dict[int, Fraction]:
    """c(F, x) for every x in V(F), with S replaced by ``s_bound``."""
    s_bound = Fraction(s_bound)
    if ctx is None:
        ctx = _Context(f, s, cap)
    if len(ctx.rows) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    frozen = ctx.frozen_mask()
    out = {v: s_bound for v in f.variables if not frozen & ctx.sols.bit(v)}
    if not frozen:
        return out
    r, _, _ = ctx.root()
    fbits = _bits(frozen)
    acc = [Fraction(0)] * len(fbits)
    for mask, p in _p_forward(ctx.sols, ctx.rows, ctx.varmask).items():
        h = _guess_vector(ctx, r, mask)
        for i, b in enumerate(fbits):
            if h[b]:
                acc[i] += p * int(h[b])
    den = _FACT[r.n]
    for i, b in enumerate(fbits):
        out[ctx.sols.order[b]] = acc[i] / den
    return out


def max_frozen_guess(f: CnfFormula, s: int, cap: int = ENUM_CAP,
                     ctx: _Context | None = None) -> Fraction:
    """Largest pguessed(F, x, alpha, s) over frozen x and alpha in sat(F); 0 if nothing is frozen."""
    if ctx is None:
        ctx = _Context(f, s, cap)
    if len(ctx.rows) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    frozen = ctx.frozen_mask()
    if not frozen:
        return Fraction(0)
    r, _, _ = ctx.root()
    fbits = _bits(frozen)
    best = 0
    # frozen bits agree on all rows, so one row per distinct non-frozen part suffices
    for mask in {int(x) & ctx.varmask for x in ctx.rows}:
        h = _guess_vector(ctx, r, mask)
        best = max(best, max(int(h[b]) for b in fbits))
    return Fraction(best, _FACT[r.n])


def cost(f: CnfFormula, x: int, s: int, s_bound: Fraction, cap: int = ENUM_CAP) -> CostValue:
    s_bound = Fraction(s_bound)
    if x not in f.variables:
        return CostValue(Fraction(0), s_bound)
    return CostValue(cost_vector(f, s, s_bound, cap)[x], s_bound)


def cost_total(f: CnfFormula, s: int, s_bound: Fraction, cap: int = ENUM_CAP,
               ctx: _Context | None = None) -> CostValue:
    s_bound = Fraction(s_bound)
    return CostValue(sum(cost_vector(f, s, s_bound, cap, ctx).values(), Fraction(0)), s_bound)


# -------------------------------------------------------------- psuccess
#
# Q(R) = psuccess(R) * 2^n n!  is an integer:
#   Q(R) = sum_{l in SL(R)} Q(R_l) * 2^(n-1)(n-1)! / (2^n(R_l) n(R_l)!).

def psuccess_exact(f: CnfFormula, s: int, cap: int = ENUM_CAP, ctx: _Context | None = None) -> Fraction:
    """Exact success probability: fix implied literals, then average over the first guess."""
    if ctx is None:
        ctx = _Context(f, s, cap)
    if len(ctx.rows) == 0:
        return Fraction(0)
    sols, eng, memo = ctx.sols, ctx.engine, ctx._succ_memo

    def rec(mf: MaskFormula, rows: np.ndarray) -> int:
        got = memo.get(mf)
        if got is not None:
            return got
        n = mf.n
        if n == 0:
            return 1
        scale = _DFACT[n - 1]
        total = 0
        for code in ctx.sl_codes(rows, mf.varmask):
            child, fixed, contra = eng.step(mf, code)
            if contra:
                raise AssertionError("implication contradiction after a satisfiable literal")
            dom = val = 0
            for c in (code,) + fixed:
                bit = 1 << (abs(c) - 1)
                dom |= bit
                if c > 0:
                    val |= bit
            total += rec(child, sols.select(rows, dom, val)) * (scale // _DFACT[child.n])
        memo[mf] = total
        return total

    r, fixed, contra = ctx.root()
    if contra:
        raise AssertionError("implication contradiction on a satisfiable formula")
    dom = val = 0
    for c in fixed:
        bit = 1 << (abs(c) - 1)
        dom |= bit
        if c > 0:
            val |= bit
    return Fraction(rec(r, sols.select(ctx.rows, dom, val)), _DFACT[r.n])


def psuccess_enumerate(f: CnfFormula, s: int, cap: int = 7) -> Fraction:
    """Success probability by simulating every (beta, pi) pair.

    beta only matters at guesses, so runs are grouped by the shared prefix of
    (pi, guessed values); each group is weighted by how many pairs it stands for.
    """
    if f.n > cap:
        raise ValueError(f"n(F)={f.n} exceeds enumeration cap {cap}")
    fix_memo: dict[CnfFormula, FixpointResult] = {}

    def dfs(cur: CnfFormula, remaining: tuple[int, ...]) -> int:
        res = fix_memo.get(cur)
        if res is None:
            res = fix_memo[cur] = _fixpoint(cur, s, None)
        if res.contradiction or res.residual.has_empty_clause:
            return 0
        g = res.residual
        if not remaining:
            return 1 if not g.clauses else 0
        total = 0
        for i, y in enumerate(remaining):
            rest = remaining[:i] + remaining[i + 1:]
            if y in g.variables:
                for lit in (y, -y):
                    h = restrict(g, lit)
                    total += 0 if h.has_empty_clause else dfs(h, rest)
            else:
                total += 2 * dfs(g, rest)
        return total

    wins = dfs(f, f.sorted_vars)
    return Fraction(wins, 2 ** f.n * math.factorial(f.n))


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def psuccess_mc(f: CnfFormula, s: int, trials: int, rng: np.random.Generator) -> tuple[float, tuple[float, float]]:
    """Monte Carlo success fraction with a 95% Wilson interval."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    wins = sum(ppsz_random(f, s, rng) is not None for _ in range(trials))
    return wins / trials, wilson_interval(wins, trials)


def exhaustive_beta_pi(f: CnfFormula, s: int) -> Fraction:
    """Plain loop over all 2^n * n! (beta, pi) pairs; tiny formulas only."""
    from .ppsz import Outcome, ppsz_run

    order = f.sorted_vars
    wins = 0
    for bits in itertools.product((False, True), repeat=len(order)):
        beta = dict(zip(order, bits))
        for pi in itertools.permutations(order):
            alpha, trace = ppsz_run(f, beta, pi, s)
            if trace.outcome is Outcome.SATISFYING and is_satisfied_by(f, alpha):
                wins += 1
    return Fraction(wins, 2 ** len(order) * math.factorial(len(order)))
