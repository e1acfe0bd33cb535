"""S_k, verification of the cost and lemma inequalities on concrete instances, guess-rate measurement."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import mpmath
import numpy as np

from .cnf import Assignment, CnfFormula, ContractViolation
from .implication import s_implied_literals
from .measure import (ENUM_CAP, PERM_CAP, _Context, _p_forward, cost_vector, guess_counts_perm,
                      guess_probabilities, max_frozen_guess, psuccess_exact, wilson_interval)
from .oracle import UnsatisfiableError, dpll_solve, frozen_partition
from .ppsz import Mode, ppsz_run

UPPER_BITS = 40


# ---------------------------------------------------------------- S_k

@dataclass(frozen=True)
class SkValue:
    k: int
    value: mpmath.mpf
    upper_rational: Fraction
    digits: int
    error_bound: mpmath.mpf

    @property
    def pow2(self) -> mpmath.mpf:
        with mpmath.workdps(self.digits + 10):
            return mpmath.power(2, self.value)


@lru_cache(maxsize=None)
def _legendre_nodes(n: int, dps: int):
    """Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration."""
    with mpmath.workdps(dps + 10):
        nodes, weights = [], []
        eps = mpmath.mpf(10) ** (-(dps + 5))
        for i in range(1, n + 1):
            x = mpmath.cos(mpmath.pi * (i - mpmath.mpf(1) / 4) / (n + mpmath.mpf(1) / 2))
            for _ in range(100):
                p0, p1 = mpmath.mpf(1), x
                for j in range(2, n + 1):
                    p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < eps:
                    break
            p0, p1 = mpmath.mpf(1), x
            for j in range(2, n + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = n * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        return nodes, weights


def _gl(fn, a, b, n, dps):
    nodes, weights = _legendre_nodes(n, dps)
    half = (b - a) / 2
    mid = (a + b) / 2
    return half * mpmath.fsum(w * fn(mid + half * x) for x, w in zip(nodes, weights))


def adaptive_gauss(fn, a, b, tol, dps: int, n: int = 12, max_depth: int = 40):
    """Adaptive bisection with paired n/2n-point Gauss-Legendre rules.

    Returns (integral, error_bound); the bound sums |G_2n - G_n| over accepted panels.
    """
    total = mpmath.mpf(0)
    err = mpmath.mpf(0)
    stack = [(mpmath.mpf(a), mpmath.mpf(b), 0)]
    while stack:
        lo, hi, depth = stack.pop()
        coarse = _gl(fn, lo, hi, n, dps)
        fine = _gl(fn, lo, hi, 2 * n, dps)
        e = abs(fine - coarse)
        if e <= tol * (hi - lo) / (b - a) or depth >= max_depth:
            total += fine
            err += e
        else:
            mid = (lo + hi) / 2
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return total, err


def _sk_integrand(k: int):
    # t = u^(k-1) turns (t^(1/(k-1)) - t)/(1 - t) dt into a rational function of u;
    # the removable point t = 1 becomes u = 1, where the quotient is (k-2)/(k-1).
    def g(u):
        num = mpmath.fsum(u ** j for j in range(k - 2))
        den = mpmath.fsum(u ** j for j in range(k - 1))
        return (k - 1) * u ** (k - 2) * u * num / den
    return g


@lru_cache(maxsize=None)
def compute_sk(k: int, digits: int = 20) -> SkValue:
    """S_k = integral_0^1 (t^(1/(k-1)) - t)/(1 - t) dt, with a rigorous dyadic upper bound."""
    if k < 3:
        raise ValueError("S_k is defined here for k >= 3")
    if digits < 10:
        raise ValueError("digits must be at least 10")
    dps = digits + 10
    with mpmath.workdps(dps):
        tol = mpmath.mpf(10) ** (-(digits + 2))
        val, err = adaptive_gauss(_sk_integrand(k), 0, 1, tol, dps)
        if err > tol:
            raise ArithmeticError(f"quadrature error {err} above tolerance")
        bound = err + mpmath.mpf(10) ** (-(dps - 2))  # rounding slack of the working precision
        scaled = (val + bound) * 2 ** UPPER_BITS
        upper = Fraction(int(mpmath.ceil(scaled)), 2 ** UPPER_BITS)
    return SkValue(k, val, upper, digits, bound)


def s_bound_for(f: CnfFormula) -> Fraction:
    return compute_sk(max(3, f.k)).upper_rational


def leeway_identity(digits: int = 30) -> tuple[mpmath.mpf, mpmath.mpf]:
    """(log2 e, 2 - 2 S_3/(1 + S_3))."""
    sk = compute_sk(3, max(digits, 10))
    with mpmath.workdps(digits + 10):
        return mpmath.log(mpmath.e, 2), 2 - 2 * sk.value / (1 + sk.value)


# ----------------------------------------------------- rigorous bounds

def _mpi_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def pow2_neg_bounds(c: Fraction, bits: int = 128) -> tuple[Fraction, Fraction]:
    """Dyadic (lower, upper) enclosing 2^(-c), computed with interval arithmetic."""
    c = Fraction(c)
    if c.denominator == 1:
        v = Fraction(2) ** (-c.numerator)
        return v, v
    ctx = mpmath.iv
    old = ctx.prec
    try:
        ctx.prec = bits
        x = ctx.mpf(c.numerator) / c.denominator
        y = ctx.exp(-x * ctx.log(2))
        return _mpi_to_fraction(y.a._mpi_[0]), _mpi_to_fraction(y.b._mpi_[1])
    finally:
        ctx.prec = old


def geq_pow2_neg(p: Fraction, c: Fraction) -> tuple[bool, Fraction]:
    """Decide p >= 2^(-c) rigorously; returns (holds, upper bound of 2^(-c) used)."""
    bits = 128
    while True:
        lo, hi = pow2_neg_bounds(c, bits)
        if p >= hi:
            return True, hi
        if p < lo:
            return False, hi
        if bits > 1 << 14:  # pragma: no cover - equality with an irrational cannot be settled
            return False, hi
        bits *= 4


# ------------------------------------------------------------- reports

@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "pass": self.passed}


def _compare(name: str, lhs: Fraction, rhs: Fraction, relation: str) -> Check:
    """Exact comparison ``lhs relation rhs``; margin is the slack."""
    if relation == "<=":
        ok, margin = lhs <= rhs, rhs - lhs
    elif relation == ">=":
        ok, margin = lhs >= rhs, lhs - rhs
    elif relation == "==":
        ok, margin = lhs == rhs, -abs(lhs - rhs)
    else:
        raise ValueError(relation)
    return Check(name, float(lhs), float(rhs), float(margin), bool(ok))


@dataclass
class VerificationReport:
    """Checked inequalities on one instance.

    ``assumptions`` holds hypotheses of a statement that were evaluated on
    the instance; they are reported but do not decide ``passed``.
    """
    instance: str
    checks: list[Check] = field(default_factory=list)
    assumptions: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def assumptions_hold(self) -> bool:
        return all(c.passed for c in self.assumptions)

    def add(self, name: str, lhs: Fraction, rhs: Fraction, relation: str) -> Check:
        chk = _compare(name, lhs, rhs, relation)
        self.checks.append(chk)
        return chk

    def assume(self, name: str, lhs: Fraction, rhs: Fraction, relation: str) -> Check:
        chk = _compare(name, lhs, rhs, relation)
        self.assumptions.append(chk)
        return chk

    def to_json(self) -> dict:
        out = {"instance": self.instance, "checks": [c.to_json() for c in self.checks],
               "pass": self.passed}
        if self.assumptions:
            out["assumptions"] = [c.to_json() for c in self.assumptions]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class _Worst:
    """Keeps, per check name, the instance of the relation with the smallest slack."""

    def __init__(self):
        self.items: dict[str, tuple[Fraction, Fraction, Fraction, str, bool]] = {}

    def add(self, name, lhs, rhs, relation):
        if relation == "<=":
            slack, ok = rhs - lhs, lhs <= rhs
        elif relation == ">=":
            slack, ok = lhs - rhs, lhs >= rhs
        else:
            slack, ok = -abs(lhs - rhs), lhs == rhs
        prev = self.items.get(name)
        if prev is None or slack < prev[2]:
            self.items[name] = (lhs, rhs, slack, relation, ok and (prev is None or prev[4]))
        elif not ok:
            self.items[name] = prev[:4] + (False,)

    def flush(self, report: VerificationReport):
        for name in sorted(self.items):
            lhs, rhs, slack, relation, ok = self.items[name]
            report.checks.append(Check(name, float(lhs), float(rhs), float(slack), bool(ok)))


def _instance_id(f: CnfFormula, s: int) -> str:
    return f"n={f.n},m={f.m},k={f.k},s={s}"


def verify_cost_bound(f: CnfFormula, s: int, instance: str | None = None,
                      cap: int = ENUM_CAP, psuccess_fn=None) -> VerificationReport:
    """psuccess(F, s) >= 2^(-c(F)) with S replaced by the dyadic upper bound of S_k.

    ``psuccess_fn(f, s, cap, ctx)`` replaces the exact psuccess; the CLI uses
    it to self-test the harness with a broken oracle.
    """
    rep = VerificationReport(instance or _instance_id(f, s))
    ctx = _Context(f, s, cap)
    if len(ctx.rows) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    sb = s_bound_for(f)
    p = (psuccess_fn or psuccess_exact)(f, s, cap, ctx)
    c = sum(cost_vector(f, s, sb, cap, ctx).values(), Fraction(0))
    ok, hi = geq_pow2_neg(p, c)
    rep.checks.append(Check("cost_bound", float(p), float(hi), float(p - hi), ok))
    return rep


def verify_cost_decrease(f: CnfFormula, s: int, instance: str | None = None,
                         cap: int = ENUM_CAP) -> VerificationReport:
    """Expected cost after one uniform satisfying literal, and the per-variable lemmas."""
    if s_implied_literals(f, s):
        raise ContractViolation("F is not s-implication free")
    rep = VerificationReport(instance or _instance_id(f, s))
    ctx = _Context(f, s, cap)
    sols = ctx.sols
    if len(sols) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    sb = s_bound_for(f)
    andm, orm = sols.agree(sols.masks)
    nonfrozen = [v for v in sols.order if (orm & ~andm) & sols.bit(v)]
    frozen = [v for v in sols.order if v not in nonfrozen]
    sl = ctx.sl()
    size = len(sl)
    c_f = cost_vector(f, s, sb, cap, ctx)
    expect = {v: Fraction(0) for v in f.variables}
    premise = Fraction(0)
    for lit in sl:
        cctx = ctx.child(lit)
        for v, cv in cost_vector(cctx.f, s, sb, cap, cctx).items():
            expect[v] += cv
        premise = max(premise, max_frozen_guess(cctx.f, s, cap, cctx))
    # the non-frozen lemma needs every frozen variable of F^[l] to be guessed w.p. <= S
    rep.assume("frozen_guess_premise", premise, sb, "<=")
    expect = {v: e / size for v, e in expect.items()}
    total_c = sum(c_f.values(), Fraction(0))
    rep.add("cost_decrease", sum(expect.values(), Fraction(0)),
            total_c - len(nonfrozen) * 2 * sb / size - Fraction(len(frozen), size), "<=")
    for v in nonfrozen:
        rep.add(f"noncrit_decrease[x{v}]", expect[v], c_f[v] - 2 * sb / size, "<=")
    for v in frozen:
        rep.add(f"crit_decrease[x{v}]", expect[v], c_f[v] - Fraction(1, size), "<=")
    return rep


def verify_pguessed_lemmas(f: CnfFormula, s: int, instance: str | None = None,
                           cap: int = ENUM_CAP, perm_cap: int = PERM_CAP) -> VerificationReport:
    """Monotonicity/reduction of pguessed, properties of p, cost under frozen restriction.

    pguessed values come from the permutation simulation, cross-checked
    against the recursion.  One record per check name, holding the tightest case.
    """
    rep = VerificationReport(instance or _instance_id(f, s))
    ctx = _Context(f, s, cap)
    sols = ctx.sols
    if len(sols) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    if f.n > perm_cap:
        raise ValueError(f"n(F)={f.n} exceeds permutation cap {perm_cap}")
    free = not s_implied_literals(f, s)
    andm, orm = sols.agree(sols.masks)
    frozen = {v for v in sols.order if not (orm & ~andm) & sols.bit(v)}
    dist = _p_forward(sols)
    n = f.n
    w = _Worst()
    sb = s_bound_for(f)
    child_ctx: dict[int, _Context] = {}
    child_p: dict[int, dict[int, Fraction]] = {}

    def child(lit: int) -> _Context:
        if lit not in child_ctx:
            cctx = child_ctx[lit] = ctx.child(lit)
            child_p[lit] = _p_forward(sols, cctx.rows, cctx.varmask)
        return child_ctx[lit]

    for mask, p_f in dist.items():
        alpha = Assignment.from_mask(sols.order, mask)
        pg_f = guess_counts_perm(f, alpha, s, perm_cap)
        pg_rec = guess_probabilities(f, alpha, s, ctx)
        for x in f.variables:
            w.add("pguessed_oracles_agree", pg_f[x], pg_rec[x], "==")
        reduced_sum = {x: Fraction(0) for x in f.variables}
        for y in sols.order:
            lit = y if alpha[y] else -y
            cctx = child(lit)
            g = cctx.f
            pg_g = guess_counts_perm(g, alpha, s, perm_cap)
            pg_g_rec = guess_probabilities(g, alpha, s, cctx)
            for x in f.variables:
                a = pg_g.get(x, Fraction(0))
                w.add("pguessed_oracles_agree", a, pg_g_rec.get(x, Fraction(0)), "==")
                w.add("pguessed_monotone", a, pg_f[x], "<=")
                reduced_sum[x] += a
            p_g = child_p[lit].get(mask & cctx.varmask, Fraction(0))
            w.add("p_monotone", p_g, p_f, ">=")
            if y in frozen:
                w.add("p_frozen_equal", p_g, p_f, "==")
        if free:
            for x in f.variables:
                w.add("pguessed_reduced", pg_f[x] - Fraction(1, n), reduced_sum[x] / n, "==")
    c_f = sum(cost_vector(f, s, sb, cap, ctx).values(), Fraction(0))
    for y in sorted(frozen):
        lit = y if (andm & sols.bit(y)) else -y
        cctx = child(lit)
        c_g = sum(cost_vector(cctx.f, s, sb, cap, cctx).values(), Fraction(0))
        w.add("cost_monotone_frozen", c_g, c_f, "<=")
    w.flush(rep)
    return rep


# ------------------------------------------------------- guess rates

@dataclass
class GuessRate:
    var: int
    frozen: bool
    rate: float
    ci95: tuple[float, float]


def measure_guess_rate(f: CnfFormula, s: int, trials: int, rng: np.random.Generator,
                       alpha: Mapping[int, bool] | None = None) -> dict:
    """Monte Carlo guess frequency of each variable when beta is a fixed model.

    Reported next to S_k for context only; no bound is asserted.
    """
    if alpha is None:
        alpha = dpll_solve(f)
        if alpha is None:
            raise UnsatisfiableError("formula is unsatisfiable")
    part = frozen_partition(f)
    order = f.sorted_vars
    counts = {v: 0 for v in order}
    for _ in range(trials):
        pi = [order[i] for i in rng.permutation(len(order))]
        _, trace = ppsz_run(f, alpha, pi, s)
        for st in trace.steps:
            if st.mode is Mode.GUESSED:
                counts[st.var] += 1
    rates = [GuessRate(v, v in part.frozen, counts[v] / trials, wilson_interval(counts[v], trials))
             for v in order]
    sk = compute_sk(max(3, f.k))
    return {"s": s, "trials": trials, "S_k": float(sk.value), "rates": [asdict(r) for r in rates]}
