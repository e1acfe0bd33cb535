"""Acceptance suite.

Each criterion is a plain function returning (passed, detail) so the file can
also be run directly: ``python3 tests/test_acceptance.py [numbers...]``.
Under pytest every criterion records one PASS/FAIL line in the terminal summary.
"""
import math
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from ppszkit.analysis import (compute_sk, leeway_identity, verify_cost_bound, verify_cost_decrease,
                              verify_pguessed_lemmas)
from ppszkit.cnf import Assignment, CnfFormula, is_satisfied_by
from ppszkit.generator import Family, GenSpec, gen_planted, gen_uniform
from ppszkit.implication import fix_implied
from ppszkit.measure import (exhaustive_beta_pi, guess_counts_perm, guess_probabilities, p_exact,
                             pguessed_exact_perm, pguessed_exact_rec, psuccess_enumerate,
                             psuccess_exact)
from ppszkit.oracle import dpll_solve, enumerate_sat
from ppszkit.ppsz import SolveConfig, solve


def _max_m(n: int, k: int = 3) -> int:
    return math.comb(n, k) * 2 ** k - 1


def _planted(seed: int, n_lo: int, n_hi: int, m_per_n: float, m_cap: int, k: int = 3) -> CnfFormula:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    k = min(k, n)
    m = int(rng.integers(1, min(int(m_per_n * n), m_cap, _max_m(n, k)) + 1))
    return gen_planted(GenSpec(n, m, k, Family.PLANTED, seed))[0]


# ------------------------------------------------------------------ 1

PRINTED = {3: ("0.3862944", "1.307032"), 4: ("0.5548182", "1.468984"),
           5: ("0.6502379", "1.569427"), 6: ("0.7118243", "1.637874")}


def criterion_1():
    t0 = time.perf_counter()
    bad = []
    for k, (sk_txt, pow_txt) in PRINTED.items():
        sk = compute_sk(k)
        # printed figures are rounded up: the true value lies within one unit below them
        for txt, val in ((sk_txt, sk.value), (pow_txt, sk.pow2)):
            ulp = mpmath.mpf(10) ** -(len(txt) - 2)
            if not 0 <= mpmath.mpf(txt) - val < ulp:
                bad.append((k, txt, mpmath.nstr(val, 12)))
    with mpmath.workdps(30):
        err = abs(compute_sk(3).value - (2 * mpmath.log(2) - 1))
    elapsed = time.perf_counter() - t0
    ok = not bad and err < 1e-12 and elapsed < 1.0
    return ok, f"k=3..6 table {'matches' if not bad else bad}; |S_3-(2ln2-1)|={float(err):.1e}; {elapsed:.3f}s"


# ------------------------------------------------------------------ 2

def criterion_2():
    f = CnfFormula.from_clauses([[1, 2]])
    got = {(a, b): p_exact(f, Assignment({1: bool(a), 2: bool(b)})) for a, b in ((1, 1), (1, 0), (0, 1))}
    want = {(1, 1): Fraction(1, 4), (1, 0): Fraction(3, 8), (0, 1): Fraction(3, 8)}
    return got == want, "p(1,1)=%s p(1,0)=%s p(0,1)=%s" % tuple(got[k] for k in want)


# ------------------------------------------------------------------ 3

def criterion_3(count: int = 500):
    t0 = time.perf_counter()
    fails = []
    for i in range(count):
        f = _planted(i, 4, 10, 4, 40)
        for s in (1, 2, 3):
            if not verify_cost_bound(f, s).passed:
                fails.append((i, s))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 600
    return ok, f"{count} planted 3-CNF x s=1,2,3: {len(fails)} failures {fails[:5]}; {elapsed:.0f}s"


# ------------------------------------------------------------------ 4

def _implication_free(s: int, count: int, base: int):
    seed = base
    while count:
        seed += 1
        r = fix_implied(_planted(seed, 3, 8, 3, 10 ** 6), s).residual
        if r.n >= 2:
            count -= 1
            yield seed, r


def criterion_4(count: int = 200):
    """The cost-decrease inequality is checked at s = 2 and s = 3.

    At s = 0 and s = 1 the non-frozen lemma's hypothesis (every frozen
    variable of F^[l] is guessed with probability at most S) can fail; those
    runs are diagnostics only and must show that every violation of the
    inequality comes with a violated hypothesis.
    """
    t0 = time.perf_counter()
    fails, stats = [], Counter()
    for s in (2, 3):
        for seed, r in _implication_free(s, count, 10_000 * s):
            rep = verify_cost_decrease(r, s)
            stats[s] += 1
            if not rep.passed:
                fails.append((s, seed))
    unexplained = []
    for s in (0, 1):
        for seed, r in _implication_free(s, count, 10_000 * s):
            rep = verify_cost_decrease(r, s)
            stats[(s, rep.passed, rep.assumptions_hold)] += 1
            if not rep.passed and rep.assumptions_hold:
                unexplained.append((s, seed))
    elapsed = time.perf_counter() - t0
    diag = ", ".join(f"s={s}: {stats[(s, False, False)]} fail with failed hypothesis" for s in (0, 1))
    ok = not fails and not unexplained and stats[2] >= count and stats[3] >= count
    return ok, (f"{stats[2]}+{stats[3]} implication-free instances at s=2,3: {len(fails)} failures; "
                f"{diag}, {len(unexplained)} unexplained; {elapsed:.0f}s")


# ------------------------------------------------------------------ 5

def criterion_5(count: int = 240):
    t0 = time.perf_counter()
    fails = []
    for i in range(count):
        s = i % 4
        f = _planted(50_000 + i, 2, 7, 4, 10 ** 6)
        if i % 2:
            r = fix_implied(f, s).residual
            if r.n >= 1:
                f = r
        rep = verify_pguessed_lemmas(f, s)
        fails += [(i, c.name) for c in rep.checks if not c.passed]
    elapsed = time.perf_counter() - t0
    return not fails, f"{count} instances n<=7, s=0..3: {len(fails)} failed checks {fails[:5]}; {elapsed:.0f}s"


# ------------------------------------------------------------------ 6

def criterion_6(count: int = 150):
    t0 = time.perf_counter()
    triples = mism = 0
    for i in range(count):
        s = i % 4
        f = _planted(60_000 + i, 2, 7, 4, 10 ** 6)
        models = sorted(enumerate_sat(f), key=lambda a: sorted(a.literals))
        for alpha in models[:8]:
            if guess_counts_perm(f, alpha, s) != guess_probabilities(f, alpha, s):
                mism += 1
        r = fix_implied(f, s).residual
        for alpha in sorted(enumerate_sat(r), key=lambda a: sorted(a.literals))[:4]:
            for x in r.sorted_vars:
                triples += 1
                if pguessed_exact_perm(r, x, alpha, s) != pguessed_exact_rec(r, x, alpha, s):
                    mism += 1
    ps = ps_bad = 0
    for i in range(count):
        s = i % 4
        f = _planted(70_000 + i, 2, 6, 4, 10 ** 6)
        ps += 1
        exact = psuccess_exact(f, s)
        if exact != psuccess_enumerate(f, s) or (f.n <= 4 and exact != exhaustive_beta_pi(f, s)):
            ps_bad += 1
    elapsed = time.perf_counter() - t0
    return mism == 0 and ps_bad == 0, (f"pguessed perm=rec on {triples} (F,x,alpha) triples and full vectors: "
                                       f"{mism} mismatches; psuccess routes on {ps} instances: "
                                       f"{ps_bad} mismatches; {elapsed:.0f}s")


# ------------------------------------------------------------------ 7

def _unsat_instances(count: int):
    seed = 0
    while count:
        seed += 1
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 11))
        f = gen_uniform(GenSpec(n, 8 * n, 3, Family.UNIFORM, seed))
        if dpll_solve(f) is None:
            count -= 1
            yield f


def criterion_7(planted: int = 1000, unsat: int = 100):
    t0 = time.perf_counter()
    sat_ok = 0
    for i in range(planted):
        rng = np.random.default_rng(80_000 + i)
        n = int(rng.integers(20, 31))
        f = gen_planted(GenSpec(n, round(4.26 * n), 3, Family.PLANTED, 80_000 + i))[0]
        res = solve(f, SolveConfig(s=3, epsilon=0.1, delta=0.01, seed=i))
        sat_ok += bool(res.satisfiable and is_satisfied_by(f, res.assignment))
    false_sat = sum(solve(f, SolveConfig(s=3, seed=j)).satisfiable
                    for j, f in enumerate(_unsat_instances(unsat)))
    elapsed = time.perf_counter() - t0
    ok = sat_ok == planted and false_sat == 0 and elapsed < 900
    return ok, (f"{sat_ok}/{planted} planted instances solved and verified; "
                f"{false_sat}/{unsat} unsatisfiable instances reported SAT; {elapsed:.0f}s")


# ------------------------------------------------------------------ 8

def criterion_8():
    lhs, rhs = leeway_identity(30)
    return abs(lhs - rhs) < 1e-10, f"log2(e)={mpmath.nstr(lhs, 12)} vs 2-2S_3/(1+S_3)={mpmath.nstr(rhs, 12)}"


# ------------------------------------------------------------------ 9

DET_RUNS = [
    ["solve", "{cnf}"], ["solve", "{cnf}", "--auto", "--epsilon", "0.2"], ["analyze", "{cnf}"],
    ["verify", "--random", "5"], ["verify", "--fixtures"], ["sk-table"],
    ["experiment", "--family", "unique", "--n", "8", "--m", "32", "--count", "2", "--trials", "300",
     "--guess-trials", "50"],
]


def criterion_9(tmpdir: str):
    path = f"{tmpdir}/det.cnf"
    with open(path, "w") as fh:
        fh.write("p cnf 6 8\n1 2 3 0\n-1 4 0\n-2 -4 5 0\n3 -5 6 0\n-3 -6 0\n1 -6 0\n2 5 6 0\n-1 -2 -3 0\n")
    differ = []
    for argv in DET_RUNS:
        argv = [a.replace("{cnf}", path) for a in argv]
        cmd = [sys.executable, "-m", "ppszkit.cli", *argv, "--seed", "17", "--deterministic", "--format", "json"]
        outs = [subprocess.run(cmd, capture_output=True).stdout for _ in range(2)]
        if outs[0] != outs[1] or not outs[0]:
            differ.append(argv[0])
    return not differ, f"{len(DET_RUNS)} subcommand runs repeated: {len(differ)} differ {differ}"


# ------------------------------------------------------------------ pytest

def test_criterion_1(acceptance_record):
    ok, detail = criterion_1()
    acceptance_record(1, ok, detail)
    assert ok, detail


def test_criterion_2(acceptance_record):
    ok, detail = criterion_2()
    acceptance_record(2, ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_3(acceptance_record):
    ok, detail = criterion_3()
    acceptance_record(3, ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_4(acceptance_record):
    ok, detail = criterion_4()
    acceptance_record(4, ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_5(acceptance_record):
    ok, detail = criterion_5()
    acceptance_record(5, ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_6(acceptance_record):
    ok, detail = criterion_6()
    acceptance_record(6, ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_7(acceptance_record):
    ok, detail = criterion_7()
    acceptance_record(7, ok, detail)
    assert ok, detail


def test_criterion_8(acceptance_record):
    ok, detail = criterion_8()
    acceptance_record(8, ok, detail)
    assert ok, detail


def test_criterion_9(acceptance_record, tmp_path):
    ok, detail = criterion_9(str(tmp_path))
    acceptance_record(9, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    wanted = [int(a) for a in sys.argv[1:]] or list(range(1, 10))
    with tempfile.TemporaryDirectory() as tmp:
        for num in wanted:
            fn = globals()[f"criterion_{num}"]
            ok, detail = fn(tmp) if num == 9 else fn()
            print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
