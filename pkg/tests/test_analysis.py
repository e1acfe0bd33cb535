import json
from fractions import Fraction

import jsonschema
import mpmath
import numpy as np
import pytest

from ppszkit.analysis import (Check, VerificationReport, compute_sk, geq_pow2_neg, leeway_identity,
                              measure_guess_rate, pow2_neg_bounds, s_bound_for, verify_cost_bound,
                              verify_cost_decrease, verify_pguessed_lemmas)
from ppszkit.cli import load_schema
from ppszkit.cnf import CnfFormula, ContractViolation
from ppszkit.measure import psuccess_exact

XY = CnfFormula.from_clauses([[1, 2]])


def sk_closed_form(k, dps=40):
    # S_k = 1 - H_{1/(k-1)} with the generalised harmonic number H_a = psi(1 + a) + gamma
    with mpmath.workdps(dps):
        return 1 - (mpmath.digamma(1 + mpmath.mpf(1) / (k - 1)) + mpmath.euler)


@pytest.mark.parametrize("k, printed, pow2", [
    (3, "0.3862944", "1.307032"), (4, "0.5548182", "1.468984"),
    (5, "0.6502379", "1.569427"), (6, "0.7118243", "1.637874"),
])
def test_sk_table(k, printed, pow2):
    sk = compute_sk(k)
    assert 0 <= float(mpmath.mpf(printed) - sk.value) < 1e-7
    assert 0 <= float(mpmath.mpf(pow2) - sk.pow2) < 1e-6


@pytest.mark.parametrize("k", range(3, 11))
def test_sk_matches_digamma(k):
    sk = compute_sk(k, digits=25)
    assert abs(sk.value - sk_closed_form(k)) < mpmath.mpf(10) ** -24
    assert sk.upper_rational >= Fraction(str(mpmath.nstr(sk_closed_form(k), 30)))
    assert sk.upper_rational - Fraction(str(mpmath.nstr(sk_closed_form(k), 30))) < Fraction(1, 2 ** 38)


def test_sk_closed_form_k3():
    with mpmath.workdps(30):
        assert abs(compute_sk(3, 25).value - (2 * mpmath.log(2) - 1)) < 1e-20


def test_sk_monotone_and_errors():
    vals = [compute_sk(k).value for k in range(3, 11)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        compute_sk(2)
    with pytest.raises(ValueError):
        compute_sk(3, digits=5)


def test_s_bound_uses_k_at_least_3():
    assert s_bound_for(XY) == compute_sk(3).upper_rational
    assert s_bound_for(CnfFormula.from_clauses([[1, 2, 3, 4]])) == compute_sk(4).upper_rational


def test_leeway_identity():
    a, b = leeway_identity(20)
    assert abs(a - b) < 1e-18


@pytest.mark.parametrize("c", [Fraction(0), Fraction(3), Fraction(1, 3), Fraction(123456789, 2 ** 30)])
def test_pow2_bounds_enclose(c):
    lo, hi = pow2_neg_bounds(c)
    with mpmath.workdps(80):
        exact = mpmath.power(2, -mpmath.mpf(c.numerator) / c.denominator)
        assert mpmath.mpf(lo.numerator) / lo.denominator <= exact <= mpmath.mpf(hi.numerator) / hi.denominator
    assert hi - lo < Fraction(1, 2 ** 100)


def test_geq_pow2_neg_exact_for_integers():
    assert geq_pow2_neg(Fraction(1, 4), Fraction(2)) == (True, Fraction(1, 4))
    assert geq_pow2_neg(Fraction(1, 4) - Fraction(1, 10 ** 30), Fraction(2))[0] is False
    ok, hi = geq_pow2_neg(Fraction(1, 2), Fraction(1, 2))
    assert not ok and hi > Fraction(7071, 10000)


def test_report_json_schema():
    rep = VerificationReport("demo")
    rep.add("a", Fraction(1), Fraction(2), "<=")
    rep.assume("h", Fraction(1), Fraction(0), "<=")
    doc = rep.to_json()
    jsonschema.validate(doc, load_schema("report"))
    assert doc["pass"] is True and rep.assumptions_hold is False
    assert json.loads(rep.dumps()) == doc
    assert Check("x", 1.0, 1.0, 0.0, True).to_json()["pass"] is True


def test_verify_cost_bound_examples():
    units = CnfFormula.from_clauses([[1], [-2], [3]])
    rep = verify_cost_bound(units, 1)
    assert rep.passed and rep.checks[0].margin == 0
    rep = verify_cost_bound(XY, 1)
    assert rep.passed and rep.checks[0].lhs == 1
    broken = verify_cost_bound(XY, 1, psuccess_fn=lambda f, s, cap, ctx: Fraction(0))
    assert not broken.passed


def test_verify_cost_decrease_examples():
    rep = verify_cost_decrease(XY, 1)
    assert rep.passed and rep.assumptions_hold
    rep = verify_cost_decrease(CnfFormula.from_clauses([[1]]), 0)
    assert rep.passed
    dec = [c for c in rep.checks if c.name == "cost_decrease"][0]
    assert dec.lhs == 0 and dec.rhs == 0
    with pytest.raises(ContractViolation):
        verify_cost_decrease(CnfFormula.from_clauses([[1]]), 1)


def test_cost_decrease_premise_counterexample():
    """At s = 1 a frozen variable of F^[l] can be guessed with probability 1/2 > S_3.

    The non-frozen lemma then fails, and the report says its hypothesis failed.
    """
    f = CnfFormula.from_clauses([[1, 2, 3], [1, 2, -3]])
    rep = verify_cost_decrease(f, 1)
    assert not rep.assumptions_hold
    premise = rep.assumptions[0]
    assert premise.lhs == 0.5 and premise.rhs == pytest.approx(0.3862944, abs=1e-7)
    failed = {c.name for c in rep.checks if not c.passed}
    assert failed and all(n.startswith(("noncrit", "cost_decrease")) for n in failed)
    # with s = 2 the same formula satisfies every inequality
    assert verify_cost_decrease(f, 2).passed


def test_verify_pguessed_lemmas_examples():
    rep = verify_pguessed_lemmas(CnfFormula.from_clauses([[1]]), 1)
    assert rep.passed
    rep = verify_pguessed_lemmas(CnfFormula.from_clauses([[1, 2], [-1, -2]]), 1)
    assert rep.passed
    names = {c.name for c in rep.checks}
    assert {"pguessed_oracles_agree", "pguessed_monotone", "p_monotone", "pguessed_reduced"} <= names
    with pytest.raises(ValueError):
        verify_pguessed_lemmas(CnfFormula.from_clauses([], range(1, 10)), 1)


def test_guess_rate_examples():
    rng = np.random.default_rng(0)
    units = CnfFormula.from_clauses([[1], [-2]])
    rep = measure_guess_rate(units, 1, 50, rng)
    assert all(r["rate"] == 0 for r in rep["rates"])
    free = CnfFormula.from_clauses([], [1, 2])
    rep = measure_guess_rate(free, 1, 50, rng)
    assert all(r["rate"] == 1 for r in rep["rates"])
    assert rep["S_k"] == pytest.approx(0.38629436)


def test_cost_bound_tight_example_is_rigorous():
    f = CnfFormula.from_clauses([[1, 2], [1, -2]])
    p = psuccess_exact(f, 1)
    rep = verify_cost_bound(f, 1)
    assert rep.passed and rep.checks[0].lhs == float(p)
