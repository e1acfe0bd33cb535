"""Modified PPSZ for k-SAT with s-implication, plus exact analysis tools."""
from .cnf import (Assignment, CnfFormula, ContractViolation, DimacsError, emit_dimacs,
                  is_satisfied_by, parse_dimacs, restrict)
from .implication import FixpointResult, fix_implied, is_s_implied, s_implied_literals
from .oracle import (EnumerationCapError, UnsatisfiableError, dpll_solve, enumerate_sat,
                     frozen_partition, is_satisfiable, satisfying_literals)
from .ppsz import SolveConfig, SolveResult, ppsz_random, ppsz_run, solve
from .measure import (cost, cost_total, guess_probabilities, p_distribution, p_exact,
                      pguessed_exact_perm, pguessed_exact_rec, psuccess_enumerate,
                      psuccess_exact, psuccess_mc)
from .analysis import (VerificationReport, compute_sk, measure_guess_rate, s_bound_for, verify_cost_bound,
                       verify_cost_decrease, verify_pguessed_lemmas)
from .generator import Family, GenSpec, generate

__version__ = "0.1.0"

__all__ = [
    "Assignment", "CnfFormula", "ContractViolation", "DimacsError", "emit_dimacs",
    "is_satisfied_by", "parse_dimacs", "restrict",
    "FixpointResult", "fix_implied", "is_s_implied", "s_implied_literals",
    "EnumerationCapError", "UnsatisfiableError", "dpll_solve", "enumerate_sat",
    "frozen_partition", "is_satisfiable", "satisfying_literals",
    "SolveConfig", "SolveResult", "ppsz_random", "ppsz_run", "solve",
    "cost", "cost_total", "guess_probabilities", "p_distribution", "p_exact",
    "pguessed_exact_perm", "pguessed_exact_rec", "psuccess_enumerate", "psuccess_exact",
    "psuccess_mc",
    "VerificationReport", "compute_sk", "measure_guess_rate", "s_bound_for", "verify_cost_bound",
    "verify_cost_decrease", "verify_pguessed_lemmas",
    "Family", "GenSpec", "generate",
]
