"""The modified PPSZ procedure and a repeated-trial satisfiability driver."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cnf import Assignment, CnfFormula, ContractViolation, is_satisfied_by, restrict_with_dirty, var
from .implication import DEFAULT_S, _fixpoint


class Mode(enum.Enum):
    FORCED = "forced"
    GUESSED = "guessed"


class Outcome(enum.Enum):
    SATISFYING = "satisfying"
    FALSIFIED = "falsified"
    CONTRADICTION = "contradiction"


@dataclass(frozen=True)
class Step:
    var: int
    value: bool
    mode: Mode


@dataclass
class RunTrace:
    steps: list[Step] = field(default_factory=list)
    outcome: Outcome = Outcome.SATISFYING

    @property
    def guessed(self) -> list[int]:
        return [st.var for st in self.steps if st.mode is Mode.GUESSED]

    @property
    def forced(self) -> list[int]:
        return [st.var for st in self.steps if st.mode is Mode.FORCED]


def ppsz_run(f: CnfFormula, beta, pi: Sequence[int], s: int) -> tuple[Assignment, RunTrace]:
    """One run with fixed assignment ``beta`` and variable order ``pi``.

    Before each variable of ``pi`` every s-implied literal is set (forced);
    then the variable, if still present, takes its value from ``beta``
    (guessed).  A run that produces the empty clause or a contradictory
    implication stops early and returns the partial assignment.
    """
    missing = f.variables - set(beta)
    if missing:
        raise ContractViolation(f"beta not total on V(F); missing {sorted(missing)[:5]}")
    if len(pi) != f.n or set(pi) != f.variables:
        raise ContractViolation("pi is not a permutation of V(F)")
    alpha: dict[int, bool] = {}
    trace = RunTrace()
    cur = f
    seeds = None  # None: test every clause (first fixpoint)
    for x in pi:
        res = _fixpoint(cur, s, seeds)
        for lit in res.fixed:
            alpha[var(lit)] = lit > 0
            trace.steps.append(Step(var(lit), lit > 0, Mode.FORCED))
        cur = res.residual
        if res.contradiction:
            trace.outcome = Outcome.CONTRADICTION
            return Assignment(alpha), trace
        if cur.has_empty_clause:
            trace.outcome = Outcome.FALSIFIED
            return Assignment(alpha), trace
        if x in cur.variables:
            b = bool(beta[x])
            cur, seeds = restrict_with_dirty(cur, x if b else -x)
            alpha[x] = b
            trace.steps.append(Step(x, b, Mode.GUESSED))
            if cur.has_empty_clause:
                trace.outcome = Outcome.FALSIFIED
                return Assignment(alpha), trace
        else:
            seeds = frozenset()
    return Assignment(alpha), trace


def sample_beta_pi(f: CnfFormula, rng: np.random.Generator) -> tuple[Assignment, list[int]]:
    order = f.sorted_vars
    bits = rng.integers(0, 2, size=len(order))
    beta = Assignment({v: bool(b) for v, b in zip(order, bits)})
    pi = [order[i] for i in rng.permutation(len(order))]
    return beta, pi


def ppsz_random(f: CnfFormula, s: int, rng: np.random.Generator) -> Assignment | None:
    """Uniform beta and pi, one run; the assignment if it satisfies F."""
    beta, pi = sample_beta_pi(f, rng)
    alpha, trace = ppsz_run(f, beta, pi, s)
    if trace.outcome is Outcome.SATISFYING and is_satisfied_by(f, alpha):
        return alpha
    return None


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent per-trial stream derived from (seed, trial index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveConfig:
    s: int = DEFAULT_S
    repetitions: int | None = None
    epsilon: float = 0.1
    delta: float = 0.01
    seed: int = 0
    max_trials: int = 10_000_000
    workers: int = 1
    chunk: int = 64

    def __post_init__(self):
        if self.repetitions is None:
            if not self.epsilon > 0:
                raise ValueError("epsilon must be positive")
            if not 0 < self.delta < 1:
                raise ValueError("delta must lie in (0, 1)")
        elif self.repetitions < 1:
            raise ValueError("repetitions must be positive")


@dataclass(frozen=True)
class SolveResult:
    satisfiable: bool
    assignment: Assignment | None
    trials: int  # trials run (SAT: index of the winning trial + 1)
    budget: int


def auto_repetitions(f: CnfFormula, epsilon: float, delta: float) -> int:
    """ceil(ln(1/delta) * 2^((S_k + epsilon) n)) with k = max(3, width of F)."""
    from .analysis import compute_sk

    k = max(3, f.k)
    sk = float(compute_sk(k).upper_rational)
    return math.ceil(math.log(1 / delta) * 2.0 ** ((sk + epsilon) * f.n))


def _run_trials(f: CnfFormula, s: int, seed: int, start: int, stop: int):
    for t in range(start, stop):
        alpha = ppsz_random(f, s, trial_rng(seed, t))
        if alpha is not None:
            return t, alpha
    return None


def solve(f: CnfFormula, cfg: SolveConfig = SolveConfig()) -> SolveResult:
    """Repeat randomized runs until one satisfies F or the trial budget R is used.

    The winner is the lowest successful trial index, so results depend only on
    the seed even with ``workers > 1``.
    """
    if cfg.repetitions is not None:
        budget = cfg.repetitions
    else:
        budget = auto_repetitions(f, cfg.epsilon, cfg.delta)
    if budget > cfg.max_trials:
        raise BudgetExceeded(f"{budget} repetitions exceed the trial budget {cfg.max_trials}")
    if f.has_empty_clause:
        return SolveResult(False, None, budget, budget)
    hit = None
    if cfg.workers <= 1:
        hit = _run_trials(f, cfg.s, cfg.seed, 0, budget)
    else:
        with ProcessPoolExecutor(cfg.workers) as pool:
            start = 0
            while start < budget and hit is None:
                bounds = []
                for _ in range(cfg.workers):
                    stop = min(start + cfg.chunk, budget)
                    if start < stop:
                        bounds.append((start, stop))
                    start = stop
                futures = [pool.submit(_run_trials, f, cfg.s, cfg.seed, a, b) for a, b in bounds]
                wins = [r for r in (fu.result() for fu in futures) if r is not None]
                if wins:
                    hit = min(wins, key=lambda w: w[0])
    if hit is None:
        return SolveResult(False, None, budget, budget)
    t, alpha = hit
    if not is_satisfied_by(f, alpha):  # pragma: no cover - guarded by ppsz_random
        raise AssertionError("solver produced a non-satisfying assignment")
    return SolveResult(True, alpha, t + 1, budget)
