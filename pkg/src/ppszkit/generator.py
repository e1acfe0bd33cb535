"""Random k-CNF instances: uniform, planted, and unique-SAT."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from .cnf import Assignment, CnfFormula, emit_dimacs, make_clause
from .oracle import ENUM_CAP, sat_masks


class Family(str, enum.Enum):
    UNIFORM = "uniform"
    PLANTED = "planted"
    UNIQUE = "unique"


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: int
    k: int = 3
    family: Family = Family.UNIFORM
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.n < self.k:
            raise ValueError(f"need n >= k (n={self.n}, k={self.k})")
        if self.m < 0:
            raise ValueError("m must be non-negative")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _draw_clause(n: int, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    vs = rng.choice(n, size=k, replace=False) + 1
    signs = rng.integers(0, 2, size=k)
    return make_clause(int(v) if b else -int(v) for v, b in zip(vs, signs))


def _fill(spec: GenSpec, rng: np.random.Generator, accept, limit: int) -> CnfFormula:
    if spec.m > limit:
        raise ValueError(f"only {limit} distinct clauses exist, asked for {spec.m}")
    clauses: set[tuple[int, ...]] = set()
    while len(clauses) < spec.m:
        c = _draw_clause(spec.n, spec.k, rng)
        if accept(c):
            clauses.add(c)
    return CnfFormula(frozenset(clauses), frozenset(range(1, spec.n + 1)))


def gen_uniform(spec: GenSpec, rng: np.random.Generator | None = None) -> CnfFormula:
    """m distinct width-k clauses, each uniform over variable k-sets and signs."""
    rng = spec.rng() if rng is None else rng
    return _fill(spec, rng, lambda c: True, math.comb(spec.n, spec.k) * 2 ** spec.k)


def gen_planted(spec: GenSpec, rng: np.random.Generator | None = None) -> tuple[CnfFormula, Assignment]:
    """Hidden uniform model; clauses it falsifies are redrawn."""
    rng = spec.rng() if rng is None else rng
    bits = rng.integers(0, 2, size=spec.n)
    alpha = Assignment({v + 1: bool(b) for v, b in enumerate(bits)})
    f = _fill(spec, rng, lambda c: any(alpha.satisfies(l) for l in c),
              math.comb(spec.n, spec.k) * (2 ** spec.k - 1))
    return f, alpha


def gen_unique_sat(spec: GenSpec, rng: np.random.Generator | None = None,
                   max_attempts: int = 200) -> tuple[CnfFormula, Assignment] | None:
    """Planted instances, resampled until exactly one model remains; None when exhausted."""
    if spec.n > ENUM_CAP:
        raise ValueError(f"n={spec.n} above enumeration cap {ENUM_CAP}")
    rng = spec.rng() if rng is None else rng
    for _ in range(max_attempts):
        f, alpha = gen_planted(spec, rng)
        if len(sat_masks(f)) == 1:
            return f, alpha
    return None


def generate(spec: GenSpec, max_attempts: int = 200) -> tuple[CnfFormula, Assignment | None]:
    if spec.family is Family.UNIFORM:
        return gen_uniform(spec), None
    if spec.family is Family.PLANTED:
        return gen_planted(spec)
    res = gen_unique_sat(spec, max_attempts=max_attempts)
    if res is None:
        raise RuntimeError(f"no unique-SAT instance within {max_attempts} attempts")
    return res


def sidecar(spec: GenSpec, model: Assignment | None) -> dict:
    out = {"family": spec.family.value, "seed": spec.seed, "n": spec.n, "m": spec.m, "k": spec.k}
    if model is not None:
        out["planted_model"] = [v if model[v] else -v for v in model]
    return out


def write_instance(path_stem: str, spec: GenSpec, f: CnfFormula, model: Assignment | None) -> None:
    """Write ``<stem>.cnf`` and the ``<stem>.json`` sidecar."""
    with open(path_stem + ".cnf", "w") as fh:
        fh.write(emit_dimacs(f))
    with open(path_stem + ".json", "w") as fh:
        json.dump(sidecar(spec, model), fh, sort_keys=True)
        fh.write("\n")
