"""Formula and assignment model, restriction, and DIMACS I/O.

Literals are signed ints in DIMACS convention: ``v`` is the positive literal
of variable ``v``, ``-v`` its complement.  Formulas are immutable and stored
canonically so they can serve as memoization keys.
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from functools import cached_property

Clause = tuple[int, ...]


class ContractViolation(ValueError):
    """Raised when an operation is called outside its precondition."""


class DimacsError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def var(lit: int) -> int:
    return lit if lit > 0 else -lit


def lit_key(lit: int) -> tuple[int, int]:
    """Sort key: lowest variable first, positive polarity before negative."""
    return (var(lit), 0 if lit > 0 else 1)


def make_clause(lits: Iterable[int]) -> Clause:
    """Canonical clause tuple; duplicate literals collapse.

    Raises ``ValueError`` on a tautology (``x`` and ``-x`` together).
    """
    lset = set(lits)
    for lit in lset:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if -lit in lset:
            raise ValueError(f"tautological clause on variable {var(lit)}")
    return tuple(sorted(lset, key=lit_key))


@dataclass(frozen=True)
class CnfFormula:
    """A clause set over an explicit variable set.

    ``variables`` may contain variables occurring in no clause.
    """

    clauses: frozenset[Clause]
    variables: frozenset[int]

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]],
                     variables: Iterable[int] | None = None) -> CnfFormula:
        cl = frozenset(make_clause(c) for c in clauses)
        mentioned = {var(l) for c in cl for l in c}
        if variables is None:
            vs = frozenset(mentioned)
        else:
            vs = frozenset(variables)
            missing = mentioned - vs
            if missing:
                raise ContractViolation(f"clause variables {sorted(missing)} not in variable set")
        if any(v <= 0 for v in vs):
            raise ContractViolation("variable ids must be positive")
        return cls(cl, vs)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.clauses)

    @cached_property
    def k(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    @cached_property
    def sorted_vars(self) -> tuple[int, ...]:
        return tuple(sorted(self.variables))

    @cached_property
    def sorted_clauses(self) -> tuple[Clause, ...]:
        return tuple(sorted(self.clauses, key=lambda c: (len(c), [lit_key(l) for l in c])))

    @cached_property
    def has_empty_clause(self) -> bool:
        return () in self.clauses

    def restrict(self, lit: int) -> CnfFormula:
        return restrict(self, lit)

    def __repr__(self) -> str:
        body = ", ".join("{" + ",".join(map(str, c)) + "}" for c in self.sorted_clauses)
        return f"CnfFormula(vars={list(self.sorted_vars)}, clauses=[{body}])"


def restrict_with_dirty(f: CnfFormula, lit: int) -> tuple[CnfFormula, frozenset[Clause]]:
    """F^[lit] together with the set of clauses that were truncated."""
    v = var(lit)
    if v not in f.variables:
        raise ContractViolation(f"variable {v} not in formula")
    neg = -lit
    out = set()
    dirty = set()
    for c in f.clauses:
        if lit in c:
            continue
        if neg in c:
            c = tuple(x for x in c if x != neg)
            dirty.add(c)
        out.add(c)
    return CnfFormula(frozenset(out), f.variables - {v}), frozenset(dirty)


def restrict(f: CnfFormula, lit: int) -> CnfFormula:
    """Permanently set ``lit`` true: satisfied clauses vanish, the complement is
    deleted from the rest, and the variable leaves V.  May create the empty clause."""
    return restrict_with_dirty(f, lit)[0]


def restrict_all(f: CnfFormula, lits: Iterable[int]) -> CnfFormula:
    for lit in lits:
        f = restrict(f, lit)
    return f


class Assignment(Mapping[int, bool]):
    """Partial assignment, viewable as a map var -> bool or as a literal set."""

    __slots__ = ("_map", "_lits")

    def __init__(self, bindings: Mapping[int, bool] | Iterable[tuple[int, bool]] = ()):
        m = dict(bindings)
        for v in m:
            if v <= 0:
                raise ContractViolation("variable ids must be positive")
        self._map = {v: bool(b) for v, b in m.items()}
        self._lits = frozenset(v if b else -v for v, b in self._map.items())

    @classmethod
    def from_literals(cls, lits: Iterable[int]) -> Assignment:
        m: dict[int, bool] = {}
        for lit in lits:
            v = var(lit)
            if v in m and m[v] != (lit > 0):
                raise ContractViolation(f"conflicting literals on variable {v}")
            m[v] = lit > 0
        return cls(m)

    @classmethod
    def from_mask(cls, variables: Iterable[int], mask: int) -> Assignment:
        """Bit i of ``mask`` is the value of the i-th variable in ``variables``."""
        return cls({v: bool((mask >> i) & 1) for i, v in enumerate(variables)})

    @property
    def literals(self) -> frozenset[int]:
        return self._lits

    def satisfies(self, lit: int) -> bool:
        return lit in self._lits

    def restrict_to(self, variables: Iterable[int]) -> Assignment:
        return Assignment({v: self._map[v] for v in variables if v in self._map})

    def to_mask(self, variables: Iterable[int]) -> int:
        mask = 0
        for i, v in enumerate(variables):
            if self._map[v]:
                mask |= 1 << i
        return mask

    def __getitem__(self, v: int) -> bool:
        return self._map[v]

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._map))

    def __len__(self) -> int:
        return len(self._map)

    def __hash__(self) -> int:
        return hash(self._lits)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Assignment):
            return self._lits == other._lits
        return NotImplemented

    def __repr__(self) -> str:
        return "Assignment({" + ", ".join(f"{v}: {int(self._map[v])}" for v in self) + "})"


def is_satisfied_by(f: CnfFormula, alpha: Mapping[int, bool]) -> bool:
    missing = [v for v in f.variables if v not in alpha]
    if missing:
        raise ContractViolation(f"assignment not total on V(F); missing {sorted(missing)[:5]}")
    return all(any(alpha[var(l)] == (l > 0) for l in c) for c in f.clauses)


def parse_dimacs(text: str | bytes) -> CnfFormula:
    """Parse DIMACS CNF.  V(F) is {1..n} from the header, clauses are deduplicated."""
    if isinstance(text, bytes):
        text = text.decode()
    n = None
    declared_m = 0
    clauses: list[Clause] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if n is not None:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if n < 0 or declared_m < 0:
                raise DimacsError(f"malformed header {line!r}", lineno)
            continue
        if n is None:
            raise DimacsError("clause data before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad token {tok!r}", lineno) from None
            if lit == 0:
                try:
                    clauses.append(make_clause(current))
                except ValueError as e:
                    raise DimacsError(str(e), lineno) from None
                current = []
            elif var(lit) > n:
                raise DimacsError(f"literal {lit} out of range 1..{n}", lineno)
            else:
                current.append(lit)
    if n is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        try:
            clauses.append(make_clause(current))
        except ValueError as e:
            raise DimacsError(str(e)) from None
    return CnfFormula(frozenset(clauses), frozenset(range(1, n + 1)))


def emit_dimacs(f: CnfFormula) -> str:
    """DIMACS text; the header's n is the largest variable id in V(F)."""
    n = max(f.variables, default=0)
    lines = [f"p cnf {n} {f.m}"]
    for c in f.sorted_clauses:
        lines.append(" ".join(map(str, c + (0,))))
    return "\n".join(lines) + "\n"
