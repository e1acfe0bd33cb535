"""Compiled restriction + fixpoint over bitmask formulas.

Used by the exact recursions in :mod:`ppszkit.measure`, which visit many
thousands of residual formulas.  Variables of a root formula are mapped to
bit positions in sorted order, which matches :class:`ppszkit.oracle.SolutionSet`.
The :class:`CnfFormula` route in :mod:`ppszkit.implication` is the reference
and the test suite checks that both agree.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .cnf import CnfFormula, ContractViolation


class MaskFormula:
    """Canonical (varmask, clause masks) form; hashable and comparable."""

    __slots__ = ("varmask", "pos", "neg", "_key", "_hash")

    def __init__(self, varmask: int, pos: np.ndarray, neg: np.ndarray):
        self.varmask = int(varmask)
        self.pos = pos
        self.neg = neg
        self._key = (self.varmask, pos.tobytes(), neg.tobytes())
        self._hash = hash(self._key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, MaskFormula) and self._key == other._key

    @property
    def n(self) -> int:
        return self.varmask.bit_count()

    @property
    def m(self) -> int:
        return len(self.pos)

    @property
    def has_empty_clause(self) -> bool:
        return bool(np.any((self.pos | self.neg) == 0))


class Engine:
    """Memoised restriction + s-implication closure relative to one root formula."""

    def __init__(self, root: CnfFormula, s: int):
        if root.n > _kernels.MAX_MASK_VARS:
            raise ContractViolation(f"engine supports at most {_kernels.MAX_MASK_VARS} variables")
        self.root = root
        self.s = s
        self.order = root.sorted_vars
        self.index = {v: i for i, v in enumerate(self.order)}
        self._steps: dict = {}

    # conversions
    def encode(self, f: CnfFormula) -> MaskFormula:
        pos, neg, vm = [], [], 0
        for v in f.variables:
            vm |= 1 << self.index[v]
        rows = []
        for c in f.clauses:
            p = q = 0
            for lit in c:
                if lit > 0:
                    p |= 1 << self.index[lit]
                else:
                    q |= 1 << self.index[-lit]
            rows.append((p, q))
        rows.sort()
        pos = np.array([r[0] for r in rows], dtype=np.int64)
        neg = np.array([r[1] for r in rows], dtype=np.int64)
        return MaskFormula(vm, pos, neg)

    def decode(self, mf: MaskFormula) -> CnfFormula:
        clauses = []
        for p, q in zip(mf.pos.tolist(), mf.neg.tolist()):
            c = [self.order[b] for b in range(63) if (p >> b) & 1]
            c += [-self.order[b] for b in range(63) if (q >> b) & 1]
            clauses.append(c)
        variables = [self.order[b] for b in range(63) if (mf.varmask >> b) & 1]
        return CnfFormula.from_clauses(clauses, variables)

    def to_lit(self, code: int) -> int:
        """Engine literal code to a signed variable id."""
        v = self.order[abs(code) - 1]
        return v if code > 0 else -v

    def to_code(self, lit: int) -> int:
        b = self.index[abs(lit)] + 1
        return b if lit > 0 else -b

    # operations
    def _run(self, mf: MaskFormula, code: int):
        pos, neg, vm, fixed, contra = _kernels.step(mf.pos, mf.neg, mf.varmask, code, self.s)
        return MaskFormula(vm, pos, neg), tuple(int(x) for x in fixed), bool(contra)

    def fix(self, mf: MaskFormula):
        """Closure of ``mf`` itself: ``(residual, fixed codes, contradiction)``."""
        key = (mf, 0)
        hit = self._steps.get(key)
        if hit is None:
            hit = self._steps[key] = self._run(mf, 0)
        return hit

    def step(self, mf: MaskFormula, code: int):
        """Assign literal ``code`` in ``mf`` (assumed closed) then close again."""
        key = (mf, code)
        hit = self._steps.get(key)
        if hit is None:
            hit = self._steps[key] = self._run(mf, code)
        return hit
