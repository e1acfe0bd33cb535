"""Hot inner loops: model enumeration and bounded-subset implication.

Each kernel exists as a numba ``@njit`` function and as a numpy/Python
fallback.  ``PPSZKIT_BACKEND=numpy`` forces the fallback; the default is
numba when it imports.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb
except ImportError:  # pragma: no cover
    nb = None

_requested = os.environ.get("PPSZKIT_BACKEND", "numba").lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"PPSZKIT_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if (_requested == "numba" and nb is not None) else "numpy"

# model enumeration works on uint64 masks
MAX_MASK_VARS = 62


# ---------------------------------------------------------------- models

def _sat_masks_np(pos: np.ndarray, neg: np.ndarray, n: int, chunk: int = 1 << 16) -> np.ndarray:
    total = 1 << n
    full = np.uint64(total - 1)
    out = []
    for start in range(0, total, chunk):
        a = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        ok = np.ones(a.shape, dtype=bool)
        na = ~a & full
        for p, q in zip(pos, neg):
            ok &= ((a & p) | (na & q)) != 0
        out.append(a[ok])
    return np.concatenate(out) if out else np.zeros(0, np.uint64)


def _sat_masks_nb_impl(pos, neg, n):
    total = np.uint64(1) << np.uint64(n)
    full = total - np.uint64(1)
    m = pos.shape[0]
    hit = np.zeros(np.int64(total), dtype=np.bool_)
    count = 0
    for ai in range(np.int64(total)):
        a = np.uint64(ai)
        na = ~a & full
        ok = True
        for j in range(m):
            if (a & pos[j]) == 0 and (na & neg[j]) == 0:
                ok = False
                break
        if ok:
            hit[ai] = True
            count += 1
    out = np.empty(count, dtype=np.uint64)
    c = 0
    for ai in range(np.int64(total)):
        if hit[ai]:
            out[c] = np.uint64(ai)
            c += 1
    return out


# ---------------------------------------------------------- implication
#
# Connected clause subsets of size <= s that contain at least one seed clause
# are enumerated exactly once each (ESU with the minimum seed as root).  For
# every subset the models over its own variables are enumerated: no model
# means the subset is unsatisfiable, otherwise bits set in every model (resp.
# no model) are implied positive (resp. negative) literals.

def _eval_subset_impl(sub, depth, lits, width, local, tmpvars, pm, nm, pos_out, neg_out):
    t = 0
    for i in range(depth):
        c = sub[i]
        for j in range(width[c]):
            v = abs(lits[c, j]) - 1
            if local[v] < 0:
                local[v] = t
                tmpvars[t] = v
                t += 1
    for i in range(depth):
        c = sub[i]
        pm[i] = 0
        nm[i] = 0
        for j in range(width[c]):
            lit = lits[c, j]
            b = np.int64(1) << local[abs(lit) - 1]
            if lit > 0:
                pm[i] |= b
            else:
                nm[i] |= b
    full = (np.int64(1) << t) - 1
    andm = full
    orm = np.int64(0)
    found = False
    for a in range(np.int64(1) << t):
        ok = True
        for i in range(depth):
            if (a & pm[i]) == 0 and ((~a) & nm[i]) == 0:
                ok = False
                break
        if ok:
            found = True
            andm &= a
            orm |= a
            if andm == 0 and orm == full:
                break
    for i in range(t):
        v = tmpvars[i]
        local[v] = -1
        if found:
            if (andm >> i) & 1:
                pos_out[v] = True
            if not (orm >> i) & 1:
                neg_out[v] = True
    return not found


def _neighbors_impl(w, lits, width, occ_ptr, occ_idx, stamp, stamp_ctr, buf):
    stamp_ctr[0] += 1
    st = stamp_ctr[0]
    stamp[w] = st
    cnt = 0
    for j in range(width[w]):
        v = abs(lits[w, j]) - 1
        for p in range(occ_ptr[v], occ_ptr[v + 1]):
            u = occ_idx[p]
            if stamp[u] != st:
                stamp[u] = st
                buf[cnt] = u
                cnt += 1
    return cnt


def _implied_impl(lits, width, occ_ptr, occ_idx, seeds, s, nvars):
    m = lits.shape[0]
    pos_out = np.zeros(nvars, dtype=np.bool_)
    neg_out = np.zeros(nvars, dtype=np.bool_)
    if s <= 0 or m == 0:
        return pos_out, neg_out, False
    is_seed = np.zeros(m, dtype=np.bool_)
    for i in range(seeds.shape[0]):
        is_seed[seeds[i]] = True
    in_sub = np.zeros(m, dtype=np.bool_)
    nbr_cnt = np.zeros(m, dtype=np.int64)
    stamp = np.zeros(m, dtype=np.int64)
    stamp_ctr = np.zeros(1, dtype=np.int64)
    local = -np.ones(nvars, dtype=np.int64)
    tmpvars = np.zeros(nvars, dtype=np.int64)
    pm = np.zeros(s, dtype=np.int64)
    nm = np.zeros(s, dtype=np.int64)
    sub = np.zeros(s, dtype=np.int64)
    buf = np.empty(m, dtype=np.int64)
    # ext[d, :ext_len[d]] is the extension set while the subgraph has d members
    ext = np.empty((s + 1, m), dtype=np.int64)
    ext_len = np.zeros(s + 1, dtype=np.int64)
    for r in range(seeds.shape[0]):
        root = seeds[r]
        cnt = _neighbors(root, lits, width, occ_ptr, occ_idx, stamp, stamp_ctr, buf)
        e = 0
        for i in range(cnt):
            u = buf[i]
            if is_seed[u] and u < root:
                continue
            ext[1, e] = u
            e += 1
        ext_len[1] = e
        sub[0] = root
        in_sub[root] = True
        for i in range(cnt):
            nbr_cnt[buf[i]] += 1
        if _eval_subset(sub, 1, lits, width, local, tmpvars, pm, nm, pos_out, neg_out):
            return pos_out, neg_out, True
        d = 1
        while True:
            if d == s or ext_len[d] == 0:
                w = sub[d - 1]
                cnt = _neighbors(w, lits, width, occ_ptr, occ_idx, stamp, stamp_ctr, buf)
                for i in range(cnt):
                    nbr_cnt[buf[i]] -= 1
                in_sub[w] = False
                if d == 1:
                    break
                d -= 1
                continue
            ext_len[d] -= 1
            nlen = ext_len[d]
            w = ext[d, nlen]
            cnt = _neighbors(w, lits, width, occ_ptr, occ_idx, stamp, stamp_ctr, buf)
            for i in range(nlen):
                ext[d + 1, i] = ext[d, i]
            e = nlen
            for i in range(cnt):
                u = buf[i]
                if in_sub[u] or nbr_cnt[u] > 0:
                    continue
                if is_seed[u] and u < root:
                    continue
                ext[d + 1, e] = u
                e += 1
            ext_len[d + 1] = e
            sub[d] = w
            in_sub[w] = True
            for i in range(cnt):
                nbr_cnt[buf[i]] += 1
            d += 1
            if _eval_subset(sub, d, lits, width, local, tmpvars, pm, nm, pos_out, neg_out):
                return pos_out, neg_out, True
    return pos_out, neg_out, False


# --------------------------------------------------------- mask engine
#
# Formulas over at most 62 variables as two int64 arrays (positive / negative
# literal masks per clause) plus a variable mask.  One call restricts by a
# literal and runs the implication fixpoint; output clauses are deduplicated
# and sorted, so (varmask, pos, neg) is canonical.

def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def _lowbit_index(x):
    i = 0
    while not (x >> i) & 1:
        i += 1
    return i


def _as_lits(pos, neg, alive):
    m = 0
    w = 1
    for i in range(pos.shape[0]):
        if alive[i]:
            m += 1
            c = _popcount(pos[i] | neg[i])
            if c > w:
                w = c
    lits = np.zeros((m, w), dtype=np.int64)
    width = np.zeros(m, dtype=np.int64)
    src = np.zeros(m, dtype=np.int64)
    cnt = np.zeros(64, dtype=np.int64)
    r = 0
    for i in range(pos.shape[0]):
        if not alive[i]:
            continue
        src[r] = i
        j = 0
        both = pos[i] | neg[i]
        for b in range(63):
            if (both >> b) & 1:
                lits[r, j] = b + 1 if (pos[i] >> b) & 1 else -(b + 1)
                cnt[b] += 1
                j += 1
        width[r] = j
        r += 1
    occ_ptr = np.zeros(65, dtype=np.int64)
    for b in range(64):
        occ_ptr[b + 1] = occ_ptr[b] + cnt[b]
    fill = occ_ptr[:64].copy()
    occ_idx = np.zeros(occ_ptr[64], dtype=np.int64)
    for r2 in range(m):
        for j in range(width[r2]):
            b = abs(lits[r2, j]) - 1
            occ_idx[fill[b]] = r2
            fill[b] += 1
    return lits, width, occ_ptr, occ_idx, src


def _restrict_masks(pos, neg, alive, dirty, b, positive):
    bit = np.int64(1) << b
    for i in range(pos.shape[0]):
        if not alive[i]:
            continue
        if positive:
            if pos[i] & bit:
                alive[i] = False
            elif neg[i] & bit:
                neg[i] &= ~bit
                dirty[i] = True
        else:
            if neg[i] & bit:
                alive[i] = False
            elif pos[i] & bit:
                pos[i] &= ~bit
                dirty[i] = True


def _step_impl(pos_in, neg_in, varmask, lit, s):
    pos = pos_in.copy()
    neg = neg_in.copy()
    m = pos.shape[0]
    alive = np.ones(m, dtype=np.bool_)
    dirty = np.zeros(m, dtype=np.bool_)
    if lit != 0:
        b = abs(lit) - 1
        varmask &= ~(np.int64(1) << b)
        _restrict_masks(pos, neg, alive, dirty, b, lit > 0)
    else:
        for i in range(m):
            dirty[i] = True
    fixed = np.zeros(64, dtype=np.int64)
    nfixed = 0
    imp_p = np.int64(0)
    imp_n = np.int64(0)
    contradiction = False
    while True:
        if s > 0:
            nseed = 0
            for i in range(m):
                if alive[i] and dirty[i]:
                    nseed += 1
            if nseed > 0:
                lits, width, occ_ptr, occ_idx, src = _as_lits(pos, neg, alive)
                seeds = np.zeros(nseed, dtype=np.int64)
                q = 0
                for r in range(src.shape[0]):
                    if dirty[src[r]]:
                        seeds[q] = r
                        q += 1
                pflag, nflag, unsat = _implied_kernel_nb(lits, width, occ_ptr, occ_idx, seeds, s, 64)
                if unsat and varmask != 0:
                    contradiction = True
                    break
                for b in range(63):
                    if pflag[b]:
                        imp_p |= np.int64(1) << b
                    if nflag[b]:
                        imp_n |= np.int64(1) << b
        for i in range(m):
            dirty[i] = False
        if imp_p & imp_n:
            contradiction = True
            break
        cand = imp_p | imp_n
        if cand == 0:
            break
        b = _lowbit_index(cand)
        bit = np.int64(1) << b
        positive = (imp_p & bit) != 0
        imp_p &= ~bit
        imp_n &= ~bit
        varmask &= ~bit
        fixed[nfixed] = b + 1 if positive else -(b + 1)
        nfixed += 1
        _restrict_masks(pos, neg, alive, dirty, b, positive)
    # canonical: distinct clauses sorted by (pos, neg)
    k = 0
    for i in range(m):
        if alive[i]:
            k += 1
    op = np.empty(k, dtype=np.int64)
    on = np.empty(k, dtype=np.int64)
    r = 0
    for i in range(m):
        if alive[i]:
            j = r
            while j > 0 and (op[j - 1] > pos[i] or (op[j - 1] == pos[i] and on[j - 1] > neg[i])):
                op[j] = op[j - 1]
                on[j] = on[j - 1]
                j -= 1
            op[j] = pos[i]
            on[j] = neg[i]
            r += 1
    u = 0
    for i in range(k):
        if u == 0 or op[i] != op[u - 1] or on[i] != on[u - 1]:
            op[u] = op[i]
            on[u] = on[i]
            u += 1
    return op[:u].copy(), on[:u].copy(), varmask, fixed[:nfixed].copy(), contradiction


def _step_np(pos_in, neg_in, varmask, lit, s):
    pos = [int(x) for x in pos_in]
    neg = [int(x) for x in neg_in]
    alive = [True] * len(pos)
    dirty = [lit == 0] * len(pos)
    varmask = int(varmask)

    def restrict(b, positive):
        bit = 1 << b
        for i in range(len(pos)):
            if not alive[i]:
                continue
            same, other = (pos, neg) if positive else (neg, pos)
            if same[i] & bit:
                alive[i] = False
            elif other[i] & bit:
                other[i] &= ~bit
                dirty[i] = True

    if lit != 0:
        varmask &= ~(1 << (abs(lit) - 1))
        restrict(abs(lit) - 1, lit > 0)
    fixed = []
    imp_p = imp_n = 0
    contradiction = False
    while True:
        if s > 0 and any(a and d for a, d in zip(alive, dirty)):
            rows = [i for i in range(len(pos)) if alive[i]]
            cl = [[b + 1 if (pos[i] >> b) & 1 else -(b + 1) for b in range(63) if ((pos[i] | neg[i]) >> b) & 1]
                  for i in rows]
            w = max([len(c) for c in cl] + [1])
            lits = np.zeros((len(cl), w), dtype=np.int64)
            width = np.array([len(c) for c in cl], dtype=np.int64)
            occ = [[] for _ in range(64)]
            for r, c in enumerate(cl):
                lits[r, :len(c)] = c
                for l in c:
                    occ[abs(l) - 1].append(r)
            occ_ptr = np.concatenate([[0], np.cumsum([len(o) for o in occ])]).astype(np.int64)
            occ_idx = np.array([r for o in occ for r in o], dtype=np.int64)
            seeds = np.array([r for r, i in enumerate(rows) if dirty[i]], dtype=np.int64)
            pflag, nflag, unsat = _implied_np(lits, width, occ_ptr, occ_idx, seeds, s, 64)
            if unsat and varmask:
                contradiction = True
                break
            for b in np.flatnonzero(pflag):
                imp_p |= 1 << int(b)
            for b in np.flatnonzero(nflag):
                imp_n |= 1 << int(b)
        dirty = [False] * len(pos)
        if imp_p & imp_n:
            contradiction = True
            break
        cand = imp_p | imp_n
        if not cand:
            break
        b = (cand & -cand).bit_length() - 1
        bit = 1 << b
        positive = bool(imp_p & bit)
        imp_p &= ~bit
        imp_n &= ~bit
        varmask &= ~bit
        fixed.append(b + 1 if positive else -(b + 1))
        restrict(b, positive)
    out = sorted({(pos[i], neg[i]) for i in range(len(pos)) if alive[i]})
    return (np.array([p for p, _ in out], dtype=np.int64), np.array([q for _, q in out], dtype=np.int64),
            varmask, np.array(fixed, dtype=np.int64), contradiction)


# ------------------------------------------------------ numpy fallbacks

def _subset_models_np(clauses: list[list[int]]):
    """(unsat, {var: implied value}) for one clause subset, vectorized over models."""
    vs = sorted({abs(l) for c in clauses for l in c})
    t = len(vs)
    if t == 0:
        return (len(clauses) > 0), {}
    idx = {v: i for i, v in enumerate(vs)}
    a = np.arange(1 << t, dtype=np.int64)
    ok = np.ones(a.shape, dtype=bool)
    for c in clauses:
        sat = np.zeros(a.shape, dtype=bool)
        for l in c:
            bit = (a >> idx[abs(l)]) & 1
            sat |= (bit == 1) if l > 0 else (bit == 0)
        ok &= sat
    models = a[ok]
    if models.size == 0:
        return True, {}
    andm = int(np.bitwise_and.reduce(models))
    orm = int(np.bitwise_or.reduce(models))
    out = {}
    for v, i in idx.items():
        if (andm >> i) & 1:
            out[v] = True
        elif not (orm >> i) & 1:
            out[v] = False
    return False, out


def _implied_np(lits, width, occ_ptr, occ_idx, seeds, s, nvars):
    m = lits.shape[0]
    pos_out = np.zeros(nvars, dtype=bool)
    neg_out = np.zeros(nvars, dtype=bool)
    if s <= 0 or m == 0:
        return pos_out, neg_out, False
    cl = [[int(x) for x in lits[c, : width[c]]] for c in range(m)]
    nbrs = []
    for c in range(m):
        nb_c = set()
        for l in cl[c]:
            v = abs(l) - 1
            nb_c.update(int(u) for u in occ_idx[occ_ptr[v]:occ_ptr[v + 1]])
        nb_c.discard(c)
        nbrs.append(nb_c)
    seed_set = {int(x) for x in seeds}

    def evaluate(sub):
        unsat, imp = _subset_models_np([cl[c] for c in sub])
        if unsat:
            return True
        for v, val in imp.items():
            (pos_out if val else neg_out)[v - 1] = True
        return False

    def extend(sub, ext, root):
        if evaluate(sub):
            return True
        if len(sub) == s:
            return False
        ext = list(ext)
        covered = set(sub).union(*(nbrs[c] for c in sub))
        while ext:
            w = ext.pop()
            new = [u for u in nbrs[w] if u not in covered and (u not in seed_set or u > root)]
            if extend(sub + [w], ext + new, root):
                return True
        return False

    for root in sorted(seed_set):
        ext = [u for u in nbrs[root] if u not in seed_set or u > root]
        if extend([root], ext, root):
            return pos_out, neg_out, True
    return pos_out, neg_out, False


if BACKEND == "numba":
    _jit = nb.njit(cache=True)
    _eval_subset = _jit(_eval_subset_impl)
    _neighbors = _jit(_neighbors_impl)
    _implied_kernel = _implied_kernel_nb = _jit(_implied_impl)
    _sat_masks_kernel = _jit(_sat_masks_nb_impl)
    _popcount = _jit(_popcount)
    _lowbit_index = _jit(_lowbit_index)
    _as_lits = _jit(_as_lits)
    _restrict_masks = _jit(_restrict_masks)
    _step_kernel = _jit(_step_impl)
else:
    _implied_kernel = _implied_np
    _sat_masks_kernel = None
    _step_kernel = _step_np


def sat_masks(pos: np.ndarray, neg: np.ndarray, n: int) -> np.ndarray:
    """All models as uint64 masks over n variables; clause j is (pos[j], neg[j])."""
    if n > MAX_MASK_VARS:
        raise ValueError(f"mask enumeration supports at most {MAX_MASK_VARS} variables")
    pos = np.ascontiguousarray(pos, dtype=np.uint64)
    neg = np.ascontiguousarray(neg, dtype=np.uint64)
    if BACKEND == "numba":
        return _sat_masks_kernel(pos, neg, n)
    return _sat_masks_np(pos, neg, n)


def implied_literals(lits: np.ndarray, width: np.ndarray, occ_ptr: np.ndarray,
                     occ_idx: np.ndarray, seeds: np.ndarray, s: int, nvars: int):
    """Literals implied by connected subsets of <= s clauses touching a seed.

    Variables are 1-based in ``lits``.  Returns ``(pos, neg, unsat)``; when
    ``unsat`` is true some subset has no model and the flag arrays are partial.
    """
    return _implied_kernel(lits, width, occ_ptr, occ_idx, seeds, int(s), int(nvars))


def step(pos: np.ndarray, neg: np.ndarray, varmask: int, lit: int, s: int):
    """Restrict a mask formula by ``lit`` (0: none) and close under s-implication.

    Literals are ``+(bit+1)`` / ``-(bit+1)``.  Returns canonical
    ``(pos, neg, varmask, fixed, contradiction)``.
    """
    return _step_kernel(pos, neg, np.int64(varmask), np.int64(lit), np.int64(s))
