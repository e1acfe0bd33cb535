"""Command-line entry point: ``ppszkit {solve,analyze,verify,sk-table,experiment}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import secrets
import sys
import time
from fractions import Fraction
from importlib import resources

import mpmath
import numpy as np

from .analysis import (compute_sk, geq_pow2_neg, measure_guess_rate, pow2_neg_bounds, s_bound_for,
                       verify_cost_bound, verify_cost_decrease, verify_pguessed_lemmas)
from .cnf import CnfFormula, ContractViolation, DimacsError, parse_dimacs
from .generator import Family, GenSpec, generate
from .implication import fix_implied
from .measure import PERM_CAP, _Context, cost_vector, psuccess_exact, psuccess_mc
from .oracle import ENUM_CAP, EnumerationCapError, UnsatisfiableError
from .ppsz import BudgetExceeded, SolveConfig, solve

EXIT_OK, EXIT_ERROR, EXIT_FAILED, EXIT_SAT, EXIT_UNSAT = 0, 1, 2, 10, 20


class CliError(Exception):
    pass


# ------------------------------------------------------------- helpers

def load_schema(name: str) -> dict:
    """JSON schema shipped for a command's output (``report`` for a single report)."""
    return json.loads(resources.files("ppszkit").joinpath("schemas", f"{name}.schema.json").read_text())


def fixture_dir() -> str:
    return str(resources.files("ppszkit").joinpath("fixtures"))


def _read_formula(path: str) -> CnfFormula:
    if path == "-":
        return parse_dimacs(sys.stdin.read())
    with open(path, "rb") as fh:
        return parse_dimacs(fh.read())


def _collect_inputs(paths: list[str]) -> list[str]:
    out = []
    for p in paths:
        if os.path.isdir(p):
            out += sorted(os.path.join(p, name) for name in os.listdir(p) if name.endswith(".cnf"))
        else:
            out.append(p)
    return out


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    if args.deterministic:
        raise CliError("--deterministic requires --seed")
    seed = secrets.randbits(63)
    print(f"c seed {seed}", file=sys.stderr)
    return seed


def _frac(x: Fraction) -> dict:
    return {"exact": f"{x.numerator}/{x.denominator}", "value": float(x)}


def _emit(args, payload: dict, human: str, started: float) -> None:
    if args.format == "json":
        payload = dict(payload)
        if not args.deterministic:
            payload["elapsed_s"] = round(time.perf_counter() - started, 6)
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(human)


def _batch_formulas(args, seed: int):
    """(name, formula) pairs from input paths or a generated planted batch."""
    if args.inputs:
        for path in _collect_inputs(args.inputs):
            yield path, _read_formula(path)
        return
    rng = np.random.default_rng(seed)
    for i in range(args.random):
        n = int(rng.integers(max(3, args.k), args.n_max + 1))
        limit = math.comb(n, args.k) * (2 ** args.k - 1)
        m = int(rng.integers(1, min(args.m_max, limit) + 1))
        spec = GenSpec(n, m, args.k, Family.PLANTED, int(rng.integers(2 ** 63)))
        f, _ = generate(spec)
        yield f"planted:n={n},m={m},k={args.k},seed={spec.seed}", f


# ------------------------------------------------------------ commands

def cmd_solve(args) -> int:
    started = time.perf_counter()
    f = _read_formula(args.input)
    seed = _seed(args)
    if args.repetitions is not None:
        cfg = SolveConfig(s=args.s, repetitions=args.repetitions, seed=seed, workers=args.workers)
    else:
        cfg = SolveConfig(s=args.s, epsilon=args.epsilon, delta=args.delta, seed=seed,
                          workers=args.workers)
    res = solve(f, cfg)
    payload = {"command": "solve", "s": args.s, "seed": seed, "trials": res.trials,
               "budget": res.budget, "status": "SAT" if res.satisfiable else "UNSAT"}
    lines = [f"c s={args.s} seed={seed} budget={res.budget} trials={res.trials}"]
    if res.satisfiable:
        model = [v if res.assignment[v] else -v for v in f.sorted_vars]
        payload["model"] = model
        lines.append("s SATISFIABLE")
        for i in range(0, len(model), 10):
            lines.append("v " + " ".join(map(str, model[i:i + 10])))
        lines.append("v 0")
    else:
        lines.append(f"c no satisfying assignment in {res.budget} trials")
        lines.append("s UNSATISFIABLE")
    _emit(args, payload, "\n".join(lines) + "\n", started)
    return EXIT_SAT if res.satisfiable else EXIT_UNSAT


def cmd_analyze(args) -> int:
    started = time.perf_counter()
    f = _read_formula(args.input)
    if f.n > args.cap_enum:
        raise EnumerationCapError(f"n(F)={f.n} exceeds enumeration cap {args.cap_enum}")
    ctx = _Context(f, args.s, args.cap_enum)
    if len(ctx.rows) == 0:
        raise UnsatisfiableError("formula is unsatisfiable")
    sb = s_bound_for(f)
    frozen = ctx.frozen_mask()
    n_c = frozen.bit_count()
    n_n = f.n - n_c
    sl = len(ctx.sl())
    costs = cost_vector(f, args.s, sb, args.cap_enum, ctx)
    c = sum(costs.values(), Fraction(0))
    p = psuccess_exact(f, args.s, args.cap_enum, ctx)
    lo, hi = pow2_neg_bounds(c)
    ok, _ = geq_pow2_neg(p, c)
    payload = {
        "command": "analyze", "s": args.s, "n": f.n, "m": f.m, "k": f.k,
        "nN": n_n, "nC": n_c, "SL": sl, "s_bound": _frac(sb),
        "cost": {str(v): _frac(costs[v]) for v in f.sorted_vars},
        "cost_total": _frac(c), "psuccess": _frac(p),
        "pow2_neg_cost": {"lower": float(lo), "upper": float(hi)},
        "margin": float(p - hi), "bound_holds": ok,
    }
    lines = [f"n={f.n} m={f.m} k={f.k} s={args.s}",
             f"nN={n_n} nC={n_c} |SL|={sl}",
             f"S upper bound = {sb} ({float(sb):.12f})"]
    for v in f.sorted_vars:
        tag = "frozen" if frozen & ctx.sols.bit(v) else "non-frozen"
        lines.append(f"  c(x{v}) = {costs[v]} ({float(costs[v]):.6f}) {tag}")
    lines += [f"c(F) = {c} ({float(c):.6f})",
              f"psuccess = {p} ({float(p):.6f})",
              f"2^-c(F) in [{float(lo):.6f}, {float(hi):.6f}]",
              f"margin = {float(p - hi):.6f} ({'holds' if ok else 'VIOLATED'})"]
    _emit(args, payload, "\n".join(lines) + "\n", started)
    return EXIT_OK


def _broken_psuccess(f, s, cap, ctx):
    return Fraction(0)


def cmd_verify(args) -> int:
    started = time.perf_counter()
    if args.fixtures:
        args.inputs = list(args.inputs) + [fixture_dir()]
    if not args.inputs and not args.random:
        raise CliError("verify needs input files/directories, --fixtures or --random N")
    seed = _seed(args) if not args.inputs else args.seed
    reports = []
    fn = _broken_psuccess if args.corrupt_oracle else None
    for name, f in _batch_formulas(args, seed):
        if f.n > args.cap_enum:
            raise EnumerationCapError(f"{name}: n(F)={f.n} exceeds enumeration cap {args.cap_enum}")
        reports.append(verify_cost_bound(f, args.s, f"{name}#cost_bound", args.cap_enum, fn))
        r = fix_implied(f, args.s)
        if r.residual.n >= 1:
            reports.append(verify_cost_decrease(r.residual, args.s, f"{name}#cost_decrease",
                                                args.cap_enum))
        if f.n <= args.cap_perm:
            reports.append(verify_pguessed_lemmas(f, args.s, f"{name}#lemmas", args.cap_enum,
                                                  args.cap_perm))
    ok = all(r.passed for r in reports)
    payload = {"command": "verify", "s": args.s, "seed": seed,
               "reports": [r.to_json() for r in reports], "pass": ok}
    lines = []
    for r in reports:
        bad = [c.name for c in r.checks if not c.passed]
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.instance}" + (f" {bad}" if bad else ""))
        for a in r.assumptions:
            if not a.passed:
                lines.append(f"  note: assumption {a.name} does not hold ({a.lhs:.6f} > {a.rhs:.6f})")
    lines.append(f"{sum(r.passed for r in reports)}/{len(reports)} reports pass")
    _emit(args, payload, "\n".join(lines) + "\n", started)
    return EXIT_OK if ok else EXIT_FAILED


def _ceil_digits(x, places: int) -> str:
    """Decimal string of x rounded up to ``places`` digits after the point (x >= 0)."""
    with mpmath.workdps(40):
        q = int(mpmath.ceil(x * mpmath.mpf(10) ** places))
    return f"{q // 10 ** places}.{q % 10 ** places:0{places}d}"


def cmd_sk_table(args) -> int:
    started = time.perf_counter()
    if args.k_min < 3 or args.k_max < args.k_min:
        raise CliError("need 3 <= k-min <= k-max")
    rows = []
    for k in range(args.k_min, args.k_max + 1):
        sk = compute_sk(k, max(20, args.digits + 5))
        rows.append({"k": k, "S_k": _ceil_digits(sk.value, args.digits),
                     "pow2_S_k": _ceil_digits(sk.pow2, args.digits - 1),
                     "upper_rational": f"{sk.upper_rational.numerator}/{sk.upper_rational.denominator}"})
    lines = [f"{'k':>3}  {'S_k':<{args.digits + 3}} 2^S_k   (rounded up)"]
    lines += [f"{r['k']:>3}  {r['S_k']:<{args.digits + 3}} {r['pow2_S_k']}" for r in rows]
    _emit(args, {"command": "sk-table", "digits": args.digits, "rows": rows}, "\n".join(lines) + "\n",
          started)
    return EXIT_OK


def cmd_experiment(args) -> int:
    started = time.perf_counter()
    seed = _seed(args)
    if args.inputs:
        batch = [(p, _read_formula(p)) for p in _collect_inputs(args.inputs)]
    else:
        batch = []
        for i in range(args.count):
            spec = GenSpec(args.n, args.m, args.k, Family(args.family), seed + i)
            f, _ = generate(spec)
            batch.append((f"{args.family}:n={args.n},m={args.m},k={args.k},seed={seed + i}", f))
    rows = []
    for i, (name, f) in enumerate(batch):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        est, (lo, hi) = psuccess_mc(f, args.s, args.trials, rng)
        row = {"instance": name, "n": f.n, "m": f.m, "s": args.s, "trials": args.trials,
               "psuccess_mc": est, "ci95": [lo, hi]}
        if f.n <= args.cap_enum:
            ctx = _Context(f, args.s, args.cap_enum)
            if len(ctx.rows):
                c = sum(cost_vector(f, args.s, s_bound_for(f), args.cap_enum, ctx).values(), Fraction(0))
                row["psuccess_exact"] = float(psuccess_exact(f, args.s, args.cap_enum, ctx))
                row["pow2_neg_cost"] = float(pow2_neg_bounds(c)[1])
                row["ci_above_bound"] = hi >= row["pow2_neg_cost"]
            else:
                row["unsatisfiable"] = True
        if args.guess_trials and not row.get("unsatisfiable"):
            rates = measure_guess_rate(f, args.s, args.guess_trials, rng)
            row["guess_rates"] = rates["rates"]
            row["S_k"] = rates["S_k"]
        rows.append(row)
    payload = {"command": "experiment", "seed": seed, "s": args.s, "rows": rows}
    if args.format == "csv":
        buf = io.StringIO()
        cols = ["instance", "n", "m", "s", "trials", "psuccess_mc", "ci_lo", "ci_hi",
                "psuccess_exact", "pow2_neg_cost"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r["instance"], r["n"], r["m"], r["s"], r["trials"], r["psuccess_mc"],
                        r["ci95"][0], r["ci95"][1], r.get("psuccess_exact", ""), r.get("pow2_neg_cost", "")])
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    lines = [f"{'instance':<44} {'mc':>8} {'ci95':>19} {'exact':>8} {'2^-c':>8}"]
    for r in rows:
        ex = f"{r['psuccess_exact']:.4f}" if "psuccess_exact" in r else "-"
        bd = f"{r['pow2_neg_cost']:.4f}" if "pow2_neg_cost" in r else "-"
        ci = f"[{r['ci95'][0]:.4f}, {r['ci95'][1]:.4f}]"
        lines.append(f"{r['instance']:<44} {r['psuccess_mc']:>8.4f} {ci:>19} {ex:>8} {bd:>8}")
    _emit(args, payload, "\n".join(lines) + "\n", started)
    return EXIT_OK


# -------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--s", type=int, default=3, help="implication bound s (default 3)")
    common.add_argument("--seed", type=int, default=None, help="random seed (logged when omitted)")
    common.add_argument("--deterministic", action="store_true",
                        help="omit timings so JSON output is byte-identical across runs")
    common.add_argument("--cap-enum", type=int, default=ENUM_CAP, help="max variables for exact enumeration")
    common.add_argument("--cap-perm", type=int, default=PERM_CAP, help="max variables for the permutation oracle")

    p = argparse.ArgumentParser(prog="ppszkit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", parents=[common], help="run repeated PPSZ on a DIMACS file")
    sp.add_argument("input", help="DIMACS file or '-' for stdin")
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--repetitions", type=int, help="fixed number of trials")
    grp.add_argument("--auto", action="store_true", help="trials from S_k, epsilon and delta (default)")
    sp.add_argument("--epsilon", type=float, default=0.1, help="slack added to S_k in auto mode")
    sp.add_argument("--delta", type=float, default=0.01, help="allowed failure probability in auto mode")
    sp.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("analyze", parents=[common], help="exact cost and success probability")
    sp.add_argument("input", help="DIMACS file or '-' for stdin")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("verify", parents=[common], help="check the cost and lemma inequalities on a batch")
    sp.add_argument("inputs", nargs="*", help="DIMACS files or directories of .cnf files")
    sp.add_argument("--fixtures", action="store_true", help="include the shipped seed-pinned instances")
    sp.add_argument("--random", type=int, default=0, help="generate N planted instances instead")
    sp.add_argument("--n-max", type=int, default=7, help="max variables of random instances")
    sp.add_argument("--m-max", type=int, default=30, help="max clauses of random instances")
    sp.add_argument("--k", type=int, default=3, help="clause width of random instances")
    sp.add_argument("--corrupt-oracle", action="store_true",
                    help="self-test: replace psuccess by 0 so checks must fail")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sk-table", parents=[common], help="print S_k and 2^S_k")
    sp.add_argument("--k-min", type=int, default=3, help="first k of the table")
    sp.add_argument("--k-max", type=int, default=6, help="last k of the table")
    sp.add_argument("--digits", type=int, default=7, help="decimals of S_k, rounded up")
    sp.set_defaults(func=cmd_sk_table)

    sp = sub.add_parser("experiment", parents=[common], help="Monte Carlo vs exact success probability")
    sp.add_argument("inputs", nargs="*", help="DIMACS files or directories; otherwise generate")
    sp.add_argument("--family", choices=[x.value for x in Family], default="unique",
                    help="generator family when no inputs are given")
    sp.add_argument("--n", type=int, default=10, help="variables per generated instance")
    sp.add_argument("--m", type=int, default=40, help="clauses per generated instance")
    sp.add_argument("--k", type=int, default=3, help="clause width")
    sp.add_argument("--count", type=int, default=5, help="number of generated instances")
    sp.add_argument("--trials", type=int, default=2000, help="Monte Carlo runs per instance")
    sp.add_argument("--guess-trials", type=int, default=0, help="also measure per-variable guess rates")
    sp.set_defaults(func=cmd_experiment)
    for name, sp in sub.choices.items():
        extra = ["csv"] if name == "experiment" else []
        sp.add_argument("--format", choices=["human", "json"] + extra, default="human")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, DimacsError, ContractViolation, EnumerationCapError, UnsatisfiableError,
            BudgetExceeded, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
