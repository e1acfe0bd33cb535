"""Compare the numba kernels against the numpy fallback.

Each backend runs in its own interpreter because PPSZKIT_BACKEND is read at
import time.  Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = ("sat_masks", "implied_literals", "engine_step")


def _instances(count: int, n: int, m: int, seed: int):
    from ppszkit.generator import Family, GenSpec, gen_planted
    return [gen_planted(GenSpec(n, m, 3, Family.PLANTED, seed + i))[0] for i in range(count)]


def _best(fn, repeat: int) -> float:
    fn()  # warm-up (includes jit compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def worker(repeat: int) -> dict:
    from ppszkit import _kernels
    from ppszkit.engine import Engine
    from ppszkit.implication import s_implied_literals
    from ppszkit.oracle import sat_masks

    enum_set = _instances(5, 16, 60, 1)
    impl_set = _instances(4, 40, 150, 100)
    step_set = _instances(4, 24, 90, 200)

    def run_sat():
        for f in enum_set:
            sat_masks(f)

    def run_implied():
        for f in impl_set:
            s_implied_literals(f, 3)

    def run_step():
        for f in step_set:
            eng = Engine(f, 3)
            mf = eng.encode(f)
            for v in f.sorted_vars[:4]:
                _kernels.step(mf.pos, mf.neg, mf.varmask, eng.to_code(v), 3)
                _kernels.step(mf.pos, mf.neg, mf.varmask, eng.to_code(-v), 3)

    return {"backend": _kernels.BACKEND,
            "sat_masks": _best(run_sat, repeat),
            "implied_literals": _best(run_implied, repeat),
            "engine_step": _best(run_step, repeat)}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        print(json.dumps(worker(args.repeat)))
        return 0
    rows = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, PPSZKIT_BACKEND=backend)
        out = subprocess.run([sys.executable, __file__, "--worker", "--repeat", str(args.repeat)],
                             env=env, capture_output=True, text=True, check=True)
        rows[backend] = json.loads(out.stdout)
    if rows["numba"]["backend"] != "numba":
        print("numba is not installed; only the numpy fallback was measured")
    print(f"{'workload':<18}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for w in WORKLOADS:
        a, b = rows["numba"][w], rows["numpy"][w]
        print(f"{w:<18}{a:>12.4f}{b:>12.4f}{b / a:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
