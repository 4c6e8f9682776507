"""Compare the compiled and pure-Python tableau cores.

Runs the same random Clifford op tables (with measurements) on both cores
and reports the time per op. Usage: python3 benchmarks/bench_tableau.py
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from steanelab.stabsim._pycore import OP_CNOT, OP_H, OP_MEASURE, OP_S, PyTableau

try:
    from steanelab.stabsim._ctableau import CTableau
except ImportError:  # extension not built
    CTableau = None


def random_ops(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    ops = np.zeros((m, 4), dtype=np.int32)
    kinds = rng.choice([OP_H, OP_S, OP_CNOT, OP_MEASURE], size=m, p=[0.3, 0.2, 0.4, 0.1])
    for k, op in enumerate(kinds):
        a, b = rng.choice(n, size=2, replace=False)
        ops[k] = (op, a, b, 0)
    return ops


def time_core(make, ops: np.ndarray, rbits: np.ndarray, as_lists: bool, repeat: int) -> float:
    no_faults = np.zeros((0, 3), dtype=np.int32)
    args = (ops, no_faults, rbits)
    if as_lists:
        args = ([tuple(int(v) for v in r) for r in ops], [], [int(b) for b in rbits])
    best = float("inf")
    for _ in range(repeat):
        t = make()
        t0 = time.perf_counter()
        t.run(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[7, 21, 64, 128])
    p.add_argument("--ops", type=int, default=5000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>5} {'python us/op':>13} {'cython us/op':>13} {'speedup':>8}")
    for n in args.sizes:
        ops = random_ops(n, args.ops, rng)
        rbits = rng.integers(0, 2, size=int((ops[:, 0] == OP_MEASURE).sum()), dtype=np.uint8)
        tp = time_core(lambda: PyTableau(n), ops, rbits, True, args.repeat)
        line = f"{n:>5} {tp / args.ops * 1e6:>13.2f}"
        if CTableau is not None:
            tc = time_core(lambda: CTableau(n), ops, rbits, False, args.repeat)
            line += f" {tc / args.ops * 1e6:>13.3f} {tp / tc:>7.1f}x"
        else:
            line += f" {'not built':>13}"
        print(line)


if __name__ == "__main__":
    main()
