"""Command-line entry point: ``steanelab <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import __version__
from . import harness
from . import threshold_analysis as ta


def _prob(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= v <= harness.MAX_EXPERIMENT_EPS:
        raise argparse.ArgumentTypeError(f"rate must lie in [0, {harness.MAX_EXPERIMENT_EPS}]")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _mc_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=_positive, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive, default=None, help="worker processes (default: all cores)")
    p.add_argument("--method", choices=("shor", "steane"), default=None,
                   help="syndrome extraction method")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steanelab",
                                     description="Steane-code fault tolerance experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the deterministic oracle suite")
    p.add_argument("--group", action="append", choices=list(_verify_groups()),
                   help="restrict to a group (repeatable)")

    p = sub.add_parser("mc-memory", help="Monte Carlo storage of an encoded qubit")
    p.add_argument("--eps-store", type=_prob, nargs="+", required=True)
    p.add_argument("--eps-gate", type=_prob, default=None,
                   help="gate and measurement rate (default: equal to eps-store)")
    p.add_argument("--rounds", type=_positive, default=1)
    p.add_argument("--state", choices=("bell", "zero"), default="bell",
                   help="stored state: half of a Bell pair with a noiseless reference "
                        "(sees X and Z failures) or |0>_L (X failures only)")
    p.add_argument("--baseline", action="store_true", help="add the unencoded qubit rows")
    _mc_options(p)

    p = sub.add_parser("mc-xor", help="Monte Carlo network of transversal XORs")
    p.add_argument("--eps-xor", type=_prob, nargs="+", required=True)
    p.add_argument("--n-gates", type=_positive, default=8)
    _mc_options(p)

    p = sub.add_parser("flow-table", help="per-gate failure coefficient against N")
    p.add_argument("--n-max", type=_positive, default=16)

    p = sub.add_parser("resources", help="factoring resource estimate")
    p.add_argument("--k", type=int, default=430)
    p.add_argument("--eps-gate", type=float, default=1e-6)
    p.add_argument("--eps-store", type=float, default=1e-6)

    p = sub.add_parser("leak-demo", help="detect a leaked qubit and recover the block")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--position", type=int, default=3, choices=range(1, 8))
    return parser


def _verify_groups():
    from . import verify
    return verify.GROUPS


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_verify(args) -> int:
    from . import verify
    report = verify.run_all(args.group, progress=lambda g: print(f"checking {g} ...",
                                                               file=sys.stderr))
    print(report.summary())
    return 0 if report.ok else 1


def _cmd_memory(args) -> int:
    method = args.method or "steane"
    points = []
    for eps in args.eps_store:
        r = harness.run_memory_experiment(args.rounds, eps, args.trials, args.seed,
                                          eps_gate=args.eps_gate, method=method, state=args.state,
                                          jobs=args.jobs)
        points += r.points
        if args.baseline:
            points += harness.run_unencoded_baseline(args.rounds, eps, args.trials, args.seed,
                                                     state=args.state, jobs=args.jobs).points
    _emit(harness.points_to_csv(points), args.out)
    _report_slope(points, "mc-memory")
    return 0


def _cmd_xor(args) -> int:
    method = args.method or "shor"
    points = []
    for eps in args.eps_xor:
        points += harness.run_xor_experiment(args.n_gates, eps, args.trials, args.seed,
                                             method=method, jobs=args.jobs).points
    _emit(harness.points_to_csv(points), args.out)
    for p in points:
        bound = ta.gate_failure_rate(args.n_gates, p.eps)
        print(f"eps_xor={p.eps:g}: per block and gate {p.rate:.3e} vs bound {bound:.3e}",
              file=sys.stderr)
    _report_slope(points, "mc-xor")
    return 0


def _report_slope(points, experiment: str) -> None:
    pts = [(p.eps, p.rate) for p in points if p.experiment == experiment and p.eps > 0]
    if len(pts) >= 3 and all(r > 0 for _, r in pts):
        fit = harness.fit_scaling(pts)
        print(f"log-log slope {fit.slope:.3f}", file=sys.stderr)


def _cmd_flow(args) -> int:
    print(f"{'N':>4} {'coefficient':>12} {'threshold':>11}")
    for row in ta.flow_table(range(1, args.n_max + 1)):
        print(f"{row['N']:>4} {row['coefficient']:>12.3f} {row['threshold']:>11.4e}")
    n, _ = ta.optimize_N()
    oracle = ta.repetition_failure_oracle()
    print(f"optimum N={n}, coefficient {float(ta.flow_coefficient(n)):g}, "
          f"threshold {ta.threshold_estimate():.4e}")
    print(f"agree-twice coefficient: {oracle.coefficient} under the enumerated model, "
          f"{oracle.quoted_constant} used in the recovery failure rate")
    return 0


def _cmd_resources(args) -> int:
    try:
        est = ta.factoring_resources(args.k, args.eps_gate, args.eps_store)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"K                 {est.K}")
    print(f"toffoli gates     {est.toffoli_count} ({est.toffoli_count:.4e})")
    print(f"encoded qubits    {est.encoded_qubits}")
    print(f"levels            {est.levels}")
    print(f"block size        {est.block_size}")
    print(f"physical qubits   {est.physical_qubits} (order 10^{est.physical_qubits_order})")
    return 0


def _cmd_leak(args) -> int:
    from . import ft_gadgets as fg
    from . import steane_code as sc
    from .machine import Machine
    from .statevec import PureState, fidelity

    rng = np.random.default_rng(args.seed)
    psi = PureState.random(1, rng)
    m = Machine(psi.tensor(PureState.zero(1)), rng=rng)
    print(f"random qubit: {fg.leak_detect(m, 0, 1)}")
    m.state.leak(0)
    print(f"same qubit after leaking: {fg.leak_detect(m, 0, 1)}")

    blk = sc.CodeBlock.at(0)
    ref = sc.logical_state(*PureState.random(1, rng).amps)
    m = Machine(ref.tensor(PureState.zero(6)), rng=rng)
    m.state.leak(blk.q(args.position))
    verdict = fg.leak_detect(m, blk.q(args.position), 7)
    op = fg.recover_erasure(m, blk, args.position, [8, 9, 10, 11, 12])
    f = fidelity(PureState(m.state.factor_out(list(range(7)))), ref)
    print(f"block position {args.position}: {verdict}, erasure fix X@{op.x_position} "
          f"Z@{op.z_position}, fidelity {f:.12f}")
    return 0


COMMANDS = {"verify": _cmd_verify, "mc-memory": _cmd_memory, "mc-xor": _cmd_xor,
            "flow-table": _cmd_flow, "resources": _cmd_resources, "leak-demo": _cmd_leak}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return COMMANDS[args.command](args)


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
