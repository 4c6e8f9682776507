"""Monte Carlo experiments, interval estimates and scaling fits.

Every trial draws from its own stream ``default_rng([seed, trial])``, so the
counts do not depend on how trials are split across worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import multiprocessing as mp
import os
import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from . import steane_code as sc
from .machine import Machine
from .stabsim import NoiseModel, StabilizerTableau
from .steane_code import CodeBlock, transversal_chunk

CSV_COLUMNS = ("experiment", "eps", "n_or_rounds", "trials", "failures", "rate",
               "ci_low", "ci_high", "seed", "version")
EXPERIMENTS = ("verify", "mc-memory", "mc-xor", "mc-unencoded", "flow-table", "resources",
               "leak-demo")
MAX_EXPERIMENT_EPS = 0.05
MC_AGREEMENT_BUDGET = 32


# statistics ----------------------------------------------------------------


def wilson_interval(failures: int, trials: int, z: float = 1.959963984540054
                    ) -> tuple[float, float]:
    """Wilson score interval; zero failures give the rule-of-three bound (0, 3/n)."""
    if trials < 1 or not 0 <= failures <= trials:
        raise ValueError("need 0 <= failures <= trials and trials >= 1")
    if failures == 0:
        return 0.0, min(1.0, 3.0 / trials)
    p = failures / trials
    denom = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # clamp so rounding never pushes the estimate outside its own interval
    return max(0.0, min(p, mid - half)), min(1.0, max(p, mid + half))


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residuals: tuple[float, ...]
    used: int
    dropped: int


def fit_scaling(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """Least squares line through (ln eps, ln rate).

    Points with a zero rate cannot be logged; they are dropped with a
    warning. Fewer than three usable points is an error.
    """
    pts = list(points)
    usable = [(e, r) for e, r in pts if e > 0 and r > 0]
    dropped = len(pts) - len(usable)
    if dropped:
        warnings.warn(f"dropped {dropped} point(s) with zero rate from the fit", RuntimeWarning)
    if len(usable) < 3:
        raise ValueError("need at least 3 points with positive rates")
    x = np.log([e for e, _ in usable])
    y = np.log([r for _, r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    return ScalingFit(float(slope), float(intercept), tuple(float(v) for v in res),
                      len(usable), dropped)


# configuration and results ------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on; echoed into the result.

    ``eps_gate=None`` ties the gate and measurement rates of the memory
    experiment to ``eps_store``.
    """

    experiment: str
    trials: int = 1000
    seed: int = 0
    eps_store: float = 0.0
    eps_gate: float | None = None
    eps_xor: float = 0.0
    rounds: int = 1
    n_gates: int = 8
    method: str = "steane"
    jobs: int | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.rounds < 1 or self.n_gates < 1:
            raise ValueError("rounds and n_gates must be at least 1")
        if self.method not in ("shor", "steane"):
            raise ValueError("method must be 'shor' or 'steane'")
        for name in ("eps_store", "eps_xor", "eps_gate"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= MAX_EXPERIMENT_EPS:
                raise ValueError(f"{name} must lie in [0, {MAX_EXPERIMENT_EPS}]")


@dataclass(frozen=True)
class PointResult:
    experiment: str
    eps: float
    n_or_rounds: int
    trials: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float
    seed: int
    version: str = __version__

    def row(self) -> list[str]:
        return [self.experiment, repr(self.eps), str(self.n_or_rounds), str(self.trials),
                str(self.failures), repr(self.rate), repr(self.ci_low), repr(self.ci_high),
                str(self.seed), self.version]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    points: list[PointResult] = field(default_factory=list)
    fit: ScalingFit | None = None
    version: str = __version__

    def to_csv(self) -> str:
        return points_to_csv(self.points)

    def write_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def summary(self) -> dict:
        out = {"config": asdict(self.config), "version": self.version,
               "points": [asdict(p) for p in self.points]}
        if self.fit is not None:
            out["slope"] = self.fit.slope
        return out


def points_to_csv(points: Sequence[PointResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow(p.row())
    return buf.getvalue()


def _point(experiment: str, eps: float, n: int, trials: int, failures: int, seed: int,
           scale: float = 1.0) -> PointResult:
    lo, hi = wilson_interval(failures, trials)
    return PointResult(experiment, eps, n, trials, failures, failures / trials / scale,
                       lo / scale, hi / scale, seed)


# trials ------------------------------------------------------------------------

_DATA = CodeBlock.at(0)


def _memory_trial(rng, eps_store: float, eps_gate: float, rounds: int, method: str,
                  state: str = "bell") -> int:
    # "bell" pairs the block with a noiseless reference qubit so that logical
    # X and Z failures are both seen; "zero" stores |0>_L and sees only X
    na = sc.ancilla_size(method)
    ref = 7 if state == "bell" else None
    first = 8 if ref is not None else 7
    anc = list(range(first, first + na))
    noise = NoiseModel.uniform(eps_store, eps_gate)
    m = Machine(StabilizerTableau(first + na), noise=noise, rng=rng)
    sc.prepare_ideal(m, _DATA, state, ref)
    idle = transversal_chunk("IDLE", _DATA.qubits)
    try:
        for _ in range(rounds):
            m.run(idle)
            sc.fault_tolerant_recovery(m, _DATA, anc, method, MC_AGREEMENT_BUDGET)
    except (sc.AgreementError, sc.RetryBudgetExceeded):
        return 1
    d = sc.ideal_decode(m.state, _DATA, ref)
    if d.logical_z != 1.0:
        return 1
    return int(ref is not None and d.logical_x != 1.0)


def _unencoded_trial(rng, eps_store: float, rounds: int, state: str = "bell") -> int:
    # the bare qubit gets the same treatment: with a reference every Pauli
    # counts, so it fails at about eps per round instead of 2/3 eps
    n = 2 if state == "bell" else 1
    m = Machine(StabilizerTableau(n), noise=NoiseModel(eps_store), rng=rng)
    if n == 2:
        with m.ideal():
            m.gate("H", 1)
            m.gate("CNOT", 1, 0)
    idle = transversal_chunk("IDLE", (0,))
    for _ in range(rounds):
        m.run(idle)
    if n == 1:
        return int(m.state.expectation(0, 1) != 1)
    return int(m.state.expectation(0, 3) != 1 or m.state.expectation(3, 0) != 1)


def _xor_trial(rng, eps_xor: float, n_gates: int, method: str) -> int:
    """Number of the two blocks (0, 1 or 2) that end with a logical error."""
    # each block is Bell-paired with a noiseless reference qubit, so both
    # logical X and Z failures show up in the final ideal decode
    a, b = CodeBlock.at(0), CodeBlock.at(7)
    ra, rb = 14, 15
    na = sc.ancilla_size(method)
    anc = list(range(16, 16 + na))
    m = Machine(StabilizerTableau(16 + na), noise=NoiseModel(0.0, {"xor": eps_xor}), rng=rng)
    sc.prepare_ideal(m, a, "bell", ra)
    sc.prepare_ideal(m, b, "bell", rb)
    xor = transversal_chunk("CNOT", a.qubits, b.qubits)
    for _ in range(n_gates):
        m.run(xor)
    if n_gates % 2:
        with m.ideal():
            m.gate("CNOT", ra, rb)
    failed = 0
    for blk, ref in ((a, ra), (b, rb)):
        try:
            sc.fault_tolerant_recovery(m, blk, anc, method, MC_AGREEMENT_BUDGET)
        except (sc.AgreementError, sc.RetryBudgetExceeded):
            failed += 1
            continue
        d = sc.ideal_decode(m.state, blk, ref)
        failed += d.logical_z != 1.0 or d.logical_x != 1.0
    return failed


def _count(task: tuple) -> int:
    kind, params, seed, start, stop = task
    trial = {"memory": _memory_trial, "unencoded": _unencoded_trial, "xor": _xor_trial}[kind]
    return sum(trial(np.random.default_rng([seed, t]), *params) for t in range(start, stop))


def count_failures(kind: str, params: tuple, trials: int, seed: int, jobs: int | None = None
                   ) -> int:
    """Summed trial outcomes over ``trials`` trials, split across ``jobs`` processes."""
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or trials < 2:
        return _count((kind, params, seed, 0, trials))
    n_tasks = min(trials, 4 * jobs)
    edges = np.linspace(0, trials, n_tasks + 1).astype(int)
    tasks = [(kind, params, seed, int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:])]
    with mp.get_context("spawn").Pool(jobs) as pool:
        return sum(pool.map(_count, tasks))


# experiments ------------------------------------------------------------------------


def _check_eps(eps: float, name: str) -> None:
    if not 0.0 <= eps <= MAX_EXPERIMENT_EPS:
        raise ValueError(f"{name} must lie in [0, {MAX_EXPERIMENT_EPS}], got {eps}")


def run_memory_experiment(rounds: int, eps_store: float, trials: int, seed: int = 0, *,
                          eps_gate: float | None = None, method: str = "steane",
                          state: str = "bell", jobs: int | None = None) -> ExperimentResult:
    """Store an encoded qubit for ``rounds`` rounds of idle noise plus noisy recovery.

    The default stores half of a logical Bell pair whose partner is a
    noiseless reference qubit, so a trial fails on either kind of logical
    error. ``state="zero"`` stores |0>_L, which only exposes logical bit
    flips and therefore collects about half the failures. A recovery that
    runs out of its retry budget also counts as a failure.
    """
    if state not in ("bell", "zero"):
        raise ValueError("state must be 'bell' or 'zero'")
    cfg = ExperimentConfig("mc-memory", trials, seed, eps_store, eps_gate, rounds=rounds,
                           method=method, jobs=jobs)
    g = eps_store if eps_gate is None else eps_gate
    f = count_failures("memory", (eps_store, g, rounds, method, state), trials, seed, jobs)
    return ExperimentResult(cfg, [_point("mc-memory", eps_store, rounds, trials, f, seed)])


def run_unencoded_baseline(rounds: int, eps_store: float, trials: int, seed: int = 0, *,
                           state: str = "bell", jobs: int | None = None) -> ExperimentResult:
    """A bare qubit under storage noise, prepared like the encoded one.

    Paired with a reference it fails at about eps per round; alone in |0>
    at about 2/3 eps.
    """
    if state not in ("bell", "zero"):
        raise ValueError("state must be 'bell' or 'zero'")
    cfg = ExperimentConfig("mc-unencoded", trials, seed, eps_store, rounds=rounds, jobs=jobs)
    f = count_failures("unencoded", (eps_store, rounds, state), trials, seed, jobs)
    return ExperimentResult(cfg, [_point("mc-unencoded", eps_store, rounds, trials, f, seed)])


def run_xor_experiment(N: int, eps_xor: float, trials: int, seed: int = 0, *,
                       method: str = "shor", jobs: int | None = None) -> ExperimentResult:
    """N transversal XORs between two blocks, then recovery of both.

    Only XOR gates fail. Each trial contributes two block outcomes, so the
    point reports ``2 * trials`` block trials, the number of blocks left with
    a logical error, and the per-gate rate ``failures / (2 * trials) / N``:
    the probability per gate that a given block fails, the quantity the
    analytic flow bound describes.
    """
    cfg = ExperimentConfig("mc-xor", trials, seed, eps_xor=eps_xor, n_gates=N, method=method,
                           jobs=jobs)
    f = count_failures("xor", (eps_xor, N, method), trials, seed, jobs)
    return ExperimentResult(cfg, [_point("mc-xor", eps_xor, N, 2 * trials, f, seed, scale=N)])


def sweep(run, eps_values: Sequence[float], *args, fit: bool = True, **kw) -> ExperimentResult:
    """Run ``run(*args, eps, ...)`` for each eps, merge the points and fit the slope."""
    results = [run(*args[:1], e, *args[1:], **kw) for e in eps_values]
    out = ExperimentResult(results[0].config, [p for r in results for p in r.points])
    if fit:
        out.fit = fit_scaling((p.eps, p.rate) for p in out.points)
    return out
