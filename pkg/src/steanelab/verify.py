"""Deterministic oracle suite behind ``steanelab verify``.

Every check is exhaustive or exact: no sampling tolerances. Groups can be
run on their own; ``run_all`` runs everything and never stops early.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import ft_gadgets as fg
from . import hamming
from . import steane_code as sc
from . import threshold_analysis as ta
from .machine import Machine, enumerate_branches, single_fault_sweep
from .stabsim import PauliError, StabilizerTableau
from .statevec import Gate, PureState, fidelity

TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    group: str
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    results: list[CheckResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def failed(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    @property
    def ok(self) -> bool:
        return not self.failed

    def summary(self) -> str:
        groups: dict[str, list[int]] = {}
        for r in self.results:
            g = groups.setdefault(r.group, [0, 0])
            g[0] += r.passed
            g[1] += 1
        lines = [f"  {name:<12} {p}/{n}" for name, (p, n) in groups.items()]
        lines += [f"  FAILED {r.group}/{r.name}: {r.detail}" for r in self.failed]
        lines.append(f"{self.passed} passed, {len(self.failed)} failed in {self.seconds:.1f} s")
        return "\n".join(lines)


Check = tuple[str, bool, str]


def _close(a: float, b: float, tol: float = TOL) -> bool:
    return abs(a - b) <= tol


# hamming ----------------------------------------------------------------------------


def hamming_checks() -> Iterator[Check]:
    words = sorted(hamming.all_codewords())
    yield "sixteen codewords", len(words) == 16, str(len(words))
    for w in words:
        yield f"codeword {hamming.bits_of(w)} checks zero", hamming.parity_check(w) == (0, 0, 0), ""
    for w in words:
        for p in range(1, 8):
            fixed, pos = hamming.decode_single(w ^ hamming.e(p))
            yield f"flip {p} of {hamming.bits_of(w)}", (fixed, pos) == (w, p), f"{pos}"
    even, odd = hamming.codewords()
    yield "even subcode weights", all(hamming.weight(w) in (0, 4) for w in even), ""
    yield "odd coset weights", all(hamming.weight(w) in (3, 7) for w in odd), ""


# code states and recovery ----------------------------------------------------------------


def code_checks() -> Iterator[Check]:
    even, odd = hamming.codewords()
    for name, st, words in (("zero", sc.logical_zero(), even), ("one", sc.logical_one(), odd)):
        amp = np.zeros(128, dtype=complex)
        for w in words:
            amp[sum(((w >> (p - 1)) & 1) << (7 - p) for p in range(1, 8))] = 1 / math.sqrt(8)
        err = float(np.max(np.abs(st.amps - amp)))
        yield f"logical {name} amplitudes", err <= TOL, f"{err:.1e}"
    for a, b in ((1, 0), (0, 1), (0.6, 0.8j)):
        f = fidelity(sc.encode(a, b), sc.logical_state(a, b))
        yield f"encoder on {a},{b}", _close(f, 1), f"{f}"
    # bitwise Hadamard sends the logical basis to logical |+>, |->
    for a, sign in ((sc.logical_zero(), 1), (sc.logical_one(), -1)):
        s = a.copy()
        for q in range(7):
            s.apply_gate(Gate("H", (q,)))
        f = fidelity(s, sc.logical_state(1 / math.sqrt(2), sign / math.sqrt(2)))
        yield f"hadamard rotates basis sign {sign:+d}", _close(f, 1), f"{f}"


def _dense_recovery(method: str, data: PureState, errs) -> PureState:
    na = sc.ancilla_size(method, verify=False)
    m = Machine(data.tensor(PureState.zero(na)), rng=np.random.default_rng(0))
    for q, code in errs:
        m.apply_pauli(q, code)
    sc.fault_tolerant_recovery(m, sc.CodeBlock.at(0), list(range(7, 7 + na)), method)
    return PureState(m.state.factor_out(list(range(7))))


def recovery_checks() -> Iterator[Check]:
    ref = sc.logical_state(0.6, 0.8j)
    for method in ("shor", "steane"):
        for q in range(7):
            for code, name in ((1, "X"), (3, "Y"), (2, "Z")):
                f = fidelity(_dense_recovery(method, ref, [(q, code)]), ref)
                yield f"{method} corrects {name}{q + 1}", _close(f, 1), f"{f}"
        # two flips in the same block become a logical error
        for (p, r), code in itertools.product(((0, 1), (2, 6)), (1, 2)):
            out = _dense_recovery(method, ref, [(p, code), (r, code)])
            flipped = ref.copy()
            for k in range(7):
                flipped.apply_pauli(k, code)
            f = fidelity(out, flipped)
            kind = "bit" if code == 1 else "phase"
            yield f"{method} double {kind} flip {p + 1},{r + 1} is logical", _close(f, 1), f"{f}"


def _css_correctable(d: sc.DecodeResult) -> bool:
    return d.logical_z == 1.0


def sweep_checks() -> Iterator[Check]:
    blk = sc.CodeBlock.at(0)
    ref = 7
    for method in ("steane", "shor"):
        na = sc.ancilla_size(method)
        anc = list(range(8, 8 + na))
        meas = 8 + na
        n = meas + 1

        def mk(script=None, record=False):
            return Machine(StabilizerTableau(n), rng=np.random.default_rng(5), script=script,
                           record=record)

        def recovery(m):
            sc.prepare_ideal(m, blk, "bell", ref)
            sc.fault_tolerant_recovery(m, blk, anc, method)
            return sc.ideal_decode(m.state, blk, ref)

        def prep(m):
            sc.prepare_logical_zero_ft(m, blk, anc, meas, method)
            return sc.ideal_decode(m.state, blk)

        for label, proto, good in (
                ("recovery", recovery,
                 lambda d: d.logical_z == 1.0 and d.logical_x == 1.0
                 and len({d.x_position, d.z_position} - {0}) <= 1),
                ("zero prep", prep, _css_correctable)):
            cases = bad = 0
            for case in single_fault_sweep(mk, proto):
                cases += 1
                bad += not good(case.result)
            yield f"{method} {label} single-fault sweep ({cases} cases)", bad == 0, f"{bad} bad"


# gadgets ----------------------------------------------------------------------------------------


def _toffoli(psi: PureState) -> PureState:
    s = psi.copy()
    s.apply_gate(Gate("CCX", (0, 1, 2)))
    return s


def toffoli_checks() -> Iterator[Check]:
    rng = np.random.default_rng(11)
    inputs = [(f"basis {i:03b}", PureState.basis(3, i)) for i in range(8)]
    inputs += [(f"random {k}", PureState.random(3, rng)) for k in range(10)]
    for name, psi in inputs:
        def proto(m):
            return fg.logical_toffoli(m, (0,), (1,), (2,), ((3,), (4,), (5,)), cat=(6,))

        branches = enumerate_branches(lambda: psi.tensor(PureState.zero(4)), proto)
        total = sum(b.probability for b in branches)
        target = _toffoli(psi)
        worst = min(fidelity(PureState(b.machine.state.factor_out([3, 4, 5])), target)
                    for b in branches)
        yield (f"toffoli {name} over {len(branches)} branches",
               _close(total, 1) and _close(worst, 1), f"sum {total}, worst {worst}")


def rotation_checks() -> Iterator[Check]:
    def theta0(m):
        m.gate("H", 0)
        return m.run(fg._theta0_chunk(0, 1, 2))

    branches = enumerate_branches(lambda: PureState.zero(3), theta0)
    p_ok = sum(b.probability for b in branches if tuple(b.result) == (0, 0))
    yield "theta0 success probability is 5/8", _close(p_ok, 5 / 8), f"{p_ok}"
    ok = [b for b in branches if tuple(b.result) == (0, 0)]
    want = np.array([1, fg.THETA0_PHASE]) / math.sqrt(2)
    f = fidelity(PureState(ok[0].machine.state.factor_out([0])), want)
    yield "theta0 success phase (3+4i)/5", _close(f, 1), f"{f}"
    yield "theta0 phase equals (1+3i)/(3+i)", _close(abs(fg.THETA0_PHASE - (1 + 3j) / (3 + 1j)), 0), ""
    for b in branches:
        if tuple(b.result) != (0, 0):
            want_fail = np.array([1, -1]) / math.sqrt(2)
            f = fidelity(PureState(b.machine.state.factor_out([0])), want_fail)
            yield f"theta0 outcome {tuple(b.result)} applies Z", _close(f, 1), f"{f}"

    theta = 0.3

    def lib(m):
        m.gate("H", 0)
        try:
            return fg.rotate_from_library(m, 0, fg.angle_library(theta, 6), 1)
        except fg.LibraryExhausted:
            return 0, []

    branches = enumerate_branches(lambda: PureState.zero(2), lib)
    want = np.array([1, np.exp(1j * theta)]) / math.sqrt(2)
    for k in range(1, 5):
        p = sum(b.probability for b in branches if b.result[0] == k)
        yield f"library succeeds at attempt {k} with 2^-{k}", _close(p, 2.0 ** -k), f"{p}"
    p_out = sum(b.probability for b in branches if b.result[0] == 0)
    yield "library exhausted with 2^-6", _close(p_out, 2.0 ** -6), f"{p_out}"
    worst = min(fidelity(PureState(b.machine.state.factor_out([0])), want)
                for b in branches if b.result[0])
    yield "library applies the requested angle", _close(worst, 1), f"{worst}"


def leak_checks() -> Iterator[Check]:
    rng = np.random.default_rng(21)
    for k in range(20):
        psi = PureState.random(1, rng)
        m = Machine(psi.tensor(PureState.zero(1)))
        verdict = fg.leak_detect(m, 0, 1)
        f = fidelity(PureState(m.state.factor_out([0])), psi)
        yield f"clean random state {k}", verdict == fg.CLEAN and _close(f, 1), f"{verdict} {f}"
        m = Machine(psi.tensor(PureState.zero(1)))
        m.state.leak(0)
        yield f"leaked random state {k}", fg.leak_detect(m, 0, 1) == fg.LEAKED, ""
    blk = sc.CodeBlock.at(0)
    for name, ref in (("zero", sc.logical_zero()), ("one", sc.logical_one())):
        for p in range(1, 8):
            m = Machine(ref.tensor(PureState.zero(6)), rng=np.random.default_rng(p))
            m.state.leak(blk.q(p))
            found = fg.leak_detect(m, blk.q(p), 7) == fg.LEAKED
            fg.recover_erasure(m, blk, p, [8, 9, 10, 11, 12])
            f = fidelity(PureState(m.state.factor_out(list(range(7)))), ref)
            yield f"erasure at {p} on logical {name}", found and _close(f, 1), f"{f}"


# analytic layer --------------------------------------------------------------------------------


def analytic_checks() -> Iterator[Check]:
    n, _ = ta.optimize_N()
    yield "flow argmin N=8", n == 8, str(n)
    yield "flow coefficient 684", ta.flow_coefficient(8) == 684, str(ta.flow_coefficient(8))
    yield "N=9 gives 685", ta.flow_coefficient(9) == 685, ""
    yield "N=1 gives 1797", ta.flow_coefficient(1) == 1797, ""
    t = ta.threshold_estimate()
    yield "threshold 1/684", t == 1 / 684, f"{t}"
    yield "threshold is a fixed point", _close(ta.gate_failure_rate(8, t), t, 1e-15), ""
    yield "syndrome rate 12 eps", ta.syndrome_error_rate(1e-3) == 12 * 1e-3, ""
    yield "recovery failure 1440 eps^2", ta.recovery_failure_rate(1e-3) == 1440 * 1e-3 ** 2, ""
    yield "three levels 1e-20", ta.concatenated_error(1e-6, 1e-4, 3) == 1e-20, ""
    yield "storage needs 3 levels", ta.required_levels(1e-6, 1e-5, 1e-12) == 3, ""
    est = ta.factoring_resources(430)
    yield "toffoli count 38 K^3", est.toffoli_count == 38 * 430 ** 3, str(est.toffoli_count)
    yield "2150 encoded qubits", est.encoded_qubits == 2150, ""
    yield "block 343", est.block_size == 343, ""
    yield "order 10^6 physical qubits", est.physical_qubits_order == 6, str(est.physical_qubits)
    oracle = ta.repetition_failure_oracle()
    yield "agree-twice oracle enumerates", oracle.coefficient == len(oracle.sequences), \
        f"coefficient {oracle.coefficient} against {oracle.quoted_constant}"


GROUPS: dict[str, Callable[[], Iterator[Check]]] = {
    "hamming": hamming_checks,
    "code": code_checks,
    "recovery": recovery_checks,
    "sweeps": sweep_checks,
    "toffoli": toffoli_checks,
    "rotations": rotation_checks,
    "leakage": leak_checks,
    "analytic": analytic_checks,
}


def run_all(groups=None, progress: Callable[[str], None] | None = None) -> Report:
    report = Report()
    t0 = time.perf_counter()
    for g in groups or GROUPS:
        if progress:
            progress(g)
        try:
            for name, passed, detail in GROUPS[g]():
                report.results.append(CheckResult(g, name, bool(passed), detail))
        except Exception as exc:  # a crash is a failed check, not an abort
            report.results.append(CheckResult(g, "crashed", False, repr(exc)))
    report.seconds = time.perf_counter() - t0
    return report
