"""Noisy executor shared by every protocol.

Protocols are written once against :class:`Machine` and run unchanged on
either simulator: the dense state vector for exact checks (including
non-Clifford gates, leakage and branch enumeration) or the stabilizer
tableau for Monte Carlo. Circuits are handed over in :class:`Chunk` pieces;
the machine samples faults for a whole chunk at once and tracks a global
location counter so single faults can be scripted at any point of an
adaptive protocol.
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .statevec import Gate, PureState
from .stabsim import (KIND_MEASUREMENT, KIND_PREPARATION, NoiseModel, PauliError,
                      StabilizerTableau, compile_ops, draw_damage, op_kind)
from .stabsim._pycore import OP_MEASURE, OP_RESET

_NO_FAULTS = np.zeros((0, 3), dtype=np.int32)
_NO_BITS = np.zeros(0, dtype=np.uint8)

# default draw in branch mode: outcome 0 whenever it is possible
_BRANCH_U = 1e-9


class Chunk:
    """An immutable gate sequence precompiled for both simulators."""

    __slots__ = ("gates", "ops", "kinds", "arity", "n_meas", "n_rand", "clifford")

    def __init__(self, gates: Iterable[Gate]):
        self.gates = tuple(gates)
        self.ops = compile_ops(self.gates)
        self.kinds = np.array([op_kind(int(op)) for op in self.ops[:, 0]], dtype=np.int64)
        self.arity = np.array([len(g.qubits) for g in self.gates], dtype=np.int64)
        self.n_meas = sum(g.name == "MEASURE" for g in self.gates)
        self.n_rand = sum(g.name in ("MEASURE", "RESET") for g in self.gates)
        self.clifford = all(g.is_clifford or g.name in ("MEASURE", "RESET", "IDLE")
                            for g in self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, name: str) -> int:
        return sum(g.name == name for g in self.gates)


def chunk(*steps: tuple | Gate) -> Chunk:
    """Build a chunk from ``Gate`` objects or ``(name, q0, q1, ...)`` tuples."""
    gates = [s if isinstance(s, Gate) else Gate(s[0], s[1:]) for s in steps]
    return Chunk(gates)


@lru_cache(maxsize=None)
def single_op(name: str, qubits: tuple[int, ...]) -> Chunk:
    return Chunk([Gate(name, qubits)])


@dataclass(frozen=True)
class Location:
    index: int
    opcode: int
    qubits: tuple[int, ...]


class Machine:
    """Run chunks on a simulator with optional noise, fault script and forcing.

    Args:
        state: a ``PureState`` (dense) or ``StabilizerTableau``.
        noise: stochastic noise model; ``None`` means noiseless.
        rng: random stream for measurement outcomes and faults.
        script: ``{location: codes}`` faults to inject exactly, ``codes``
            listing one Pauli code per touched qubit (1=X, 2=Z, 3=Y, 0=none)
            or ``(4,)`` to flip a measurement record.
        forced: dense only. Outcomes for the first measurements; later ones
            take outcome 0 whenever possible (branch enumeration mode).
        record: keep the list of visited fault locations.
    """

    def __init__(self, state: PureState | StabilizerTableau, *, noise: NoiseModel | None = None,
                 rng: np.random.Generator | None = None,
                 script: Mapping[int, Sequence[int]] | None = None,
                 forced: Sequence[int] | None = None, record: bool = False):
        self.state = state
        self.dense = isinstance(state, PureState)
        if forced is not None and not self.dense:
            raise ValueError("forced outcomes need the dense simulator")
        self.noise = noise if noise is not None and not noise.is_ideal else None
        self._rates = self.noise.kind_rates() if self.noise is not None else None
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.script = dict(script) if script else None
        self.forced = list(forced) if forced is not None else None
        self.record = record
        self.locations: list[Location] = []
        self.noisy = True
        self.loc = 0
        self.prob = 1.0
        self.trace: list[float] = []
        self.outcome_log: list[int] = []
        self.gate_count = 0

    @property
    def n(self) -> int:
        return self.state.n

    @contextmanager
    def ideal(self):
        """Operations inside are noiseless and are not fault locations."""
        prev = self.noisy
        self.noisy = False
        try:
            yield self
        finally:
            self.noisy = prev

    # fault handling ----------------------------------------------------
    def _faults_for(self, ch: Chunk) -> list[tuple[int, int, int]]:
        faults: list[tuple[int, int, int]] = []
        if self.script is not None:
            for k in range(len(ch)):
                codes = self.script.get(self.loc + k)
                if codes is None:
                    continue
                faults.extend(self._expand(ch, k, codes))
        if self.noise is not None:
            hits = (self.rng.random(len(ch)) < self._rates[ch.kinds]).nonzero()[0]
            for k in hits.tolist():
                k = int(k)
                kind = int(ch.kinds[k])
                a = int(ch.ops[k, 1])
                if kind == KIND_MEASUREMENT:
                    faults.append((k, a, 4))
                elif kind == KIND_PREPARATION:
                    faults.append((k, a, 1))
                else:
                    ar = int(ch.arity[k])
                    codes = draw_damage(self.noise.damage_rule, ar, self.rng)
                    faults.extend(self._expand(ch, k, codes))
            if len(hits) and self.script is not None:
                faults.sort(key=lambda f: f[0])
        return faults

    @staticmethod
    def _expand(ch: Chunk, k: int, codes: Sequence[int]) -> list[tuple[int, int, int]]:
        qs = ch.gates[k].qubits
        if tuple(codes) == (4,):
            return [(k, qs[0], 4)]
        if len(codes) != len(qs):
            raise ValueError(f"fault {codes} does not fit {ch.gates[k]}")
        return [(k, q, int(c)) for q, c in zip(qs, codes) if c]

    # execution -----------------------------------------------------------
    def run(self, ch: Chunk) -> list[int]:
        """Execute a chunk; returns the recorded measurement outcomes."""
        if self.noisy:
            faults = self._faults_for(ch)
            if self.record:
                self.locations.extend(
                    Location(self.loc + k, int(ch.ops[k, 0]), g.qubits)
                    for k, g in enumerate(ch.gates))
            self.loc += len(ch)
        else:
            faults = []
        self.gate_count += len(ch)
        if self.dense:
            return self._run_dense(ch, faults)
        if not ch.clifford:
            raise ValueError("chunk has non-Clifford gates; use the dense simulator")
        rbits = self.rng.integers(0, 2, size=ch.n_rand, dtype=np.uint8) if ch.n_rand else _NO_BITS
        ft = np.array(faults, dtype=np.int32) if faults else _NO_FAULTS
        return self.state.run(ch.ops, ft, rbits)

    def _run_dense(self, ch: Chunk, faults) -> list[int]:
        forced = None
        if self.forced is not None:
            start = len(self.outcome_log)
            forced = [self.forced[start + i] if start + i < len(self.forced) else None
                      for i in range(ch.n_meas)]
            uniforms = [_BRANCH_U] * ch.n_rand
        else:
            uniforms = self.rng.random(ch.n_rand)
        trace: list[float] = []
        flips = {f[0] for f in faults if f[2] == 4}
        out, p = self.state.execute(ch.gates, faults, uniforms, forced, trace)
        self.prob *= p
        self.trace.extend(trace)
        # the branch log records physical outcomes, before any record flips
        mi = 0
        for k, g in enumerate(ch.gates):
            if g.name == "MEASURE":
                self.outcome_log.append(out[mi] ^ (1 if k in flips else 0))
                mi += 1
        return out

    # conveniences ----------------------------------------------------------
    def gate(self, name: str, *qubits: int) -> None:
        self.run(single_op(name.upper(), tuple(qubits)))

    def measure(self, q: int) -> int:
        return self.run(single_op("MEASURE", (q,)))[0]

    def reset(self, q: int) -> None:
        self.run(single_op("RESET", (q,)))

    def apply_pauli(self, q: int, code: int) -> None:
        """Noiseless Pauli (1=X, 2=Z, 3=Y), e.g. a deliberately injected error."""
        if code & 1:
            with self.ideal():
                self.gate("X", q)
        if code & 2:
            with self.ideal():
                self.gate("Z", q)

    def inject(self, e: PauliError) -> None:
        for q in e.support:
            self.apply_pauli(q, e.code(q))


# branch enumeration -----------------------------------------------------------


@dataclass
class Branch:
    outcomes: tuple[int, ...]
    probability: float
    result: Any
    machine: Machine


def enumerate_branches(make_state: Callable[[], PureState], protocol: Callable[[Machine], Any],
                       tol: float = 1e-12, limit: int = 1 << 14) -> list[Branch]:
    """Run ``protocol`` once per possible measurement record (noiseless, dense).

    Depth-first over outcome prefixes: each run follows its forced prefix and
    then takes outcome 0 where possible; every later measurement whose other
    outcome has probability above ``tol`` spawns a new prefix.
    """
    branches: list[Branch] = []
    stack: list[list[int]] = [[]]
    while stack:
        prefix = stack.pop()
        m = Machine(make_state(), forced=prefix)
        result = protocol(m)
        for i in range(len(prefix), len(m.trace)):
            if 1.0 - m.trace[i] > tol:
                stack.append(m.outcome_log[:i] + [1 - m.outcome_log[i]])
        branches.append(Branch(tuple(m.outcome_log), m.prob, result, m))
        if len(branches) > limit:
            raise RuntimeError("too many branches")
    return branches


# single-fault sweeps ------------------------------------------------------------

_PAULI_PAIRS = [c for c in itertools.product(range(4), repeat=2) if any(c)]


def fault_options(opcode: int, arity: int) -> list[tuple[int, ...]]:
    """Every single fault an operation can suffer under the noise model."""
    if opcode == OP_MEASURE:
        return [(4,)]
    if opcode == OP_RESET:
        return [(1,)]
    if arity == 1:
        return [(1,), (2,), (3,)]
    if arity == 2:
        return list(_PAULI_PAIRS)
    return [c for c in itertools.product(range(4), repeat=arity) if any(c)]


@dataclass
class SweepCase:
    location: Location
    codes: tuple[int, ...]
    result: Any


def single_fault_sweep(make_machine: Callable[..., Machine], protocol: Callable[[Machine], Any]
                       ) -> Iterator[SweepCase]:
    """Yield the protocol result for every single fault at every location.

    ``make_machine(script=..., record=...)`` must build an identically seeded
    machine each call, so the faulty runs agree with the fault-free one
    until the fault fires.
    """
    ref = make_machine(script=None, record=True)
    protocol(ref)
    for loc in ref.locations:
        for codes in fault_options(loc.opcode, len(loc.qubits)):
            m = make_machine(script={loc.index: codes}, record=False)
            yield SweepCase(loc, codes, protocol(m))
