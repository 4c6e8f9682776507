"""Fault-tolerant logical gates on Steane blocks.

Transversal NOT, Hadamard, phase and XOR; the measurement-assisted Toffoli
gadget with its three-block ancilla; the two phase-rotation gadgets; and
leak detection with erasure recovery.

Gadgets that are block-size agnostic take blocks as plain qubit tuples so
they run at block size 1 (unencoded, for dense checks) or 7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import steane_code as sc
from .machine import Chunk, Machine, chunk
from .statevec import Gate, PureState

# invented constants, see tests for the derivation -------------------------------

# e^{i theta0} = (1 + 3i) / (3 + i)
THETA0 = math.atan2(4.0, 3.0)
THETA0_PHASE = complex(3, 4) / 5
THETA0_SUCCESS_PROBABILITY = 5 / 8

ROTATION_RETRY_BUDGET = 64
TOFFOLI_AGREEMENT_BUDGET = 8
CAT_RETRY_BUDGET = 16

# Fixups after the data measurements of the Toffoli gadget, applied in the
# order z, y, x. Entries are (gate, ancilla blocks by index 0..2).
TOFFOLI_FIXUPS: dict[str, tuple[tuple[str, tuple[int, ...]], ...]] = {
    "z": (("CZ", (0, 1)), ("Z", (2,))),
    "y": (("X", (1,)), ("CNOT", (0, 2))),
    "x": (("X", (0,)), ("CNOT", (1, 2))),
}

CLEAN = "clean"
LEAKED = "leaked"


class LibraryExhausted(RuntimeError):
    pass


@dataclass
class LogicalGateReport:
    kind: str
    blocks: tuple[tuple[int, ...], ...]
    physical_gates: int
    transcript: list[int] = field(default_factory=list)
    fixups: list[str] = field(default_factory=list)


def _as_qubits(block) -> tuple[int, ...]:
    return block.qubits if isinstance(block, sc.CodeBlock) else tuple(block)


def _report(m: Machine, start: int, kind: str, blocks, transcript=(), fixups=()) -> LogicalGateReport:
    return LogicalGateReport(kind, tuple(_as_qubits(b) for b in blocks), m.gate_count - start,
                             list(transcript), list(fixups))


# transversal gates -------------------------------------------------------------


def logical_not(m: Machine, block, variant: str = "bitwise") -> LogicalGateReport:
    """Logical NOT: X on all seven qubits, or on a weight-3 logical representative."""
    qs = _as_qubits(block)
    start = m.gate_count
    if variant == "bitwise":
        m.run(sc.transversal_chunk("X", qs))
    elif variant == "weight3":
        m.run(chunk(*[("X", qs[p - 1]) for p in sc.LOGICAL_PARITY_SUPPORT]))
    else:
        raise ValueError("variant must be 'bitwise' or 'weight3'")
    return _report(m, start, "NOT", [qs])


def logical_hadamard(m: Machine, block) -> LogicalGateReport:
    qs = _as_qubits(block)
    start = m.gate_count
    m.run(sc.transversal_chunk("H", qs))
    return _report(m, start, "H", [qs])


def logical_phase(m: Machine, block) -> LogicalGateReport:
    """Logical P by bitwise P^-1: odd codewords have weight 3 mod 4."""
    qs = _as_qubits(block)
    start = m.gate_count
    m.run(sc.transversal_chunk("SDG", qs))
    return _report(m, start, "P", [qs])


def logical_xor(m: Machine, source, target) -> LogicalGateReport:
    """Position-wise XOR of the source block into the target block."""
    s, t = _as_qubits(source), _as_qubits(target)
    if set(s) & set(t):
        raise ValueError("source and target blocks overlap")
    if len(s) != len(t):
        raise ValueError("blocks differ in size")
    start = m.gate_count
    m.run(sc.transversal_chunk("CNOT", s, t))
    return _report(m, start, "XOR", [s, t])


# Toffoli gadget -------------------------------------------------------------------


@lru_cache(maxsize=None)
def _cat_prep_chunk(cat: tuple[int, ...], checker: int | None) -> Chunk:
    steps: list = [("RESET", q) for q in cat] + [("H", cat[0])]
    steps += [("CNOT", a, b) for a, b in zip(cat, cat[1:])]
    if checker is not None:
        for a, b in zip(cat, cat[1:]):
            steps += [("RESET", checker), ("CNOT", a, checker), ("CNOT", b, checker),
                      ("MEASURE", checker)]
    return chunk(*steps)


def prepare_cat(m: Machine, cat: Sequence[int], checker: int | None = None,
                max_tries: int = CAT_RETRY_BUDGET) -> int:
    """(|0..0> + |1..1>)/sqrt2 on ``cat``, checking adjacent pairs on ``checker``."""
    cat = tuple(cat)
    if len(cat) > 1 and checker is None:
        raise ValueError("a multi-qubit cat state needs a checker qubit")
    ch = _cat_prep_chunk(cat, checker if len(cat) > 1 else None)
    for tries in range(1, max_tries + 1):
        if not any(m.run(ch)):
            return tries
    raise sc.RetryBudgetExceeded(f"cat state rejected {max_tries} times")


@lru_cache(maxsize=None)
def _toffoli_parity_chunk(a1: tuple[int, ...], a2: tuple[int, ...], a3: tuple[int, ...],
                          cat: tuple[int, ...]) -> Chunk:
    steps = [("CZ", q, c) for q, c in zip(a3, cat)]
    steps += [("H", c) for c in cat]
    steps += [("CCX", p, q, c) for p, q, c in zip(a1, a2, cat)]
    steps += [("MEASURE", c) for c in cat]
    return chunk(*steps)


def toffoli_ancilla_block_prep(m: Machine, blocks: Sequence[Sequence[int]]) -> None:
    """Each ancilla block in the logical |+> state."""
    for qs in blocks:
        qs = tuple(qs)
        if len(qs) == 1:
            m.run(chunk(("RESET", qs[0]), ("H", qs[0])))
        else:
            m.run(sc.encode_zero_chunk(qs))
            m.run(sc.transversal_chunk("H", qs))


def prepare_toffoli_ancilla(m: Machine, blocks: Sequence[Sequence[int]], cat: Sequence[int],
                            checker: int | None = None,
                            max_rounds: int = TOFFOLI_AGREEMENT_BUDGET) -> tuple[int, int]:
    """Three blocks in sum_{a,b} |a, b, ab> / 2 via a cat-state parity measurement.

    Starting from |+>|+>|+>, each reading measures c xor ab through a fresh
    cat state; readings repeat until two agree and an odd result is repaired
    with NOT on the third block. Returns (agreed parity, readings).
    """
    a1, a2, a3 = (tuple(b) for b in blocks)
    cat = tuple(cat)
    if not len(a1) == len(a2) == len(a3) == len(cat):
        raise ValueError("ancilla blocks and cat register must have the same size")
    toffoli_ancilla_block_prep(m, (a1, a2, a3))
    ch = _toffoli_parity_chunk(a1, a2, a3, cat)

    def reading() -> int:
        prepare_cat(m, cat, checker)
        return sum(m.run(ch)) & 1

    parity, rounds = sc.repeat_until_agree(reading, max_rounds)
    if parity:
        m.run(sc.transversal_chunk("X", a3))
    return parity, rounds


def prepare_toffoli_ancilla_branch(m: Machine, blocks: Sequence[sc.CodeBlock], a: int, b: int
                                   ) -> None:
    """One computational term |a, b, ab> of the ancilla, prepared noiselessly.

    The full ancilla is not a stabilizer state; the tableau runs the gadget's
    Clifford part on each term.
    """
    for blk, v in zip(blocks, (a, b, a & b)):
        sc.prepare_ideal(m, blk, "one" if v else "zero")


def _measure_block(m: Machine, qs: tuple[int, ...]) -> int:
    if len(qs) == 1:
        return m.measure(qs[0])
    return sc.measure_logical_destructive(m, sc.CodeBlock(qs))


def _apply_fixup(m: Machine, anc: Sequence[tuple[int, ...]], key: str) -> None:
    for name, idx in TOFFOLI_FIXUPS[key]:
        m.run(sc.transversal_chunk(name, *[anc[i] for i in idx]))


def logical_toffoli(m: Machine, x, y, z, anc: Sequence[Sequence[int]],
                    cat: Sequence[int] | None = None, checker: int | None = None,
                    prepare: bool = True) -> tuple[tuple[tuple[int, ...], ...], LogicalGateReport]:
    """Toffoli on data blocks (x, y, z) consumed into the ancilla blocks.

    With ``prepare`` the ancilla is built first (needs ``cat``); otherwise
    the caller has already placed it. The data blocks are measured and
    destroyed; the returned ancilla blocks hold |x, y, z xor xy>.
    """
    xq, yq, zq = (_as_qubits(b) for b in (x, y, z))
    anc = tuple(tuple(_as_qubits(b)) for b in anc)
    start = m.gate_count
    transcript: list[int] = []
    if prepare:
        if cat is None:
            raise ValueError("preparing the ancilla needs a cat register")
        parity, _ = prepare_toffoli_ancilla(m, anc, cat, checker)
        transcript.append(parity)
    m.run(sc.transversal_chunk("CNOT", anc[0], xq))
    m.run(sc.transversal_chunk("CNOT", anc[1], yq))
    m.run(sc.transversal_chunk("CNOT", zq, anc[2]))
    m.run(sc.transversal_chunk("H", zq))
    mx, my, mz = (_measure_block(m, q) for q in (xq, yq, zq))
    transcript += [mx, my, mz]
    fixups = []
    for key, bit in (("z", mz), ("y", my), ("x", mx)):
        if bit:
            _apply_fixup(m, anc, key)
            fixups.append(key)
    return anc, _report(m, start, "TOFFOLI", [xq, yq, zq, *anc], transcript, fixups)


def toffoli_ancilla_circuit(b: int, blocks: Sequence[Sequence[int]], cat: Sequence[int],
                            checker: int | None = None) -> list[Gate]:
    """Gates of one ancilla attempt (block prep, cat prep, parity reading)."""
    a1, a2, a3 = (tuple(q) for q in blocks)
    gates: list[Gate] = []
    for qs in (a1, a2, a3):
        if b == 1:
            gates += [Gate("RESET", qs), Gate("H", qs)]
        else:
            gates += list(sc.encode_zero_chunk(qs).gates) + list(sc.transversal_chunk("H", qs).gates)
    gates += _cat_prep_chunk(tuple(cat), checker if b > 1 else None).gates
    gates += _toffoli_parity_chunk(a1, a2, a3, tuple(cat)).gates
    return gates


# rotation gadgets -------------------------------------------------------------------


@lru_cache(maxsize=None)
def _theta0_chunk(d: int, a1: int, a2: int) -> Chunk:
    return chunk(("RESET", a1), ("RESET", a2), ("H", a1), ("H", a2),
                 ("CCX", a1, a2, d), ("S", d), ("CCX", a1, a2, d),
                 ("H", a1), ("H", a2), ("MEASURE", a1), ("MEASURE", a2))


def rotate_theta0(m: Machine, d: int, a1: int, a2: int,
                  max_tries: int = ROTATION_RETRY_BUDGET) -> tuple[int, list[tuple[int, int]]]:
    """Apply P(theta0), cos theta0 = 3/5, using two ancillas per attempt.

    Outcome (0, 0) applies the rotation; any other outcome applies Z, which
    is undone before the next attempt. Returns attempts and outcome pairs.
    """
    ch = _theta0_chunk(d, a1, a2)
    record: list[tuple[int, int]] = []
    for tries in range(1, max_tries + 1):
        out = tuple(m.run(ch))
        record.append(out)
        if out == (0, 0):
            return tries, record
        m.gate("Z", d)
    raise sc.RetryBudgetExceeded(f"theta0 rotation failed {max_tries} times")


@dataclass(frozen=True)
class AngleLibraryEntry:
    """A stored qubit (|0> + e^{i theta}|1>)/sqrt2."""

    theta: float

    def state(self) -> PureState:
        return PureState(np.array([1, np.exp(1j * self.theta)]) / math.sqrt(2))


def angle_library(theta: float, size: int) -> list[AngleLibraryEntry]:
    """Entries for theta, 2 theta, 4 theta, ... as consumed by the doubling schedule."""
    return [AngleLibraryEntry(theta * 2 ** k) for k in range(size)]


@lru_cache(maxsize=None)
def _library_chunk(d: int, anc: int, theta: float) -> Chunk:
    # withdraw the angle qubit, then XOR the data into it
    return Chunk([Gate("RESET", (anc,)), Gate("H", (anc,)), Gate("P_THETA", (anc,), theta),
                  Gate("CNOT", (d, anc)), Gate("MEASURE", (anc,))])


def rotate_from_library(m: Machine, d: int, library: Sequence[AngleLibraryEntry], anc: int
                        ) -> tuple[int, list[int]]:
    """Apply P(theta) with angle qubits theta, 2 theta, 4 theta, ...

    Outcome 0 applies the requested angle; outcome 1 applies its negative.
    After k failures the data carries P(-(2^k - 1) theta), so entry k (angle
    2^k theta) lands exactly on P(theta). Returns attempts and outcomes.
    """
    if not library:
        raise LibraryExhausted("empty angle library")
    theta = library[0].theta
    outcomes: list[int] = []
    for k, entry in enumerate(library):
        if not math.isclose(entry.theta, theta * 2 ** k, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(f"library entry {k} has angle {entry.theta}, expected {theta * 2 ** k}")
        out = m.run(_library_chunk(d, anc, entry.theta))[0]
        outcomes.append(out)
        if out == 0:
            return k + 1, outcomes
    raise LibraryExhausted(f"all {len(library)} angle qubits failed")


# leakage ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _leak_chunk(d: int, anc: int) -> Chunk:
    return chunk(("RESET", anc), ("X", d), ("CNOT", d, anc), ("X", d), ("CNOT", d, anc),
                 ("MEASURE", anc))


def leak_detect(m: Machine, d: int, anc: int) -> str:
    """Outcome 1 (always, for a qubit in its computational space) means clean.

    Both XORs fire exactly once between the two NOTs, so an unleaked qubit
    always flips the ancilla once; a leaked one never acts.
    """
    return CLEAN if m.run(_leak_chunk(d, anc))[0] == 1 else LEAKED


def recover_erasure(m: Machine, block: sc.CodeBlock, position: int, anc: Sequence[int],
                    max_rounds: int = sc.AGREEMENT_BUDGET) -> sc.RecoveryOp:
    """Replace the qubit at a known bad position and undo the damage there.

    The qubit is swapped for a fresh |0>; only the checks containing that
    position are measured (via Shor states), and X or Z is applied at the
    position when any of them fires.
    """
    if position == 0:
        return sc.RecoveryOp()
    if not 1 <= position <= sc.BLOCK_SIZE:
        raise ValueError(f"position out of range: {position}")
    m.reset(block.q(position))
    rows = [r for r, sup in enumerate(sc.CHECK_SUPPORTS) if position in sup]

    def restricted() -> tuple[tuple[int, ...], tuple[int, ...]]:
        bits = tuple(sc.shor_check(m, block, r, "bit", anc) for r in rows)
        phases = tuple(sc.shor_check(m, block, r, "phase", anc) for r in rows)
        return bits, phases

    (bits, phases), _ = sc.repeat_until_agree(restricted, max_rounds)
    op = sc.RecoveryOp(position if any(bits) else 0, position if any(phases) else 0)
    if op.x_position:
        m.gate("X", block.q(position))
    if op.z_position:
        m.gate("Z", block.q(position))
    return op
