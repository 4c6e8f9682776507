"""Steane's 7-qubit code: logical states, encoder and fault-tolerant recovery.

A block is seven physical qubits; position ``p`` (1..7) of the block is
column ``p`` of the canonical Hamming check matrix. Each Hamming row gives
one Z-type check (detecting bit flips) and one X-type check (detecting
phase flips).

Every protocol takes a :class:`~steanelab.machine.Machine` plus the physical
ancilla qubits it may use, so the same code runs on the dense simulator for
exact checks and on the tableau for Monte Carlo.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, TypeVar

import numpy as np

from . import hamming
from .machine import Chunk, Machine, chunk
from .stabsim import PauliError
from .statevec import Circuit, Gate, PureState

BLOCK_SIZE = 7
POSITIONS = tuple(range(1, BLOCK_SIZE + 1))

# Supports of the three check rows (row 0 is the syndrome MSB).
CHECK_SUPPORTS: tuple[tuple[int, ...], ...] = tuple(
    hamming.support(row) for row in hamming.CHECK_ROWS)

SHOR_RETRY_BUDGET = 16
STEANE_RETRY_BUDGET = 16
AGREEMENT_BUDGET = 8

# Encoder-form position holding the unknown input qubit.
ENCODER_INPUT_POSITION = 7


class RetryBudgetExceeded(RuntimeError):
    pass


class AgreementError(RuntimeError):
    pass


def find_logical_parity_support() -> tuple[int, ...]:
    """First weight-3 position set whose parity equals codeword parity.

    Measuring Z on these three qubits reads the logical value of any code
    state, because the overlap parity agrees with the weight parity on all
    16 Hamming codewords.
    """
    words = hamming.all_codewords()
    for triple in itertools.combinations(POSITIONS, 3):
        mask = sum(hamming.e(p) for p in triple)
        if all(hamming.weight(w & mask) % 2 == hamming.weight(w) % 2 for w in words):
            return triple
    raise RuntimeError("no weight-3 logical representative")


LOGICAL_PARITY_SUPPORT: tuple[int, ...] = (1, 2, 3)


# blocks and syndromes -------------------------------------------------------


@dataclass(frozen=True)
class CodeBlock:
    """Seven distinct physical qubits; ``qubits[p - 1]`` holds position ``p``."""

    qubits: tuple[int, ...]

    def __post_init__(self):
        qs = tuple(int(q) for q in self.qubits)
        if len(qs) != BLOCK_SIZE or len(set(qs)) != BLOCK_SIZE:
            raise ValueError(f"a block needs 7 distinct qubits, got {self.qubits}")
        object.__setattr__(self, "qubits", qs)

    @classmethod
    def at(cls, offset: int) -> "CodeBlock":
        return cls(tuple(range(offset, offset + BLOCK_SIZE)))

    def q(self, position: int) -> int:
        return self.qubits[position - 1]

    def mask(self, positions: Sequence[int] = POSITIONS) -> int:
        return sum(1 << self.q(p) for p in positions)

    def overlaps(self, other: "CodeBlock") -> bool:
        return bool(set(self.qubits) & set(other.qubits))


@dataclass(frozen=True)
class Syndrome:
    """Three bit-flip and three phase-flip parities, most significant first."""

    bit_flip: tuple[int, int, int] = (0, 0, 0)
    phase_flip: tuple[int, int, int] = (0, 0, 0)

    @property
    def bit_value(self) -> int:
        return hamming.syndrome_to_int(self.bit_flip)

    @property
    def phase_value(self) -> int:
        return hamming.syndrome_to_int(self.phase_flip)

    def is_zero(self) -> bool:
        return not (self.bit_value or self.phase_value)


@dataclass(frozen=True)
class RecoveryOp:
    """Positions (0 for none) receiving the X and Z corrections."""

    x_position: int = 0
    z_position: int = 0

    def __post_init__(self):
        for p in (self.x_position, self.z_position):
            if not 0 <= p <= BLOCK_SIZE:
                raise ValueError(f"position out of range: {p}")


def syndrome_lookup(error: PauliError) -> Syndrome:
    """Syndrome of a Pauli on one block position (bit ``q`` is position ``q + 1``)."""
    if error.weight > 1:
        raise ValueError("syndrome_lookup takes an error on at most one position")
    if error.is_identity():
        return Syndrome()
    p = error.support[0] + 1
    col = hamming.int_to_syndrome(p)
    zero = (0, 0, 0)
    code = error.code(p - 1)
    return Syndrome(col if code & 1 else zero, col if code & 2 else zero)


# logical states and the encoder ---------------------------------------------------


def _codeword_state(words) -> PureState:
    amps = np.zeros(1 << BLOCK_SIZE, dtype=complex)
    for w in words:
        amps[int(hamming.bits_of(w), 2)] = 1 / math.sqrt(len(words))
    return PureState(amps)


def logical_zero() -> PureState:
    """Equal superposition of the eight even-weight Hamming codewords."""
    return _codeword_state(hamming.codewords()[0])


def logical_one() -> PureState:
    """Equal superposition of the eight odd-weight Hamming codewords."""
    return _codeword_state(hamming.codewords()[1])


def logical_state(a: complex, b: complex) -> PureState:
    v = a * logical_zero().amps + b * logical_one().amps
    return PureState(v / np.linalg.norm(v))


def _encoder_to_canonical_qubit(j: int) -> int:
    return hamming.ENCODER_TO_CANONICAL[j] - 1


# Encoder row r covers data position r plus parity positions; Hadamard on the
# data positions and XORs along each row span the even codewords.
_ENCODER_FANOUT = {
    r + 1: tuple(c for c in hamming.support(row) if c != r + 1)
    for r, row in enumerate(hamming.ENCODER_CHECK_ROWS)
}


def _encoder_gates(with_input: bool) -> list[tuple[str, int, int] | tuple[str, int]]:
    steps: list = []
    if with_input:
        # copy the input onto the two other positions of 0000111
        steps += [("CNOT", 7, 6), ("CNOT", 7, 5)]
    steps += [("H", p) for p in (1, 2, 3)]
    for p in (1, 2, 3):
        steps += [("CNOT", p, c) for c in _ENCODER_FANOUT[p]]
    return steps


def encoder_circuit(labeling: str = "encoder") -> Circuit:
    """Seven-qubit encoder taking a|0> + b|1> to a|0>_L + b|1>_L.

    With ``labeling="encoder"`` qubit ``j - 1`` is column ``j`` of the
    encoder's check matrix and the input sits on the last qubit. With
    ``labeling="canonical"`` the same gates act on canonical positions and
    the input sits on qubit ``ENCODER_TO_CANONICAL[7] - 1``.
    """
    if labeling not in ("encoder", "canonical"):
        raise ValueError("labeling must be 'encoder' or 'canonical'")
    relabel = (lambda j: _encoder_to_canonical_qubit(j)) if labeling == "canonical" else (lambda j: j - 1)
    c = Circuit(BLOCK_SIZE)
    for name, *pos in _encoder_gates(True):
        c.append(name, *[relabel(j) for j in pos])
    return c


def encoder_input_qubit(labeling: str = "encoder") -> int:
    j = ENCODER_INPUT_POSITION
    return _encoder_to_canonical_qubit(j) if labeling == "canonical" else j - 1


def encoder_to_canonical_order() -> list[int]:
    """``order`` for :meth:`PureState.permuted` from encoder to canonical labels."""
    inv = {hamming.ENCODER_TO_CANONICAL[j]: j for j in POSITIONS}
    return [inv[p] - 1 for p in POSITIONS]


def encode(a: complex, b: complex, labeling: str = "canonical") -> PureState:
    """Run the encoder densely on a|0> + b|1> and return the canonical block state."""
    c = encoder_circuit("encoder")
    s = PureState.zero(BLOCK_SIZE)
    qin = encoder_input_qubit("encoder")
    nrm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    s.apply_1q(qin, np.array([[a / nrm, -np.conj(b) / nrm], [b / nrm, np.conj(a) / nrm]]))
    for g in c:
        s.apply_gate(g)
    return s.permuted(encoder_to_canonical_order()) if labeling == "canonical" else s


@lru_cache(maxsize=None)
def encode_zero_chunk(qubits: tuple[int, ...], reset: bool = True) -> Chunk:
    """Fresh |0>_L on ``qubits`` (canonical order): resets plus the input-free encoder."""
    steps: list = [("RESET", q) for q in qubits] if reset else []
    for name, *pos in _encoder_gates(False):
        steps.append((name, *[qubits[_encoder_to_canonical_qubit(j)] for j in pos]))
    return chunk(*steps)


@lru_cache(maxsize=None)
def encode_chunk(qubits: tuple[int, ...]) -> Chunk:
    """Full encoder on ``qubits`` (canonical order), input on the encoder's input qubit."""
    steps = []
    for name, *pos in _encoder_gates(True):
        steps.append((name, *[qubits[_encoder_to_canonical_qubit(j)] for j in pos]))
    return chunk(*steps)


def prepare_ideal(m: Machine, block: CodeBlock, kind: str = "zero", ref: int | None = None
                  ) -> None:
    """Noiselessly prepare |0>_L, |1>_L, |+>_L, or a logical Bell pair with ``ref``."""
    qs = block.qubits
    inp = qs[encoder_input_qubit("canonical")]
    with m.ideal():
        m.run(transversal_chunk("RESET", qs))
        if kind == "one":
            m.gate("X", inp)
        elif kind == "plus":
            m.gate("H", inp)
        elif kind == "bell":
            if ref is None:
                raise ValueError("a Bell pair needs a reference qubit")
            m.reset(ref)
            m.gate("H", ref)
            m.gate("CNOT", ref, inp)
        elif kind != "zero":
            raise ValueError(f"unknown logical state {kind!r}")
        m.run(encode_chunk(qs))


@lru_cache(maxsize=None)
def transversal_chunk(name: str, *blocks: tuple[int, ...]) -> Chunk:
    """The same gate applied position by position across one or more blocks."""
    return chunk(*[(name, *qs) for qs in zip(*blocks)])


# Shor-state syndrome extraction --------------------------------------------------


@lru_cache(maxsize=None)
def _cat_chunk(anc: tuple[int, ...]) -> Chunk:
    a, v = anc[:4], anc[4]
    steps = [("RESET", q) for q in anc]
    steps += [("H", a[0]), ("CNOT", a[0], a[1]), ("CNOT", a[1], a[2]), ("CNOT", a[2], a[3])]
    # parity of the two ends catches a single fault spreading to a pair
    steps += [("CNOT", a[0], v), ("CNOT", a[3], v), ("MEASURE", v)]
    return chunk(*steps)


def _prepare_cat(m: Machine, anc: Sequence[int], max_tries: int) -> int:
    ch = _cat_chunk(tuple(anc))
    for tries in range(1, max_tries + 1):
        if m.run(ch)[0] == 0:
            return tries
    raise RetryBudgetExceeded(f"cat state rejected {max_tries} times")


def prepare_shor_state(m: Machine, anc: Sequence[int], max_tries: int = SHOR_RETRY_BUDGET
                       ) -> tuple[tuple[int, ...], int]:
    """Verified 4-qubit Shor state on ``anc[:4]`` using ``anc[4]`` as verifier.

    Builds a cat state, checks its end parity on the verifier (discarding on
    outcome 1) and applies bitwise Hadamard. Returns the four qubits and the
    number of attempts.
    """
    tries = _prepare_cat(m, anc, max_tries)
    m.run(_hadamards(tuple(anc[:4])))
    return tuple(anc[:4]), tries


@lru_cache(maxsize=None)
def _hadamards(qs: tuple[int, ...]) -> Chunk:
    return chunk(*[("H", q) for q in qs])


@lru_cache(maxsize=None)
def _bit_check_chunk(data: tuple[int, ...], anc: tuple[int, ...]) -> Chunk:
    steps = [("CNOT", d, a) for d, a in zip(data, anc)]
    return chunk(*steps, *[("MEASURE", a) for a in anc])


@lru_cache(maxsize=None)
def _phase_check_chunk(data: tuple[int, ...], anc: tuple[int, ...]) -> Chunk:
    # ancilla-to-data XORs with Hadamards on the ancilla only
    steps = [("CNOT", a, d) for d, a in zip(data, anc)]
    steps += [("H", a) for a in anc]
    return chunk(*steps, *[("MEASURE", a) for a in anc])


def shor_check(m: Machine, block: CodeBlock, row: int, kind: str, anc: Sequence[int],
               max_tries: int = SHOR_RETRY_BUDGET) -> int:
    """One syndrome bit from one Shor state; ``kind`` is ``"bit"`` or ``"phase"``."""
    data = tuple(block.q(p) for p in CHECK_SUPPORTS[row])
    a = tuple(anc[:4])
    if kind == "bit":
        prepare_shor_state(m, anc, max_tries)
        out = m.run(_bit_check_chunk(data, a))
    elif kind == "phase":
        _prepare_cat(m, anc, max_tries)
        out = m.run(_phase_check_chunk(data, a))
    else:
        raise ValueError("kind must be 'bit' or 'phase'")
    return sum(out) & 1


def extract_syndrome_shor(m: Machine, block: CodeBlock, anc: Sequence[int]) -> Syndrome:
    """Six checks, one Shor state each; bit-flip checks first. ``anc`` has 5 qubits."""
    bits = tuple(shor_check(m, block, r, "bit", anc) for r in range(3))
    phases = tuple(shor_check(m, block, r, "phase", anc) for r in range(3))
    return Syndrome(bits, phases)


def shor_extraction_circuit(block: CodeBlock, anc: Sequence[int]) -> list[Gate]:
    """Gate list of one noiseless pass (for structural checks)."""
    a = tuple(anc)
    gates: list[Gate] = []
    for kind in ("bit", "phase"):
        for r in range(3):
            data = tuple(block.q(p) for p in CHECK_SUPPORTS[r])
            gates += _cat_chunk(a).gates
            if kind == "bit":
                gates += _hadamards(a[:4]).gates + _bit_check_chunk(data, a[:4]).gates
            else:
                gates += _phase_check_chunk(data, a[:4]).gates
    return gates


# Steane-state syndrome extraction ---------------------------------------------------


@lru_cache(maxsize=None)
def _steane_verify_chunk(anc: tuple[int, ...], ver: tuple[int, ...]) -> Chunk:
    # the checker is itself |0>_L, so reading it reveals bit flips but not the codeword
    steps = list(encode_zero_chunk(ver).gates)
    steps += [Gate("CNOT", (a, b)) for a, b in zip(anc, ver)]
    steps += [Gate("MEASURE", (b,)) for b in ver]
    return Chunk(steps)


def _word(bits: Sequence[int]) -> int:
    return sum(int(b) << k for k, b in enumerate(bits))


_EVEN_CODEWORDS = hamming.codewords()[0]


def prepare_steane_zero(m: Machine, anc: Sequence[int], verifier: Sequence[int] | None = None,
                        max_tries: int = STEANE_RETRY_BUDGET) -> int:
    """|0>_L on ``anc``, optionally verified against bit flips.

    Verification XORs the block into a second |0>_L on ``verifier`` and
    measures that; anything but an even codeword discards the ancilla.
    Returns the number of attempts.
    """
    a = tuple(anc)
    enc = encode_zero_chunk(a)
    if verifier is None:
        m.run(enc)
        return 1
    ver = _steane_verify_chunk(a, tuple(verifier))
    for tries in range(1, max_tries + 1):
        m.run(enc)
        if _word(m.run(ver)) in _EVEN_CODEWORDS:
            return tries
    raise RetryBudgetExceeded(f"Steane ancilla rejected {max_tries} times")


@lru_cache(maxsize=None)
def _steane_bit_chunk(data: tuple[int, ...], anc: tuple[int, ...]) -> Chunk:
    steps = [("H", a) for a in anc] + [("CNOT", d, a) for d, a in zip(data, anc)]
    return chunk(*steps, *[("MEASURE", a) for a in anc])


@lru_cache(maxsize=None)
def _steane_phase_chunk(data: tuple[int, ...], anc: tuple[int, ...]) -> Chunk:
    steps = [("CNOT", a, d) for d, a in zip(data, anc)] + [("H", a) for a in anc]
    return chunk(*steps, *[("MEASURE", a) for a in anc])


def extract_syndrome_steane(m: Machine, block: CodeBlock, anc: Sequence[int]) -> Syndrome:
    """Syndrome from two 7-qubit Steane ancillas (bit flips, then phase flips).

    ``anc`` holds 7 qubits, or 14 to verify each ancilla on the second seven.
    The measured ancilla word is a codeword shifted by the data error, so a
    classical Hamming check on it gives the syndrome.
    """
    a = tuple(anc[:7])
    ver = tuple(anc[7:14]) if len(anc) >= 14 else None
    prepare_steane_zero(m, a, ver)
    w_bit = _word(m.run(_steane_bit_chunk(block.qubits, a)))
    prepare_steane_zero(m, a, ver)
    w_phase = _word(m.run(_steane_phase_chunk(block.qubits, a)))
    return Syndrome(hamming.parity_check(w_bit), hamming.parity_check(w_phase))


def ancilla_size(method: str, verify: bool = True) -> int:
    if method == "shor":
        return 5
    if method == "steane":
        return 14 if verify else 7
    raise ValueError(f"unknown extraction method {method!r}")


def extractor(method: str) -> Callable[[Machine, CodeBlock, Sequence[int]], Syndrome]:
    if method == "shor":
        return extract_syndrome_shor
    if method == "steane":
        return extract_syndrome_steane
    raise ValueError(f"unknown extraction method {method!r}")


# agreement, recovery and logical measurement -------------------------------------------

T = TypeVar("T")


def repeat_until_agree(extract: Callable[[], T], max_rounds: int = AGREEMENT_BUDGET
                       ) -> tuple[T, int]:
    """Call ``extract`` until two consecutive results agree.

    Returns the agreed value and the number of calls.
    """
    if max_rounds < 2:
        raise ValueError("max_rounds must be at least 2")
    prev = extract()
    for rounds in range(2, max_rounds + 1):
        cur = extract()
        if cur == prev:
            return cur, rounds
        prev = cur
    raise AgreementError(f"no two consecutive agreeing results in {max_rounds} rounds")


def recover(m: Machine, block: CodeBlock, s: Syndrome) -> RecoveryOp:
    """Apply X and Z at the positions named by the two halves of ``s``."""
    op = RecoveryOp(s.bit_value, s.phase_value)
    if op.x_position:
        m.gate("X", block.q(op.x_position))
    if op.z_position:
        m.gate("Z", block.q(op.z_position))
    return op


def fault_tolerant_recovery(m: Machine, block: CodeBlock, anc: Sequence[int],
                            method: str = "steane", max_rounds: int = AGREEMENT_BUDGET
                            ) -> tuple[Syndrome, int, RecoveryOp]:
    """Extract until the syndrome repeats, then correct."""
    ext = extractor(method)
    s, rounds = repeat_until_agree(lambda: ext(m, block, anc), max_rounds)
    return s, rounds, recover(m, block, s)


def measure_logical_destructive(m: Machine, block: CodeBlock) -> int:
    """Measure all seven qubits, Hamming-correct the word and return its parity."""
    bits = m.run(transversal_chunk("MEASURE", block.qubits))
    corrected, _ = hamming.decode_single(_word(bits))
    return hamming.weight(corrected) & 1


@lru_cache(maxsize=None)
def _parity_copy_chunk(data: tuple[int, ...], anc: int) -> Chunk:
    return chunk(("RESET", anc), *[("CNOT", d, anc) for d in data], ("MEASURE", anc))


def measure_logical_nondestructive(m: Machine, block: CodeBlock, anc: int,
                                   recovery: Callable[[], object] | None = None,
                                   max_rounds: int = AGREEMENT_BUDGET) -> tuple[int, int]:
    """Copy the block parity onto ``anc`` until two consecutive readings agree.

    ``recovery`` runs between readings (error correction on the block).
    Returns the agreed logical value and the number of readings.
    """
    ch = _parity_copy_chunk(tuple(block.q(p) for p in LOGICAL_PARITY_SUPPORT), anc)
    first = [True]

    def read() -> int:
        if not first[0] and recovery is not None:
            recovery()
        first[0] = False
        return m.run(ch)[0]

    return repeat_until_agree(read, max_rounds)


def prepare_logical_zero_ft(m: Machine, block: CodeBlock, anc: Sequence[int], meas_anc: int,
                            method: str = "steane", max_rounds: int = AGREEMENT_BUDGET) -> int:
    """Project raw qubits onto the code, read the logical value, flip if it is 1.

    Returns the logical value that was read before the final correction.
    """
    m.run(transversal_chunk("RESET", block.qubits))

    def rec():
        fault_tolerant_recovery(m, block, anc, method, max_rounds)

    rec()
    value, _ = measure_logical_nondestructive(m, block, meas_anc, rec, max_rounds)
    if value:
        m.run(transversal_chunk("X", block.qubits))
    return value


# ideal decoding ---------------------------------------------------------------


@dataclass(frozen=True)
class DecodeResult:
    """Ideal decoding of one block: correction positions and logical signs.

    ``logical_z`` / ``logical_x`` are the expectations of the logical
    operators (times the optional reference operator) after the ideal
    correction; 0 means the value is not determined by the state.
    """

    x_position: int
    z_position: int
    logical_z: float
    logical_x: float


def _stab_sign(value: float) -> int:
    if value > 0.5:
        return 0
    if value < -0.5:
        return 1
    raise ValueError("block is not in an eigenstate of its checks")


def ideal_decode(state, block: CodeBlock, ref: int | None = None) -> DecodeResult:
    """Read checks and logical operators from expectations, no measurement.

    Works on a ``PureState`` or a ``StabilizerTableau``. With ``ref`` given,
    the logical operators are multiplied by Z (X) on the reference qubit, for
    blocks entangled with a noiseless partner.
    """
    zs = [_stab_sign(state.expectation(0, block.mask(sup))) for sup in CHECK_SUPPORTS]
    xs = [_stab_sign(state.expectation(block.mask(sup), 0)) for sup in CHECK_SUPPORTS]
    x_pos = hamming.syndrome_to_int(zs)
    z_pos = hamming.syndrome_to_int(xs)
    full = block.mask()
    rz = rx = 0
    if ref is not None:
        rz = rx = 1 << ref
    lz = state.expectation(0, full | rz) * (-1 if x_pos else 1)
    lx = state.expectation(full | rx, 0) * (-1 if z_pos else 1)
    return DecodeResult(x_pos, z_pos, float(lz), float(lx))


def residual_weight(state, block: CodeBlock) -> int:
    """Number of block positions needing correction (0, 1, or 2 if X and Z differ)."""
    d = ideal_decode(state, block)
    return len({p for p in (d.x_position, d.z_position) if p})
