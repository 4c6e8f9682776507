"""Analytic error-rate formulas, the XOR flow estimate and resource counts.

Natural logarithms throughout; the block-size formula uses a ratio of logs
so the base does not matter there.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

XOR_GATES_PER_SYNDROME = 12
REPETITION_COEFFICIENT = 5
RECOVERY_FAILURE_COEFFICIENT = 2 * REPETITION_COEFFICIENT * XOR_GATES_PER_SYNDROME ** 2  # 1440

# Polynomial in N of the per-gate failure bound, times eps^2 / N.
FLOW_POLYNOMIAL = (21, 336, 1440)

# Physical qubits per encoded data qubit, beyond the block itself: room for
# the syndrome ancillas. A single documented knob.
ANCILLA_OVERHEAD_FACTOR = 2

DEFAULT_GATE_THRESHOLD = 1e-4
DEFAULT_STORAGE_THRESHOLD = 1e-5
TOFFOLI_TARGET = 1e-9
STORAGE_TARGET = 1e-12


class AboveThresholdError(ValueError):
    """Concatenation only helps below the threshold."""


def _check_prob(name: str, p: float, open_low: bool = False, open_high: bool = False) -> None:
    lo_ok = p > 0 if open_low else p >= 0
    hi_ok = p < 1 if open_high else p <= 1
    if not (lo_ok and hi_ok):
        raise ValueError(f"{name} out of range: {p}")


# block error and accuracy scaling ------------------------------------------------


def block_error_probability(t: int, b: float, eps: float) -> float:
    """(t^b eps)^(t+1): t+1 errors piling up in a circuit of size ~ t^b."""
    if t < 1:
        raise ValueError("t must be at least 1")
    if b <= 0:
        raise ValueError("b must be positive")
    _check_prob("eps", eps, open_high=True)
    try:
        return (t ** b * eps) ** (t + 1)
    except OverflowError:
        return math.inf


def _log_block_error(t: int, b: float, eps: float) -> float:
    return (t + 1) * (b * math.log(t) + math.log(eps))


@dataclass(frozen=True)
class OptimalT:
    t_opt: float
    min_error: float
    t_integer: int
    integer_error: float


def optimal_t_min_error(b: float, eps: float, t_max: int = 100) -> OptimalT:
    """Asymptotic optimum t ~ eps^(-1/b)/e with its error, plus the integer argmin."""
    if b <= 0:
        raise ValueError("b must be positive")
    _check_prob("eps", eps, open_low=True, open_high=True)
    t_opt = math.exp(-1) * eps ** (-1 / b)
    min_err = math.exp(-math.exp(-1) * b * eps ** (-1 / b))
    t_int = min(range(1, t_max + 1), key=lambda t: _log_block_error(t, b, eps))
    return OptimalT(t_opt, min_err, t_int, block_error_probability(t_int, b, eps))


def required_accuracy(T: float, b: float) -> float:
    """Per-gate accuracy (ln T)^(-b) needed for T steps."""
    if T <= 1:
        raise ValueError("T must exceed 1")
    return math.log(T) ** (-b)


# the XOR flow calculation -------------------------------------------------------------


def syndrome_error_rate(eps_xor: float) -> float:
    _check_prob("eps_xor", eps_xor)
    return XOR_GATES_PER_SYNDROME * eps_xor


def recovery_failure_rate(eps_xor: float) -> float:
    """2 * 5 * (12 eps)^2: two syndromes, each failing on two bad readings."""
    _check_prob("eps_xor", eps_xor)
    return RECOVERY_FAILURE_COEFFICIENT * eps_xor ** 2


def flow_coefficient(N: int) -> Fraction:
    """(21 N^2 + 336 N + 1440) / N, the eps^2 coefficient per gate."""
    if N < 1 or int(N) != N:
        raise ValueError("N must be a positive integer")
    a, b, c = FLOW_POLYNOMIAL
    return Fraction(a * N * N + b * N + c, N)


def gate_failure_rate(N: int, eps_xor: float) -> float:
    _check_prob("eps_xor", eps_xor)
    return float(flow_coefficient(N)) * eps_xor ** 2


def optimize_N(eps_xor: float = 1e-3, n_max: int = 1000) -> tuple[int, float]:
    """Integer N minimizing the per-gate failure, and that rate."""
    best = min(range(1, n_max + 1), key=flow_coefficient)
    return best, gate_failure_rate(best, eps_xor)


def threshold_estimate() -> float:
    """Rate where the encoded gate stops beating the bare one: 1 / coefficient."""
    n, _ = optimize_N()
    return 1.0 / float(flow_coefficient(n))


def flow_table(n_values=range(1, 17)) -> list[dict]:
    return [{"N": n, "coefficient": float(flow_coefficient(n)),
             "threshold": 1.0 / float(flow_coefficient(n))} for n in n_values]


# the agree-twice repetition oracle ---------------------------------------------------


@dataclass(frozen=True)
class RepetitionOracle:
    """Exact q^2 coefficient of the repeated-syndrome failure probability.

    Each reading is faulty with probability q; faulty readings never agree
    with anything, so the protocol stops at the first pair of consecutive
    good readings. A run fails when it contains at least two faulty readings.
    """

    coefficient: Fraction
    quoted_constant: int
    cutoff: int
    sequences: tuple[str, ...]
    tail_mass: Fraction

    def failure_probability(self, q: float) -> float:
        return repetition_failure_probability(q, self.cutoff)


def _terminating_sequences(cutoff: int):
    """All C/F strings of length <= cutoff ending at their first 'CC'."""
    for length in range(2, cutoff + 1):
        for seq in itertools.product("CF", repeat=length - 2):
            s = "".join(seq) + "CC"
            if "CC" not in s[:-1]:
                yield s


def _surviving_mass(q: Fraction | float, cutoff: int):
    """Probability of no agreement within ``cutoff`` readings."""
    # states: last reading good (g) or not (f); start counts as 'f'
    f, g = 1, 0
    p = 1 - q
    for _ in range(cutoff):
        f, g = (f + g) * q, f * p
    return f + g


def repetition_failure_probability(q: float, cutoff: int = 12) -> float:
    total = 0.0
    for s in _terminating_sequences(cutoff):
        nf = s.count("F")
        if nf >= 2:
            total += q ** nf * (1 - q) ** (len(s) - nf)
    return total


def repetition_failure_oracle(cutoff: int = 12, tail_tolerance: Fraction = Fraction(1, 10 ** 4)
                              ) -> RepetitionOracle:
    """Enumerate the documented model to ``cutoff`` readings.

    The q^2 coefficient is exact once every two-fault terminating sequence
    fits within the cutoff (the longest has length 6). The probability of
    running past the cutoff at q = 1/10 bounds the neglected tail and must
    stay below ``tail_tolerance``; it only shrinks for smaller q.
    """
    if cutoff < 6:
        raise ValueError("cutoff too small: two-fault sequences reach length 6")
    tail = _surviving_mass(Fraction(1, 10), cutoff)
    if tail > tail_tolerance:
        raise ValueError(f"cutoff too small for a certified tail ({float(tail):.2e})")
    two_fault = tuple(s for s in _terminating_sequences(cutoff) if s.count("F") == 2)
    return RepetitionOracle(Fraction(len(two_fault)), REPETITION_COEFFICIENT, cutoff,
                            two_fault, tail)


# concatenation -------------------------------------------------------------------------


_EXACT_LEVELS = 6


def concatenated_error(eps: float, eps0: float, L: int) -> float:
    """eps0 (eps / eps0)^(2^L)."""
    if L < 0:
        raise ValueError("L must be non-negative")
    if not 0 < eps0 <= 1:
        raise ValueError("eps0 must lie in (0, 1]")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if eps > eps0:
        raise AboveThresholdError("above threshold: concatenation diverges")
    if L <= _EXACT_LEVELS:
        # exact rational arithmetic on the decimal inputs, rounded once
        e, e0 = Fraction(repr(eps)), Fraction(repr(eps0))
        return float(e0 * (e / e0) ** (2 ** L))
    return eps0 * (eps / eps0) ** (2 ** L)


def required_levels(eps: float, eps0: float, target: float, max_levels: int = 64) -> int:
    """Smallest L with concatenated_error(eps, eps0, L) <= target."""
    if eps >= eps0 and target < eps0:
        raise AboveThresholdError("above threshold: no number of levels reaches the target")
    for L in range(max_levels + 1):
        if concatenated_error(eps, eps0, L) <= target:
            return L
    raise ValueError("target not reached within max_levels")


def block_size_exponent(n: int = 7, t: int = 1) -> float:
    return math.log(n) / math.log(t + 1)


def required_block_size(T: float, eps: float, eps0: float, n: int = 7, t: int = 1) -> float:
    """[log(eps0 T) / log(eps0 / eps)]^(log n / log(t+1)), order of magnitude only."""
    if eps0 * T <= 1:
        raise ValueError("need eps0 * T > 1")
    if eps > eps0:
        raise AboveThresholdError("above threshold")
    if eps == eps0:
        return math.inf
    if eps <= 0:
        raise ValueError("eps must be positive")
    return (math.log(eps0 * T) / math.log(eps0 / eps)) ** block_size_exponent(n, t)


# factoring resources ------------------------------------------------------------------------


@dataclass(frozen=True)
class ResourceEstimate:
    K: int
    toffoli_count: int
    encoded_qubits: int
    levels: int
    block_size: int
    physical_qubits: int

    @property
    def physical_qubits_order(self) -> int:
        """Power of ten nearest the physical qubit count."""
        return round(math.log10(self.physical_qubits))


def factoring_resources(K: int, eps_gate: float = 1e-6, eps_store: float = 1e-6,
                        eps0_gate: float = DEFAULT_GATE_THRESHOLD,
                        eps0_store: float = DEFAULT_STORAGE_THRESHOLD,
                        gate_target: float = TOFFOLI_TARGET, storage_target: float = STORAGE_TARGET,
                        ancilla_overhead_factor: float = ANCILLA_OVERHEAD_FACTOR
                        ) -> ResourceEstimate:
    """Gate and qubit counts for factoring a K-bit number with concatenated coding."""
    if K < 16:
        raise ValueError("K must be at least 16")
    if eps_gate > eps0_gate or eps_store > eps0_store:
        raise AboveThresholdError("physical error rates above threshold")
    levels = max(required_levels(eps_gate, eps0_gate, gate_target),
                 required_levels(eps_store, eps0_store, storage_target))
    encoded = 5 * K
    block = 7 ** levels
    return ResourceEstimate(K, 38 * K ** 3, encoded, levels, block,
                            int(round(encoded * block * ancilla_overhead_factor)))
