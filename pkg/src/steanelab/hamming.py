"""The classical [7,4,3] Hamming code.

Words are bit-packed integers: position ``p`` (1..7) lives in bit ``p - 1``.
With the canonical check matrix, column ``p`` is the binary representation
of ``p``, so the syndrome of a word is the XOR of the positions of its set
bits and a nonzero syndrome names the flipped position directly.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

N_BITS = 7
FULL_WORD = (1 << N_BITS) - 1

# Rows of the canonical parity check matrix, first row is the syndrome MSB.
CHECK_MATRIX: tuple[tuple[int, ...], ...] = (
    (0, 0, 0, 1, 1, 1, 1),
    (0, 1, 1, 0, 0, 1, 1),
    (1, 0, 1, 0, 1, 0, 1),
)

# Alternative form used by the encoder; first three bits carry the data.
ENCODER_CHECK_MATRIX: tuple[tuple[int, ...], ...] = (
    (1, 0, 0, 1, 0, 1, 1),
    (0, 1, 0, 1, 1, 0, 1),
    (0, 0, 1, 1, 1, 1, 0),
)

# Column j of ENCODER_CHECK_MATRIX equals column ENCODER_TO_CANONICAL[j] of
# CHECK_MATRIX (1-based on both sides; index 0 unused).
ENCODER_TO_CANONICAL: tuple[int, ...] = (0, 4, 2, 1, 7, 3, 5, 6)


def _row_masks(matrix: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return tuple(sum(bit << k for k, bit in enumerate(row)) for row in matrix)


CHECK_ROWS: tuple[int, ...] = _row_masks(CHECK_MATRIX)
ENCODER_CHECK_ROWS: tuple[int, ...] = _row_masks(ENCODER_CHECK_MATRIX)


def word(bits: str | Iterable[int]) -> int:
    """Pack a 7-bit string such as ``"0001111"`` (position 1 first)."""
    seq = [int(b) for b in bits]
    if len(seq) != N_BITS or any(b not in (0, 1) for b in seq):
        raise ValueError(f"expected 7 binary digits, got {bits!r}")
    return sum(b << k for k, b in enumerate(seq))


def bits_of(w: int) -> str:
    return "".join(str((w >> k) & 1) for k in range(N_BITS))


def e(position: int) -> int:
    """Unit word with a one at ``position`` (1..7)."""
    if not 1 <= position <= N_BITS:
        raise ValueError(f"position out of range: {position}")
    return 1 << (position - 1)


def weight(w: int) -> int:
    return bin(w & FULL_WORD).count("1")


def support(w: int) -> tuple[int, ...]:
    return tuple(p for p in range(1, N_BITS + 1) if (w >> (p - 1)) & 1)


def syndrome_value(w: int) -> int:
    """Canonical syndrome as an integer 0..7."""
    return reduce(lambda acc, p: acc ^ p, support(w), 0)


def parity_check(w: int) -> tuple[int, int, int]:
    """H·w mod 2 with the canonical matrix, as a 3-tuple (MSB first)."""
    s = syndrome_value(w)
    return ((s >> 2) & 1, (s >> 1) & 1, s & 1)


def syndrome_to_int(s: Sequence[int]) -> int:
    return (s[0] << 2) | (s[1] << 1) | s[2]


def int_to_syndrome(value: int) -> tuple[int, int, int]:
    return ((value >> 2) & 1, (value >> 1) & 1, value & 1)


def check_with(matrix_rows: Sequence[int], w: int) -> tuple[int, ...]:
    """Apply an arbitrary check matrix given as row masks."""
    return tuple(weight(row & w) & 1 for row in matrix_rows)


def decode_single(w: int) -> tuple[int, int]:
    """Correct at most one flipped bit.

    Returns ``(corrected, position)`` where ``position`` is 0 when no error
    was detected. Two flips are silently miscorrected to a third codeword.
    """
    pos = syndrome_value(w)
    if pos == 0:
        return w, 0
    return w ^ e(pos), pos


def _span(rows: Sequence[int]) -> list[int]:
    out = [0]
    for r in rows:
        out += [x ^ r for x in out]
    return out


def codewords() -> tuple[frozenset[int], frozenset[int]]:
    """All 16 codewords split into ``(even_weight, odd_weight)``."""
    # kernel of H: even subcode is the row span, odd words are its complement coset
    even = _span(CHECK_ROWS)
    odd = [c ^ FULL_WORD for c in even]
    return frozenset(even), frozenset(odd)


def all_codewords() -> frozenset[int]:
    even, odd = codewords()
    return even | odd


def permute_encoder_to_canonical(w: int) -> int:
    """Relabel a word written in the encoder's column order."""
    out = 0
    for j in range(1, N_BITS + 1):
        if (w >> (j - 1)) & 1:
            out |= e(ENCODER_TO_CANONICAL[j])
    return out
