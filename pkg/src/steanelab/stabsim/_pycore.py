"""Pure-Python stabilizer tableau core (fallback for the compiled kernel).

Destabilizer/stabilizer tableau in column-major form: ``xs[q]`` and ``zs[q]``
are integers whose bit ``i`` is the X (Z) component of tableau row ``i`` on
qubit ``q``; ``r`` holds the sign bits. Rows ``0..n-1`` are destabilizers,
rows ``n..2n-1`` stabilizers. A Clifford gate is a handful of big-int ops.
"""

from __future__ import annotations

OP_X, OP_Z, OP_Y, OP_H, OP_S, OP_SDG, OP_CNOT, OP_CZ, OP_MEASURE, OP_RESET, OP_IDLE = range(11)


def _prefix_parity(m: int, full: int, width: int) -> int:
    """Bit b of the result is the XOR of the bits of ``m`` strictly below b."""
    y = (m << 1) & full
    s = 1
    while s < width:
        y ^= (y << s) & full
        s <<= 1
    return y


class PyTableau:
    __slots__ = ("n", "xs", "zs", "r", "_full", "_stab", "_destab")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self._full = (1 << (2 * n)) - 1
        self._destab = (1 << n) - 1
        self._stab = self._full ^ self._destab
        self.xs = [1 << q for q in range(n)]
        self.zs = [1 << (n + q) for q in range(n)]
        self.r = 0

    def copy(self) -> "PyTableau":
        t = PyTableau.__new__(PyTableau)
        t.n = self.n
        t._full, t._stab, t._destab = self._full, self._stab, self._destab
        t.xs = list(self.xs)
        t.zs = list(self.zs)
        t.r = self.r
        return t

    # Clifford gates ------------------------------------------------------
    def x(self, q: int) -> None:
        self.r ^= self.zs[q]

    def z(self, q: int) -> None:
        self.r ^= self.xs[q]

    def y(self, q: int) -> None:
        self.r ^= self.xs[q] ^ self.zs[q]

    def h(self, q: int) -> None:
        x, z = self.xs[q], self.zs[q]
        self.r ^= x & z
        self.xs[q], self.zs[q] = z, x

    def s(self, q: int) -> None:
        x, z = self.xs[q], self.zs[q]
        self.r ^= x & z
        self.zs[q] = z ^ x

    def sdg(self, q: int) -> None:
        x, z = self.xs[q], self.zs[q]
        self.r ^= x & ~z & self._full
        self.zs[q] = z ^ x

    def cnot(self, a: int, b: int) -> None:
        xa, za, xb, zb = self.xs[a], self.zs[a], self.xs[b], self.zs[b]
        self.r ^= xa & zb & (xb ^ za ^ self._full)
        self.xs[b] = xb ^ xa
        self.zs[a] = za ^ zb

    def cz(self, a: int, b: int) -> None:
        xa, za, xb, zb = self.xs[a], self.zs[a], self.xs[b], self.zs[b]
        self.r ^= xa & xb & (za ^ zb)
        self.zs[a] = za ^ xb
        self.zs[b] = zb ^ xa

    def pauli(self, q: int, code: int) -> None:
        if code & 1:
            self.r ^= self.zs[q]
        if code & 2:
            self.r ^= self.xs[q]

    def inject(self, xmask: int, zmask: int) -> None:
        flip = 0
        q = 0
        while xmask or zmask:
            if xmask & 1:
                flip ^= self.zs[q]
            if zmask & 1:
                flip ^= self.xs[q]
            xmask >>= 1
            zmask >>= 1
            q += 1
        self.r ^= flip

    # measurement -----------------------------------------------------------
    def _product_sign(self, rows: int, xm: int, zm: int) -> int:
        """Sign c with (prod of ``rows`` in index order) = c * P(xm, zm)."""
        n, full = self.n, self._full
        width = 2 * n
        phase = 2 * bin(self.r & rows).count("1")
        cross = 0
        for j in range(n):
            xj = self.xs[j] & rows
            zj = self.zs[j] & rows
            if not (xj or zj):
                continue
            phase += bin(xj & zj).count("1")
            if xj and zj:
                cross ^= bin(_prefix_parity(zj, full, width) & xj).count("1") & 1
        phase += 2 * cross - bin(xm & zm).count("1")
        return 1 if phase % 4 == 0 else -1

    def expectation(self, xm: int, zm: int) -> int:
        """+1/-1 if the Pauli (or its negative) stabilizes the state, else 0."""
        acc = 0
        for j in range(self.n):
            if (xm >> j) & 1:
                acc ^= self.zs[j]
            if (zm >> j) & 1:
                acc ^= self.xs[j]
        if acc & self._stab:
            return 0
        rows = (acc & self._destab) << self.n
        return self._product_sign(rows, xm, zm)

    def measure(self, q: int, rbit: int) -> tuple[int, bool]:
        """Z measurement; ``rbit`` decides a random outcome. Returns (outcome, deterministic)."""
        n = self.n
        xq = self.xs[q]
        pmask = xq & self._stab
        if not pmask:
            return (0 if self.expectation(0, 1 << q) == 1 else 1), True
        p = (pmask & -pmask).bit_length() - 1
        pbit = 1 << p
        rows = xq & ~pbit
        lo = hi = 0
        for j in range(n):
            xj, zj = self.xs[j], self.zs[j]
            xp, zp = (xj >> p) & 1, (zj >> p) & 1
            if not (xp or zp):
                continue
            if xp and zp:
                plus, minus = zj & ~xj, xj & ~zj
            elif xp:
                plus, minus = zj & xj, zj & ~xj
            else:
                plus, minus = xj & ~zj, xj & zj
            plus &= rows
            minus &= rows
            carry = lo & plus
            lo ^= plus
            hi ^= carry
            borrow = ~lo & minus
            lo ^= minus
            hi ^= borrow
            if xp:
                self.xs[j] = xj ^ rows
            if zp:
                self.zs[j] = zj ^ rows
        rp = rows if (self.r >> p) & 1 else 0
        self.r = (self.r & ~rows) | ((hi ^ self.r ^ rp) & rows)
        d = p - n
        dbit = 1 << d
        for j in range(n):
            for cols in (self.xs, self.zs):
                v = cols[j]
                v = (v | dbit) if (v >> p) & 1 else (v & ~dbit)
                cols[j] = v & ~pbit
        self.r = (self.r | dbit) if (self.r >> p) & 1 else (self.r & ~dbit)
        self.zs[q] |= pbit
        outcome = rbit & 1
        self.r = (self.r | pbit) if outcome else (self.r & ~pbit)
        return outcome, False

    def reset(self, q: int, rbit: int) -> None:
        out, _ = self.measure(q, rbit)
        if out:
            self.r ^= self.zs[q]

    # program execution -----------------------------------------------------
    def run(self, ops, faults, rbits) -> list[int]:
        """Execute an op table.

        ``ops`` rows are (opcode, a, b, c); ``faults`` rows are
        (after_op, qubit, code) sorted by op, code 1=X 2=Z 3=Y 4=flip record;
        ``rbits`` has one bit per MEASURE/RESET op.
        """
        out: list[int] = []
        fi = 0
        nf = len(faults)
        slot = 0
        for k in range(len(ops)):
            op, a, b, _ = ops[k]
            rec = -1
            if op == OP_CNOT:
                self.cnot(a, b)
            elif op == OP_H:
                self.h(a)
            elif op == OP_MEASURE:
                rec, _ = self.measure(a, rbits[slot])
                slot += 1
            elif op == OP_RESET:
                self.reset(a, rbits[slot])
                slot += 1
            elif op == OP_X:
                self.x(a)
            elif op == OP_Z:
                self.z(a)
            elif op == OP_Y:
                self.y(a)
            elif op == OP_S:
                self.s(a)
            elif op == OP_SDG:
                self.sdg(a)
            elif op == OP_CZ:
                self.cz(a, b)
            while fi < nf and faults[fi][0] == k:
                code = faults[fi][2]
                if code == 4:
                    rec ^= 1
                else:
                    self.pauli(faults[fi][1], code)
                fi += 1
            if op == OP_MEASURE:
                out.append(rec)
        return out

    # inspection -------------------------------------------------------------
    def row(self, i: int) -> tuple[int, int, int]:
        """Row-major (xmask, zmask, sign_bit) of tableau row ``i``."""
        x = z = 0
        for j in range(self.n):
            x |= ((self.xs[j] >> i) & 1) << j
            z |= ((self.zs[j] >> i) & 1) << j
        return x, z, (self.r >> i) & 1

    def stabilizer_rows(self) -> list[tuple[int, int, int]]:
        return [self.row(self.n + i) for i in range(self.n)]

    def destabilizer_rows(self) -> list[tuple[int, int, int]]:
        return [self.row(i) for i in range(self.n)]
