# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stabilizer tableau core.

Same column-major layout and algorithms as ``_pycore.PyTableau``: column
``q`` of the X (Z) part is ``W`` 64-bit words covering the ``2n`` tableau
rows. Results are bit-identical to the Python core for identical inputs.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t, uint8_t
from libc.string cimport memcpy, memset

cnp.import_array()

cdef enum:
    OP_X = 0
    OP_Z = 1
    OP_Y = 2
    OP_H = 3
    OP_S = 4
    OP_SDG = 5
    OP_CNOT = 6
    OP_CZ = 7
    OP_MEASURE = 8
    OP_RESET = 9
    OP_IDLE = 10

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


_U8 = np.dtype(np.uint8)
_I32 = np.dtype(np.int32)


cdef inline bint _is_u8(a):
    return type(a) is np.ndarray and a.dtype is _U8 and a.flags.c_contiguous


cdef _as_table(a, int width):
    # skip the conversion when the caller already hands over a packed table
    if (type(a) is np.ndarray and a.dtype is _I32 and a.ndim == 2
            and a.shape[1] == width and a.flags.c_contiguous):
        return a
    return np.ascontiguousarray(a, dtype=np.int32).reshape(-1, width)


cdef inline int popc(uint64_t v) noexcept nogil:
    return __builtin_popcountll(v)


cdef class CTableau:
    cdef public int n
    cdef int W
    cdef uint64_t[:, ::1] xs
    cdef uint64_t[:, ::1] zs
    cdef uint64_t[::1] r
    cdef uint64_t[::1] tmp_a
    cdef uint64_t[::1] tmp_b
    cdef uint64_t[::1] tmp_c
    cdef uint64_t[::1] tmp_d
    cdef uint64_t[::1] rowmask

    def __init__(self, int n, bint _blank=False):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.W = (2 * n + 63) // 64
        self.xs = np.zeros((n, self.W), dtype=np.uint64)
        self.zs = np.zeros((n, self.W), dtype=np.uint64)
        self.r = np.zeros(self.W, dtype=np.uint64)
        self.tmp_a = np.zeros(self.W, dtype=np.uint64)
        self.tmp_b = np.zeros(self.W, dtype=np.uint64)
        self.tmp_c = np.zeros(self.W, dtype=np.uint64)
        self.tmp_d = np.zeros(self.W, dtype=np.uint64)
        self.rowmask = np.zeros(self.W, dtype=np.uint64)
        cdef int q, row
        for row in range(2 * n):
            self.rowmask[row >> 6] |= (<uint64_t>1) << (row & 63)
        if not _blank:
            for q in range(n):
                self.xs[q, q >> 6] |= (<uint64_t>1) << (q & 63)
                row = n + q
                self.zs[q, row >> 6] |= (<uint64_t>1) << (row & 63)

    def copy(self):
        cdef CTableau t = CTableau(self.n, True)
        t.xs[:, :] = self.xs
        t.zs[:, :] = self.zs
        t.r[:] = self.r
        return t

    # gates ---------------------------------------------------------------
    cdef inline void _x(self, int q) noexcept nogil:
        cdef int w
        for w in range(self.W):
            self.r[w] ^= self.zs[q, w]

    cdef inline void _z(self, int q) noexcept nogil:
        cdef int w
        for w in range(self.W):
            self.r[w] ^= self.xs[q, w]

    cdef inline void _y(self, int q) noexcept nogil:
        cdef int w
        for w in range(self.W):
            self.r[w] ^= self.xs[q, w] ^ self.zs[q, w]

    cdef inline void _h(self, int q) noexcept nogil:
        cdef int w
        cdef uint64_t x, z
        for w in range(self.W):
            x = self.xs[q, w]
            z = self.zs[q, w]
            self.r[w] ^= x & z
            self.xs[q, w] = z
            self.zs[q, w] = x

    cdef inline void _s(self, int q) noexcept nogil:
        cdef int w
        cdef uint64_t x, z
        for w in range(self.W):
            x = self.xs[q, w]
            z = self.zs[q, w]
            self.r[w] ^= x & z
            self.zs[q, w] = z ^ x

    cdef inline void _sdg(self, int q) noexcept nogil:
        cdef int w
        cdef uint64_t x, z
        for w in range(self.W):
            x = self.xs[q, w]
            z = self.zs[q, w]
            self.r[w] ^= x & ~z & self.rowmask[w]
            self.zs[q, w] = z ^ x

    cdef inline void _cnot(self, int a, int b) noexcept nogil:
        cdef int w
        cdef uint64_t xa, za, xb, zb
        for w in range(self.W):
            xa = self.xs[a, w]
            za = self.zs[a, w]
            xb = self.xs[b, w]
            zb = self.zs[b, w]
            self.r[w] ^= xa & zb & ~(xb ^ za) & self.rowmask[w]
            self.xs[b, w] = xb ^ xa
            self.zs[a, w] = za ^ zb

    cdef inline void _cz(self, int a, int b) noexcept nogil:
        cdef int w
        cdef uint64_t xa, za, xb, zb
        for w in range(self.W):
            xa = self.xs[a, w]
            za = self.zs[a, w]
            xb = self.xs[b, w]
            zb = self.zs[b, w]
            self.r[w] ^= xa & xb & (za ^ zb)
            self.zs[a, w] = za ^ xb
            self.zs[b, w] = zb ^ xa

    cdef inline void _pauli(self, int q, int code) noexcept nogil:
        if code & 1:
            self._x(q)
        if code & 2:
            self._z(q)

    def x(self, int q): self._x(q)
    def z(self, int q): self._z(q)
    def y(self, int q): self._y(q)
    def h(self, int q): self._h(q)
    def s(self, int q): self._s(q)
    def sdg(self, int q): self._sdg(q)
    def cnot(self, int a, int b): self._cnot(a, b)
    def cz(self, int a, int b): self._cz(a, b)
    def pauli(self, int q, int code): self._pauli(q, code)

    def inject(self, xmask, zmask):
        cdef int q
        for q in range(self.n):
            if (xmask >> q) & 1:
                self._x(q)
            if (zmask >> q) & 1:
                self._z(q)

    # measurement ---------------------------------------------------------
    cdef inline int _xbit(self, int j, int i) noexcept nogil:
        return <int>((self.xs[j, i >> 6] >> (i & 63)) & 1)

    cdef inline int _zbit(self, int j, int i) noexcept nogil:
        return <int>((self.zs[j, i >> 6] >> (i & 63)) & 1)

    cdef inline int _rbit(self, int i) noexcept nogil:
        return <int>((self.r[i >> 6] >> (i & 63)) & 1)

    cdef inline int _abit(self, int i) noexcept nogil:
        return <int>((self.tmp_a[i >> 6] >> (i & 63)) & 1)

    cdef int _product_sign(self, uint64_t[::1] rows, int xz_target) noexcept nogil:
        """Sign of prod(rows) relative to the target Pauli (given |x&z| of target)."""
        cdef int j, w
        cdef long phase = 0
        cdef int cross = 0
        cdef uint64_t xj, zj, carry, y, s
        for w in range(self.W):
            phase += 2 * popc(self.r[w] & rows[w])
        for j in range(self.n):
            for w in range(self.W):
                xj = self.xs[j, w] & rows[w]
                zj = self.zs[j, w] & rows[w]
                phase += popc(xj & zj)
            # strict prefix parity of the z column, carried across words
            carry = 0
            for w in range(self.W):
                zj = self.zs[j, w] & rows[w]
                xj = self.xs[j, w] & rows[w]
                y = zj << 1
                s = 1
                while s < 64:
                    y ^= y << s
                    s <<= 1
                if carry:
                    y = ~y
                cross ^= popc(y & xj) & 1
                carry ^= <uint64_t>(popc(zj) & 1)
        phase += 2 * cross - xz_target
        phase %= 4
        if phase < 0:
            phase += 4
        return 1 if phase == 0 else -1

    cdef int _expectation(self, uint64_t[::1] xmw, uint64_t[::1] zmw, int xz_target) noexcept nogil:
        """xmw/zmw are qubit bitmasks packed in words (qubit j -> bit j)."""
        cdef int j, w, i, k
        cdef uint64_t[::1] acc = self.tmp_a
        cdef uint64_t[::1] rows = self.tmp_b
        for w in range(self.W):
            acc[w] = 0
        for j in range(self.n):
            if (xmw[j >> 6] >> (j & 63)) & 1:
                for w in range(self.W):
                    acc[w] ^= self.zs[j, w]
            if (zmw[j >> 6] >> (j & 63)) & 1:
                for w in range(self.W):
                    acc[w] ^= self.xs[j, w]
        # any anticommuting stabilizer row -> not in the group
        for i in range(self.n, 2 * self.n):
            if self._abit(i):
                return 0
        # rows = stabilizer partners of anticommuting destabilizers
        for w in range(self.W):
            rows[w] = 0
        for i in range(self.n):
            if self._abit(i):
                k = i + self.n
                rows[k >> 6] |= (<uint64_t>1) << (k & 63)
        return self._product_sign(rows, xz_target)

    def expectation(self, xm, zm):
        cdef int nw = (self.n + 63) // 64
        xa = np.zeros(max(nw, 1), dtype=np.uint64)
        za = np.zeros(max(nw, 1), dtype=np.uint64)
        cdef int j
        for j in range(self.n):
            if (xm >> j) & 1:
                xa[j >> 6] |= np.uint64(1) << np.uint64(j & 63)
            if (zm >> j) & 1:
                za[j >> 6] |= np.uint64(1) << np.uint64(j & 63)
        cdef int xz = bin(xm & zm).count("1")
        cdef uint64_t[::1] xv = xa
        cdef uint64_t[::1] zv = za
        return self._expectation(xv, zv, xz)

    cdef int _measure(self, int q, int rbit, int* det) noexcept nogil:
        cdef int n = self.n
        cdef int W = self.W
        cdef int i, j, w, p = -1, d
        cdef uint64_t word
        for i in range(n, 2 * n):
            if self._xbit(q, i):
                p = i
                break
        if p < 0:
            det[0] = 1
            return self._deterministic(q)
        det[0] = 0
        cdef uint64_t[::1] rows = self.tmp_a
        cdef uint64_t[::1] lo = self.tmp_b
        cdef uint64_t[::1] hi = self.tmp_c
        for w in range(W):
            rows[w] = self.xs[q, w]
            lo[w] = 0
            hi[w] = 0
        rows[p >> 6] &= ~((<uint64_t>1) << (p & 63))
        cdef int xp, zp
        cdef uint64_t xj, zj, plus, minus, carry, borrow
        for j in range(n):
            xp = self._xbit(j, p)
            zp = self._zbit(j, p)
            if not (xp or zp):
                continue
            for w in range(W):
                xj = self.xs[j, w]
                zj = self.zs[j, w]
                if xp and zp:
                    plus = zj & ~xj
                    minus = xj & ~zj
                elif xp:
                    plus = zj & xj
                    minus = zj & ~xj
                else:
                    plus = xj & ~zj
                    minus = xj & zj
                plus &= rows[w]
                minus &= rows[w]
                carry = lo[w] & plus
                lo[w] ^= plus
                hi[w] ^= carry
                borrow = ~lo[w] & minus
                lo[w] ^= minus
                hi[w] ^= borrow
                if xp:
                    self.xs[j, w] = xj ^ rows[w]
                if zp:
                    self.zs[j, w] = zj ^ rows[w]
        cdef uint64_t rp = (<uint64_t>0) - <uint64_t>self._rbit(p)
        for w in range(W):
            self.r[w] = (self.r[w] & ~rows[w]) | ((hi[w] ^ self.r[w] ^ rp) & rows[w])
        d = p - n
        cdef uint64_t dbit = (<uint64_t>1) << (d & 63)
        cdef uint64_t pbit = (<uint64_t>1) << (p & 63)
        cdef int dw = d >> 6, pw = p >> 6
        for j in range(n):
            if (self.xs[j, pw] >> (p & 63)) & 1:
                self.xs[j, dw] |= dbit
            else:
                self.xs[j, dw] &= ~dbit
            self.xs[j, pw] &= ~pbit
            if (self.zs[j, pw] >> (p & 63)) & 1:
                self.zs[j, dw] |= dbit
            else:
                self.zs[j, dw] &= ~dbit
            self.zs[j, pw] &= ~pbit
        if (self.r[pw] >> (p & 63)) & 1:
            self.r[dw] |= dbit
        else:
            self.r[dw] &= ~dbit
        self.zs[q, pw] |= pbit
        if rbit & 1:
            self.r[pw] |= pbit
        else:
            self.r[pw] &= ~pbit
        return rbit & 1

    cdef int _deterministic(self, int q) noexcept nogil:
        cdef int i, k, w
        cdef uint64_t[::1] rows = self.tmp_d
        for w in range(self.W):
            rows[w] = 0
        for i in range(self.n):
            if self._xbit(q, i):
                k = i + self.n
                rows[k >> 6] |= (<uint64_t>1) << (k & 63)
        return 0 if self._product_sign(rows, 0) == 1 else 1

    def measure(self, int q, int rbit):
        cdef int det = 0
        cdef int out = self._measure(q, rbit, &det)
        return out, bool(det)

    def reset(self, int q, int rbit):
        cdef int det = 0
        if self._measure(q, rbit, &det):
            self._x(q)

    def run(self, ops, faults, rbits):
        cdef const int32_t[:, ::1] o = _as_table(ops, 4)
        cdef const int32_t[:, ::1] f = _as_table(faults, 3)
        cdef const uint8_t[::1] rb = rbits if _is_u8(rbits) else np.ascontiguousarray(rbits, dtype=np.uint8)
        cdef int m = o.shape[0]
        cdef int nf = f.shape[0]
        cdef int k, fi = 0, slot = 0, code, rec, det = 0, nmeas = 0, op
        for k in range(m):
            if o[k, 0] == OP_MEASURE:
                nmeas += 1
        out = np.empty(nmeas, dtype=np.int8)
        cdef cnp.int8_t[::1] ov = out
        nmeas = 0
        with nogil:
            for k in range(m):
                op = o[k, 0]
                rec = -1
                if op == OP_CNOT:
                    self._cnot(o[k, 1], o[k, 2])
                elif op == OP_H:
                    self._h(o[k, 1])
                elif op == OP_MEASURE:
                    rec = self._measure(o[k, 1], rb[slot], &det)
                    slot += 1
                elif op == OP_RESET:
                    if self._measure(o[k, 1], rb[slot], &det):
                        self._x(o[k, 1])
                    slot += 1
                elif op == OP_X:
                    self._x(o[k, 1])
                elif op == OP_Z:
                    self._z(o[k, 1])
                elif op == OP_Y:
                    self._y(o[k, 1])
                elif op == OP_S:
                    self._s(o[k, 1])
                elif op == OP_SDG:
                    self._sdg(o[k, 1])
                elif op == OP_CZ:
                    self._cz(o[k, 1], o[k, 2])
                while fi < nf and f[fi, 0] == k:
                    code = f[fi, 2]
                    if code == 4:
                        rec ^= 1
                    else:
                        self._pauli(f[fi, 1], code)
                    fi += 1
                if op == OP_MEASURE:
                    ov[nmeas] = rec
                    nmeas += 1
        return out.tolist()

    # inspection ------------------------------------------------------------
    def row(self, int i):
        cdef int j
        x = 0
        z = 0
        for j in range(self.n):
            if self._xbit(j, i):
                x |= (<object>1) << j
            if self._zbit(j, i):
                z |= (<object>1) << j
        return x, z, self._rbit(i)

    def stabilizer_rows(self):
        return [self.row(self.n + i) for i in range(self.n)]

    def destabilizer_rows(self):
        return [self.row(i) for i in range(self.n)]
