"""Stabilizer tableau simulation with stochastic Pauli noise.

The tableau core is compiled (Cython) when available and falls back to a
pure-Python implementation otherwise. Set ``STEANELAB_PURE_PYTHON=1`` to
force the fallback. Both cores consume randomness identically, so results do
not depend on which one is loaded.

Qubits are 0-based. A :class:`PauliError` is a pair of bit masks, bit ``q``
of ``x`` (``z``) meaning an X (Z) component on qubit ``q``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..statevec import Gate, LeakedQubitError
from ._pycore import (OP_CNOT, OP_CZ, OP_H, OP_IDLE, OP_MEASURE, OP_RESET, OP_S,
                      OP_SDG, OP_X, OP_Y, OP_Z, PyTableau)

OP_CCX = 11
OP_P_THETA = 12

OPCODES: dict[str, int] = {
    "X": OP_X, "Z": OP_Z, "Y": OP_Y, "H": OP_H, "S": OP_S, "SDG": OP_SDG,
    "CNOT": OP_CNOT, "CZ": OP_CZ, "MEASURE": OP_MEASURE, "RESET": OP_RESET,
    "IDLE": OP_IDLE, "CCX": OP_CCX, "P_THETA": OP_P_THETA,
}
OPNAMES: dict[int, str] = {v: k for k, v in OPCODES.items()}
CLIFFORD_OPCODES = frozenset(range(OP_IDLE + 1))

_force_python = os.environ.get("STEANELAB_PURE_PYTHON", "") not in ("", "0")
try:
    if _force_python:
        raise ImportError("pure Python requested")
    from ._ctableau import CTableau as _CompiledCore
except ImportError:  # pragma: no cover - exercised when the build is missing
    _CompiledCore = None

Core = _CompiledCore if _CompiledCore is not None else PyTableau
BACKEND = "cython" if _CompiledCore is not None else "python"


class NonCliffordGateError(ValueError):
    pass


# Pauli errors -----------------------------------------------------------

_CODE_CHARS = "IXZY"


@dataclass(frozen=True)
class PauliError:
    """Tensor product of single-qubit Paulis, phases ignored."""

    x: int = 0
    z: int = 0

    @classmethod
    def single(cls, qubit: int, kind: str | int) -> "PauliError":
        code = _CODE_CHARS.index(kind.upper()) if isinstance(kind, str) else int(kind)
        return cls(((code & 1)) << qubit, ((code >> 1) & 1) << qubit)

    @classmethod
    def from_codes(cls, codes: Mapping[int, int]) -> "PauliError":
        x = z = 0
        for q, c in codes.items():
            x |= (c & 1) << q
            z |= ((c >> 1) & 1) << q
        return cls(x, z)

    @classmethod
    def from_string(cls, s: str) -> "PauliError":
        """``"IXZY"`` puts X on qubit 1, Z on qubit 2, Y on qubit 3."""
        return cls.from_codes({q: _CODE_CHARS.index(ch) for q, ch in enumerate(s.upper())})

    def code(self, qubit: int) -> int:
        """1 = X, 2 = Z, 3 = Y, 0 = identity."""
        return ((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        return tuple(q for q in range(m.bit_length()) if (m >> q) & 1)

    @property
    def weight(self) -> int:
        return bin(self.x | self.z).count("1")

    def is_identity(self) -> bool:
        return not (self.x or self.z)

    def commutes_with(self, other: "PauliError") -> bool:
        return (bin(self.x & other.z).count("1") + bin(self.z & other.x).count("1")) % 2 == 0

    def __mul__(self, other: "PauliError") -> "PauliError":
        return PauliError(self.x ^ other.x, self.z ^ other.z)

    def to_string(self, n: int) -> str:
        return "".join(_CODE_CHARS[self.code(q)] for q in range(n))


IDENTITY = PauliError()


# noise model --------------------------------------------------------------

GATE_KINDS = ("one_qubit", "xor", "toffoli", "measurement", "preparation")
# kind index used by the executor: 0 is resting (storage), then GATE_KINDS
KIND_STORAGE, KIND_ONE_QUBIT, KIND_XOR, KIND_TOFFOLI, KIND_MEASUREMENT, KIND_PREPARATION = range(6)
DAMAGE_RULES = ("independent", "uniform")

_OP_KIND = {
    OP_X: KIND_ONE_QUBIT, OP_Z: KIND_ONE_QUBIT, OP_Y: KIND_ONE_QUBIT, OP_H: KIND_ONE_QUBIT,
    OP_S: KIND_ONE_QUBIT, OP_SDG: KIND_ONE_QUBIT, OP_P_THETA: KIND_ONE_QUBIT,
    OP_CNOT: KIND_XOR, OP_CZ: KIND_XOR, OP_CCX: KIND_TOFFOLI,
    OP_MEASURE: KIND_MEASUREMENT, OP_RESET: KIND_PREPARATION, OP_IDLE: KIND_STORAGE,
}


def op_kind(opcode: int) -> int:
    return _OP_KIND[opcode]


@dataclass(frozen=True)
class NoiseModel:
    """Independent stochastic Pauli noise.

    ``eps_store`` applies to each resting qubit per time step, ``eps_gate``
    maps a gate kind to its failure probability (missing kinds are
    noiseless). A failed multi-qubit gate damages every qubit it touches:
    under the ``"independent"`` rule each gets its own uniform X/Y/Z, under
    ``"uniform"`` the joint Pauli is uniform over the non-identity ones.
    """

    eps_store: float = 0.0
    eps_gate: Mapping[str, float] = field(default_factory=dict)
    damage_rule: str = "independent"

    def __post_init__(self):
        bad = set(self.eps_gate) - set(GATE_KINDS)
        if bad:
            raise ValueError(f"unknown gate kinds {sorted(bad)}")
        for name, p in [("eps_store", self.eps_store), *self.eps_gate.items()]:
            if not 0.0 <= float(p) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.damage_rule not in DAMAGE_RULES:
            raise ValueError(f"damage_rule must be one of {DAMAGE_RULES}")
        object.__setattr__(self, "eps_gate", MappingProxyType(dict(self.eps_gate)))

    @classmethod
    def uniform(cls, eps_store: float = 0.0, eps_gate: float = 0.0, **kw) -> "NoiseModel":
        return cls(eps_store, {k: eps_gate for k in GATE_KINDS}, **kw)

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls()

    def rate(self, kind: str) -> float:
        if kind in ("storage", "rest"):
            return float(self.eps_store)
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        return float(self.eps_gate.get(kind, 0.0))

    def kind_rates(self) -> np.ndarray:
        """Probabilities indexed by the executor's kind codes."""
        return np.array([self.eps_store] + [self.eps_gate.get(k, 0.0) for k in GATE_KINDS])

    @property
    def is_ideal(self) -> bool:
        return not self.kind_rates().any()

    def describe(self) -> dict:
        return {"eps_store": self.eps_store, "eps_gate": dict(self.eps_gate),
                "damage_rule": self.damage_rule}


def draw_damage(rule: str, n_touched: int, rng: np.random.Generator) -> list[int]:
    """Pauli codes (1=X, 2=Z, 3=Y) for the qubits of one failed operation."""
    if rule == "independent" or n_touched == 1:
        return [int(c) for c in rng.integers(1, 4, size=n_touched)]
    # uniform over the 4**k - 1 non-identity patterns
    v = int(rng.integers(1, 4 ** n_touched))
    return [(v >> (2 * i)) & 3 for i in range(n_touched)]


def sample_noise(model: NoiseModel, kind: str, qubits: Sequence[int],
                 rng: np.random.Generator) -> PauliError:
    """Draw the fault for one event.

    ``kind`` is ``"storage"`` for a resting time step (each listed qubit
    fails independently) or one of :data:`GATE_KINDS` for a gate touching
    ``qubits``. A failed measurement is returned as X on the measured qubit,
    the executor applies it to the classical record; a failed preparation
    is X on the fresh qubit.
    """
    p = model.rate(kind)
    if p == 0.0:
        return IDENTITY
    codes: dict[int, int] = {}
    if kind in ("storage", "rest"):
        for q in qubits:
            if rng.random() < p:
                codes[q] = int(rng.integers(1, 4))
    elif rng.random() < p:
        if kind in ("measurement", "preparation"):
            codes = {q: 1 for q in qubits}
        else:
            codes = dict(zip(qubits, draw_damage(model.damage_rule, len(qubits), rng)))
    return PauliError.from_codes(codes)


# tableau wrapper ----------------------------------------------------------


def compile_ops(gates: Iterable[Gate]) -> np.ndarray:
    """Op table with rows (opcode, a, b, c) for the tableau kernels."""
    rows = []
    for g in gates:
        q = tuple(g.qubits) + (0, 0, 0)
        rows.append((OPCODES[g.name], q[0], q[1], q[2]))
    return np.array(rows, dtype=np.int32).reshape(-1, 4)


def _gf2_rank(vectors: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


class StabilizerTableau:
    """Stabilizer state on ``n`` qubits with per-qubit leak flags."""

    def __init__(self, n: int, core=None):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.core = core if core is not None else Core(n)
        self.leaked = [False] * n

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau(self.n, self.core.copy())
        t.leaked = list(self.leaked)
        return t

    def _check(self, qubits: Sequence[int]) -> None:
        for q in qubits:
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range for {self.n} qubits")

    def apply(self, gate: Gate) -> None:
        """Apply a Clifford gate in place; identity if it touches a leaked qubit."""
        if gate.name in ("MEASURE", "RESET", "IDLE"):
            raise ValueError(f"{gate.name} is not a gate")
        if not gate.is_clifford:
            raise NonCliffordGateError(f"non-Clifford gate {gate.name} cannot run on a tableau")
        self._check(gate.qubits)
        if any(self.leaked[q] for q in gate.qubits):
            return
        getattr(self.core, gate.name.lower())(*gate.qubits)

    def measure(self, q: int, rbit: int) -> tuple[int, bool]:
        self._check((q,))
        if self.leaked[q]:
            raise LeakedQubitError(f"cannot measure leaked qubit {q}")
        return self.core.measure(q, int(rbit) & 1)

    def reset(self, q: int, rbit: int = 0) -> None:
        self._check((q,))
        self.core.reset(q, int(rbit) & 1)
        self.leaked[q] = False

    def leak(self, q: int) -> None:
        self.leaked[q] = True

    def inject(self, e: PauliError) -> None:
        if (e.x | e.z) >> self.n:
            raise IndexError("Pauli support outside the register")
        x, z = e.x, e.z
        for q in range(self.n):
            if self.leaked[q]:
                x &= ~(1 << q)
                z &= ~(1 << q)
        self.core.inject(x, z)

    def expectation(self, xmask: int, zmask: int = 0) -> int:
        """+1 or -1 if +-P stabilizes the state, 0 if P is not in the group."""
        return self.core.expectation(xmask, zmask)

    def stabilizers(self) -> list[tuple[int, int, int]]:
        """Generators as (xmask, zmask, sign bit)."""
        return self.core.stabilizer_rows()

    def rank(self) -> int:
        return _gf2_rank(x | (z << self.n) for x, z, _ in self.stabilizers())

    def generators_commute(self) -> bool:
        rows = self.stabilizers()
        for i, (xi, zi, _) in enumerate(rows):
            for xj, zj, _ in rows[i + 1:]:
                if (bin(xi & zj).count("1") + bin(zi & xj).count("1")) & 1:
                    return False
        return True

    def same_state(self, other: "StabilizerTableau") -> bool:
        if other.n != self.n:
            return False
        return all(self.expectation(x, z) == (-1) ** s for x, z, s in other.stabilizers())

    def run(self, ops: np.ndarray, faults, rbits) -> list[int]:
        """Execute an op table (see ``_pycore.PyTableau.run``)."""
        if not any(self.leaked):
            if BACKEND == "python":
                return self.core.run([tuple(int(v) for v in r) for r in ops],
                                     [tuple(int(v) for v in f) for f in faults],
                                     [int(b) for b in rbits])
            return self.core.run(ops, faults, rbits)
        return self._run_leaky(ops, faults, rbits)

    def _run_leaky(self, ops, faults, rbits) -> list[int]:
        out: list[int] = []
        faults = [tuple(int(v) for v in f) for f in faults]
        fi = slot = 0
        for k, (op, a, b, c) in enumerate(ops):
            op, a, b = int(op), int(a), int(b)
            rec = -1
            if op == OP_MEASURE:
                rec, _ = self.measure(a, rbits[slot])
                slot += 1
            elif op == OP_RESET:
                self.reset(a, rbits[slot])
                slot += 1
            elif op != OP_IDLE:
                name = OPNAMES[op]
                qs = (a, b) if op in (OP_CNOT, OP_CZ) else (a,)
                self.apply(Gate(name, qs))
            while fi < len(faults) and faults[fi][0] == k:
                _, q, code = faults[fi]
                if code == 4:
                    rec ^= 1
                elif not self.leaked[q]:
                    self.core.pauli(q, code)
                fi += 1
            if op == OP_MEASURE:
                out.append(rec)
        return out


# functional API -------------------------------------------------------------


def tableau_zero(n: int) -> StabilizerTableau:
    return StabilizerTableau(n)


def apply_clifford(t: StabilizerTableau, gate: Gate) -> StabilizerTableau:
    out = t.copy()
    out.apply(gate)
    return out


def measure_z(t: StabilizerTableau, qubit: int, rng: np.random.Generator
              ) -> tuple[int, StabilizerTableau, bool]:
    out = t.copy()
    outcome, det = out.measure(qubit, int(rng.integers(2)))
    return outcome, out, det


def inject(t: StabilizerTableau, e: PauliError) -> StabilizerTableau:
    out = t.copy()
    out.inject(e)
    return out


__all__ = [
    "BACKEND", "Core", "NonCliffordGateError", "PauliError", "IDENTITY", "NoiseModel",
    "GATE_KINDS", "StabilizerTableau", "tableau_zero", "apply_clifford", "measure_z",
    "inject", "sample_noise", "compile_ops", "op_kind", "OPCODES", "draw_damage",
]
