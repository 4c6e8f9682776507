"""Dense state-vector simulator for exact checks.

Qubit 0 is the most significant bit of the basis index, so the amplitude of
``|q0 q1 ... q(n-1)>`` sits at ``int("q0q1...", 2)``. Leaked qubits are a
classical flag: every gate touching one is the identity and measuring one
raises.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-10

ONE_QUBIT = ("X", "Y", "Z", "H", "S", "SDG", "P_THETA")
TWO_QUBIT = ("CNOT", "CZ")
THREE_QUBIT = ("CCX",)
CLIFFORD = ("X", "Y", "Z", "H", "S", "SDG", "CNOT", "CZ")
NON_UNITARY = ("MEASURE", "RESET", "IDLE")
ALL_OPS = ONE_QUBIT + TWO_QUBIT + THREE_QUBIT + NON_UNITARY

# Aliases following the usual textbook names.
_ALIASES = {
    "NOT": "X",
    "R": "H",
    "HADAMARD": "H",
    "P": "S",
    "PHASE": "S",
    "P_INV": "SDG",
    "XOR": "CNOT",
    "CX": "CNOT",
    "TOFFOLI": "CCX",
    "M": "MEASURE",
    "PREP": "RESET",
}

_ARITY = {**{k: 1 for k in ONE_QUBIT}, **{k: 2 for k in TWO_QUBIT},
          "CCX": 3, "MEASURE": 1, "RESET": 1, "IDLE": 1}


class QubitCapError(ValueError):
    pass


class LeakedQubitError(RuntimeError):
    pass


class ZeroProbabilityBranch(RuntimeError):
    """A forced measurement outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class Gate:
    """One circuit step: a unitary gate, a measurement, a reset or an idle tick."""

    name: str
    qubits: tuple[int, ...]
    theta: float = 0.0

    def __post_init__(self):
        name = _ALIASES.get(self.name.upper(), self.name.upper())
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if name not in _ARITY:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.qubits) != _ARITY[name]:
            raise ValueError(f"{name} takes {_ARITY[name]} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {name}{self.qubits}")

    @property
    def is_clifford(self) -> bool:
        return self.name in CLIFFORD


def Measure(q: int) -> Gate:
    return Gate("MEASURE", (q,))


def Reset(q: int) -> Gate:
    return Gate("RESET", (q,))


@dataclass
class Circuit:
    n: int
    steps: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.steps:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if any(not 0 <= q < self.n for q in g.qubits):
            raise IndexError(f"{g} outside {self.n} qubits")

    def append(self, name: str, *qubits: int, theta: float = 0.0) -> "Circuit":
        g = Gate(name, qubits, theta)
        self._check(g)
        self.steps.append(g)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self._check(g)
            self.steps.append(g)
        return self

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def n_measurements(self) -> int:
        return sum(g.name == "MEASURE" for g in self.steps)


def _matrix(name: str, theta: float = 0.0) -> np.ndarray:
    s = 1 / math.sqrt(2)
    if name == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if name == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if name == "Z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if name == "H":
        return np.array([[s, s], [s, -s]], dtype=complex)
    if name == "S":
        return np.array([[1, 0], [0, 1j]], dtype=complex)
    if name == "SDG":
        return np.array([[1, 0], [0, -1j]], dtype=complex)
    if name == "P_THETA":
        return np.array([[1, 0], [0, cmath.exp(1j * theta)]], dtype=complex)
    raise ValueError(name)


class PureState:
    """A normalized pure state on ``n`` qubits plus per-qubit leak flags."""

    def __init__(self, amplitudes: np.ndarray, leaked: Sequence[bool] | None = None):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(math.log2(amps.size))) if amps.size else 0
        if amps.size != 1 << n or n < 1:
            raise ValueError("amplitude count must be a power of two >= 2")
        if n > MAX_QUBITS:
            raise QubitCapError(f"qubit cap exceeded: {n} > {MAX_QUBITS}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state not normalized (norm {norm:.12f})")
        self.n = n
        self.amps = amps.copy()
        self.leaked = [bool(x) for x in leaked] if leaked is not None else [False] * n

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "PureState":
        return cls.basis(n, 0)

    @classmethod
    def basis(cls, n: int, index: int | str) -> "PureState":
        if not 1 <= n <= MAX_QUBITS:
            raise QubitCapError(f"qubit cap exceeded: n={n} not in 1..{MAX_QUBITS}")
        if isinstance(index, str):
            index = int(index, 2)
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1
        return cls(amps)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "PureState":
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        return cls(v / np.linalg.norm(v))

    def copy(self) -> "PureState":
        return PureState(self.amps, self.leaked)

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(np.kron(self.amps, other.amps), self.leaked + other.leaked)

    # views -------------------------------------------------------------
    def _view(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probability_one(self, q: int) -> float:
        v = self._view()
        idx = [slice(None)] * self.n
        idx[q] = 1
        return float(np.sum(np.abs(v[tuple(idx)]) ** 2))

    # gates -------------------------------------------------------------
    def _touch_leaked(self, qubits: Sequence[int]) -> bool:
        return any(self.leaked[q] for q in qubits)

    def _check_index(self, qubits: Sequence[int]) -> None:
        for q in qubits:
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range for {self.n} qubits")

    def apply_1q(self, q: int, u: np.ndarray) -> None:
        v = self._view()
        a = np.moveaxis(v, q, 0)
        a0, a1 = a[0].copy(), a[1].copy()
        a[0] = u[0, 0] * a0 + u[0, 1] * a1
        a[1] = u[1, 0] * a0 + u[1, 1] * a1

    def _controlled_flip(self, controls: Sequence[int], target: int) -> None:
        v = self._view()
        idx = [slice(None)] * self.n
        for c in controls:
            idx[c] = 1
        sub = v[tuple(idx)]
        # target axis index inside the sliced view
        t_axis = target - sum(1 for c in controls if c < target)
        sub[...] = np.flip(sub, axis=t_axis).copy()

    def _cz(self, a: int, b: int) -> None:
        v = self._view()
        idx = [slice(None)] * self.n
        idx[a] = 1
        idx[b] = 1
        v[tuple(idx)] *= -1

    def apply_gate(self, g: Gate) -> None:
        """Apply a unitary gate in place (identity if it touches a leaked qubit)."""
        self._check_index(g.qubits)
        if g.name in NON_UNITARY:
            raise ValueError(f"{g.name} is not a unitary gate")
        if self._touch_leaked(g.qubits):
            return
        if g.name in ONE_QUBIT:
            self.apply_1q(g.qubits[0], _matrix(g.name, g.theta))
        elif g.name == "CNOT":
            self._controlled_flip(g.qubits[:1], g.qubits[1])
        elif g.name == "CZ":
            self._cz(*g.qubits)
        elif g.name == "CCX":
            self._controlled_flip(g.qubits[:2], g.qubits[2])

    def apply_pauli(self, q: int, code: int) -> None:
        """Pauli by code 1=X, 2=Z, 3=Y (as X then Z; global phase dropped)."""
        if self.leaked[q] or code == 0:
            return
        if code & 1:
            self.apply_1q(q, _matrix("X"))
        if code & 2:
            self.apply_1q(q, _matrix("Z"))

    def measure(self, q: int, u: float | None = None, outcome: int | None = None
                ) -> tuple[int, float]:
        """Projective Z measurement of qubit ``q``.

        The outcome is 0 when ``u < P(0)``; pass ``outcome`` to force a branch.
        Returns ``(outcome, probability_of_that_outcome)``.
        """
        self._check_index((q,))
        if self.leaked[q]:
            raise LeakedQubitError(f"cannot measure leaked qubit {q}")
        return self._project(q, u, outcome)

    def _project(self, q: int, u: float | None, outcome: int | None) -> tuple[int, float]:
        p1 = self.probability_one(q)
        p0 = 1.0 - p1
        if outcome is None:
            if u is None:
                raise ValueError("need a uniform draw or a forced outcome")
            outcome = 0 if u < p0 else 1
        p = p1 if outcome else p0
        if p < 1e-14:
            raise ZeroProbabilityBranch(f"outcome {outcome} on qubit {q} has probability {p:.3g}")
        v = self._view()
        idx = [slice(None)] * self.n
        idx[q] = 1 - outcome
        v[tuple(idx)] = 0
        self.amps /= math.sqrt(p)
        return outcome, p

    def reset(self, q: int, u: float | None = None, outcome: int | None = None) -> float:
        """Replace qubit ``q`` with a fresh |0>; a leaked qubit is swapped out.

        Returns the probability of the (possibly forced) collapse branch.
        """
        self._check_index((q,))
        if outcome is None and u is None:
            u = 0.0
        out, p = self._project(q, u, outcome)
        self.leaked[q] = False
        if out:
            self.apply_1q(q, _matrix("X"))
        return p

    def leak(self, q: int) -> None:
        self.leaked[q] = True

    # analysis ----------------------------------------------------------
    def subsystem(self, qubits: Sequence[int], fixed: dict[int, int]) -> np.ndarray:
        """Amplitudes on ``qubits`` given the other qubits sit in basis ``fixed``.

        The result is renormalized; every qubit not listed in ``qubits`` must
        appear in ``fixed``.
        """
        rest = [q for q in range(self.n) if q not in qubits]
        if set(rest) != set(fixed):
            raise ValueError("fix every qubit outside the subsystem")
        v = self._view()
        idx = [slice(None)] * self.n
        for q, b in fixed.items():
            idx[q] = b
        sub = v[tuple(idx)]
        kept = sorted(qubits)
        sub = np.transpose(sub, [kept.index(q) for q in qubits]).ravel()
        nrm = np.linalg.norm(sub)
        if nrm < 1e-12:
            raise ValueError("subsystem branch has zero weight")
        return sub / nrm

    def classical_value(self, q: int, tol: float = 1e-9) -> int | None:
        """0 or 1 if qubit ``q`` is in a definite basis state, else None."""
        p1 = self.probability_one(q)
        if p1 < tol:
            return 0
        if p1 > 1 - tol:
            return 1
        return None

    def factor_out(self, keep: Sequence[int]) -> np.ndarray:
        """Amplitudes on ``keep`` when every other qubit is classical.

        Measured ancillas end in basis states, so the kept register is then a
        pure state of its own. Raises if some other qubit is not classical.
        """
        fixed = {}
        for q in range(self.n):
            if q in keep:
                continue
            v = self.classical_value(q)
            if v is None:
                raise ValueError(f"qubit {q} is not in a definite basis state")
            fixed[q] = v
        return self.subsystem(keep, fixed)

    def permuted(self, order: Sequence[int]) -> "PureState":
        """State whose qubit k is this state's qubit ``order[k]``."""
        v = np.transpose(self._view(), list(order)).ravel()
        return PureState(v, [self.leaked[q] for q in order])

    def expectation(self, xmask: int, zmask: int) -> float:
        """<P> for the Pauli with X on ``xmask`` and Z on ``zmask`` (bit q = qubit q)."""
        w = self.copy()
        for q in range(self.n):
            x, z = (xmask >> q) & 1, (zmask >> q) & 1
            if z:
                w.apply_1q(q, _matrix("Z"))
            if x:
                w.apply_1q(q, _matrix("X"))
            if x and z:
                w.amps *= 1j  # Y = i X Z
        return float(np.real(np.vdot(self.amps, w.amps)))

    # machine interface -------------------------------------------------
    def execute(self, steps: Sequence[Gate], faults: Sequence[tuple[int, int, int]],
                uniforms: Sequence[float], forced: Sequence[int | None] | None = None,
                trace: list[float] | None = None) -> tuple[list[int], float]:
        """Run ``steps`` with Pauli ``faults`` = (after_step, qubit, code).

        ``uniforms`` holds one draw per MEASURE/RESET step. Code 4 flips the
        recorded outcome of a MEASURE step. ``forced`` optionally overrides the
        outcome of each MEASURE step (``None`` entries draw). The probability
        of every MEASURE branch taken is appended to ``trace`` when given.
        Returns outcomes and the product of those probabilities.
        """
        outcomes: list[int] = []
        prob = 1.0
        fi = 0
        slot = 0
        mcount = 0
        nf = len(faults)
        for k, g in enumerate(steps):
            flip = 0
            if g.name == "MEASURE":
                want = forced[mcount] if forced is not None else None
                out, p = self.measure(g.qubits[0], uniforms[slot], want)
                prob *= p
                if trace is not None:
                    trace.append(p)
                slot += 1
                mcount += 1
            elif g.name == "RESET":
                self.reset(g.qubits[0], uniforms[slot])
                slot += 1
            elif g.name != "IDLE":
                self.apply_gate(g)
            while fi < nf and faults[fi][0] == k:
                _, q, code = faults[fi]
                if code == 4:
                    flip ^= 1
                else:
                    self.apply_pauli(q, code)
                fi += 1
            if g.name == "MEASURE":
                outcomes.append(out ^ flip)
        return outcomes, prob


# functional API -------------------------------------------------------


def zero_state(n: int) -> PureState:
    return PureState.zero(n)


def apply(state: PureState, gate: Gate) -> PureState:
    out = state.copy()
    out.apply_gate(gate)
    return out


def measure(state: PureState, qubit: int, rng: np.random.Generator) -> tuple[int, PureState]:
    out = state.copy()
    outcome, _ = out.measure(qubit, float(rng.random()))
    return outcome, out


def fidelity(a: PureState | np.ndarray, b: PureState | np.ndarray) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    va = a.amps if isinstance(a, PureState) else np.asarray(a, dtype=complex).ravel()
    vb = b.amps if isinstance(b, PureState) else np.asarray(b, dtype=complex).ravel()
    if va.shape != vb.shape:
        raise ValueError(f"size mismatch: {va.size} vs {vb.size} amplitudes")
    return float(min(1.0, abs(np.vdot(va, vb)) ** 2))


def run(circuit: Circuit, initial: PureState, rng: np.random.Generator
        ) -> tuple[PureState, list[int]]:
    if circuit.n != initial.n:
        raise ValueError(f"circuit has {circuit.n} qubits, state has {initial.n}")
    state = initial.copy()
    uniforms = rng.random(sum(g.name in ("MEASURE", "RESET") for g in circuit))
    transcript, _ = state.execute(circuit.steps, (), uniforms)
    return state, transcript


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Full matrix of a measurement-free circuit (columns are images of basis states)."""
    dim = 1 << circuit.n
    cols = []
    for i in range(dim):
        s = PureState.basis(circuit.n, i)
        for g in circuit:
            s.apply_gate(g)
        cols.append(s.amps)
    return np.array(cols).T
