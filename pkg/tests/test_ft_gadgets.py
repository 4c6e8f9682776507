import itertools
import math

import numpy as np
import pytest

from steanelab import ft_gadgets as fg
from steanelab import steane_code as sc
from steanelab.machine import Machine, enumerate_branches
from steanelab.stabsim import StabilizerTableau
from steanelab.statevec import Gate, PureState, fidelity

BLK = sc.CodeBlock.at(0)


def _on_logical(a, b, gadget):
    m = Machine(sc.logical_state(a, b))
    gadget(m)
    return m.state


def test_bitwise_not_and_weight_three_not():
    for variant in ("bitwise", "weight3"):
        out = _on_logical(1, 0, lambda m: fg.logical_not(m, BLK, variant))
        assert fidelity(out, sc.logical_one()) > 1 - 1e-10
    with pytest.raises(ValueError):
        fg.logical_not(Machine(StabilizerTableau(7)), BLK, "other")


def test_transversal_hadamard_and_phase():
    a, b = 0.6, 0.8j
    out = _on_logical(a, b, lambda m: fg.logical_hadamard(m, BLK))
    want = sc.logical_state((a + b) / math.sqrt(2), (a - b) / math.sqrt(2))
    assert fidelity(out, want) > 1 - 1e-10
    out = _on_logical(a, b, lambda m: fg.logical_phase(m, BLK))
    assert fidelity(out, sc.logical_state(a, 1j * b)) > 1 - 1e-10


@pytest.mark.parametrize("x,y", list(itertools.product((0, 1), repeat=2)))
def test_transversal_xor_on_tableau(x, y):
    a, b = sc.CodeBlock.at(0), sc.CodeBlock.at(7)
    m = Machine(StabilizerTableau(14))
    sc.prepare_ideal(m, a, "one" if x else "zero")
    sc.prepare_ideal(m, b, "one" if y else "zero")
    rep = fg.logical_xor(m, a, b)
    assert rep.physical_gates == 7
    assert sc.ideal_decode(m.state, b).logical_z == (-1) ** (x ^ y)
    assert sc.ideal_decode(m.state, a).logical_z == (-1) ** x


def test_xor_rejects_overlap():
    with pytest.raises(ValueError):
        fg.logical_xor(Machine(StabilizerTableau(13)), sc.CodeBlock.at(0), sc.CodeBlock.at(6))


def _toffoli_target(psi):
    s = psi.copy()
    s.apply_gate(Gate("CCX", (0, 1, 2)))
    return s


INPUTS = [PureState.basis(3, i) for i in range(8)]
INPUTS += [PureState.random(3, np.random.default_rng(100 + k)) for k in range(4)]


@pytest.mark.parametrize("psi", INPUTS, ids=[f"in{i}" for i in range(len(INPUTS))])
def test_unencoded_toffoli_every_branch(psi):
    def proto(m):
        return fg.logical_toffoli(m, (0,), (1,), (2,), ((3,), (4,), (5,)), cat=(6,))

    branches = enumerate_branches(lambda: psi.tensor(PureState.zero(4)), proto)
    assert len(branches) == 16
    assert abs(sum(b.probability for b in branches) - 1) < 1e-10
    target = _toffoli_target(psi)
    for b in branches:
        assert fidelity(b.machine.state.factor_out([3, 4, 5]), target) > 1 - 1e-10


def test_toffoli_ancilla_state():
    m = Machine(PureState.zero(4), rng=np.random.default_rng(0))
    fg.prepare_toffoli_ancilla(m, ((0,), (1,), (2,)), (3,))
    amps = m.state.factor_out([0, 1, 2])
    want = np.zeros(8)
    for a, b in itertools.product((0, 1), repeat=2):
        want[4 * a + 2 * b + (a & b)] = 0.5
    assert fidelity(amps, want) > 1 - 1e-10


@pytest.mark.parametrize("x,y,z", list(itertools.product((0, 1), repeat=3)))
@pytest.mark.parametrize("a,b", list(itertools.product((0, 1), repeat=2)))
def test_encoded_toffoli_skeleton_on_ancilla_terms(x, y, z, a, b):
    """Each basis term of the encoded ancilla maps to |x, y, z xor xy>."""
    blocks = [sc.CodeBlock.at(7 * k) for k in range(6)]
    m = Machine(StabilizerTableau(42), rng=np.random.default_rng(4 * a + b))
    for blk, v in zip(blocks[:3], (x, y, z)):
        sc.prepare_ideal(m, blk, "one" if v else "zero")
    fg.prepare_toffoli_ancilla_branch(m, blocks[3:], a, b)
    anc, rep = fg.logical_toffoli(m, *blocks[:3], blocks[3:], prepare=False)
    got = [sc.ideal_decode(m.state, sc.CodeBlock(q)).logical_z for q in anc]
    assert got == [(-1) ** x, (-1) ** y, (-1) ** (z ^ (x & y))]
    assert rep.kind == "TOFFOLI" and len(rep.transcript) == 3


def test_seven_qubit_cat_is_verified():
    m = Machine(PureState.zero(8), rng=np.random.default_rng(2))
    assert fg.prepare_cat(m, range(7), checker=7) == 1
    amps = m.state.factor_out(list(range(7)))
    assert abs(amps[0]) ** 2 == pytest.approx(0.5) and abs(amps[-1]) ** 2 == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fg.prepare_cat(m, range(7))


def test_encoded_ancilla_circuit_shape():
    blocks = [tuple(range(7 * k, 7 * k + 7)) for k in range(3)]
    gates = fg.toffoli_ancilla_circuit(7, blocks, tuple(range(21, 28)), 28)
    assert sum(g.name == "CCX" for g in gates) == 7
    assert sum(g.name == "CZ" for g in gates) == 7


def test_theta0_success_branch_phase():
    def proto(m):
        m.gate("H", 0)
        return tuple(m.run(fg._theta0_chunk(0, 1, 2)))

    branches = enumerate_branches(lambda: PureState.zero(3), proto)
    ok = [b for b in branches if b.result == (0, 0)]
    assert sum(b.probability for b in ok) == pytest.approx(5 / 8, abs=1e-12)
    v = ok[0].machine.state.factor_out([0])
    assert v[1] / v[0] == pytest.approx(fg.THETA0_PHASE, abs=1e-10)
    assert fg.THETA0_PHASE == pytest.approx((1 + 3j) / (3 + 1j))
    assert math.cos(fg.THETA0) == pytest.approx(3 / 5)


def test_theta0_repeats_until_success():
    m = Machine(PureState.zero(3), rng=np.random.default_rng(7))
    m.gate("H", 0)
    tries, record = fg.rotate_theta0(m, 0, 1, 2)
    assert record[-1] == (0, 0) and len(record) == tries
    v = m.state.factor_out([0])
    assert fidelity(v, np.array([1, fg.THETA0_PHASE]) / math.sqrt(2)) > 1 - 1e-10


def test_library_rotation_lands_on_target_angle():
    theta = 0.7
    for seed in range(10):
        m = Machine(PureState.zero(2), rng=np.random.default_rng(seed))
        m.gate("H", 0)
        tries, outs = fg.rotate_from_library(m, 0, fg.angle_library(theta, 20), 1)
        assert outs[-1] == 0 and all(outs[:-1])
        v = m.state.factor_out([0])
        assert fidelity(v, np.array([1, np.exp(1j * theta)]) / math.sqrt(2)) > 1 - 1e-10


def test_library_validation():
    m = Machine(PureState.zero(2))
    with pytest.raises(fg.LibraryExhausted):
        fg.rotate_from_library(m, 0, [], 1)
    with pytest.raises(ValueError):
        # a mismatched entry is only reached after a failure, so force one
        for seed in range(20):
            m = Machine(PureState.zero(2), rng=np.random.default_rng(seed))
            m.gate("H", 0)
            fg.rotate_from_library(m, 0, [fg.AngleLibraryEntry(0.1), fg.AngleLibraryEntry(0.3)], 1)


@pytest.mark.parametrize("seed", range(5))
def test_leak_detection(seed):
    psi = PureState.random(1, np.random.default_rng(seed))
    m = Machine(psi.tensor(PureState.zero(1)))
    assert fg.leak_detect(m, 0, 1) == fg.CLEAN
    assert fidelity(m.state.factor_out([0]), psi) > 1 - 1e-10
    m.state.leak(0)
    assert fg.leak_detect(m, 0, 1) == fg.LEAKED


@pytest.mark.parametrize("p", range(1, 8))
@pytest.mark.parametrize("kind", ["zero", "one"])
def test_erasure_recovery(p, kind):
    ref = sc.logical_zero() if kind == "zero" else sc.logical_one()
    m = Machine(ref.tensor(PureState.zero(5)), rng=np.random.default_rng(p))
    m.state.leak(p - 1)
    fg.recover_erasure(m, BLK, p, [7, 8, 9, 10, 11])
    assert fidelity(m.state.factor_out(list(range(7))), ref) > 1 - 1e-10
