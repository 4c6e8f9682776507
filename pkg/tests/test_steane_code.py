import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from steanelab import hamming
from steanelab import steane_code as sc
from steanelab.machine import Machine
from steanelab.stabsim import NoiseModel, PauliError, StabilizerTableau
from steanelab.statevec import Gate, PureState, fidelity

BLK = sc.CodeBlock.at(0)


def _amps_for(words):
    amp = np.zeros(128, dtype=complex)
    for w in words:
        idx = int("".join(str((w >> (p - 1)) & 1) for p in range(1, 8)), 2)
        amp[idx] = 1 / math.sqrt(8)
    return amp


def test_logical_basis_amplitudes():
    even, odd = hamming.codewords()
    assert np.max(np.abs(sc.logical_zero().amps - _amps_for(even))) < 1e-10
    assert np.max(np.abs(sc.logical_one().amps - _amps_for(odd))) < 1e-10


@pytest.mark.parametrize("a,b", [(1, 0), (0, 1), (0.6, 0.8j), (1 / math.sqrt(2), -1j / math.sqrt(2))])
def test_encoder_builds_the_logical_state(a, b):
    assert fidelity(sc.encode(a, b), sc.logical_state(a, b)) > 1 - 1e-10


def test_encoder_labelings_agree_up_to_relabeling():
    enc = sc.encoder_circuit("encoder")
    assert enc.n == 7 and sc.encoder_input_qubit("encoder") == sc.ENCODER_INPUT_POSITION - 1
    assert sorted(sc.encoder_to_canonical_order()) == list(range(7))


@pytest.mark.parametrize("sign", [1, -1])
def test_bitwise_hadamard_gives_rotated_basis(sign):
    s = (sc.logical_zero() if sign == 1 else sc.logical_one()).copy()
    for q in range(7):
        s.apply_gate(Gate("H", (q,)))
    want = sc.logical_state(1 / math.sqrt(2), sign / math.sqrt(2))
    assert fidelity(s, want) > 1 - 1e-10


def test_logical_parity_support_is_weight_three():
    assert len(sc.find_logical_parity_support()) == 3
    assert sc.LOGICAL_PARITY_SUPPORT == (1, 2, 3)


def test_code_block_validation():
    with pytest.raises(ValueError):
        sc.CodeBlock((0, 1, 2, 3, 4, 5, 5))
    assert BLK.q(7) == 6 and BLK.mask((1, 2)) == 0b11
    assert sc.CodeBlock.at(7).overlaps(sc.CodeBlock.at(13))


@pytest.mark.parametrize("p", range(1, 8))
def test_syndrome_lookup_of_single_errors(p):
    y = sc.syndrome_lookup(PauliError.single(p - 1, "Y"))
    assert y.bit_value == p and y.phase_value == p


def _dense_recover(method, state, errs, seed=0):
    na = sc.ancilla_size(method, verify=False)
    m = Machine(state.tensor(PureState.zero(na)), rng=np.random.default_rng(seed))
    for q, c in errs:
        m.apply_pauli(q, c)
    s, rounds, op = sc.fault_tolerant_recovery(m, BLK, list(range(7, 7 + na)), method)
    return PureState(m.state.factor_out(list(range(7)))), s, rounds


@pytest.mark.parametrize("method", ["shor", "steane"])
def test_all_single_errors_corrected_dense(method):
    ref = sc.logical_state(0.6, 0.8j)
    for q, c in itertools.product(range(7), (1, 2, 3)):
        out, s, rounds = _dense_recover(method, ref, [(q, c)])
        assert fidelity(out, ref) > 1 - 1e-10
        assert s == sc.syndrome_lookup(PauliError.single(q, c)) and rounds == 2


@pytest.mark.parametrize("method", ["shor", "steane"])
@pytest.mark.parametrize("code", [1, 2])
def test_double_errors_become_logical(method, code):
    ref = sc.logical_state(0.6, 0.8j)
    flipped = ref.copy()
    for q in range(7):
        flipped.apply_pauli(q, code)
    out, _, _ = _dense_recover(method, ref, [(1, code), (4, code)])
    assert fidelity(out, flipped) > 1 - 1e-10


def test_shor_state_is_even_superposition():
    m = Machine(PureState.zero(5), rng=np.random.default_rng(0))
    sc.prepare_shor_state(m, [0, 1, 2, 3, 4])
    amps = m.state.factor_out([0, 1, 2, 3])
    even = [i for i in range(16) if bin(i).count("1") % 2 == 0]
    assert np.allclose(np.abs(amps[even]), 1 / math.sqrt(8))
    assert np.allclose(np.delete(amps, even), 0)


def test_ancilla_sizes_and_bad_method():
    assert sc.ancilla_size("shor") == 5 and sc.ancilla_size("steane") == 14
    assert sc.ancilla_size("steane", verify=False) == 7
    with pytest.raises(ValueError):
        sc.extractor("magic")


def test_repeat_until_agree():
    vals = iter([1, 2, 2])
    assert sc.repeat_until_agree(lambda: next(vals)) == (2, 3)
    with pytest.raises(sc.AgreementError):
        counter = itertools.count()
        sc.repeat_until_agree(lambda: next(counter), 4)


def test_destructive_measurement_tolerates_one_flip():
    for one in (False, True):
        m = Machine(StabilizerTableau(7), rng=np.random.default_rng(1))
        sc.prepare_ideal(m, BLK, "one" if one else "zero")
        m.apply_pauli(3, 1)
        assert sc.measure_logical_destructive(m, BLK) == int(one)


@pytest.mark.parametrize("method", ["shor", "steane"])
def test_fault_tolerant_zero_preparation_noiseless(method):
    na = sc.ancilla_size(method)
    m = Machine(StabilizerTableau(8 + na), rng=np.random.default_rng(3))
    sc.prepare_logical_zero_ft(m, BLK, list(range(7, 7 + na)), 7 + na, method)
    d = sc.ideal_decode(m.state, BLK)
    assert d.logical_z == 1 and d.x_position == 0 and d.z_position == 0


@given(st.integers(0, 6), st.integers(1, 3), st.integers(0, 6), st.integers(1, 3),
       st.sampled_from(["shor", "steane"]), st.integers(0, 1000))
@settings(max_examples=40, deadline=None)
def test_recovery_fixes_any_css_correctable_pair(qx, cx, qz, cz, method, seed):
    """One X-type and one Z-type error anywhere are both corrected."""
    na = sc.ancilla_size(method)
    ref = 7
    m = Machine(StabilizerTableau(8 + na), rng=np.random.default_rng(seed))
    sc.prepare_ideal(m, BLK, "bell", ref)
    m.apply_pauli(qx, 1)
    m.apply_pauli(qz, 2)
    sc.fault_tolerant_recovery(m, BLK, list(range(8, 8 + na)), method)
    d = sc.ideal_decode(m.state, BLK, ref)
    assert (d.logical_z, d.logical_x, d.x_position, d.z_position) == (1, 1, 0, 0)


@pytest.mark.parametrize("method", ["shor", "steane"])
def test_noisy_recovery_below_bare_at_small_rate(method):
    """Sanity: at a tiny rate the encoded memory almost never fails."""
    na = sc.ancilla_size(method)
    fails = 0
    for t in range(200):
        m = Machine(StabilizerTableau(7 + na), noise=NoiseModel.uniform(1e-4, 1e-4),
                    rng=np.random.default_rng([9, t]))
        sc.prepare_ideal(m, BLK, "zero")
        sc.fault_tolerant_recovery(m, BLK, list(range(7, 7 + na)), method)
        fails += sc.ideal_decode(m.state, BLK).logical_z != 1
    assert fails == 0


def test_ideal_decode_on_dense_and_tableau_agree():
    dense = Machine(PureState.zero(7))
    tab = Machine(StabilizerTableau(7))
    for m in (dense, tab):
        sc.prepare_ideal(m, BLK, "zero")
        m.apply_pauli(2, 3)
    a, b = sc.ideal_decode(dense.state, BLK), sc.ideal_decode(tab.state, BLK)
    assert (a.x_position, a.z_position) == (b.x_position, b.z_position) == (3, 3)
    assert a.logical_z == pytest.approx(1) and b.logical_z == 1
    assert sc.residual_weight(tab.state, BLK) == 1
