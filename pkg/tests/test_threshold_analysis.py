import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from steanelab import threshold_analysis as ta

rates = st.floats(min_value=1e-9, max_value=1e-2)


def test_block_error_examples():
    assert ta.block_error_probability(1, 4, 1e-4) == pytest.approx(1e-8, rel=1e-12)
    assert ta.block_error_probability(2, 1, 1e-2) == pytest.approx(8e-6, rel=1e-12)
    assert ta.block_error_probability(3, 2, 0.0) == 0
    with pytest.raises(ValueError):
        ta.block_error_probability(0, 1, 0.1)
    with pytest.raises(ValueError):
        ta.block_error_probability(1, 1, 1.0)


def test_optimal_t():
    r = ta.optimal_t_min_error(1, math.exp(-2))
    assert r.t_opt == pytest.approx(math.e)
    brute = min(range(1, 101), key=lambda t: ta.block_error_probability(t, 1, math.exp(-2)))
    assert r.t_integer == brute
    r = ta.optimal_t_min_error(4, 1e-4)
    assert r.min_error == pytest.approx(math.exp(-(4 / math.e) * 10))
    assert ta.optimal_t_min_error(4, 0.999).t_integer == 1


def test_required_accuracy():
    assert ta.required_accuracy(math.exp(10), 1) == pytest.approx(0.1)
    assert ta.required_accuracy(math.exp(10), 4) == pytest.approx(1e-4)
    with pytest.raises(ValueError):
        ta.required_accuracy(1.0, 1)


def test_syndrome_and_recovery_rates():
    assert ta.syndrome_error_rate(1e-3) == pytest.approx(0.012)
    assert ta.recovery_failure_rate(1e-3) == pytest.approx(1.44e-3)
    assert ta.syndrome_error_rate(0) == ta.recovery_failure_rate(0) == 0


def test_gate_failure_polynomial():
    assert ta.flow_coefficient(8) == 684
    assert ta.flow_coefficient(9) == 685
    assert ta.flow_coefficient(1) == 1797
    assert ta.gate_failure_rate(8, 1e-3) == pytest.approx(684e-6)
    with pytest.raises(ValueError):
        ta.gate_failure_rate(0, 1e-3)


def test_threshold_estimate():
    t = ta.threshold_estimate()
    assert t == pytest.approx(1 / 684)
    assert abs(t - 1.5e-3) / 1.5e-3 < 0.03
    assert ta.gate_failure_rate(8, t) == pytest.approx(t)


@given(rates)
def test_argmin_is_eight_at_every_rate(eps):
    n, rate = ta.optimize_N(eps)
    assert n == 8 and rate == pytest.approx(684 * eps * eps)


def test_repetition_oracle():
    o = ta.repetition_failure_oracle()
    assert o.coefficient == Fraction(4)
    assert o.quoted_constant == 5
    assert set(o.sequences) == {"FFCC", "CFFCC", "FCFCC", "CFCFCC"}
    assert o.failure_probability(0.0) == 0
    q = 1e-4
    assert o.failure_probability(q) / q ** 2 == pytest.approx(4, rel=1e-2)
    with pytest.raises(ValueError):
        ta.repetition_failure_oracle(cutoff=8)


@given(st.floats(min_value=1e-6, max_value=1e-3))
def test_repetition_oracle_is_quadratic(q):
    o = ta.repetition_failure_oracle()
    ratio = o.failure_probability(2 * q) / o.failure_probability(q)
    assert abs(ratio - 4) / 4 < 0.05


def test_concatenation():
    assert ta.concatenated_error(1e-6, 1e-4, 3) == 1e-20
    assert ta.concatenated_error(1e-4, 1e-4, 5) == 1e-4
    assert ta.required_levels(1e-6, 1e-5, 1e-12) == 3
    assert ta.required_levels(1e-6, 1e-4, 1e-9) == 2
    with pytest.raises(ta.AboveThresholdError):
        ta.concatenated_error(2e-4, 1e-4, 1)


@given(st.floats(min_value=1e-8, max_value=1e-4), st.integers(0, 4))
def test_concatenation_recursion(eps, L):
    eps0 = 1e-4
    a = ta.concatenated_error(eps, eps0, L + 1)
    b = eps0 * (ta.concatenated_error(eps, eps0, L) / eps0) ** 2
    assert a == pytest.approx(b, rel=1e-9, abs=1e-300)


@given(st.integers(1, 20), st.floats(min_value=0.5, max_value=4), rates, rates)
def test_block_error_monotone_in_eps(t, b, e1, e2):
    lo, hi = sorted((e1, e2))
    if t ** b * hi < 1:
        assert ta.block_error_probability(t, b, lo) <= ta.block_error_probability(t, b, hi)


@given(st.floats(min_value=10, max_value=1e30), st.floats(min_value=10, max_value=1e30), st.floats(0.5, 4))
def test_required_accuracy_decreasing(t1, t2, b):
    lo, hi = sorted((t1, t2))
    assert ta.required_accuracy(hi, b) <= ta.required_accuracy(lo, b)


def test_block_size_formula():
    assert ta.block_size_exponent() == pytest.approx(math.log2(7))
    assert ta.block_size_exponent(4, 1) == pytest.approx(2)
    assert ta.required_block_size(1e12, 1e-4, 1e-4) == math.inf
    val = ta.required_block_size(1e12, 1e-6, 1e-4)
    assert val == pytest.approx((math.log(1e8) / math.log(100)) ** math.log2(7))
    with pytest.raises(ValueError):
        ta.required_block_size(1e12, 1e-3, 1e-4)


def test_factoring_resources():
    r = ta.factoring_resources(430)
    assert r.toffoli_count == 3_021_266_000
    assert r.encoded_qubits == 2150 and r.block_size == 343 and r.levels == 3
    assert r.physical_qubits_order == 6
    assert ta.factoring_resources(430, ancilla_overhead_factor=1).physical_qubits == 2150 * 343
    with pytest.raises(ValueError):
        ta.factoring_resources(8)
    with pytest.raises(ta.AboveThresholdError):
        ta.factoring_resources(430, eps_gate=1e-3)
