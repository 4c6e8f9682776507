import csv
import io
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from steanelab import harness


def test_wilson_coverage():
    rng = np.random.default_rng(12)
    p, n = 0.03, 400
    hits = 0
    for k in rng.binomial(n, p, size=1000):
        lo, hi = harness.wilson_interval(int(k), n)
        hits += lo <= p <= hi
    assert hits >= 930


@given(st.integers(1, 10_000), st.data())
def test_wilson_contains_rate(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = harness.wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1


def test_zero_failures_use_rule_of_three():
    assert harness.wilson_interval(0, 1000) == (0.0, 0.003)
    with pytest.raises(ValueError):
        harness.wilson_interval(5, 3)


def test_fit_exact_power_laws():
    eps = [1e-4, 3e-4, 1e-3, 3e-3]
    assert harness.fit_scaling([(e, 7 * e * e) for e in eps]).slope == pytest.approx(2, abs=1e-9)
    assert harness.fit_scaling([(e, 0.5 * e) for e in eps]).slope == pytest.approx(1, abs=1e-9)


def test_fit_drops_zero_points():
    pts = [(1e-4, 0.0), (3e-4, 9e-8), (1e-3, 1e-6), (3e-3, 9e-6)]
    with pytest.warns(RuntimeWarning):
        fit = harness.fit_scaling(pts)
    assert fit.dropped == 1 and fit.used == 3
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ValueError):
            harness.fit_scaling(pts[:3])


def test_noiseless_experiments_never_fail():
    assert harness.run_memory_experiment(1, 0.0, 20, 1, jobs=1).points[0].failures == 0
    assert harness.run_xor_experiment(3, 0.0, 10, 1, method="steane", jobs=1).points[0].failures == 0
    assert harness.run_unencoded_baseline(1, 0.0, 50, 1, jobs=1).points[0].failures == 0


def test_unencoded_baseline_rate():
    # with a reference every Pauli counts; alone in |0> only X and Y do
    r = harness.run_unencoded_baseline(1, 0.03, 20000, 5, jobs=1).points[0]
    assert r.ci_low <= 0.03 <= r.ci_high
    r = harness.run_unencoded_baseline(1, 0.03, 20000, 5, state="zero", jobs=1).points[0]
    assert r.ci_low <= 0.02 <= r.ci_high


def test_memory_reference_sees_more_failures():
    bell = harness.run_memory_experiment(1, 0.01, 2000, 4, jobs=1).points[0]
    zero = harness.run_memory_experiment(1, 0.01, 2000, 4, state="zero", jobs=1).points[0]
    assert bell.failures > zero.failures > 0
    with pytest.raises(ValueError):
        harness.run_memory_experiment(1, 0.01, 10, state="plus")


def test_xor_rate_is_per_block_and_gate():
    p = harness.run_xor_experiment(4, 0.01, 40, 3, method="steane", jobs=1).points[0]
    assert p.trials == 80
    assert p.failures > 0
    assert p.rate == pytest.approx(p.failures / 80 / 4)


def test_results_independent_of_worker_count():
    a = harness.run_memory_experiment(1, 0.01, 60, 7, jobs=1).to_csv()
    b = harness.run_memory_experiment(1, 0.01, 60, 7, jobs=2).to_csv()
    assert a == b


def test_csv_schema():
    res = harness.run_unencoded_baseline(2, 0.01, 100, 3, jobs=1)
    text = res.to_csv()
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == harness.CSV_COLUMNS
    assert rows[1][0] == "mc-unencoded" and rows[1][-1] == harness.__version__


def test_config_validation():
    with pytest.raises(ValueError):
        harness.ExperimentConfig("mc-memory", trials=0)
    with pytest.raises(ValueError):
        harness.ExperimentConfig("mc-memory", eps_store=0.2)
    with pytest.raises(ValueError):
        harness.ExperimentConfig("nope")
    with pytest.raises(ValueError):
        harness.run_memory_experiment(1, 0.5, 10)
