import numpy as np
import pytest

from sgvi import belief_from_moments, nees, rmse, run_sequential, sigma_bound_violations
from sgvi.errors import LengthMismatch
from sgvi.estimators import EstimationTrace
from sgvi.metrics import chi2_interval, nees_sequence, step_metrics, summarize


def trace_of(means, covs):
    means = np.asarray(means, dtype=float)
    n = len(means)
    return EstimationTrace("x", means, np.asarray(covs, dtype=float), np.ones(n, int),
                           np.ones(n, bool), np.zeros(n))


def test_rmse_examples():
    assert rmse([np.array([[1.0], [3.0]])], [np.zeros((2, 1))]) == pytest.approx(np.sqrt(5.0))
    # 2-D position errors (3, 4) and (0, 0): mean squared norm 12.5
    est = np.array([[3.0, 4.0, 9.0], [0.0, 0.0, 9.0]])
    assert rmse([est], [np.zeros((2, 3))], components=(0, 1)) == pytest.approx(3.5355339, abs=1e-6)
    assert rmse([est, est], [np.zeros((2, 3))] * 2, components=(0, 1)) == pytest.approx(np.sqrt(12.5))


def test_rmse_length_mismatch():
    with pytest.raises(LengthMismatch):
        rmse([np.zeros((2, 1))], [np.zeros((3, 1))])
    with pytest.raises(LengthMismatch):
        rmse([np.zeros((2, 1))], [])


def test_nees_examples():
    b = belief_from_moments([1.0, 2.0], np.diag([1.0, 4.0]))
    assert nees(b, [0.0, 0.0]) == pytest.approx(1.0 + 1.0)
    assert nees(b, [0.0, 0.0], components=[1]) == pytest.approx(1.0)
    tr = trace_of([[1.0, 2.0], [0.0, 0.0]], [np.diag([1.0, 4.0])] * 2)
    np.testing.assert_allclose(nees_sequence(tr, np.zeros((2, 2))), [2.0, 0.0])


def test_chi2_interval_two_dof():
    lo, hi = chi2_interval(2)
    assert (round(lo, 3), round(hi, 3)) == (0.051, 7.378)


def test_three_sigma_rate(rng):
    n = 400000
    truth = rng.standard_normal((n, 1))
    tr = trace_of(np.zeros((n, 1)), np.ones((n, 1, 1)))
    rate = sigma_bound_violations(tr, truth)[0]
    assert rate == pytest.approx(0.0027, abs=0.0004)


def test_step_metrics():
    b = belief_from_moments([3.0, 4.0, 0.0], np.eye(3))
    m = step_metrics(b, np.zeros(3), (0, 1))
    assert m.position_error_norm == pytest.approx(5.0)
    assert m.nees == pytest.approx(25.0)
    np.testing.assert_array_equal(m.in_3sigma, [True, False, True])


def test_information_filter_nees_is_consistent(rng):
    from sgvi.models import random_linear_model
    from sgvi.simulation import Scenario, simulate_trial
    lm = random_linear_model(rng, 3, 2)
    sm = lm.to_system(belief_from_moments(np.zeros(3), np.eye(3)))
    sc = Scenario(sm, steps=20, trials=500, seed=9)
    vals = []
    for i in range(sc.trials):
        tr = simulate_trial(sc, i)
        est = run_sequential("ief", sm.prior, tr.measurements, sm)
        vals.append(nees_sequence(est, tr.truth))
    assert np.mean(np.concatenate(vals)) == pytest.approx(3.0, rel=0.05)


def test_summarize_counts_failures():
    class R:
        pass

    good = R()
    good.trial = R()
    good.trial.truth = np.zeros((2, 1))
    good.traces = {"a": trace_of([[1.0], [1.0]], np.ones((2, 1, 1)))}
    bad = R()
    bad.trial = good.trial
    t = trace_of([[1.0]], np.ones((1, 1, 1)))
    t.status = "failed"
    bad.traces = {"a": t}
    row = summarize([good, bad], ["a"])[0]
    assert row["failed"] == 1 and row["trials"] == 2
    assert row["rmse"] == pytest.approx(1.0)
    assert row["mean_nees"] == pytest.approx(1.0)
