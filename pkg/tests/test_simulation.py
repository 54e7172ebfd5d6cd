import numpy as np
import pytest

from sgvi import LinearModel, Scenario, TurnMismatch, belief_from_moments, benchmark_1d, simulate_trial
from sgvi.models import range_tracking
from sgvi.simulation import (experiment_digest, measurement_digest, run_monte_carlo, run_trial,
                             trial_rng)


def bench_scenario(**kw):
    return Scenario(benchmark_1d(1.0, 1.0), steps=kw.pop("steps", 20), trials=kw.pop("trials", 4),
                    seed=kw.pop("seed", 5), **kw)


def test_trial_is_deterministic():
    sc = bench_scenario()
    a, b = simulate_trial(sc, 2), simulate_trial(sc, 2)
    np.testing.assert_array_equal(a.truth, b.truth)
    np.testing.assert_array_equal(a.measurements, b.measurements)
    assert a.seed == b.seed
    assert measurement_digest(a) != measurement_digest(simulate_trial(sc, 3))


def test_trial_seeds_are_distinct():
    seeds = {trial_rng(0, i)[1] for i in range(100)}
    assert len(seeds) == 100


def test_noise_free_limit():
    sc = Scenario(benchmark_1d(1e-20, 1e-20), steps=10, trials=1, initial_truth=np.array([0.5]))
    tr = simulate_trial(sc, 0)
    x = 0.5
    for k in range(10):
        x = 0.9 * x + 10 * x / (1 + x * x) + 8 * np.cos(1.2 * k)
        assert tr.truth[k, 0] == pytest.approx(x, rel=1e-8)
        assert tr.measurements[k, 0] == pytest.approx(0.05 * x ** 3, rel=1e-8)


def test_process_noise_variance():
    # A = 0 makes every state a fresh draw of the process noise
    lm = LinearModel(A=[[0.0]], H=[[1.0]], Q=[[2.0]], R=[[1e-12]])
    sc = Scenario(lm.to_system(belief_from_moments([0.0], [[1.0]])), steps=50000, trials=1, seed=3)
    tr = simulate_trial(sc, 0)
    assert np.var(tr.truth[:, 0]) == pytest.approx(2.0, rel=0.02)
    assert abs(np.mean(tr.truth[:, 0])) < 0.03


def test_turn_mismatch_is_piecewise_constant():
    mm = TurnMismatch(segment_steps=10, turn_rate_max=0.3, speed_range=(0.8, 1.2))
    sc = Scenario(range_tracking(), steps=40, trials=1, seed=1, mismatch=mm)
    tr = simulate_trial(sc, 0)
    w, v = tr.truth[:, 4], tr.truth[:, 2]
    for s in range(0, 40, 10):
        assert np.all(w[s:s + 10] == w[s]) and np.all(v[s:s + 10] == v[s])
    assert np.all(np.abs(w) <= 0.3) and np.all((v >= 0.8) & (v <= 1.2))
    assert len(np.unique(w)) == 4


def test_scenario_validation():
    with pytest.raises(ValueError):
        bench_scenario(trials=0)
    with pytest.raises(ValueError):
        Scenario(LinearModel([[1.0]], [[1.0]], [[1.0]], [[1.0]]).to_system(), steps=5, trials=1)


def test_estimators_share_measurements():
    sc = bench_scenario()
    one = run_trial(sc, 1, ["sgvi"])
    both = run_trial(sc, 1, ["sgvi", "map"])
    assert measurement_digest(one.trial) == measurement_digest(both.trial)
    np.testing.assert_array_equal(one.traces["sgvi"].means, both.traces["sgvi"].means)
    assert both.traces["map"].seed == both.trial.seed


def test_order_and_thread_independence():
    sc = bench_scenario(trials=6)
    serial = run_monte_carlo(sc, ["sgvi", "map"])
    threaded = run_monte_carlo(sc, ["sgvi", "map"], threads=3)
    assert experiment_digest(serial) == experiment_digest(threaded)
    rev = run_monte_carlo(sc, ["sgvi", "map"], trial_indices=list(reversed(range(6))))
    assert experiment_digest(serial) == experiment_digest(list(reversed(rev)))
    assert [r.trial.index for r in serial] == list(range(6))
