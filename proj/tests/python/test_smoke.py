import math

import numpy as np
import pytest

import mfpred


def test_gaussian_mi_close_to_analytic():
    rng = np.random.default_rng(1)
    rho = 0.6
    x = rng.standard_normal((4000, 1))
    y = rho * x + math.sqrt(1 - rho**2) * rng.standard_normal((4000, 1))
    est = mfpred.estimate_mi(x, y, 10)
    assert abs(est - (-0.5 * math.log(1 - rho**2))) < 0.04


def test_cmi_is_symmetric():
    rng = np.random.default_rng(2)
    x, y, z = (rng.standard_normal((300, 1)) for _ in range(3))
    assert mfpred.estimate_cmi(x, y, z, 5) == mfpred.estimate_cmi(y, x, z, 5)


def test_complexity_table():
    t = mfpred.complexity(n_vars=10, tau_max=2, p_max=8)
    assert (t["mi"], t["cmi_forward"], t["algo_typical"], t["optimal"]) == (60, 1124, 420, 575)


def test_generator_is_deterministic():
    a, names, truth = mfpred.gen_fixed_model(200, seed=5)
    b, _, _ = mfpred.gen_fixed_model(200, seed=5)
    assert np.array_equal(a, b)
    assert names[0] == "Y" and len(names) == 10
    assert len(truth["true_drivers"]) == 7
    assert set(truth["synergetic_drivers"]) <= set(truth["true_drivers"])


def test_select_mi_rank_cost():
    values, names, _ = mfpred.gen_fixed_model(300, seed=3)
    r = mfpred.select(values, names, scheme="mi_rank", cutoff="heuristic")
    assert r["cost"] == 60
    assert 1 <= r["chosen_p"] <= 8


def test_knn_forecast_hand_example():
    learn_x = np.array([[0.0], [1.0], [2.0], [10.0]])
    learn_y = np.array([0.0, 1.0, 2.0, 10.0])
    pred, sigma = mfpred.knn_forecast(learn_x, learn_y, np.array([[1.4]]), 2)
    assert pred[0] == pytest.approx(1.5)
    assert sigma[0] == pytest.approx(0.5)


def test_errors_map_to_python_exceptions():
    x = np.zeros((5, 1))
    with pytest.raises(RuntimeError):
        mfpred.estimate_mi(x, x, 10)
    with pytest.raises(ValueError):
        mfpred.select(np.random.default_rng(0).standard_normal((100, 2)), scheme="nonsense")
