import numpy as np
import pytest

from costlens.catalog import PriorVector
from costlens.costspace import (CostMatrix, inverse_prior_cost_matrix,
                                symmetric_cost_matrix)
from costlens.decision import (decide, decide_bayes, decide_costs, decide_ml,
                               expected_cost_map)
from costlens.errors import ValidationError
from costlens.fields import Mask, ProbabilityField

from reference import naive_decide


def _field(rows):
    return ProbabilityField(np.asarray(rows, dtype=np.float32))


def test_decide_prefers_cheap_class_over_argmax():
    # expected costs: 0.8, 5.0, 0.7 -> class index 2 although argmax is 1
    field = _field([[[0.2, 0.5, 0.3]]])
    cost = CostMatrix([[0, 1, 1], [10, 0, 10], [1, 1, 0]])
    assert decide(field, cost).values[0, 0] == 2
    assert decide_bayes(field).values[0, 0] == 1


def test_decide_symmetric_reduces_to_argmax():
    field = _field([[[0.2, 0.5, 0.3]]])
    assert decide(field, symmetric_cost_matrix(3, 1.0)).values[0, 0] == 1


def test_decide_uniform_tie_breaks_to_lowest_index():
    field = _field([[[1 / 3, 1 / 3, 1 / 3]]])
    assert decide(field, symmetric_cost_matrix(3, 1.0)).values[0, 0] == 0


def test_decide_size_mismatch():
    field = _field([[[0.5, 0.5]]])
    with pytest.raises(ValidationError):
        decide(field, symmetric_cost_matrix(3, 1.0))


def test_decide_matches_naive_reference():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        probs = rng.random((4, 5, n)) + 1e-9
        probs /= probs.sum(axis=2, keepdims=True)
        entries = rng.random((n, n)) * 3
        np.fill_diagonal(entries, 0.0)
        got = decide_costs(probs, entries)
        assert np.array_equal(got, naive_decide(probs, entries))


def test_bayes_equivalence_property():
    rng = np.random.default_rng(5)
    probs = rng.random((10, 100, 19)).astype(np.float32) + 1e-6
    probs /= probs.sum(axis=2, keepdims=True)
    field = ProbabilityField(probs)
    bayes = decide_bayes(field).values
    for lam in (0.5, 1.0, 3.0):
        assert np.array_equal(decide(field, symmetric_cost_matrix(19, lam)).values,
                              bayes)


def test_bayes_one_hot():
    field = _field([[[0.0, 1.0, 0.0]]])
    assert decide_bayes(field).values[0, 0] == 1


def test_ml_hand_computed():
    # likelihood ratios 0.6/0.9 = 0.67 vs 0.4/0.1 = 4.0 -> class index 1
    field = _field([[[0.6, 0.4]]])
    priors = PriorVector(np.array([0.9, 0.1]))
    assert decide_ml(field, priors).values[0, 0] == 1


def test_ml_with_uniform_priors_is_bayes():
    rng = np.random.default_rng(23)
    probs = rng.random((6, 6, 7)).astype(np.float32) + 1e-6
    probs /= probs.sum(axis=2, keepdims=True)
    field = ProbabilityField(probs)
    priors = PriorVector(np.full(7, 1 / 7))
    assert np.array_equal(decide_ml(field, priors).values, decide_bayes(field).values)


def test_ml_confident_posterior_wins():
    field = _field([[[0.99, 0.01]]])
    assert decide_ml(field, PriorVector(np.array([0.5, 0.5]))).values[0, 0] == 0


def test_ml_equivalence_with_inverse_prior_costs():
    rng = np.random.default_rng(31)
    probs = rng.random((8, 25, 19)).astype(np.float32) + 1e-6
    probs /= probs.sum(axis=2, keepdims=True)
    field = ProbabilityField(probs)
    raw = rng.random(19) + 0.05
    priors = PriorVector(raw / raw.sum())
    ml = decide_ml(field, priors).values
    for lam in (0.5, 1.0, 3.0):
        cost = inverse_prior_cost_matrix(priors, lam)
        assert np.array_equal(decide(field, cost).values, ml)


def test_ml_rejects_zero_priors():
    field = _field([[[0.5, 0.5]]])
    with pytest.raises(ValidationError):
        decide_ml(field, np.array([1.0, 0.0]))


def test_expected_cost_map_values():
    field = _field([[[0.2, 0.5, 0.3]]])
    cost = CostMatrix([[0, 1, 1], [10, 0, 10], [1, 1, 0]])
    mask = decide(field, cost)
    assert expected_cost_map(field, cost, mask)[0, 0] == pytest.approx(0.7)
    # any other class is at least as expensive
    for k in range(3):
        other = Mask(np.array([[k]]), num_classes=3)
        assert expected_cost_map(field, cost, other)[0, 0] >= 0.7 - 1e-12


def test_expected_cost_map_zero_for_correct_one_hot():
    field = _field([[[0.0, 1.0]]])
    cost = symmetric_cost_matrix(2, 3.0)
    mask = Mask(np.array([[1]]), num_classes=2)
    assert expected_cost_map(field, cost, mask)[0, 0] == 0.0


def test_optimality_of_decision():
    rng = np.random.default_rng(41)
    probs = rng.random((5, 5, 6)) + 1e-9
    probs /= probs.sum(axis=2, keepdims=True)
    field = ProbabilityField(probs.astype(np.float32))
    entries = rng.random((6, 6)) * 2
    np.fill_diagonal(entries, 0.0)
    cost = CostMatrix(entries)
    best = expected_cost_map(field, cost, decide(field, cost))
    for k in range(6):
        fixed = Mask(np.full((5, 5), k), num_classes=6)
        other = expected_cost_map(field, cost, fixed)
        assert (other >= best - 1e-12).all()


def test_decide_worker_count_does_not_change_result(monkeypatch):
    rng = np.random.default_rng(55)
    probs = rng.random((37, 23, 9)).astype(np.float32) + 1e-6
    probs /= probs.sum(axis=2, keepdims=True)
    field = ProbabilityField(probs)
    entries = rng.random((9, 9)) + 0.01
    np.fill_diagonal(entries, 0.0)
    cost = CostMatrix(entries)
    results = [decide(field, cost, workers=n).values for n in (1, 2, 3, 8)]
    for other in results[1:]:
        assert np.array_equal(results[0], other)
    monkeypatch.setenv("COSTLENS_THREADS", "2")
    assert np.array_equal(decide(field, cost).values, results[0])
