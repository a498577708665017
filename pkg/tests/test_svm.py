"""Kernels, the pairwise optimizer, and its oracle checks.

The grid oracle enumerates feasible dual vectors on a coarse lattice
(every alpha in {0, C/2, C}, equality constraint satisfied exactly) and
evaluates the dual objective on all of them; any feasible point lower-
bounds the optimum, so the trained solution must score at least as high.
"""

import itertools

import numpy as np
import pytest

from adaptive_ids.exceptions import DegenerateLabels, DimensionError
from adaptive_ids.svm import (
    Kernel,
    SmoConfig,
    SmoSvmClassifier,
    SvmModel,
    decision_value,
    decision_values,
    dual_objective,
    smo_train,
)

ANALYTIC_X = np.array([[0.0], [1.0]])
ANALYTIC_Y = np.array([1.0, -1.0])


def train_analytic(C=10.0):
    return smo_train(ANALYTIC_X, ANALYTIC_Y, SmoConfig(C=C), Kernel.linear())


def test_rbf_kernel_self_similarity():
    kernel = Kernel.rbf(0.7)
    for x in (np.zeros(3), np.array([1.5, -2.0, 0.25])):
        assert kernel.eval(x, x) == 1.0


def test_linear_kernel_arithmetic():
    assert Kernel.linear().eval(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0


def test_kernel_symmetry_on_random_pairs():
    rng = np.random.default_rng(0)
    for kernel in (Kernel.linear(), Kernel.rbf(0.5)):
        for _ in range(20):
            x, z = rng.normal(size=4), rng.normal(size=4)
            assert kernel.eval(x, z) == pytest.approx(kernel.eval(z, x), abs=1e-15)


def test_kernel_width_mismatch():
    with pytest.raises(DimensionError):
        Kernel.linear().eval(np.zeros(2), np.zeros(3))
    with pytest.raises(DimensionError):
        Kernel.rbf(1.0).matrix(np.zeros((2, 2)), np.zeros((2, 3)))


def test_kernel_validation():
    with pytest.raises(ValueError):
        Kernel("rbf", gamma=None)
    with pytest.raises(ValueError):
        Kernel.rbf(-1.0)
    with pytest.raises(ValueError):
        Kernel("poly", gamma=1.0)


def test_analytic_two_point_solution():
    model = train_analytic()
    assert model.coefficients == pytest.approx([2.0, -2.0], abs=1e-6)
    assert model.bias == pytest.approx(1.0, abs=1e-6)
    assert decision_value(model, np.array([0.0])) == pytest.approx(1.0, abs=1e-6)
    assert decision_value(model, np.array([1.0])) == pytest.approx(-1.0, abs=1e-6)
    assert decision_value(model, np.array([0.5])) == pytest.approx(0.0, abs=1e-6)


def test_margin_support_vectors_sit_on_unit_margin():
    model = train_analytic()
    alphas = np.abs(model.coefficients)
    labels = np.sign(model.coefficients)
    scores = decision_values(model, model.support_vectors)
    for alpha, label, score in zip(alphas, labels, scores):
        if 0 < alpha < model.C:
            assert label * score == pytest.approx(1.0, abs=1e-3)


def test_xor_with_rbf_kernel():
    x = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([-1.0, 1.0, 1.0, -1.0])
    model = smo_train(x, y, SmoConfig(C=10.0), Kernel.rbf(1.0))
    assert np.array_equal(np.sign(decision_values(model, x)), y)


def test_duplicated_points_leave_decision_unchanged():
    model = train_analytic()
    doubled = smo_train(
        np.vstack([ANALYTIC_X, ANALYTIC_X]),
        np.concatenate([ANALYTIC_Y, ANALYTIC_Y]),
        SmoConfig(C=10.0),
        Kernel.linear(),
    )
    probe = np.linspace(-1.0, 2.0, 31)[:, None]
    assert np.max(
        np.abs(decision_values(model, probe) - decision_values(doubled, probe))
    ) < 1e-6


def test_single_class_rejected():
    x = np.random.default_rng(0).normal(size=(5, 2))
    with pytest.raises(DegenerateLabels):
        smo_train(x, np.ones(5), SmoConfig(), Kernel.linear())
    with pytest.raises(DegenerateLabels):
        smo_train(np.empty((0, 2)), np.empty(0), SmoConfig(), Kernel.linear())


def test_training_is_deterministic_per_seed():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(20, 3))
    y = np.where(x[:, 0] + 0.3 * rng.normal(size=20) > 0, 1.0, -1.0)
    if abs(y.sum()) == len(y):
        y[0] = -y[0]
    first = smo_train(x, y, SmoConfig(seed=5), Kernel.rbf(1.0))
    second = smo_train(x, y, SmoConfig(seed=5), Kernel.rbf(1.0))
    assert np.array_equal(first.coefficients, second.coefficients)
    assert first.bias == second.bias


def _random_small_problem(rng):
    n = int(rng.integers(4, 13))
    d = int(rng.integers(1, 4))
    x = rng.normal(size=(n, d))
    y = np.where(rng.random(n) > 0.5, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0  # both classes guaranteed
    C = float(rng.choice([0.5, 1.0, 10.0]))
    kernel = Kernel.linear() if rng.random() < 0.5 else Kernel.rbf(1.0)
    return x, y, C, kernel


def _kkt_violation(model: SvmModel, x, y, C, tol):
    """Largest epsilon-KKT violation over all training points."""
    scores = decision_values(model, x)
    margins = y * scores
    # Recover per-point alphas: retained support vectors carry |coef|.
    alphas = np.zeros(len(x))
    for vector, coef in zip(model.support_vectors, model.coefficients):
        matches = np.flatnonzero((x == vector).all(axis=1) & (np.sign(coef) == y))
        for index in matches:
            if alphas[index] == 0.0:
                alphas[index] = abs(coef)
                break
    worst = 0.0
    for alpha, margin in zip(alphas, margins):
        if alpha <= 1e-12:
            worst = max(worst, 1.0 - margin - tol)
        elif alpha >= C - 1e-12:
            worst = max(worst, margin - 1.0 - tol)
        else:
            worst = max(worst, abs(margin - 1.0) - tol)
    return worst


def _grid_oracle_best(x, y, C, kernel):
    """Best dual objective over the coarse feasible lattice."""
    n = len(x)
    gram = kernel.matrix(x, x)
    levels = np.array([0.0, C / 2.0, C])
    best = 0.0  # alpha = 0 is always feasible
    combos = np.array(list(itertools.product(range(3), repeat=n)))
    alphas = levels[combos]
    feasible = np.abs(alphas @ y) < 1e-9
    alphas = alphas[feasible]
    if alphas.size:
        signed = alphas * y
        objectives = alphas.sum(axis=1) - 0.5 * np.einsum(
            "ij,jk,ik->i", signed, gram, signed
        )
        best = max(best, float(objectives.max()))
    return best


def test_kkt_and_dual_oracle_on_random_small_problems():
    rng = np.random.default_rng(2024)
    tol = 1e-3
    for _ in range(50):
        x, y, C, kernel = _random_small_problem(rng)
        config = SmoConfig(C=C, tolerance=tol, seed=int(rng.integers(1000)))
        model = smo_train(x, y, config, kernel)

        alphas = np.abs(model.coefficients)
        assert np.all(alphas > 0)
        assert np.all(alphas <= C + 1e-9)
        assert abs(model.coefficients.sum()) < 1e-8  # sum alpha_i y_i == 0
        assert _kkt_violation(model, x, y, C, tol) <= 1e-8

        # Rebuild the full dual vector for the objective comparison.
        full_alpha = np.zeros(len(x))
        used = np.zeros(len(x), dtype=bool)
        for vector, coef in zip(model.support_vectors, model.coefficients):
            for index in np.flatnonzero(
                (x == vector).all(axis=1) & (np.sign(coef) == y) & ~used
            ):
                full_alpha[index] = abs(coef)
                used[index] = True
                break
        ours = dual_objective(full_alpha, y, kernel.matrix(x, x))
        oracle = _grid_oracle_best(x, y, C, kernel)
        assert ours >= oracle - 1e-3


def test_column_cache_mode_matches_full_gram(monkeypatch):
    import adaptive_ids.svm as svm_module

    rng = np.random.default_rng(11)
    x = rng.normal(size=(60, 4))
    y = np.where(x[:, 0] + 0.2 * rng.normal(size=60) > 0, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    kernel = Kernel.rbf(0.5)
    full = smo_train(x, y, SmoConfig(C=1.0, seed=3), kernel)
    monkeypatch.setattr(svm_module, "FULL_GRAM_LIMIT", 8)
    cached = smo_train(x, y, SmoConfig(C=1.0, seed=3), kernel)
    probe = rng.normal(size=(40, 4))
    gap = np.max(np.abs(decision_values(full, probe) - decision_values(cached, probe)))
    assert gap < 5e-3  # same optimum within solver tolerance
    assert _kkt_violation(cached, x, y, 1.0, 1e-3) <= 1e-8


def test_estimator_tie_breaks_toward_attack():
    model = SvmModel(
        support_vectors=np.array([[1.0]]),
        coefficients=np.array([1.0]),
        bias=-1.0,
        kernel=Kernel.linear(),
        C=1.0,
    )
    clf = SmoSvmClassifier()
    clf.model_ = model
    scores = clf.decision_function(np.array([[1.0], [0.5], [2.0]]))
    assert scores[0] == 0.0
    assert np.array_equal(clf.predict(np.array([[1.0], [0.5], [2.0]])), [1.0, -1.0, 1.0])


def test_estimator_fit_predict_defaults():
    rng = np.random.default_rng(7)
    x = np.vstack([rng.normal(-1, 0.3, (15, 2)), rng.normal(1, 0.3, (15, 2))])
    y = np.array([-1.0] * 15 + [1.0] * 15)
    clf = SmoSvmClassifier(seed=1).fit(x, y)
    assert (clf.predict(x) == y).mean() >= 0.95
    params = clf.get_params()
    assert params["C"] == 1.0 and params["kernel"] == "rbf" and params["gamma"] is None
