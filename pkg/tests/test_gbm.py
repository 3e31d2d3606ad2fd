from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from stcausal.errors import TooFewRows
from stcausal.gbm import (
    GbmHyperparams,
    GradientBoostedDynamics,
    Leaf,
    Split,
    fit_gbm,
    fit_unit_gbms,
    gbm_predict,
    gbm_predict_many,
)
from stcausal.dgp import DgpConfig, generate
from stcausal.linalg import DesignMatrix


def design(x, y):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = tuple(f"f{i}" for i in range(x.shape[1]))
    return DesignMatrix(names, x, np.asarray(y, dtype=float))


def exhaustive_depth1_oracle(x, y):
    """Enumerate every split in exact rational arithmetic; first-best wins
    over (feature asc, threshold asc); None when no split strictly helps."""
    n, p = len(y), len(x[0])
    ys = [Fraction(v) for v in y]
    mean = sum(ys) / n
    parent = sum((v - mean) ** 2 for v in ys)
    best = None
    best_gain = Fraction(0)
    for f in range(p):
        order = sorted(range(n), key=lambda i: x[i][f])
        for pos in range(n - 1):
            if x[order[pos]][f] == x[order[pos + 1]][f]:
                continue
            left = [ys[i] for i in order[:pos + 1]]
            right = [ys[i] for i in order[pos + 1:]]
            lm, rm = sum(left) / len(left), sum(right) / len(right)
            sse = sum((v - lm) ** 2 for v in left) + sum((v - rm) ** 2 for v in right)
            gain = parent - sse
            if gain > best_gain:
                best_gain = gain
                thr = (x[order[pos]][f] + x[order[pos + 1]][f]) / 2.0
                best = (f, thr, float(lm), float(rm))
    return best


def depth1_fit(x, y):
    model = fit_gbm(design(x, y), GbmHyperparams(n_trees=1, max_depth=1,
                                                 min_samples_leaf=1,
                                                 learning_rate=1.0))
    tree = model.trees[0]
    if isinstance(tree, Leaf):
        return None
    return (tree.feature, tree.threshold,
            model.base_prediction + tree.left.value,
            model.base_prediction + tree.right.value)


def test_four_point_step_function():
    got = depth1_fit([0.0, 1.0, 2.0, 3.0], [0.0, 0.0, 10.0, 10.0])
    assert got == (0, 1.5, 0.0, 10.0)


def test_depth1_matches_oracle_on_integer_grid():
    # y multiples of 3 keep every candidate score exact in float64, so exact
    # rational ties and float ties coincide and tie-breaking is exercised
    x = [[0.0], [1.0], [2.0], [3.0]]
    for ys in product((0.0, 3.0, 6.0, 9.0), repeat=4):
        expected = exhaustive_depth1_oracle(x, list(ys))
        got = depth1_fit([r[0] for r in x], list(ys))
        if expected is None:
            assert got is None
        else:
            f, thr, lv, rv = expected
            assert got[0] == f and got[1] == thr
            assert got[2] == pytest.approx(lv, abs=1e-12)
            assert got[3] == pytest.approx(rv, abs=1e-12)


def test_depth1_matches_oracle_random_floats():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = np.sort(rng.normal(size=4))
        y = rng.normal(size=4)
        expected = exhaustive_depth1_oracle([[v] for v in x], list(y))
        got = depth1_fit(x, y)
        f, thr, lv, rv = expected
        assert got[0] == f and got[1] == pytest.approx(thr, rel=1e-15)
        assert got[2] == pytest.approx(lv, abs=1e-12)
        assert got[3] == pytest.approx(rv, abs=1e-12)


def test_constant_target_predicts_constant():
    model = fit_gbm(design(np.arange(10.0), np.full(10, 3.25)),
                    GbmHyperparams(n_trees=20, max_depth=3, min_samples_leaf=1))
    for v in (-5.0, 0.0, 100.0):
        assert gbm_predict(model, [v]) == 3.25


def test_zero_trees_is_base_mean():
    y = np.array([1.0, 2.0, 6.0])
    model = fit_gbm(design(np.arange(3.0), y),
                    GbmHyperparams(n_trees=0, min_samples_leaf=1))
    assert model.trees == ()
    assert gbm_predict(model, [17.0]) == pytest.approx(y.mean())


def test_training_loss_nonincreasing():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(80, 3))
    y = x[:, 0] * 2 - np.abs(x[:, 1]) + rng.normal(size=80)
    d = design(x, y)
    losses = []
    for k in (0, 1, 2, 5, 10, 25):
        model = fit_gbm(d, GbmHyperparams(n_trees=k, max_depth=2,
                                          min_samples_leaf=4))
        losses.append(float(np.mean((gbm_predict_many(model, x) - y) ** 2)))
    assert all(a >= b - 1e-12 for a, b in zip(losses, losses[1:]))


def test_min_samples_leaf_honored():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(40, 2))
    y = rng.normal(size=40)
    model = fit_gbm(design(x, y), GbmHyperparams(n_trees=5, max_depth=4,
                                                 min_samples_leaf=7))

    def walk(node):
        if isinstance(node, Leaf):
            assert node.n_samples >= 7
        else:
            walk(node.left)
            walk(node.right)

    for tree in model.trees:
        walk(tree)


def test_too_few_rows():
    with pytest.raises(TooFewRows):
        fit_gbm(design([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]),
                GbmHyperparams(min_samples_leaf=2))


def test_deterministic_fit():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(50, 2))
    y = rng.normal(size=50)
    m1 = fit_gbm(design(x, y), GbmHyperparams(n_trees=10))
    m2 = fit_gbm(design(x, y), GbmHyperparams(n_trees=10))
    assert m1 == m2


def test_per_unit_models_learn_treatment_effect():
    cfg = DgpConfig(gamma=1.0, rho=0.5, n_units=4, m_subunits=40, t_steps=6,
                    noise_sd=0.5, seed=14)
    out = generate(cfg)
    graph = cfg.resolved_graph()
    models = fit_unit_gbms(out.panel, graph,
                           GbmHyperparams(n_trees=80, max_depth=2,
                                          min_samples_leaf=5,
                                          learning_rate=0.2))
    assert sorted(models) == [0, 1, 2, 3]
    # contrast in treatment at fixed lags should be near beta_a for each unit
    for i, model in models.items():
        own = float(out.panel.unit_means_at(3)[i])
        nbr = float(graph.neighbor_mean(out.panel.unit_means_at(3))[i])
        contrast = (gbm_predict(model, [1.0, own, nbr])
                    - gbm_predict(model, [0.0, own, nbr]))
        assert abs(contrast - 5.0) < 1.5


def test_gbm_facade_params():
    est = GradientBoostedDynamics(n_trees=3, max_depth=1)
    params = est.get_params()
    assert params["n_trees"] == 3 and params["max_depth"] == 1
