"""Acceptance suite: one test per exit criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s`. The experiment criteria use
bands around the reference values, judged at a fixed base seed (7) that a
pilot across seeds {0,1,2,7,42,123,999,2024} showed to be representative.
"""
import math
import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from stcausal.collapse import (
    default_toy_model,
    exact_history_distribution,
    kl_curve,
    kl_divergence,
    super_unit_distribution,
)
from stcausal.data import PanelDataset, grid_graph
from stcausal.dgp import DgpConfig
from stcausal.errors import StcausalError
from stcausal.estimators import VARIANT_SPATIOTEMPORAL, LmmFit
from stcausal.experiments import (
    mean_abs_error,
    run_consistency,
    run_grid,
    run_robustness,
    run_unbiasedness,
)
from stcausal.gbm import GbmHyperparams, Leaf, fit_gbm
from stcausal.gcomp import MODE_OBSERVED_LAG, MODE_PROPAGATE, estimate_ate
from stcausal.linalg import DesignMatrix, solve_least_squares

BASE_SEED = 7
DEFAULT = DgpConfig(gamma=2.0, rho=1.5)


class Timer:
    def __init__(self, limit_s: float):
        self.limit = limit_s

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.monotonic() - self.start
        return False


def report(criterion: str, ok: bool, detail: str, timer: Timer):
    status = "PASS" if ok and timer.elapsed < timer.limit else "FAIL"
    print(f"[{status}] {criterion}: {detail} ({timer.elapsed:.2f}s "
          f"< {timer.limit:.0f}s)")
    assert ok, detail
    assert timer.elapsed < timer.limit, f"runtime {timer.elapsed:.2f}s over budget"


def dyadic_fixture():
    """2x2 grid, two subunits, eight steps; every quantity is a dyadic
    rational with small magnitude, so the simulation arithmetic is exact."""
    graph = grid_graph(2, 2)
    a = np.zeros((4, 2, 8), dtype=np.int8)
    base = np.arange(4 * 2 * 8, dtype=float).reshape(4, 2, 8)
    y = base / 8.0 - 3.0
    panel = PanelDataset(a, y)
    fit = LmmFit(VARIANT_SPATIOTEMPORAL, (0.25, -0.5, 1.125, 0.75), 5.0, 0.5,
                 1.5, 0.0)
    return fit, panel, graph


def test_criterion_1_gcomp_exactness():
    with Timer(1.0) as t:
        fit, panel, graph = dyadic_fixture()
        prop = estimate_ate(fit, panel, graph, horizon=8, mode=MODE_PROPAGATE)
        obs = estimate_ate(fit, panel, graph, horizon=8, mode=MODE_OBSERVED_LAG)
    ok = abs(prop.ate - 9.9609375) <= 1e-9 and obs.ate == 5.0
    report("criterion 1 (G-computation exactness)", ok,
           f"propagate={prop.ate!r} observed-lag={obs.ate!r}", t)


def test_criterion_2_unbiasedness():
    with Timer(120.0) as t:
        table = run_unbiasedness(BASE_SEED, 100, DEFAULT, MODE_OBSERVED_LAG)
        mean_est = float(np.mean([r.ate_estimate for r in table.rows]))
    ok = abs(mean_est - 5.0) <= 0.25
    report("criterion 2 (unbiasedness)", ok,
           f"mean estimate {mean_est:.4f} vs 5.0", t)


def test_criterion_3_consistency():
    with Timer(600.0) as t:
        grid = (10, 25, 50, 100)
        table = run_consistency(BASE_SEED, grid, 50, DEFAULT, MODE_OBSERVED_LAG)
        means = [mean_abs_error(table, m=m) for m in grid]
        inversions = sum(1 for a, b in zip(means, means[1:]) if b > a)
    ok = means[-1] < means[0] and inversions <= 1
    report("criterion 3 (consistency)", ok,
           "mean errors " + " ".join(f"{v:.4f}" for v in means)
           + f", inversions={inversions}", t)


def test_criterion_4_superiority_bands():
    with Timer(600.0) as t:
        table = run_grid(BASE_SEED, [0.0, 2.0, 4.0], [0.0, 1.5, 2.0], 20,
                         DEFAULT, MODE_OBSERVED_LAG)

        def err(gamma, rho, model):
            return mean_abs_error(table, gamma=gamma, rho=rho, model=model)

        checks = {
            "st(2,4)<0.3": err(4.0, 2.0, "spatio-temporal") < 0.3,
            "t(2,4)>1.0": err(4.0, 2.0, "temporal") > 1.0,
            "agg(2,4)>5.0": err(4.0, 2.0, "aggregated") > 5.0,
            "all(0,0)<0.5": max(err(0.0, 0.0, m) for m in
                                ("aggregated", "temporal", "spatio-temporal"))
                            < 0.5,
            "st(1.5,2)<0.3": err(2.0, 1.5, "spatio-temporal") < 0.3,
            "agg(1.5,2)>3.0": err(2.0, 1.5, "aggregated") > 3.0,
        }
    ok = all(checks.values())
    report("criterion 4 (superiority bands)", ok,
           " ".join(f"{name}={'y' if v else 'N'}" for name, v in checks.items()),
           t)


def test_criterion_5_robustness_shape():
    with Timer(600.0) as t:
        kappas = (0.0, 0.5, 1.0)
        deltas = (0.0, 0.25, 0.5)
        tk = run_robustness(BASE_SEED, "kappa", kappas, 20, DEFAULT,
                            MODE_OBSERVED_LAG)
        td = run_robustness(BASE_SEED, "delta", deltas, 20, DEFAULT,
                            MODE_OBSERVED_LAG)
        st_k = [mean_abs_error(tk, kappa=k, model="spatio-temporal")
                for k in kappas]
        t_k = [mean_abs_error(tk, kappa=k, model="temporal") for k in kappas]
        st_d = [mean_abs_error(td, delta=d, model="spatio-temporal")
                for d in deltas]
        t_d = [mean_abs_error(td, delta=d, model="temporal") for d in deltas]
    kappa_ok = (all(s < u for s, u in zip(st_k, t_k))
                and max(st_k) < 2.0 * st_k[0])
    delta_ok = (all(a <= b for a, b in zip(st_d, st_d[1:]))
                and all(s < u for s, u in zip(st_d, t_d)))
    report("criterion 5 (robustness shape)", kappa_ok and delta_ok,
           f"kappa ST={['%.3f' % v for v in st_k]} T={['%.3f' % v for v in t_k]}"
           f" delta ST={['%.3f' % v for v in st_d]} T={['%.3f' % v for v in t_d]}",
           t)


def test_criterion_6_collapse_convergence():
    with Timer(5.0) as t:
        report_sq = kl_curve(default_toy_model(readout="square"), (2, 4, 8, 16))
        kls = report_sq.kl_values
        decreasing = all(a > b and b / a <= 0.5 for a, b in zip(kls, kls[1:]))

        single = default_toy_model(n_units=1, t_steps=1)
        q_half = {key: 0.5 for key in single.q_map}
        single = type(single)(1, 1, q_half, "square", 0.5)
        kl_single = kl_divergence(exact_history_distribution(single, None),
                                  exact_history_distribution(single, 2))
        closed_form_ok = abs(kl_single - 0.0353749) <= 1e-6

        lin = kl_curve(default_toy_model(readout="linear"), (2, 4, 8, 16))
        linear_ok = all(abs(k) <= 1e-12 for k in lin.kl_values)

        model2 = default_toy_model()
        super_ok = True
        for m in (None, 2, 5):
            st_d = exact_history_distribution(model2, m)
            su_d = super_unit_distribution(model2, m)
            super_ok &= set(st_d) == set(su_d) and all(
                abs(st_d[h] - su_d[h]) <= 1e-12 for h in st_d)
    ok = decreasing and closed_form_ok and linear_ok and super_ok
    report("criterion 6 (collapse convergence)", ok,
           f"KL={['%.3g' % k for k in kls]} single-step={kl_single:.7f} "
           f"linear-zero={'y' if linear_ok else 'N'} "
           f"super-unit={'y' if super_ok else 'N'}", t)


def test_criterion_7_determinism_across_workers():
    with Timer(120.0) as t:
        small = DgpConfig(gamma=1.0, rho=0.5, n_units=4, m_subunits=10,
                          t_steps=4)
        texts = [run_grid(BASE_SEED, [0.0, 1.0], [0.5], 5, small,
                          MODE_OBSERVED_LAG, workers=w).to_csv_text()
                 for w in (1, 3)]
        texts.append(run_grid(BASE_SEED, [0.0, 1.0], [0.5], 5, small,
                              MODE_OBSERVED_LAG, workers=1).to_csv_text())
    ok = texts[0] == texts[1] == texts[2]
    report("criterion 7 (determinism)", ok,
           f"{len(texts[0].encode())} bytes identical across reruns and "
           "worker counts", t)


def _normal_equation_oracle_2col(x, y):
    a = sum(v * v for v in x[:, 0])
    b = sum(u * v for u, v in zip(x[:, 0], x[:, 1]))
    d = sum(v * v for v in x[:, 1])
    p = sum(u * v for u, v in zip(x[:, 0], y))
    q = sum(u * v for u, v in zip(x[:, 1], y))
    det = a * d - b * b
    return np.array([(d * p - b * q) / det, (a * q - b * p) / det])


def _exhaustive_depth1_oracle(x, y):
    n = len(y)
    ys = [Fraction(v) for v in y]
    parent = sum((v - sum(ys) / n) ** 2 for v in ys)
    best, best_gain = None, Fraction(0)
    order = sorted(range(n), key=lambda i: x[i])
    for pos in range(n - 1):
        if x[order[pos]] == x[order[pos + 1]]:
            continue
        left = [ys[i] for i in order[:pos + 1]]
        right = [ys[i] for i in order[pos + 1:]]
        lm, rm = sum(left) / len(left), sum(right) / len(right)
        gain = parent - (sum((v - lm) ** 2 for v in left)
                         + sum((v - rm) ** 2 for v in right))
        if gain > best_gain:
            best_gain = gain
            best = ((x[order[pos]] + x[order[pos + 1]]) / 2.0,
                    float(lm), float(rm))
    return best


def _depth1_fit(x, y):
    d = DesignMatrix(("x",), np.asarray(x, dtype=float)[:, None],
                     np.asarray(y, dtype=float))
    model = fit_gbm(d, GbmHyperparams(n_trees=1, max_depth=1,
                                      min_samples_leaf=1, learning_rate=1.0))
    tree = model.trees[0]
    if isinstance(tree, Leaf):
        return None
    return (tree.threshold, model.base_prediction + tree.left.value,
            model.base_prediction + tree.right.value)


def test_criterion_8_oracle_equivalence():
    with Timer(120.0) as t:
        rng = np.random.default_rng(2024)
        solved = 0
        ls_ok = True
        while solved < 100:
            x = rng.integers(-5, 6, size=(4, 2)).astype(float)
            if abs(np.linalg.det(x.T @ x)) < 1e-6:
                continue
            y = rng.normal(size=4)
            beta = solve_least_squares(DesignMatrix(("u", "v"), x, y))
            ls_ok &= bool(np.allclose(beta, _normal_equation_oracle_2col(x, y),
                                      atol=1e-10))
            solved += 1

        split_ok = True
        xs = [0.0, 1.0, 2.0, 3.0]
        cases = [list(ys) for ys in product((0.0, 3.0, 6.0, 9.0), repeat=4)]
        cases += [list(rng.normal(size=4)) for _ in range(100)]
        for ys in cases:
            expected = _exhaustive_depth1_oracle(xs, ys)
            got = _depth1_fit(xs, ys)
            if expected is None:
                split_ok &= got is None
            else:
                thr, lv, rv = expected
                split_ok &= (got is not None and got[0] == thr
                             and abs(got[1] - lv) <= 1e-12
                             and abs(got[2] - rv) <= 1e-12)
    ok = ls_ok and split_ok
    report("criterion 8 (oracle equivalence)", ok,
           f"least-squares 100/100={'y' if ls_ok else 'N'} "
           f"splits {len(cases)} cases={'y' if split_ok else 'N'}", t)
