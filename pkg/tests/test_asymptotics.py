import math

import numpy as np
import pytest

from staircase.asymptotics import (
    FitIllConditioned,
    RankDeficient,
    fit_model,
    linear_coefficients,
    run_expansion_check,
)
from staircase.sc.engine import AccessoryConfig

BASE = AccessoryConfig(-0.5, 0.0, 0.5)
GRID = 2.0 ** -np.arange(10, 31)


def test_fit_exact_polynomial():
    s = GRID
    fit = fit_model(s, 3 * s + 5 * s * s, [lambda x: x, lambda x: x * x], weights=1 / s)
    assert np.allclose(fit.coefficients, (3, 5), rtol=1e-12, atol=1e-9)


def test_fit_log_basis():
    s = GRID
    fit = fit_model(s, s * np.log(1 / s), [lambda x: x * np.log(1 / x), lambda x: x], weights=1 / s)
    assert abs(fit.coefficients[0] - 1) < 1e-10 and abs(fit.coefficients[1]) < 1e-9


def test_fit_noise_bounded_by_condition():
    s = GRID
    rng = np.random.default_rng(0)
    basis = [lambda x: x * np.log(1 / x), lambda x: x]
    w = 1 / s
    y = s * np.log(1 / s) + 0.5 * s
    noise = 1e-12 * rng.standard_normal(len(s)) / w
    fit = fit_model(s, y + noise, basis, weights=w)
    # perturbation bound from the assembled normal equations: |dc| <= ||(M^T M)^-1 M^T|| ||noise||
    M = np.column_stack([f(s) for f in basis]) * w[:, None]
    bound = np.linalg.norm(np.linalg.pinv(M), 2) * np.linalg.norm(noise * w)
    assert abs(fit.coefficients[0] - 1) <= bound and abs(fit.coefficients[1] - 0.5) <= bound


def test_fit_zero_data_gives_zero_function():
    fit = fit_model(GRID, np.zeros_like(GRID), [lambda x: x, lambda x: x * x], weights=1 / GRID)
    assert fit.coefficients == (0.0, 0.0)


def test_fit_rank_deficiency():
    with pytest.raises(RankDeficient):
        fit_model(GRID[:3], GRID[:3], [lambda x: x, lambda x: x * x])
    with pytest.raises(RankDeficient):
        fit_model(GRID, GRID, [lambda x: x, lambda x: 2 * x])
    with pytest.raises(FitIllConditioned):
        fit_model(GRID, GRID, [lambda x: x, lambda x: x * (1 + 1e-9 * x)], max_condition=1e12)


def test_b_coefficient():
    rep = run_expansion_check("B", BASE)
    K_B = math.pi / (2 * math.sqrt(1.5) * math.sqrt(0.5) * 1.0)
    assert abs(rep.coefficients["K_B"] - K_B) / K_B < 1e-3
    assert rep.predictions["K_B"] == pytest.approx(K_B, rel=1e-15)


def test_p_and_c_share_alpha():
    p = run_expansion_check("P", BASE)
    c = run_expansion_check("C", BASE)
    alpha = p.predictions["alpha"]
    assert p.coefficients["alpha"] > 0
    assert abs(p.coefficients["alpha"] - c.coefficients["K_C"] / math.pi) < 0.05 * alpha
    assert p.relative_errors["alpha"] < 0.05


def test_q_sign_flip():
    p = run_expansion_check("P", BASE)
    q = run_expansion_check("Q", BASE)
    assert q.coefficients["minus_alpha"] < 0 < q.coefficients["alpha_p"]
    assert abs(abs(q.coefficients["minus_alpha"]) - p.coefficients["alpha"]) < 0.05 * p.coefficients["alpha"]


def test_grid_refinement_stability():
    a = run_expansion_check("P", BASE, 10, 27)
    b = run_expansion_check("P", BASE, 10, 30)
    # leading coefficient moves little compared with the O(1/ln) accuracy of the model
    assert abs(a.coefficients["alpha"] - b.coefficients["alpha"]) < 1e-3 * b.coefficients["alpha"]


def test_area_report_structure():
    rep = run_expansion_check("AREA", BASE, 7, 22)
    assert rep.coefficients["beta11"] > 0 and rep.coefficients["beta22"] > 0
    assert rep.relative_errors["beta11"] < 0.1 and rep.relative_errors["beta22"] < 0.1
    assert {"A1", "A2", "P_const", "Q_const"} <= set(rep.extras)
    rows = list(rep.csv_rows())
    assert len(rows) == 2 * 16


def test_linear_coefficients_finite():
    lin = linear_coefficients(BASE)
    assert all(math.isfinite(v) for v in lin.values())


def test_bad_inputs():
    with pytest.raises(ValueError):
        run_expansion_check("X", BASE)
    with pytest.raises(ValueError):
        run_expansion_check("B", AccessoryConfig(-0.5, 0.0, 0.5, 1e-3, 0.0))
    with pytest.raises(ValueError):
        run_expansion_check("B", BASE, 2, 20)


def test_parallel_matches_serial():
    a = run_expansion_check("B", BASE, 10, 14)
    b = run_expansion_check("B", BASE, 10, 14, n_jobs=2)
    assert a.coefficients == b.coefficients
