"""LP engine checks against scipy's HiGHS as the independent oracle."""

import numpy as np
import pytest
from scipy.optimize import linprog

from sme_lab.simplex import INFEASIBLE, OPTIMAL, solve_box_lp, solve_support_lp


def _oracle(c, A, b, lo, hi):
    res = linprog(-c, A_ub=A, b_ub=b, bounds=list(zip(lo, hi)), method="highs")
    if res.status == 2:
        return None
    assert res.status == 0
    return -res.fun


def test_box_only():
    c = np.array([1.0, -2.0, 0.5])
    res = solve_box_lp(c, np.empty((0, 3)), np.empty(0), -np.ones(3), np.ones(3))
    assert res.status == OPTIMAL
    assert res.value == pytest.approx(3.5)
    assert np.allclose(res.x, [1.0, -1.0, 1.0])


def test_single_cut():
    # x0 + x1 <= 1 caps the corner of the unit box
    res = solve_box_lp(
        np.array([1.0, 1.0]), np.array([[1.0, 1.0]]), np.array([1.0]),
        -np.ones(2), np.ones(2),
    )
    assert res.status == OPTIMAL
    assert res.value == pytest.approx(1.0)
    assert res.active_rows.tolist() == [0]


def test_infeasible_detected():
    res = solve_box_lp(
        np.array([1.0]), np.array([[1.0]]), np.array([-5.0]), np.array([-1.0]), np.array([1.0])
    )
    assert res.status == INFEASIBLE
    assert res.x is None


def test_zero_objective_is_feasibility_probe():
    ok = solve_box_lp(np.zeros(2), np.array([[1.0, 0.0]]), np.array([0.5]), -np.ones(2), np.ones(2))
    assert ok.status == OPTIMAL
    bad = solve_box_lp(np.zeros(2), np.array([[1.0, 0.0]]), np.array([-3.0]), -np.ones(2), np.ones(2))
    assert bad.status == INFEASIBLE


def test_matches_oracle_on_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(250):
        d = int(rng.integers(1, 10))
        m = int(rng.integers(0, 50))
        c = rng.normal(size=d)
        A = rng.normal(size=(m, d))
        b = rng.normal(size=m) + 0.5
        lo = -np.abs(rng.normal(size=d)) - 0.5
        hi = np.abs(rng.normal(size=d)) + 0.5
        res = solve_box_lp(c, A, b, lo, hi)
        ref = _oracle(c, A, b, lo, hi)
        if ref is None:
            assert res.status == INFEASIBLE
        else:
            assert res.status == OPTIMAL
            assert res.value == pytest.approx(ref, abs=1e-7, rel=1e-7)
            assert np.all(A @ res.x <= b + 1e-7)
            assert np.all(res.x >= lo - 1e-9) and np.all(res.x <= hi + 1e-9)


def test_degenerate_rows_terminate():
    # many duplicated rows through one vertex stress the anti-cycling path
    A = np.tile(np.array([[1.0, 1.0]]), (40, 1))
    b = np.ones(40)
    res = solve_box_lp(np.array([1.0, 1.0]), A, b, -np.ones(2), np.ones(2))
    assert res.status == OPTIMAL
    assert res.value == pytest.approx(1.0)


def test_deterministic():
    rng = np.random.default_rng(3)
    c = rng.normal(size=6)
    A = rng.normal(size=(30, 6))
    b = np.ones(30)
    r1 = solve_box_lp(c, A, b, -np.ones(6), np.ones(6))
    r2 = solve_box_lp(c, A, b, -np.ones(6), np.ones(6))
    assert r1.value == r2.value
    assert np.array_equal(r1.x, r2.x)
    assert r1.iterations == r2.iterations


def test_support_wrapper_flips_ge_cuts():
    # cut x0 >= 0.25 expressed in the >= convention
    res = solve_support_lp(
        np.array([-1.0, 0.0]), np.array([[1.0, 0.0]]), np.array([0.25]),
        -np.ones(2), np.ones(2),
    )
    assert res.status == OPTIMAL
    assert res.value == pytest.approx(-0.25)


def test_rejects_bad_box():
    with pytest.raises(ValueError):
        solve_box_lp(np.ones(2), np.empty((0, 2)), np.empty(0), np.ones(2), -np.ones(2))
