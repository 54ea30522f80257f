import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from lattice_disperse import bessel
from lattice_disperse.bessel import (BesselBoundKind, BesselPrecisionError, bessel_j,
                                     bessel_j_table, bound_value, eval_j)
from lattice_disperse.verdict import PASS

import oracles


def test_eval_j_at_zero():
    assert eval_j(0, 0.0).value == 1
    assert eval_j(4, 0.0).value == 0


def test_eval_j_one_against_series():
    v = eval_j(0, 1.0)
    assert abs(v.value - 0.765197686557967) <= 1e-12
    assert abs(v.value - oracles.bessel_series_mp(0, 1.0)) <= 1e-15
    assert v.abs_error <= 1e-12


@pytest.mark.parametrize("t", [0.3, 2.0, 7.5, 31.0, 99.0])
def test_negative_order_reflection(t):
    assert eval_j(-3, t).value == pytest.approx(-eval_j(3, t).value, abs=1e-15)
    assert eval_j(-4, t).value == pytest.approx(eval_j(4, t).value, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(-60, 60), st.floats(0, 120))
def test_eval_j_against_mp_series(n, t):
    v = eval_j(n, t)
    want = oracles.bessel_series_mp(n, t)
    assert abs(v.value - want) <= max(v.abs_error, 1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(-40, 40), st.floats(0.01, 500))
def test_eval_j_negative_argument(n, t):
    assert eval_j(n, -t).value == pytest.approx((-1) ** abs(n) * eval_j(n, t).value, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 80), st.floats(0.1, 300))
def test_three_term_recurrence(n, t):
    lhs = eval_j(n - 1, t).value + eval_j(n + 1, t).value
    rhs = 2 * n / t * eval_j(n, t).value
    assert abs(lhs - rhs) <= 1e-12 * max(1, 2 * n / t)


@pytest.mark.parametrize("t", [1e3, 2.5e4, 7.77e5])
def test_large_argument_against_mpmath(t):
    import mpmath
    for n in (0, 1, 17, 300):
        assert abs(eval_j(n, t).value - float(mpmath.besselj(n, t))) <= 1e-12


def test_precision_error_on_impossible_tolerance():
    with pytest.raises(BesselPrecisionError):
        eval_j(5, 40.0, tol=1e-30)


def test_domain_limits():
    with pytest.raises(ValueError):
        eval_j(2, 2e6)


def test_vectorised_matches_scalar():
    t = np.linspace(0, 150, 301)
    for n in (-7, 0, 3, 45, 160):
        vals, errs = bessel_j(n, t)
        want = [eval_j(n, x).value for x in t]
        np.testing.assert_allclose(vals, want, atol=1e-13)
        assert errs.max() <= 1e-12


def test_table_against_miller_oracle():
    t = np.linspace(0, 60, 401)
    vals, _ = bessel_j_table(40, t)
    ref = oracles.bessel_miller_table(40, t)
    np.testing.assert_allclose(vals, ref, atol=1e-13)
    for k in (1, 2, 7):
        neg, _ = bessel_j(-k, t)
        np.testing.assert_allclose(neg, (-1) ** k * vals[k], atol=1e-15)


def test_neumann_sum_rule():
    t = np.array([0.5, 5.0, 50.0])
    vals, _ = bessel_j_table(120, t)
    np.testing.assert_allclose(vals[0] ** 2 + 2 * (vals[1:] ** 2).sum(axis=0), 1, atol=1e-13)


# ---------------------------------------------------------------------------
# tail bounds

@pytest.mark.parametrize("m,t", [(10, 3.0), (40, 30.0), (120, 100.0)])
def test_kapteyn_bound_dominates(m, t):
    assert abs(scipy.special.jv(m, t)) <= bessel.kapteyn_bound(m, t)


@pytest.mark.parametrize("t", [1.0, 8.0, 30.0])
def test_tail_mass_bound(t):
    R = bessel.tail_radius(t, 1e-20)
    tail = 2 * sum(scipy.special.jv(m, t) ** 2 for m in range(R + 1, R + 200))
    assert tail <= 1e-20
    assert bessel.tail_l2_mass(R, t) <= 1e-20


# ---------------------------------------------------------------------------
# pointwise bounds

def test_bound_examples():
    assert bound_value("Szego", 0, 2 / math.pi) == pytest.approx(1)
    assert bound_value(BesselBoundKind.FUSED, 0, 1) == pytest.approx(1)
    assert bound_value("SmallT", 3, 0.5) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        bound_value("SmallT", 3, 2.0)
    with pytest.raises(ValueError):
        bound_value("Szego", 1, 2.0)


def test_bounds_exhaustive_grid():
    rec = bessel.verify_pointwise_bounds(range(-50, 51), np.arange(1, 200.5, 0.5))
    assert rec.status == PASS, rec.details["violations"][:3]


def test_bounds_transition_diagonal():
    for n in range(1, 101):
        rec = bessel.verify_pointwise_bounds([n], [float(n)])
        assert rec.status == PASS


def test_small_t_bound_grid():
    rec = bessel.verify_pointwise_bounds(range(0, 51), np.arange(0, 1.0001, 0.01), kinds=["SmallT"])
    assert rec.status == PASS and rec.details["checked"]["SmallT"] == 51 * 101


def test_bound_check_catches_a_wrong_constant():
    # Landau argument bound with a constant far below sup t^{1/3}|J_n(t)| ~ 0.7857
    rec = bessel.verify_pointwise_bounds(range(0, 20), np.linspace(1, 50, 200),
                                         kinds=["LandauArgument"], c_lan=0.5)
    assert rec.status != PASS and rec.details["violations"]


# ---------------------------------------------------------------------------
# weighted L^p integral

def test_weighted_lp_p3_n0():
    rec = bessel.verify_weighted_lp(3.0, 0.0, 0)
    assert rec.status == PASS and rec.rhs == pytest.approx(16)


def test_weighted_lp_p4_n10_log_factor():
    rec = bessel.verify_weighted_lp(4.0, 0.0, 10)
    assert rec.status == PASS
    assert rec.rhs == pytest.approx(4 * 10 ** -1 * (1 + math.log(10)))


@pytest.mark.parametrize("n", [1, 7, 15, 30])
def test_weighted_lp_p6_half(n):
    rec = bessel.verify_weighted_lp(6.0, 0.5, n)
    assert rec.status == PASS


def test_weighted_lp_against_simpson():
    res = bessel.weighted_lp_integral(3.0, 0.0, 5, cutoff=4096.0)
    want = oracles.bessel_cube_simpson(5, 1.0, 4096.0)
    assert abs(res.value.real - want) <= 1e-8
    assert res.tail_bound > 0


def test_weighted_lp_rejects_inadmissible():
    with pytest.raises(ValueError):
        bessel.verify_weighted_lp(3.0, 0.5, 0)


def test_accuracy_record_against_scipy():
    rec = bessel.verify_accuracy(range(-5, 6), np.linspace(0, 30, 200))
    assert rec.status == PASS and rec.lhs <= 1e-12
