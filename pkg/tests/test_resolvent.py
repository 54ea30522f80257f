import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lattice_disperse import constants
from lattice_disperse import resolvent as R
from lattice_disperse.core.lattice import Box, LatticeSequence, random_sequence, rho_weights
from lattice_disperse.core.linalg import hs_norm, operator_norm
from lattice_disperse.resolvent import SpectralPoint
from lattice_disperse.verdict import PASS

import oracles


def test_spectral_point_validation():
    with pytest.raises(ValueError):
        SpectralPoint(0.5, 0.0)
    with pytest.raises(ValueError):
        SpectralPoint(0.5, 0.1, R.Boundary.PLUS_I0)
    z = SpectralPoint.plus_i0(1.5)
    assert z.upper and z.is_boundary and z.conjugate().boundary is R.Boundary.MINUS_I0
    assert not SpectralPoint(0, -1).upper


def test_edge_value_d3():
    # lattice Green's function of the simple cubic lattice at the band edge
    assert R.r0_kernel((0, 0, 0), SpectralPoint.plus_i0(-3)).value.real == pytest.approx(
        0.50546202, abs=1e-8)
    assert R.r0_kernel((0, 0, 0), SpectralPoint.plus_i0(3)).value.real == pytest.approx(
        -0.50546202, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(-8, 8), st.floats(-2, 2), st.floats(0.05, 2), st.booleans())
def test_d1_interior_closed_form(n, lam, mu, upper):
    z = complex(lam, mu if upper else -mu)
    got = R.r0_kernel((n,), SpectralPoint.from_complex(z)).value
    assert abs(got - oracles.resolvent_1d(n, z)) <= 1e-10


@pytest.mark.parametrize("n,z", [((0, 0), 0.3 + 0.5j), ((1, 0, 2), 0.5 + 0.7j),
                                 ((2, 1, 1), -2.0 - 0.4j), ((0, 0, 0), 3.2 + 0.3j)])
def test_interior_against_torus(n, z):
    got = R.r0_kernel(n, SpectralPoint.from_complex(z)).value
    want = oracles.torus_resolvent_trapezoid(n, z, 96 if len(n) == 3 else 400)
    assert abs(got - want) <= 1e-10


@pytest.mark.parametrize("lam", [-10.0, 10.0])
@pytest.mark.parametrize("n", [(0, 0, 0), (1, 0, 0), (2, 1, 0), (3, 3, 1)])
def test_far_exterior_against_neumann(lam, n):
    want = oracles.neumann_dense(n, complex(lam), 3, 60)
    got = R.r0_kernel(n, SpectralPoint.plus_i0(lam)).value
    assert abs(got - want) <= 1e-12
    assert R.laplace_resolvent(n, lam) == pytest.approx(want.real, abs=1e-13)


def test_minus_i0_is_conjugate():
    coords = Box(2, 3).points()
    lams = np.linspace(-4, 4, 17)
    up, _ = R.kernel_grid(coords, lams, 0.0, upper=True)
    lo, _ = R.kernel_grid(coords, lams, 0.0, upper=False)
    np.testing.assert_allclose(lo, np.conj(up), atol=1e-14)


def test_split_sums_to_total():
    for z in (SpectralPoint.plus_i0(0.7), SpectralPoint(2.0, -0.5), SpectralPoint.minus_i0(-3.0)):
        s = R.r0_split((1, 2, 0), z)
        assert abs(s.total - R.r0_kernel((1, 2, 0), z).value) <= 1e-10


@pytest.mark.parametrize("z", [SpectralPoint.plus_i0(0.5), SpectralPoint.plus_i0(-2.2),
                               SpectralPoint.minus_i0(1.0), SpectralPoint(1.0, 0.3),
                               SpectralPoint.plus_i0(-3.0), SpectralPoint.plus_i0(3.7)])
def test_kernel_solves_lattice_equation(z):
    """(Delta - z) r0 = delta_0 at interior sites of a small cube."""
    box = Box(4, 3)
    vals, _ = R.kernel_values(box.points(), z)
    r = vals.reshape(box.shape)
    lhs = R.apply_laplacian(r) - z.z * r
    inner = (slice(1, -1),) * 3
    want = np.zeros(box.shape)
    want[(4, 4, 4)] = 1
    np.testing.assert_allclose(lhs[inner], want[inner], atol=1e-9)


@pytest.mark.parametrize("lam", [-2.5, -1.0, 0.4, 2.0])
def test_boundary_continuity(lam):
    n = (1, 0, 1)
    edge = R.r0_kernel(n, SpectralPoint.plus_i0(lam)).value
    gaps = [abs(R.r0_kernel(n, SpectralPoint(lam, mu)).value - edge) for mu in (1e-1, 1e-2, 1e-3)]
    assert gaps[0] > gaps[1] > gaps[2]
    # Hoelder exponent 0.4 from the d = 3 theory
    assert gaps[2] <= 16 * 1e-3 ** 0.4


def test_boundary_values_d_below_three_rejected():
    with pytest.raises(ValueError):
        R.r0_kernel((0,), SpectralPoint.plus_i0(0.3))


# ---------------------------------------------------------------------------
# R01 / R02 verifiers

def test_r01_equal_points():
    z = SpectralPoint(-2, -1)
    rec = R.verify_r01_contraction(z, z, Box(3, 3))
    assert rec.status == PASS


def test_r01_interior_pair():
    rec = R.verify_r01_contraction(SpectralPoint(-2, -1), SpectralPoint(-2, -2), Box(8, 3))
    assert rec.status == PASS


def test_r01_real_axis_grid():
    lams = np.arange(-4.0, 4.01, 1.0)
    for a, b in zip(lams[:-1], lams[1:]):
        rec = R.verify_r01_contraction(SpectralPoint.minus_i0(a), SpectralPoint.minus_i0(b), Box(8, 3))
        assert rec.status == PASS


def test_r02_equal_points():
    z = SpectralPoint.plus_i0(1.0)
    rec = R.verify_r02_holder((0, 0, 0), z, z, 0.4)
    assert rec.status == PASS and rec.lhs == 0


@pytest.mark.parametrize("tau", [-3.0, -1.0, 1.0, 3.0])
def test_r02_threshold_straddle_d3(tau):
    for h in (0.2, 0.02, 0.002):
        rec = R.verify_r02_holder((0, 0, 0), SpectralPoint.plus_i0(tau - h),
                                  SpectralPoint.plus_i0(tau + h), 0.4)
        assert rec.status == PASS


def test_r02_lipschitz_d5():
    m = (1, 1, 0, 0, 0)
    for a, b in [(-0.5, 0.3), (2.0, 2.4), (-4.2, -3.8)]:
        rec = R.verify_r02_holder(m, SpectralPoint.plus_i0(a), SpectralPoint.plus_i0(b), 1.0)
        assert rec.status == PASS


def test_r02_rejects_inadmissible_gamma():
    z = SpectralPoint.plus_i0(0.0)
    with pytest.raises(constants.ConstantDomainError):
        R.verify_r02_holder((0, 0, 0), z, z, 0.5)


# ---------------------------------------------------------------------------
# weighted resolvents

def test_weighted_resolvent_delta():
    d0 = LatticeSequence.delta((0, 0, 0))
    z = SpectralPoint.plus_i0(0.5)
    K = R.weighted_resolvent(d0, d0, z)
    assert K.shape == (1, 1)
    assert K.entries[0, 0] == pytest.approx(R.r0_kernel((0, 0, 0), z).value, abs=1e-14)


def test_weighted_resolvent_entries():
    rng = np.random.default_rng(2)
    u, v = random_sequence(rng, 3, 1, 0.5), random_sequence(rng, 3, 1, 0.5)
    z = SpectralPoint(0.5, 0.4)
    K = R.weighted_resolvent(u, v, z).entries
    for i, (n, un) in enumerate(u.items()):
        for j, (m, vm) in enumerate(v.items()):
            diff = tuple(a - b for a, b in zip(n, m))
            want = un * oracles.torus_resolvent_trapezoid(diff, z.z, 96) * vm
            assert abs(K[i, j] - want) <= 1e-10 * max(1, abs(un * vm))


def test_hs_norm_fft_matches_entry_sum():
    box = Box(12, 3)
    pts = box.points()
    u = LatticeSequence.from_arrays(pts, rho_weights(pts), 3)
    z = SpectralPoint.plus_i0(0.5)
    hs, err = R.weighted_hs_norm(u, u, z)
    assert math.isfinite(hs) and err < 1e-6 * hs
    assert hs == pytest.approx(R.weighted_hs_norm_direct(u, u, z), rel=1e-10)


def test_hs_norm_small_dense():
    rng = np.random.default_rng(8)
    u, v = random_sequence(rng, 3, 1), random_sequence(rng, 3, 1)
    z = SpectralPoint.minus_i0(-1.3)
    hs, _ = R.weighted_hs_norm(u, v, z)
    assert hs == pytest.approx(hs_norm(R.weighted_resolvent(u, v, z)), rel=1e-10)


def test_resolvent_bound_delta_grid():
    d0 = LatticeSequence.delta((0, 0, 0))
    for lam in np.arange(-4, 4.001, 0.25):
        z = SpectralPoint.plus_i0(float(lam))
        recs = R.verify_resolvent_bounds(d0, d0, 2.0, z, z, 0.4)
        assert all(r.status == PASS for r in recs)
        assert recs[0].rhs == pytest.approx(17)


def test_resolvent_bound_lipschitz_d5():
    rng = np.random.default_rng(3)
    u, v = random_sequence(rng, 5, 1, 0.2), random_sequence(rng, 5, 1, 0.2)
    for tau in (-5.0, -3.0, -1.0, 1.0, 3.0, 5.0):
        recs = R.verify_resolvent_bounds(u, v, 2.0, SpectralPoint.plus_i0(tau - 0.05),
                                         SpectralPoint.plus_i0(tau + 0.05), 1.0)
        assert all(r.status == PASS for r in recs)


def test_resolvent_bound_rejects_inadmissible_q():
    d0 = LatticeSequence.delta((0, 0, 0))
    z = SpectralPoint.plus_i0(0.0)
    with pytest.raises(constants.ConstantDomainError):
        R.verify_resolvent_bounds(d0, d0, 2.5, z, z, 0.0)


def test_operator_norm_dominated_by_hs():
    rng = np.random.default_rng(5)
    u, v = random_sequence(rng, 3, 2, 0.3), random_sequence(rng, 3, 2, 0.3)
    K = R.weighted_resolvent(u, v, SpectralPoint.plus_i0(2.9))
    assert operator_norm(K) <= hs_norm(K) * (1 + 1e-14)


def test_bound_records_report_gamma_at_half_q():
    d0 = LatticeSequence.delta((0, 0, 0))
    z = SpectralPoint.plus_i0(0.5)
    rec = R.verify_resolvent_bounds(d0, d0, 2.2, z, z, 0.2)[0]
    assert rec.details["gamma_big"] == pytest.approx(constants.gamma_big(2.2, 3, 0.2))
    # q/2 < 2 for every admissible q, where Gamma is undefined
    assert rec.details["gamma_big_half_q"] is None
