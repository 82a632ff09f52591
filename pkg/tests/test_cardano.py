import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ofdm_dcsk import analytic, cardano
from ofdm_dcsk.cardano import CubicCoeffs, DepressedCubic
from ofdm_dcsk.model import SystemParams


def test_coefficients_hand_values():
    c = cardano.cubic_coeffs(SystemParams(2, 1, 1, 1.0, 1.0))
    assert c.cubic == -2.0
    assert c.constant == -12.0


@pytest.mark.parametrize("M,beta,P,db", [(2, 1, 1, 0), (64, 128, 1, 10), (16, 32, 3, -4), (40, 7, 5, 17)])
def test_linear_to_constant_ratio(M, beta, P, db):
    c = cardano.cubic_coeffs(SystemParams.from_ebn0_db(M, beta, P, db))
    assert c.linear / -c.constant == pytest.approx(3 / M, rel=1e-14)


def test_depress_already_depressed():
    dc, shift = cardano.depress(CubicCoeffs(1.0, 0.0, -3.0, 0.0))
    assert (dc.linear, dc.constant, dc.discriminant) == (-3.0, 0.0, -1.0)
    assert shift == 0.0


def test_depress_planted_integers():
    # (N-1)(N-2)(N-3) = N^3 - 6N^2 + 11N - 6; N = X + 2 gives X^3 - X.
    dc, shift = cardano.depress(CubicCoeffs(1.0, -6.0, 11.0, -6.0))
    assert dc.linear == pytest.approx(-1.0, abs=1e-14)
    assert dc.constant == pytest.approx(0.0, abs=1e-14)
    assert dc.discriminant == pytest.approx(-1 / 27, abs=1e-14)
    assert shift == pytest.approx(2.0)
    assert cardano.real_roots(dc, shift) == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)


def test_discriminant_is_continuous():
    base = SystemParams.from_ebn0_db(64, 128, 2, 10.0)
    d0 = cardano.depressed(base).discriminant
    d1 = cardano.depressed(SystemParams(64, 128, 2, base.eb * (1 + 1e-9))).discriminant
    assert abs(d1 - d0) <= 1e-6 * abs(d0)


def test_roots_three_real():
    assert cardano.real_roots(DepressedCubic(-3.0, 0.0, -1.0)) == pytest.approx(
        [-math.sqrt(3), 0.0, math.sqrt(3)], abs=1e-14)


def test_roots_one_real():
    assert cardano.real_roots(DepressedCubic(0.0, -8.0, 16.0)) == pytest.approx([2.0], abs=1e-14)


def test_roots_triple():
    assert cardano.real_roots(DepressedCubic(0.0, 0.0, 0.0)) == [0.0]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(-6400, 6400).map(lambda k: k / 64), min_size=3, max_size=3),
       st.booleans())
def test_planted_roots_recovered(roots, complex_pair):
    # Roots on a 1/64 grid keep every coefficient exactly representable.
    if complex_pair:
        # One real root r plus the pair u +- iv.
        r, u, v = roots[0], roots[1], abs(roots[2]) + 1 / 64
        coeffs = CubicCoeffs(1.0, -(r + 2 * u), 2 * u * r + u * u + v * v, -r * (u * u + v * v))
        expected = [r]
    else:
        r1, r2, r3 = sorted(roots)
        if min(r2 - r1, r3 - r2) < 1e-2:
            return  # nearly repeated roots are ill-conditioned at this tolerance
        coeffs = CubicCoeffs(1.0, -(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3)
        expected = [r1, r2, r3]
    got = cardano.cubic_roots(coeffs)
    assert len(got) == len(expected)
    assert got == pytest.approx(expected, abs=1e-9)


def _fd_derivative(params, x, h=1e-4):
    return (_objective_continuous(params, x + h) - _objective_continuous(params, x - h)) / (2 * h)


def _objective_continuous(params, n):
    M, P, beta, n0, eb = (params.n_subcarriers, params.n_users, params.spreading,
                          params.n0, params.eb)
    k = M - n
    return ((n + 1) / n) * P * M * n0 / (k * eb) + beta * M**2 * n0**2 / (2 * n * k**2 * eb**2) \
        + 2 * (P - 1) * M / (k * eb)


@pytest.mark.parametrize("M,beta,P,db", [(64, 128, 1, 10), (16, 32, 2, 8), (32, 16, 3, 0), (8, 128, 1, 15)])
def test_roots_match_finite_difference_sign_changes(M, beta, P, db):
    params = SystemParams.from_ebn0_db(M, beta, P, db)
    grid = np.linspace(0.01, M - 0.01, 20001)
    d = np.array([_fd_derivative(params, x) for x in grid])
    idx = np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]
    fd_roots = [float(grid[i] - d[i] * (grid[i + 1] - grid[i]) / (d[i + 1] - d[i])) for i in idx]
    inside = [r for r in cardano.stationary_points(params) if 0 < r < M]
    assert len(inside) == len(fd_roots) >= 1
    for r, ref in zip(inside, fd_roots):
        lo, hi = r * (1 - 1e-6), r * (1 + 1e-6)
        assert _fd_derivative(params, lo) * _fd_derivative(params, hi) < 0
        assert r == pytest.approx(ref, rel=1e-3)


def test_candidates_rounding_rule():
    assert cardano.candidates_from_roots([3.4, 40.2, -2.0, 70.0], 64) == [1, 3, 4, 40, 41, 63]
    assert cardano.candidates_from_roots([], 2) == [1]


def test_two_subcarriers():
    assert cardano.optimal_n_closed_form(SystemParams.from_ebn0_db(2, 128, 1, 10)) == 1


def test_closed_form_matches_bruteforce_example():
    params = SystemParams.from_ebn0_db(16, 32, 2, 8.0)
    assert cardano.optimal_n_closed_form(params) == cardano.optimal_n_bruteforce(params)


@pytest.mark.parametrize("M,beta,P", list(itertools.product([8, 32, 64], [16, 128], [1, 2, 3])))
def test_closed_form_matches_bruteforce_grid(M, beta, P):
    for db in np.linspace(-5, 25, 16):
        params = SystemParams.from_ebn0_db(M, beta, P, db)
        assert cardano.optimal_n_closed_form(params) == cardano.optimal_n_bruteforce(params)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 256), st.integers(1, 512), st.integers(1, 10), st.floats(-20, 40))
def test_bruteforce_is_local_minimum_and_closed_form_agrees(M, beta, P, db):
    params = SystemParams.from_ebn0_db(M, beta, P, db)
    n = cardano.optimal_n_bruteforce(params)
    f = analytic.objective_sa(params, n)
    for nb in (n - 1, n + 1):
        if 1 <= nb <= M - 1:
            assert f <= analytic.objective_sa(params, nb)
    assert cardano.optimal_n_closed_form(params) == n


def test_reference_scenario_optimum(fig4_params):
    # Both searches agree; the value itself is discussed in the acceptance module.
    assert cardano.optimal_n_closed_form(fig4_params) == cardano.optimal_n_bruteforce(fig4_params)
