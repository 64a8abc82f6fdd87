import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import beta as beta_fn

from mtlab.errors import EmptyBoxError, InvalidOrderError, NoSignChangeError, TooCloseToBoundaryError
from mtlab.geometry import RegionSpec, g_lambda, region_mask
from mtlab.kernels import poisson_ext
from mtlab.numerics import (ball_product_rule, bisect_root, fd_laplacian, gauss_integrate, gauss_interval,
                            make_bracket, mc_axisymmetric_volume, mc_region_volume, merge_estimates,
                            MCEstimate, sphere_quadrature, weighted_slope)


def test_linear_root():
    f = lambda x: x - 0.5
    assert abs(bisect_root(f, make_bracket(f, 0.0, 1.0), 1e-12) - 0.5) <= 1e-12


def test_lambda13_root_in_bracket():
    f = lambda t: g_lambda(t, 13)
    r = bisect_root(f, make_bracket(f, 2.67, 2.79))
    assert 2.67 < r < 2.79
    assert abs(f(r)) < 1e-10


def test_sqrt2_checked_by_squaring():
    f = lambda x: x * x - 2
    r = bisect_root(f, make_bracket(f, 1.0, 2.0), 1e-14)
    assert abs(r * r - 2) < 1e-13


def test_no_sign_change():
    f = lambda x: x * x + 1
    with pytest.raises(NoSignChangeError):
        bisect_root(f, make_bracket(f, -1.0, 1.0))


def test_bracket_order():
    with pytest.raises(ValueError):
        make_bracket(lambda x: x, 1.0, 0.0)


def test_interval_rules():
    assert abs(gauss_integrate(lambda x: np.ones_like(x), 0, 1) - 1) < 1e-15
    assert abs(gauss_interval(-1, 1, 8).integrate(lambda x: x ** 3)) < 1e-15
    with pytest.raises(InvalidOrderError):
        gauss_interval(0, 1, 0)


def test_beta_integral_n3():
    n = 3
    p = 2 * n / (n - 2)
    val = gauss_integrate(lambda t: t ** p * (1 - t * t) ** ((n - 3) / 2), 0, 1, 64)
    assert abs(val - 1 / 7) < 1e-14
    assert abs(0.5 * beta_fn((p + 1) / 2, (n - 1) / 2) - 1 / 7) < 1e-14


@pytest.mark.parametrize("n", [3, 4, 5])
def test_ball_rule_moments(n):
    rule = ball_product_rule(n, 32, 2000)
    omega = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    assert abs(rule.total() - omega / n) < 1e-12
    assert abs(rule.integrate(lambda x: np.sum(x * x, axis=1)) - omega / (n + 2)) < 1e-12
    assert abs(rule.integrate(lambda x: x[:, 0])) < 1e-13


def test_ball_rule_qmc_odd_moment():
    rule = ball_product_rule(3, 32, 4000, seed=3, kind="qmc")
    assert abs(rule.total() - 4 * math.pi / 3) < 1e-12
    assert abs(rule.integrate(lambda x: x[:, 0])) < 1e-12   # antipodal pairs


def test_sphere_rule_exactness():
    q = sphere_quadrature(4, 2000)
    assert abs(q.total() - 2 * math.pi ** 2) < 1e-12
    assert abs(q.integrate(lambda u: u[:, 0] ** 4) - 2 * math.pi ** 2 * 3 / (4 * 6)) < 1e-12


def test_mc_unit_ball():
    est = mc_region_volume(lambda y: np.sum(y * y, axis=1) < 1, [[-1, 1]] * 3, 400_000, seed=1)
    assert est.within(4 * math.pi / 3, 3)


def test_mc_G3():
    spec = RegionSpec("Gn", 3, 0.0)
    est = mc_region_volume(lambda y: region_mask(spec, y), [[0, 2], [-1.1, 1.1], [-1.1, 1.1]], 400_000, seed=2)
    assert est.within(16 * math.pi / 21, 3)


def test_mc_E0_is_empty():
    spec = RegionSpec("E", 4, 0.0)
    est = mc_axisymmetric_volume(lambda y: region_mask(spec, y), 4, (0, 1), 1.0, 200_000, seed=0)
    assert est.value == 0.0 and est.extra["hits"] == 0


def test_empty_box():
    with pytest.raises(EmptyBoxError):
        mc_region_volume(lambda y: y[:, 0] > 0, [[0, 0], [0, 1]], 10, 0)


def test_mc_reproducible():
    f = lambda y: np.sum(y * y, axis=1) < 1
    a = mc_region_volume(f, [[-1, 1]] * 3, 10_000, seed=5)
    b = mc_region_volume(f, [[-1, 1]] * 3, 10_000, seed=5)
    assert a == b


def test_merge_estimates():
    m = merge_estimates([MCEstimate(1.0, 0.1, 100, 0), MCEstimate(3.0, 0.1, 100, 0)])
    assert m.value == 2.0 and abs(m.std_error - 0.1 / math.sqrt(2)) < 1e-15


def test_fd_laplacian():
    assert abs(fd_laplacian(lambda x: float(x @ x), [0.1, 0.2, 0.3], 1e-3) - 6) < 1e-6
    assert abs(fd_laplacian(lambda x: x[0] ** 2 - x[1] ** 2, [0.0, 0.0, 0.0], 1e-3)) < 1e-9
    y = np.array([0.3, -0.5, 0.2])
    assert abs(fd_laplacian(lambda x: poisson_ext(x, y, 3), [0.1, 0.1, 0.0], 1e-3)) < 1e-4
    with pytest.raises(TooCloseToBoundaryError):
        fd_laplacian(lambda x: 0.0, [0.9999, 0, 0], 1e-3)


def test_weighted_slope_exact_line():
    s, se = weighted_slope([0, 1, 2], [1, 3, 5], [0.1, 0.1, 0.1])
    assert abs(s - 2) < 1e-12 and se > 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0))
def test_root_of_shifted_cubic(c):
    f = lambda x: x ** 3 - c
    r = bisect_root(f, make_bracket(f, 0.0, 3.0), 1e-13)
    assert abs(r - c ** (1 / 3)) < 1e-12
