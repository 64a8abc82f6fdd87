import math

import numpy as np
import pytest
from scipy.stats import special_ortho_group

from mtlab.errors import InsufficientGridError, InvalidSError
from mtlab.geometry import constants
from mtlab.kernels import kernel_K0
from mtlab.levelsets import (MeasureSpec, fit_asymptotic_constant, fit_asymptotic_constant_detail, lambda1,
                             lambda2, lambda2_exact_origin, union_volume_ED)
from mtlab.numerics import rng_for, uniform_ball, uniform_sphere


def pooled_le(a, b, k=3.0):
    return a.value <= b.value + k * math.hypot(a.std_error, b.std_error)


@pytest.mark.parametrize("n", [3, 5])
def test_monotone_in_s(n):
    x = np.zeros(n)
    x[0] = 0.6
    for s in (10.0, 100.0, 1000.0):
        assert pooled_le(lambda1(2 * s, x, n, 200_000, 1).estimate, lambda1(s, x, n, 200_000, 2).estimate)


def test_interior_prefactor_n3():
    p, e = lambda1(1e3, np.zeros(3), 3, 1_000_000, 0).prefactor(3)
    assert abs(p / constants(3).vol_B - 1) < 0.05


def test_boundary_prefactor_n5_large_s():
    x = np.eye(5)[0]
    p, e = lambda1(1e7, x, 5, 1_000_000, 0).prefactor(5)
    assert abs(p / constants(5).vol_G - 1) < 0.05


def test_boundary_deficit_rate_n5():
    # the deficit from |G_5| decays like s^{-1/(n-2)}: a factor 10^{-1/3} per decade
    x = np.eye(5)[0]
    gap = []
    for s in (1e4, 1e5, 1e6):
        p, _ = lambda1(s, x, 5, 1_000_000, 0).prefactor(5)
        gap.append(1 - p / constants(5).vol_G)
    ratios = np.array(gap[1:]) / np.array(gap[:-1])
    assert np.all(np.abs(ratios - 10 ** (-1 / 3)) < 0.1)


def test_lambda2_lebesgue_origin_exact():
    for s in (10.0, 100.0):
        est = lambda2(s, np.zeros(3), MeasureSpec.lebesgue(3), 3, 400_000, 0).estimate
        assert est.within(lambda2_exact_origin(s, 3), 3.5)


def test_lambda2_lebesgue_bounded():
    z = np.array([0.5, 0.2, 0.0])
    vals = [lambda2(s, z, MeasureSpec.lebesgue(3), 3, 200_000, 3).estimate.value * s ** 3
            for s in (10.0, 100.0, 1000.0)]
    assert max(vals) <= 2 * constants(3).vol_B


def test_lambda2_surface_bounded_n4():
    z = np.array([0.9, 0.0, 0.0, 0.0])
    m = MeasureSpec.surface(4)
    vals = []
    for i, s in enumerate((10.0, 100.0, 1000.0, 1e4)):
        est = lambda2(s, z, m, 4, 200_000, i).estimate
        vals.append(est.value * s ** 1.5)
    assert max(vals) < m.regularity_constant(4) * (3 * 5 / 10.0) ** 1.5 * 10


def test_lambda2_origin_scan():
    # |K0(x, 0)| outside B(0, rho) is bounded by its radial maximum; above that level
    # the x-level set sits inside B(0, rho)
    n, rho = 3, 0.05
    r = np.linspace(rho, 1.0, 20_001)
    xs = np.zeros((r.size, n))
    xs[:, 0] = r
    top = np.max(np.abs(kernel_K0(xs, np.zeros(n), n)))
    est = lambda2(top * 1.01, np.zeros(n), MeasureSpec.lebesgue(n), n, 200_000, 0).estimate
    assert est.value <= constants(n).vol_B * rho ** n + 3 * est.std_error


def test_fit_interior_n3():
    a = fit_asymptotic_constant(np.zeros(3), 3, [1e2, 1e3, 1e4], 400_000, 0)
    assert abs(a / constants(3).vol_B - 1) < 0.05


def test_fit_boundary_n5():
    a = fit_asymptotic_constant(np.eye(5)[0], 5, [1e6, 1e7, 1e8], 400_000, 0)
    assert abs(a / constants(5).vol_G - 1) < 0.05


def test_rotation_invariance():
    x = np.array([0.4, 0.3, -0.2])
    q = special_ortho_group.rvs(3, random_state=5)
    a = fit_asymptotic_constant_detail(x, 3, [1e2, 1e3, 1e4], 400_000, 1)
    b = fit_asymptotic_constant_detail(q @ x, 3, [1e2, 1e3, 1e4], 400_000, 2)
    assert abs(a.prefactor - b.prefactor) <= 3 * math.hypot(a.std_error, b.std_error)


def test_errors():
    with pytest.raises(InvalidSError):
        lambda1(0.0, np.zeros(3), 3)
    with pytest.raises(InsufficientGridError):
        fit_asymptotic_constant(np.zeros(3), 3, [10.0, 100.0])
    with pytest.raises(InsufficientGridError):
        fit_asymptotic_constant(np.zeros(3), 3, [10.0, 20.0, 1000.0])


@pytest.mark.parametrize("n", [3, 5, 8])
def test_union_theta0(n):
    est = union_volume_ED(0.0, n, 400_000, 0)
    assert est.within(constants(n).vol_G, 3)


def test_union_budget_n3():
    for i, th in enumerate(np.linspace(0, 1, 6)):
        est = union_volume_ED(float(th), 3, 200_000, i)
        assert est.value <= constants(3).vol_B + 3 * est.std_error


def test_union_budget_n15():
    c = constants(15)
    for i, th in enumerate(np.linspace(c.theta0, c.theta1, 5)):
        est = union_volume_ED(float(th), 15, 200_000, i)
        assert est.value <= c.vol_G + 3 * est.std_error


@pytest.mark.parametrize("measure,n", [(MeasureSpec.slice_disk(4, 2), 4), (MeasureSpec.surface(3), 3),
                                       (MeasureSpec.lebesgue(3), 3)])
def test_measure_regularity(measure, n):
    g = rng_for(11, n)
    if measure.kind == "surface-hausdorff":
        pts = uniform_sphere(g, 200_000, n)
    elif measure.kind == "lebesgue-ball":
        pts = uniform_ball(g, 200_000, n)
    else:
        k = measure.params["dim"]
        pts = np.zeros((200_000, n))
        pts[:, :k] = uniform_ball(g, 200_000, k)
    mass = measure.total_mass(n)
    c0 = measure.regularity_constant(n)
    for _ in range(40):
        a = uniform_ball(g, 1, n)[0] * 1.1
        r = 10 ** g.uniform(-1, 0)
        frac = np.mean(np.sum((pts - a) ** 2, axis=1) <= r * r)
        assert frac * mass <= c0 * r ** measure.lam * 1.05 + 3 * mass * math.sqrt(max(frac, 1e-6) / 200_000)
