import math

import numpy as np
import pytest

from mtlab.errors import DomainError, ZeroNormInputError
from mtlab.geometry import constants
from mtlab.kernels import kernel_K0
from mtlab.levelsets import MeasureSpec
from mtlab.operators import radial_solution
from mtlab.sharpness import (ExtremalFamily, cutoff_set, extremal_norm, lp_norm, mt_functional, offcentre_T,
                             phi_m, radial_extremal, sharp_alpha, sharpness_experiment)


def test_phi_cutoff_and_pole():
    fam = ExtremalFamily((0.0, 0.0, 0.0), 10.0, 3)
    z = np.array([[0.0, 0.0, 0.0], [0.01, 0, 0], [0.5, 0, 0]])
    v = phi_m(fam, z)
    assert v[0] == 0 and v[1] == 0
    k = kernel_K0(np.zeros(3), z[2:], 3)
    assert v[2] == pytest.approx(k[0] * abs(k[0]) ** (3 - 2))


def test_phi_n4_is_kernel():
    fam = ExtremalFamily((0.6, 0.0, 0.0, 0.0), 50.0, 4)
    z = np.array([[0.0, 0.3, 0.0, 0.1], [-0.5, 0.1, 0.2, 0.0]])
    np.testing.assert_allclose(phi_m(fam, z), kernel_K0(np.array(fam.x0), z, 4), rtol=1e-14)


def test_family_domain():
    with pytest.raises(DomainError):
        ExtremalFamily((2.0, 0.0, 0.0), 10.0, 3)
    with pytest.raises(DomainError):
        ExtremalFamily((0.0, 0.0), 10.0, 3)
    with pytest.raises(DomainError):
        ExtremalFamily((0.0, 0.0, 0.0), 0.0, 3)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_ray_quadrature_matches_radial(n):
    for m in (10.0, 1000.0):
        fam = ExtremalFamily(tuple([0.0] * n), m, n)
        T, norm, rm = radial_extremal(fam)
        assert extremal_norm(fam) == pytest.approx(norm, rel=1e-6)
        scale = abs(float(T(np.array([0.0]))[0]))
        for r in (0.5 * rm, 1.1 * rm, 0.5, 0.9):
            x = np.zeros(n)
            x[0], x[1] = 0.6 * r, 0.8 * r
            assert abs(offcentre_T(fam, x) - float(T(np.array([r]))[0])) <= 1e-3 * scale


def test_boundary_pole_limit():
    # T Phi_m(x0) = -c_n int |K0(x0, .)|^beta = -c_n ||Phi_m||^{n/2}
    n, x0 = 4, np.eye(4)[0]
    fam = ExtremalFamily(tuple(x0), 1000.0, n)
    hole = cutoff_set(fam)
    target = -constants(n).c_n * extremal_norm(fam) ** (n / 2)
    v = offcentre_T(fam, x0 * (1 - 1e-4 * hole.radius), hole)
    assert v == pytest.approx(target, rel=1e-3)


def test_norm_growth_matches_level_sets():
    # layer cake: d ||Phi_m||^{n/2} / d log m -> beta |B_n| at an interior pole
    n = 3
    v = [radial_extremal(ExtremalFamily((0.0,) * n, m, n))[1] ** (n / 2) for m in (1e3, 1e4)]
    slope = (v[1] - v[0]) / math.log(10)
    assert slope == pytest.approx(n / (n - 2) * constants(n).vol_B, rel=0.03)


def _radial_one(n):
    return lambda xs: radial_solution(n, lambda r: np.ones_like(r), np.linalg.norm(np.atleast_2d(xs), axis=1))


def test_tiny_argument_gives_total_mass():
    n = 3
    one = lambda z: np.ones(len(np.atleast_2d(z)))
    res = mt_functional(one, 1e-9 * constants(n).alpha_n, MeasureSpec.lebesgue(n), n, 20_000, 0,
                        Tf=_radial_one(n), norm_f=constants(n).vol_B ** (2 / n))
    assert res.value.value == pytest.approx(constants(n).vol_B, rel=1e-6)


def test_one_finite_and_stable():
    n = 3
    one = lambda z: np.ones(len(np.atleast_2d(z)))
    kw = dict(Tf=_radial_one(n), norm_f=constants(n).vol_B ** (2 / n))
    a = mt_functional(one, constants(n).alpha_n, MeasureSpec.lebesgue(n), n, 100_000, 1, **kw).value
    b = mt_functional(one, constants(n).alpha_n, MeasureSpec.lebesgue(n), n, 200_000, 2, **kw).value
    assert math.isfinite(a.value) and a.value >= constants(n).vol_B
    assert abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error)


def test_norm_by_product_rule():
    n = 3
    one = lambda z: np.ones(len(np.atleast_2d(z)))
    assert lp_norm(one, n, 1.5) == pytest.approx(constants(n).vol_B ** (2 / 3), rel=1e-10)


def test_scaling_invariance():
    n = 3
    m = MeasureSpec.lebesgue(n)
    base = _radial_one(n)
    norm = constants(n).vol_B ** (2 / n)
    a = mt_functional(None, constants(n).alpha_n, m, n, 50_000, 3, Tf=base, norm_f=norm).value.value
    b = mt_functional(None, constants(n).alpha_n, m, n, 50_000, 3, Tf=lambda x: -7.5 * base(x),
                      norm_f=7.5 * norm).value.value
    assert a == pytest.approx(b, rel=1e-12)


def test_surface_n4_finite():
    n = 4
    m = MeasureSpec.surface(n)
    alpha = sharp_alpha(n, m)
    assert alpha == pytest.approx(0.75 * constants(n).alpha_n)
    res = mt_functional(None, alpha, m, n, 50_000, 0, Tf=_radial_one(n), norm_f=constants(n).vol_B ** (2 / n))
    assert math.isfinite(res.value.value) and res.value.value >= m.total_mass(n) - 1e-9


def test_zero_norm():
    with pytest.raises(ZeroNormInputError):
        mt_functional(lambda z: np.zeros(len(z)), 1.0, MeasureSpec.lebesgue(3), 3, 100, 0,
                      Tf=lambda x: np.zeros(len(x)), norm_f=0.0)


def test_super_sharp_increasing_n3():
    tab = sharpness_experiment(3, (0.0, 0.0, 0.0), [1.2], [10, 100, 1000], samples=400_000)
    vals = [r["value"] for r in tab.rows]
    assert vals[0] < vals[1] < vals[2]
    assert all(r["value"] >= constants(3).vol_B - 3 * r["stderr"] for r in tab.rows)


def test_interior_n4_grows():
    tab = sharpness_experiment(4, (0.0,) * 4, [1.2], [10, 100, 1000], samples=400_000)
    s = tab.slopes[1.2]
    assert s["slope"] > 3 * s["stderr"]


@pytest.mark.slow
def test_boundary_n4_grows():
    # n = 4 uses one constant at interior and boundary poles; growth is asserted at both
    tab = sharpness_experiment(4, (1.0, 0.0, 0.0, 0.0), [1.2], [10, 100, 1000], samples=400_000)
    s = tab.slopes[1.2]
    assert s["slope"] > 3 * s["stderr"]


@pytest.mark.slow
def test_boundary_n5_increasing():
    tab = sharpness_experiment(5, (1.0, 0.0, 0.0, 0.0, 0.0), [1.2], [10, 100, 1000], samples=400_000)
    vals = [r["value"] for r in tab.rows]
    assert vals[0] < vals[1] < vals[2]
