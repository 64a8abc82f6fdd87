import numpy as np
import pytest

from mtlab.errors import InvalidExclusionError, UnsupportedDegreeError
from mtlab.numerics import ball_product_rule, fd_laplacian
from mtlab.operators import (_laplacian, apply_bergman_projection, apply_T, default_rule, harmonic_basis, harmonic_dimension,
                             interior_points, orthogonality_defect, radial_solution, verify_canonical_solution)

ONE = lambda z: np.ones(len(np.atleast_2d(z)))
ZERO = lambda z: np.zeros(len(np.atleast_2d(z)))


@pytest.fixture(scope="module")
def rule3():
    return default_rule(3)


@pytest.fixture(scope="module")
def small3():
    return ball_product_rule(3, 32, 1024)


def test_T_zero(small3):
    assert apply_T(ZERO, np.array([0.2, 0.1, 0.0]), small3) == 0.0


def test_T_one_oracle(rule3):
    for x in interior_points(3, 8, 0.9, seed=4):
        want = float(x @ x) / 6 - 0.1
        assert abs(apply_T(ONE, x, rule3) - want) <= 1e-3


def test_T_one_on_sphere(rule3):
    x = np.array([0.0, 1.0, 0.0])
    assert abs(apply_T(ONE, x, rule3) - (1 / 6 - 0.1)) < 1e-6


def test_radial_solution_closed_form():
    for n in (3, 4, 6):
        r = np.linspace(0, 1, 11)
        want = r * r / (2 * n) - 1 / (2 * (n + 2))
        assert np.max(np.abs(radial_solution(n, np.ones_like, r) - want)) < 1e-10


def test_T_z1_orthogonal(small3):
    f = lambda z: np.atleast_2d(z)[:, 0]
    orule = ball_product_rule(3, 6, 50)
    vals = np.array([apply_T(f, x, small3) for x in orule.nodes])
    basis = harmonic_basis(3, 1)
    assert np.max(orthogonality_defect(vals, orule, basis)) <= 1e-3


def test_exclusion_range(small3):
    with pytest.raises(InvalidExclusionError):
        apply_T(ONE, np.zeros(3), small3, exclusion_radius=0.0)
    with pytest.raises(InvalidExclusionError):
        apply_T(ONE, np.zeros(3), small3, exclusion_radius=0.5)


def test_basis_counts():
    assert len(harmonic_basis(3, 1)) == 4
    assert len(harmonic_basis(3, 2)) == 9
    for n in (3, 4, 5):
        b = harmonic_basis(n, 4)
        assert len(b) == sum(harmonic_dimension(n, d) for d in range(5))
    with pytest.raises(UnsupportedDegreeError):
        harmonic_basis(3, 5)


@pytest.mark.parametrize("n", [3, 4])
def test_basis_harmonic(n):
    b = harmonic_basis(n, 4)
    for p in b.polys:
        assert all(abs(c) < 1e-12 for c in _laplacian(p).values())
    # the stencil's truncation error on quartics is O(h^2)
    x = np.array([0.1, -0.2, 0.3, 0.05][:n])
    for h in b.evaluators:
        assert abs(fd_laplacian(lambda y: float(h(y[None, :])[0]), x, 1e-3)) < 1e-4


@pytest.fixture(scope="module")
def bergman_rule():
    return ball_product_rule(3, 48, 4000)


def test_bergman_reproduces_harmonics(bergman_rule):
    basis = harmonic_basis(3, 2)
    for x in interior_points(3, 4, 0.5, seed=8):
        for h in basis.evaluators:
            want = float(h(x[None, :])[0])
            got = apply_bergman_projection(h, x, bergman_rule)
            assert abs(got - want) <= 1e-4 * max(1.0, abs(want))
    assert abs(apply_bergman_projection(ONE, np.array([0.3, 0, 0.1]), bergman_rule) - 1) < 1e-8


def test_bergman_range_is_harmonic(bergman_rule):
    f = lambda z: np.sum(np.atleast_2d(z) ** 2, axis=1)
    u = lambda y: apply_bergman_projection(f, y, bergman_rule)
    assert abs(fd_laplacian(u, np.array([0.2, 0.1, -0.1]), 1e-2)) < 1e-3


def test_verify_one(rule3):
    rep = verify_canonical_solution(ONE, rule3, 1e-2, interior_points(3, 3, 0.8, 2),
                                    ortho_rule=ball_product_rule(3, 6, 50))
    assert rep.max_poisson_residual <= 1e-2 and rep.max_orthogonality_defect <= 1e-3


def test_verify_z1_squared(rule3):
    f = lambda z: np.atleast_2d(z)[:, 0] ** 2
    rep = verify_canonical_solution(f, rule3, 1e-2, interior_points(3, 3, 0.7, 5),
                                    ortho_rule=ball_product_rule(3, 4, 20))
    assert rep.max_poisson_residual <= 1e-2


def test_verify_zero(small3):
    rep = verify_canonical_solution(ZERO, small3, 1e-2, interior_points(3, 2, 0.5, 1),
                                    ortho_rule=ball_product_rule(3, 4, 20))
    assert rep.max_poisson_residual == 0.0 and rep.max_orthogonality_defect == 0.0


def test_T_inverts_laplacian_on_polynomial(rule3):
    # u = x1 (|x|^2 - 5/7) is orthogonal to harmonics and has Laplacian 10 x1
    f = lambda z: 10.0 * np.atleast_2d(z)[:, 0]
    for x in interior_points(3, 6, 0.9, seed=7):
        assert abs(apply_T(f, x, rule3) - x[0] * (x @ x - 5 / 7)) <= 1e-4
