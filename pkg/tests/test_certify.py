import math

import numpy as np
import pytest

from mtlab.certify import (J_BANDS, J_band_bound, J_tail_bound, V_theta, build_certificate, certify_claim,
                           certify_inclusions, certify_J, certify_lambda_table, certify_lemma17, certify_lemma20,
                           certify_prop10, certify_psi, check_hormander, check_kershaw, find_intersections,
                           hormander_integrals, hormander_radius, inclusion_claims, kershaw_default_grid,
                           kershaw_margin, phi_of_theta, prop10_K, search_counterexamples, theta_grid)
from mtlab.errors import DomainError, PipelineFailureError
from mtlab.geometry import constants, phi_b
from mtlab.levelsets import union_volume_ED


def test_certificate_status():
    assert build_certificate("x", (3, 3), [({}, 1.0)]).status == "pass"
    assert build_certificate("x", (3, 3), [({}, -1e-16)], tol=1e-15).status == "margin"
    assert build_certificate("x", (3, 3), [({}, -1.0)], tol=1e-15).status == "fail"
    assert build_certificate("x", (3, 3), [({}, float("nan"))]).status == "fail"
    with pytest.raises(PipelineFailureError):
        build_certificate("x", (3, 3), [])


def test_prop10():
    cert = certify_prop10(60)
    assert cert.passed
    vols = [p for p, _ in cert.evidence if p.get("check") == "G>B"]
    assert {p["n"] for p in vols} >= set(range(5, 61))
    assert abs(prop10_K(0.0) - 1) <= 1e-14 and abs(prop10_K(1.0) - 1) <= 1e-14


def test_prop10_n3_n4_not_asserted():
    # |G_3| < |B_3| and |G_4| = |B_4|; only n >= 5 is asserted
    assert constants(3).vol_G < constants(3).vol_B
    assert certify_prop10(5).passed


def test_kershaw_grids():
    assert check_kershaw(kershaw_default_grid(60)).passed
    grid = kershaw_default_grid(60)
    # n = 5: t = 2/3
    assert any(abs(x - 1.5) < 1e-12 and abs(l - 2 / 3) < 1e-12 for x, l in grid)
    assert any(abs(x - 7 / 6) < 1e-12 and abs(l - 1 / 3) < 1e-12 for x, l in grid)


def test_kershaw_lambda_to_one():
    m = kershaw_margin(np.array([0.5, 1.0, 5.0, 50.0]), 1 - 1e-6)
    assert np.all(m > 0) and np.all(m < 1e-6)


def test_kershaw_domain():
    with pytest.raises(DomainError):
        check_kershaw([(1.0, 1.0)])


def test_psi():
    assert certify_psi(range(4, 71)).passed


@pytest.mark.parametrize("n", [6, 9, 15, 40])
def test_roots_at_theta_ends(n):
    c = constants(n)
    r0 = find_intersections(c.theta0, n)
    r1 = find_intersections(c.theta1, n)
    assert r0.kind == "two" and abs(r0.roots[1] - (1 + c.theta0)) <= 1e-10
    assert r1.kind == "two" and abs(r1.roots[0]) <= 1e-10


def test_roots_satisfy_equation():
    for n in (4, 6, 15):
        for th in (0.05, 0.2, 0.4):
            rep = find_intersections(th, n)
            for b in rep.roots:
                assert abs(phi_b(b, th, n)) <= 1e-10
            if rep.kind == "single":
                assert 0 < rep.roots[0] < min(1 / (th * (2 * n - 4)), 1 + th)
            if rep.kind == "two":
                mid = 1 / (th * (2 * n - 4))
                assert rep.roots[0] < mid < rep.roots[1]


def test_n5_no_roots():
    c = constants(5)
    for th in np.linspace(c.theta1, c.theta0, 7)[1:-1]:
        rep = find_intersections(float(th), 5)
        assert rep.kind == "none" and rep.roots == ()
        b = np.linspace(0, 1 + th, 2001)
        assert np.all(phi_b(b, th, 5) < 0)


@pytest.mark.parametrize("n", [4, 5, 6, 15])
def test_lemma17(n):
    assert certify_lemma17(n).passed


def test_theta_grid():
    c = constants(15)
    g = theta_grid(15)
    assert len(g) >= 10 and g == sorted(g)
    assert c.theta0 in g and c.theta1 in g and 0.0 in g and 1.0 in g


def test_d_empty_n3():
    claim = [c for c in inclusion_claims(3, 0.6) if c.name == "D empty"][0]
    hits, viol, _ = search_counterexamples(claim, 3, 1_000_000, 0)
    assert hits == 0 and viol == 0


def test_band_inclusion_n15():
    c = constants(15)
    th = 0.5 * (c.theta0 + c.theta1)
    claim = [k for k in inclusion_claims(15, th) if k.name.startswith("B cap {b1<=y1<=b2}")][0]
    hits, viol, _ = search_counterexamples(claim, 15, 1_000_000, 0)
    assert hits > 0 and viol == 0


def test_theta0_e_empty():
    for n in (3, 6):
        claim = [c for c in inclusion_claims(n, 0.0) if c.name == "E<=B"][0]
        assert search_counterexamples(claim, n, 100_000, 0)[:2] == (0, 0)


def test_inclusions_small():
    assert certify_inclusions(4, samples=50_000).passed


def test_inclusions_n5_restricted_half_space():
    c = constants(5)
    th = 0.5 * (c.theta0 + c.theta1)
    assert any("y1>=0" in k.name for k in inclusion_claims(5, th))


def test_J_values():
    assert J_tail_bound(66) >= 0.0018
    for (n1, n2, mu1, mu2, stated), v in zip(J_BANDS, [J_band_bound(*b[:4]) for b in J_BANDS]):
        assert v > 0 and abs(v / stated - 1) <= 0.15
    assert J_band_bound(21, 32, 2.61, 2.67) >= 0.046
    assert certify_J(range(13, 71)).passed


def test_lambda_table():
    assert certify_lambda_table(range(13, 71)).passed


def test_V_n15_and_union():
    c = constants(15)
    for i, th in enumerate(np.linspace(c.theta0, c.theta1, 5)):
        b2 = find_intersections(float(th), 15).roots[1]
        v = V_theta(float(th), b2, 15)
        assert v <= c.vol_G
        u = union_volume_ED(float(th), 15, 200_000, i)
        assert u.value <= v + 3 * u.std_error


@pytest.mark.parametrize("n", [6, 12, 13, 15, 66])
def test_lemma20(n):
    assert certify_lemma20(n).passed


def test_lemma20_domain():
    with pytest.raises(DomainError):
        certify_lemma20(5)


def test_phi_theta_monotone():
    c = constants(8)
    th = np.linspace(c.theta0, c.theta1, 200)
    v = np.array([phi_of_theta(float(t), 8) for t in th])
    assert np.all(np.diff(v) > 0) and v[-1] < 0


def test_claim_n9_q_decreasing():
    cert = certify_claim([9])
    assert cert.passed
    assert any(p.get("check") == "q' < 0" for p, _ in cert.evidence)


def test_claim_n6_and_n7():
    for n in (6, 7):
        cert = certify_claim([n])
        assert cert.passed
        assert not any(p.get("check") == "q' < 0" for p, _ in cert.evidence)
        assert any(p.get("check") == "q + theta q' > 0" for p, _ in cert.evidence)


def test_claim_range():
    assert certify_claim(range(6, 71)).passed


def test_hormander_at_pole():
    x0 = np.eye(4)[0]
    mean, se, _ = hormander_integrals(x0, np.array([x0]), 100.0, 4, 20_000, 0)
    assert np.all(mean <= 1e-12) and np.all(se <= 1e-12)


def test_hormander_radius_and_domain():
    assert hormander_radius(1e4, 4) < hormander_radius(1e2, 4)
    with pytest.raises(DomainError):
        check_hormander(np.array([0.5, 0, 0, 0]), [1e2, 1e3], 4, 1000)
    with pytest.raises(DomainError):
        check_hormander(np.eye(3)[0], [1e2, 1e3], 3, 1000)


def test_hormander_pointwise_ratio_bounded():
    cert = check_hormander(np.eye(4)[0], [1e2, 1e3, 1e4], 4, 40_000, 0)
    ratios = [v for p, v in cert.evidence if "sup of pointwise" in p.get("check", "")][0]
    assert max(ratios) < 10 and max(ratios) / min(ratios) < 1.5
