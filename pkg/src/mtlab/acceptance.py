"""Acceptance criteria as callables; shared by the test suite and `mtlab report-all`."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .certify import (certify_claim, certify_inclusions, certify_J, certify_lambda_table, certify_lemma20,
                      certify_prop10, check_hormander)
from .geometry import LAMBDA_BRACKETS, RegionSpec, constants, lambda_bracket_table, vol_G_spherical
from .levelsets import lambda1, prefactor_sweep, region_volume, theorem_bound
from .numerics import ball_product_rule
from .operators import (default_rule, harmonic_basis, interior_points, kernel_moment,
                        verify_canonical_solution)
from .sharpness import sharpness_experiment


@dataclass
class CriterionResult:
    cid: int
    title: str
    passed: bool
    checks: List[dict] = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        failed = [c["name"] for c in self.checks if not c["ok"]]
        tail = f" (failed: {'; '.join(failed)})" if failed else ""
        return f"[{tag}] criterion {self.cid}: {self.title} [{self.seconds:.1f}s]{tail}"

    def to_dict(self) -> dict:
        return {"criterion": self.cid, "title": self.title, "passed": self.passed, "checks": self.checks}


def _check(name: str, ok: bool, **info) -> dict:
    return {"name": name, "ok": bool(ok), **info}


def _finish(cid, title, checks, t0, budget):
    dt = time.perf_counter() - t0
    checks.append(_check(f"runtime < {budget:g} s", dt < budget, seconds=round(dt, 3)))
    return CriterionResult(cid, title, all(c["ok"] for c in checks), checks, dt)


def criterion_1() -> CriterionResult:
    t0 = time.perf_counter()
    c3, c4 = constants(3), constants(4)
    pairs = [("|B_3| = 4pi/3", c3.vol_B, 4 * math.pi / 3), ("|G_3| = 16pi/21", c3.vol_G, 16 * math.pi / 21),
             ("|B_4| = pi^2/2", c4.vol_B, math.pi ** 2 / 2), ("|G_4| = pi^2/2", c4.vol_G, math.pi ** 2 / 2),
             ("theta0(4) = 1/2", c4.theta0, 0.5), ("theta1(4) = 1/2", c4.theta1, 0.5)]
    checks = [_check(nm, abs(v - e) <= 1e-12, value=v, expected=e) for nm, v, e in pairs]
    return _finish(1, "closed-form constants", checks, t0, 1.0)


def criterion_2(samples: int = 1_000_000, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    for n in range(3, 9):
        closed = constants(n).vol_G
        quad = vol_G_spherical(n)
        est = region_volume(RegionSpec("Gn", n, 0.0), samples, seed, stream=n)
        checks.append(_check(f"n={n} quadrature rel 1e-8", abs(quad / closed - 1) <= 1e-8, closed=closed, quad=quad))
        checks.append(_check(f"n={n} MC within 3 sigma", est.within(closed, 3.0), mc=est.value,
                             std_error=est.std_error))
    return _finish(2, "|G_n| three ways, n = 3..8", checks, t0, 60.0)


def criterion_3() -> CriterionResult:
    t0 = time.perf_counter()
    cert = certify_prop10(60)
    checks = [_check("Prop10 certificate", cert.passed, worst_margin=cert.worst_margin)]
    return _finish(3, "|G_n| > |B_n| for n = 5..60, H'' < 0, K(0) = K(1) = 1", checks, t0, 10.0)


def criterion_4(points: int = 50, fd_step: float = 1e-2) -> CriterionResult:
    t0 = time.perf_counter()
    rule = default_rule(3)
    one = lambda z: np.ones(len(np.atleast_2d(z)))
    oracle = lambda z: np.sum(np.atleast_2d(z) ** 2, axis=1) / 6.0 - 0.1
    pts = interior_points(3, points, 0.9, seed=1)
    rep = verify_canonical_solution(one, rule, fd_step, pts, basis_degree=3,
                                    ortho_rule=ball_product_rule(3, 6, 50), oracle=oracle)
    checks = [_check("max |Tf - oracle| <= 1e-3", rep.max_oracle_error <= 1e-3, value=rep.max_oracle_error),
              _check("Poisson residual <= 1e-2", rep.max_poisson_residual <= 1e-2, value=rep.max_poisson_residual),
              _check("orthogonality defect <= 1e-3", rep.max_orthogonality_defect <= 1e-3,
                     value=rep.max_orthogonality_defect)]
    return _finish(4, "canonical solution for f = 1, n = 3", checks, t0, 300.0)


def criterion_5(z_points: int = 20, degree: int = 4) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    for n, sphere_pts in ((3, 2000), (4, 8000)):
        rule = ball_product_rule(n, 32, sphere_pts)
        basis = harmonic_basis(n, degree)
        worst = 0.0
        for z in interior_points(n, z_points, 0.9, seed=3):
            for h in basis.evaluators:
                v, a = kernel_moment(z, h, rule)
                worst = max(worst, abs(v) / a)
        checks.append(_check(f"n={n}: {z_points} z x {len(basis)} members, relative <= 1e-3", worst <= 1e-3,
                             worst=worst))
    return _finish(5, "kernel orthogonality to harmonics", checks, t0, 300.0)


def criterion_6(samples: int = 1_000_000, seed: int = 0, s: float = 1e3) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    for n in (3, 4):
        est = lambda1(s, np.zeros(n), n, samples, seed, stream=n)
        p, e = est.prefactor(n)
        target = constants(n).vol_B
        checks.append(_check(f"n={n}, x=0: within 10% of |B_n|", abs(p / target - 1) <= 0.10, prefactor=p,
                             std_error=e, target=target))
    for n in (5, 6):
        x = np.zeros(n)
        x[0] = 1.0
        est = lambda1(s, x, n, samples, seed, stream=n)
        p, e = est.prefactor(n)
        target = constants(n).vol_G
        checks.append(_check(f"n={n}, |x|=1: within 10% of |G_n|", abs(p / target - 1) <= 0.10, prefactor=p,
                             std_error=e, target=target))
    radii = np.linspace(0.0, 1.0, 20)
    for n in (3, 4, 5, 6):
        sweep = prefactor_sweep(n, s, radii, samples, seed)
        worst = max(r["prefactor"] for r in sweep)
        bound = theorem_bound(n)
        checks.append(_check(f"n={n}: 20-point |x| sweep <= 1.1 x bound", worst <= 1.1 * bound, worst=worst,
                             bound=bound))
    return _finish(6, "level-set asymptotics at s = 1e3", checks, t0, 600.0)


def criterion_7() -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    expected = {(66, None): (2.51, 2.56), (33, 65): (2.56, 2.61), (21, 32): (2.61, 2.67), (13, 20): (2.67, 2.79)}
    table = {(lo, hi): (a, b) for lo, hi, a, b in LAMBDA_BRACKETS}
    checks.append(_check("bracket table", table == expected))
    lam = certify_lambda_table(range(13, 71))
    checks.append(_check("lambda_n inside its bracket, n = 13..70, and g(2.51)", lam.passed,
                         worst_margin=lam.worst_margin))
    jc = certify_J(range(13, 71))
    checks.append(_check("J(n) > 0 (13..70), band bounds and n >= 66 bound within 15%", jc.passed,
                         worst_margin=jc.worst_margin))
    bad = [n for n in range(6, 71) if not certify_lemma20(n).passed]
    checks.append(_check("volume pipeline stages, n = 6..70", not bad, failing=bad))
    cl = certify_claim(range(6, 71))
    checks.append(_check("theta inequalities, n = 6..70", cl.passed, worst_margin=cl.worst_margin))
    return _finish(7, "lambda_n brackets, J(n) and the volume pipeline", checks, t0, 60.0)


def criterion_8(samples: int = 1_000_000, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    checks = []
    for n in (3, 4, 5, 15):
        cert = certify_inclusions(n, samples=samples, seed=seed)
        bad = [p for p, v in cert.evidence if v <= 0]
        checks.append(_check(f"n={n}: zero counterexamples, union bound", cert.passed, cells=len(cert.evidence),
                             failing=bad))
    return _finish(8, "region inclusions and |E cup D| budget", checks, t0, 900.0)


def criterion_9(samples: int = 1_000_000, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    table = sharpness_experiment(3, (0.0, 0.0, 0.0), [0.8, 1.0, 1.2], [10, 100, 1000], seed=seed, samples=samples)
    up, flat = table.slopes[1.2], table.slopes[0.8]
    checks = [_check("factor 1.2: slope > 3 stderr", up["slope"] > 3 * up["stderr"], **up),
              _check("factor 0.8: |slope| <= 2 stderr", abs(flat["slope"]) <= 2 * flat["stderr"], **flat)]
    return _finish(9, "sharpness growth slopes, n = 3", checks, t0, 1800.0)


def criterion_10(samples: int = 400_000, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    cert = check_hormander(np.eye(4)[0], [1e2, 1e3, 1e4], 4, samples, seed)
    checks = [_check(f"{p['integral']}: |slope| <= 2 sigma", v >= 0, slope=p["slope"], stderr=p["slope_stderr"])
              for p, v in cert.evidence if "slope" in p]
    return _finish(10, "Hormander integrals without growth, n = 4", checks, t0, 600.0)


CRITERIA: Dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_all(selection=None) -> List[CriterionResult]:
    ids = sorted(selection or CRITERIA)
    return [CRITERIA[i]() for i in ids]
