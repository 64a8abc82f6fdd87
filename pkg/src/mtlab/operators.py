"""The canonical solution operator T, the Bergman projection and a harmonic test basis."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidExclusionError, UnsupportedDegreeError
from .geometry import constants
from .kernels import bergman, kernel_K
from .numerics import QuadratureRule, ball_product_rule, fd_laplacian

MAX_DEGREE = 4
MAX_EXCLUSION = 0.25

Poly = Dict[Tuple[int, ...], float]


# ---------------------------------------------------------------- polynomials

def _laplacian(p: Poly) -> Poly:
    out: Poly = {}
    for exps, c in p.items():
        for i, e in enumerate(exps):
            if e >= 2:
                new = list(exps)
                new[i] -= 2
                key = tuple(new)
                out[key] = out.get(key, 0.0) + c * e * (e - 1)
    return {k: v for k, v in out.items() if v != 0.0}


def _times_r2(p: Poly, n: int) -> Poly:
    out: Poly = {}
    for exps, c in p.items():
        for i in range(n):
            new = list(exps)
            new[i] += 2
            key = tuple(new)
            out[key] = out.get(key, 0.0) + c
    return out


def _add(p: Poly, q: Poly, scale: float = 1.0) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0.0) + scale * v
    return {k: v for k, v in out.items() if abs(v) > 1e-15}


def harmonic_part(p: Poly, n: int, d: int) -> Poly:
    """Harmonic projection of a homogeneous polynomial of degree d:
    sum_j (-1)^j |x|^{2j} Delta^j p / (2^j j! prod_{i=1..j} (n + 2d - 2i - 2))."""
    out = dict(p)
    lap = p
    coef = 1.0
    for j in range(1, d // 2 + 1):
        lap = _laplacian(lap)
        coef *= -1.0 / (2.0 * j * (n + 2 * d - 2 * j - 2))
        term = lap
        for _ in range(j):
            term = _times_r2(term, n)
        out = _add(out, term, coef)
    return out


def poly_eval(p: Poly, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    acc = np.zeros(x.shape[0])
    for exps, c in p.items():
        term = np.full(x.shape[0], c)
        for i, e in enumerate(exps):
            if e:
                term = term * x[:, i] ** e
        acc += term
    return acc


def poly_str(p: Poly) -> str:
    parts = []
    for exps, c in sorted(p.items()):
        mono = "*".join(f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(exps) if e)
        parts.append(f"{c:+.6g}" + (f"*{mono}" if mono else ""))
    return " ".join(parts) if parts else "0"


def harmonic_dimension(n: int, d: int) -> int:
    if d < 0:
        return 0
    full = math.comb(n + d - 1, d)
    return full - (math.comb(n + d - 3, d - 2) if d >= 2 else 0)


@dataclass
class HarmonicBasis:
    n: int
    max_degree: int
    polys: List[Poly]
    degrees: List[int]

    @property
    def evaluators(self) -> List[Callable[[np.ndarray], np.ndarray]]:
        return [lambda x, p=p: poly_eval(p, x) for p in self.polys]

    def __len__(self) -> int:
        return len(self.polys)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Matrix of member values, shape (len(x), len(basis))."""
        x = np.atleast_2d(x)
        return np.stack([poly_eval(p, x) for p in self.polys], axis=1)

    def labels(self) -> List[str]:
        return [poly_str(p) for p in self.polys]


def harmonic_basis(n: int, max_degree: int) -> HarmonicBasis:
    """Solid harmonics through max_degree: harmonic projections of monomials, keeping a
    linearly independent subset of each degree."""
    if max_degree < 0 or max_degree > MAX_DEGREE:
        raise UnsupportedDegreeError(f"max_degree must lie in 0..{MAX_DEGREE}, got {max_degree}")
    polys, degrees = [], []
    for d in range(max_degree + 1):
        target = harmonic_dimension(n, d)
        keys = [tuple(e) for e in itertools.product(range(d + 1), repeat=n) if sum(e) == d]
        keys.sort(reverse=True)
        chosen, rows = [], []
        for k in keys:
            h = harmonic_part({k: 1.0}, n, d)
            row = np.array([h.get(kk, 0.0) for kk in keys])
            trial = np.array(rows + [row])
            if np.linalg.matrix_rank(trial, tol=1e-10) == len(rows) + 1:
                rows.append(row)
                chosen.append(h)
            if len(chosen) == target:
                break
        polys.extend(chosen)
        degrees.extend([d] * len(chosen))
    return HarmonicBasis(n, max_degree, polys, degrees)


# ---------------------------------------------------------------- T

def default_rule(n: int, radial_order: int = 64, sphere_points: int = 4096) -> QuadratureRule:
    return ball_product_rule(n, radial_order, sphere_points)


def _chord(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Distance from x to the unit sphere along each direction u."""
    xu = u @ x
    return -xu + np.sqrt(np.maximum(xu * xu + 1.0 - x @ x, 0.0))


def polar_about(x: np.ndarray, rule: QuadratureRule, inner: float = 0.0):
    """Nodes and weights for integrals over B_n minus B(x, inner), in polar
    coordinates centred at x. Radial Gauss-Legendre on [inner, chord(u)] with the
    Jacobian rho^{n-1} folded into the weights."""
    if rule.sphere is None or rule.radial is None:
        raise ValueError("re-centring needs a product rule")
    n = rule.n
    u, wu = rule.sphere
    t, wt = np.polynomial.legendre.leggauss(len(rule.radial[0]))
    rho_max = _chord(x, u)
    keep = rho_max > inner
    u, wu, rho_max = u[keep], wu[keep], rho_max[keep]
    half = 0.5 * (rho_max - inner)
    rho = inner + half[:, None] * (t[None, :] + 1.0)
    w = wu[:, None] * half[:, None] * wt[None, :] * rho ** (n - 1)
    nodes = x + rho[:, :, None] * u[:, None, :]
    return nodes.reshape(-1, n), w.ravel()


def apply_T(f: Callable[[np.ndarray], np.ndarray], x, rule: QuadratureRule,
            exclusion_radius: float = 1e-2) -> float:
    """Tf(x) = int K(x,z) f(z) dz.

    The ball B(x, delta) is removed and replaced by its Newtonian leading term
    -f(x) c_n omega delta^2 / 2. When B(x, delta) is not inside the ball (x within
    delta of the sphere) the polar rule alone is used from rho = 0, since the
    rho^{n-1} Jacobian already cancels the pole."""
    x = np.asarray(x, dtype=float)
    n = rule.n
    delta = float(exclusion_radius)
    if not 0.0 < delta <= MAX_EXCLUSION:
        raise InvalidExclusionError(f"exclusion radius must lie in (0, {MAX_EXCLUSION}], got {delta}")
    interior = 1.0 - float(np.linalg.norm(x)) > delta
    inner = delta if interior else 0.0
    nodes, w = polar_about(x, rule, inner)
    vals = kernel_K(x, nodes, n, check=False) * f(nodes)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    total = float(np.dot(w, vals))
    if interior:
        c = constants(n)
        total += -float(f(x[None, :])[0]) * c.c_n * c.omega * delta * delta / 2.0
    return total


def apply_T_many(f, xs, rule: QuadratureRule, exclusion_radius: float = 1e-2) -> np.ndarray:
    return np.array([apply_T(f, x, rule, exclusion_radius) for x in np.atleast_2d(xs)])


def apply_bergman_projection(f, x, rule: QuadratureRule) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.dot(rule.weights, bergman(x, rule.nodes, rule.n, check=False) * f(rule.nodes)))


def kernel_moment(z, h: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule) -> Tuple[float, float]:
    """(int K(x,z) h(x) dx, int |K(x,z) h(x)| dx) with polar coordinates about z."""
    z = np.asarray(z, dtype=float)
    nodes, w = polar_about(z, rule, 0.0)
    vals = kernel_K(nodes, z, rule.n, check=False) * h(nodes)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return float(np.dot(w, vals)), float(np.dot(w, np.abs(vals)))


# ---------------------------------------------------------------- radial fields

def radial_solution(n: int, profile: Callable[[np.ndarray], np.ndarray], radii: np.ndarray,
                    breakpoints: Sequence[float] = (), panels: int = 400, order: int = 16) -> np.ndarray:
    """T applied to a radial field f(z) = profile(|z|), evaluated at the given radii.

    v(r) = c + int_0^r t^{1-n} F(t) dt with F(t) = int_0^t profile rho^{n-1} d rho, and c
    chosen so that v is orthogonal to constants: c = -int_0^1 t^{1-n} F(t) (1 - t^n) dt.
    (A radial function is automatically orthogonal to every non-constant harmonic.)"""
    from scipy.interpolate import CubicHermiteSpline

    edges = _radial_edges(breakpoints, panels)
    tq, wq = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    pts = 0.5 * (a + b) + 0.5 * (b - a) * tq
    wts = 0.5 * (b - a) * wq
    # F at panel edges
    dF = np.sum(wts * profile(pts) * pts ** (n - 1), axis=1)
    F_edges = np.concatenate([[0.0], np.cumsum(dF)])
    # F at interior Gauss nodes of each panel, via a nested rule on [a, node]
    F_pts = F_edges[:-1, None] + _partial(profile, a, pts, n, tq, wq)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(pts > 0, pts ** (1 - n) * F_pts, 0.0)
    dv = np.sum(wts * g, axis=1)
    v_edges = np.concatenate([[0.0], np.cumsum(dv)])
    c = -float(np.sum(wts * g * (1.0 - pts ** n)))
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(edges > 0, edges ** (1 - n) * F_edges, 0.0)
    spline = CubicHermiteSpline(edges, v_edges + c, slope)
    return spline(np.clip(radii, 0.0, 1.0))


def _partial(profile, a, pts, n, tq, wq):
    lo = np.broadcast_to(a, pts.shape)
    mid = 0.5 * (lo + pts)
    half = 0.5 * (pts - lo)
    nodes = mid[..., None] + half[..., None] * tq
    return np.sum(half[..., None] * wq * profile(nodes) * nodes ** (n - 1), axis=-1)


def _radial_edges(breakpoints, panels):
    base = np.concatenate([np.geomspace(1e-9, 1e-3, 60), np.linspace(1e-3, 1.0, panels)])
    extra = [b for b in breakpoints if 0.0 < b < 1.0]
    for b in extra:
        base = np.concatenate([base, b * np.geomspace(0.5, 2.0, 81)])
    e = np.unique(np.clip(np.concatenate([[0.0], base, extra, [1.0]]), 0.0, 1.0))
    return e


# ---------------------------------------------------------------- verification

@dataclass
class SolverReport:
    max_poisson_residual: float
    max_orthogonality_defect: float
    quadrature: dict
    test_points: list
    max_oracle_error: Optional[float] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"max_poisson_residual": self.max_poisson_residual,
                "max_orthogonality_defect": self.max_orthogonality_defect,
                "max_oracle_error": self.max_oracle_error,
                "quadrature": self.quadrature,
                "test_points": [list(map(float, p)) for p in self.test_points],
                "details": self.details}


def interior_points(n: int, count: int, radius: float, seed: int = 0) -> np.ndarray:
    from .numerics import rng_for, uniform_ball
    return radius * uniform_ball(rng_for(seed, 7), count, n)


def orthogonality_defect(values: np.ndarray, rule: QuadratureRule, basis: HarmonicBasis) -> np.ndarray:
    """|<v, h>| / (||v||_2 ||h||_2) for each basis member h, v sampled at the rule nodes."""
    H = basis.evaluate(rule.nodes)
    inner = (rule.weights * values) @ H
    nv = math.sqrt(float(np.dot(rule.weights, values ** 2)))
    nh = np.sqrt((rule.weights[:, None] * H ** 2).sum(axis=0))
    if nv == 0.0:
        return np.zeros(len(basis))
    return np.abs(inner) / (nv * nh)


def verify_canonical_solution(f, rule: QuadratureRule, fd_step: float, test_points,
                              exclusion_radius: float = 1e-2, basis_degree: int = 3,
                              ortho_rule: Optional[QuadratureRule] = None,
                              oracle: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> SolverReport:
    """Residual of Delta(Tf) = f at test points and normalised inner products of Tf
    with the harmonic basis (Tf sampled on a coarser ball rule)."""
    n = rule.n
    pts = np.atleast_2d(np.asarray(test_points, dtype=float))

    def tf(y):
        return apply_T(f, y, rule, exclusion_radius)

    residual = 0.0
    oracle_err = 0.0 if oracle is not None else None
    for p in pts:
        lap = fd_laplacian(tf, p, fd_step)
        residual = max(residual, abs(lap - float(f(p[None, :])[0])))
        if oracle is not None:
            oracle_err = max(oracle_err, abs(tf(p) - float(oracle(p[None, :])[0])))
    orule = ortho_rule or ball_product_rule(n, 12, 200)
    values = apply_T_many(f, orule.nodes, rule, exclusion_radius)
    basis = harmonic_basis(n, basis_degree)
    defect = orthogonality_defect(values, orule, basis)
    return SolverReport(residual, float(defect.max()) if defect.size else 0.0, rule.describe(),
                        [tuple(p) for p in pts], oracle_err,
                        {"ortho_rule": orule.describe(), "per_member_defect": defect.tolist(),
                         "fd_step": fd_step, "exclusion_radius": exclusion_radius})
