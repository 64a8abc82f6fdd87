"""Quadrature, seeded Monte Carlo, bisection and finite differences."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special, stats
from scipy.stats import qmc

from .errors import (EmptyBoxError, InvalidOrderError, NoSignChangeError,
                     TooCloseToBoundaryError)

ROOT_TOL = 1e-12
MC_CHUNK = 1 << 16


# ---------------------------------------------------------------- roots

@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def make_bracket(f: Callable[[float], float], lo: float, hi: float) -> RootBracket:
    return RootBracket(lo, hi, float(f(lo)), float(f(hi)))


def bisect_root(f: Callable[[float], float], bracket: RootBracket, tol: float = ROOT_TOL) -> float:
    """Plain bisection. Returns the midpoint of a sign-change interval of width <= tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi, flo, fhi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if flo * fhi > 0:
        raise NoSignChangeError(f"f({lo})={flo:.3e} and f({hi})={fhi:.3e} share a sign")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = float(f(mid))
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- quadrature

@dataclass
class QuadratureRule:
    """Weighted point set. For product rules the radial and sphere factors are kept
    so that callers can re-centre the rule (see operators.apply_T)."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: str
    order: int
    n: int = 1
    interval: Optional[tuple] = None
    radial: Optional[tuple] = None   # (r, w) for weight r^{n-1} on [0,1]
    sphere: Optional[tuple] = None   # (u, w) on S^{n-1}

    def integrate(self, func: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, func(self.nodes)))

    def total(self) -> float:
        return float(self.weights.sum())

    def describe(self) -> dict:
        d = {"domain": self.domain, "order": self.order, "n": self.n, "points": int(self.weights.size)}
        if self.interval is not None:
            d["interval"] = list(self.interval)
        return d


def gauss_interval(a: float, b: float, order: int) -> QuadratureRule:
    if order < 1:
        raise InvalidOrderError(f"order must be >= 1, got {order}")
    if not a < b:
        raise ValueError("need a < b")
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureRule(nodes=half * x + 0.5 * (a + b), weights=half * w,
                          domain="interval", order=order, n=1, interval=(a, b))


def gauss_integrate(func, a: float, b: float, order: int = 64, panels: int = 1) -> float:
    """Composite Gauss-Legendre integral of a vectorised 1-D function."""
    if b <= a:
        return 0.0 if b == a else -gauss_integrate(func, b, a, order, panels)
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    pts = (mid + half * x).ravel()
    wts = (half * w).ravel()
    return float(np.dot(wts, func(pts)))


def radial_rule(n: int, order: int):
    """Gauss-Jacobi nodes on [0,1] for the weight r^{n-1}."""
    if order < 1:
        raise InvalidOrderError(f"order must be >= 1, got {order}")
    x, w = special.roots_jacobi(order, 0.0, n - 1.0)
    return 0.5 * (x + 1.0), w * 0.5 ** n


def sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def sphere_gauss_rule(n: int, k: int):
    """Product Gauss rule on S^{n-1}: equispaced circle times Gauss-Jacobi in each
    extra polar coordinate. Exact for polynomials of degree <= 2k-1."""
    if n < 2 or k < 1:
        raise InvalidOrderError("need n >= 2 and k >= 1")
    ang = (np.arange(2 * k) + 0.5) * math.pi / k
    pts = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    wts = np.full(2 * k, math.pi / k)
    for d in range(2, n):
        a = (d - 2) / 2.0
        t, wt = special.roots_jacobi(k, a, a)
        s = np.sqrt(1.0 - t * t)
        new = np.concatenate([s[:, None, None] * pts[None, :, :],
                              np.broadcast_to(t[:, None, None], (k, len(pts), 1))], axis=2)
        pts = new.reshape(-1, d + 1)
        wts = (wt[:, None] * wts[None, :]).ravel()
    return pts, wts


def sphere_qmc_points(n: int, count: int, seed: int) -> np.ndarray:
    """Antipodally symmetric quasi-uniform points: scrambled Sobol mapped through the
    normal quantile and normalised."""
    half = (count + 1) // 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u = qmc.Sobol(d=n, scramble=True, seed=np.random.default_rng(seed)).random(half)
    g = stats.norm.ppf(np.clip(u, 1e-15, 1 - 1e-15))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.concatenate([g, -g])[:count] if count % 2 == 0 else np.concatenate([g, -g[:-1]])


def sphere_rule(n: int, points: int, seed: int = 0, kind: str = "gauss"):
    """Sphere points and weights with roughly `points` nodes."""
    if kind == "gauss":
        k = max(1, int(round((points / 2.0) ** (1.0 / (n - 1)))))
        return sphere_gauss_rule(n, k)
    if kind == "qmc":
        u = sphere_qmc_points(n, points, seed)
        return u, np.full(len(u), sphere_area(n) / len(u))
    raise ValueError(f"unknown sphere rule kind {kind!r}")


def ball_product_rule(n: int, radial_order: int = 64, sphere_points: int = 4096,
                      seed: int = 0, kind: str = "gauss") -> QuadratureRule:
    if n < 3:
        raise ValueError("ball_product_rule needs n >= 3")
    r, wr = radial_rule(n, radial_order)
    u, wu = sphere_rule(n, sphere_points, seed, kind)
    nodes = (r[:, None, None] * u[None, :, :]).reshape(-1, n)
    weights = (wr[:, None] * wu[None, :]).ravel()
    return QuadratureRule(nodes=nodes, weights=weights, domain="unit-ball", order=radial_order,
                          n=n, radial=(r, wr), sphere=(u, wu))


def sphere_quadrature(n: int, sphere_points: int = 4096, seed: int = 0, kind: str = "gauss") -> QuadratureRule:
    u, wu = sphere_rule(n, sphere_points, seed, kind)
    return QuadratureRule(nodes=u, weights=wu, domain="unit-sphere", order=sphere_points, n=n, sphere=(u, wu))


# ---------------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    samples: int
    seed: int
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "samples": self.samples, "seed": self.seed}

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.std_error


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def mean_estimate(values: np.ndarray, seed: int, scale: float = 1.0) -> MCEstimate:
    n = values.size
    mu = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(scale * mu, abs(scale) * se, n, seed)


def merge_estimates(parts: Sequence[MCEstimate]) -> MCEstimate:
    """Sample-weighted average with pooled variance."""
    total = sum(p.samples for p in parts)
    if total == 0:
        raise ValueError("nothing to merge")
    value = sum(p.value * p.samples for p in parts) / total
    var = sum((p.samples / total) ** 2 * p.std_error ** 2 for p in parts)
    return MCEstimate(value, math.sqrt(var), total, parts[0].seed)


def _chunks(samples: int):
    done = 0
    while done < samples:
        k = min(MC_CHUNK, samples - done)
        yield k
        done += k


def mc_region_volume(member: Callable[[np.ndarray], np.ndarray], box, samples: int,
                     seed: int, stream: int = 0) -> MCEstimate:
    """Hit-or-miss volume in an axis-aligned box. `member` is vectorised over rows."""
    box = np.asarray(box, dtype=float)
    lo, hi = box[:, 0], box[:, 1]
    if np.any(hi - lo <= 0):
        raise EmptyBoxError(f"box has nonpositive side: {box.tolist()}")
    if samples < 1:
        raise ValueError("samples must be positive")
    gen = rng_for(seed, stream)
    hits = 0
    for k in _chunks(samples):
        pts = lo + (hi - lo) * gen.random((k, len(lo)))
        hits += int(np.count_nonzero(member(pts)))
    vol = float(np.prod(hi - lo))
    p = hits / samples
    return MCEstimate(vol * p, vol * math.sqrt(p * (1 - p) / samples), samples, seed, {"hits": hits})


def mc_axisymmetric_volume(member: Callable[[np.ndarray], np.ndarray], n: int, y1_range,
                           rho_max: float, samples: int, seed: int, stream: int = 0) -> MCEstimate:
    """Hit-or-miss volume for a region invariant under rotations fixing e1.

    Points are uniform in the cylinder y1_range x {|y'| <= rho_max}; only the meridian
    coordinates matter, so each sample is placed at (y1, rho, 0, ..., 0)."""
    a, b = y1_range
    if b <= a or rho_max <= 0:
        raise EmptyBoxError("cylinder has nonpositive extent")
    gen = rng_for(seed, stream)
    hits = 0
    for k in _chunks(samples):
        u = gen.random((k, 2))
        pts = np.zeros((k, n))
        pts[:, 0] = a + (b - a) * u[:, 0]
        pts[:, 1] = rho_max * u[:, 1] ** (1.0 / (n - 1))
        hits += int(np.count_nonzero(member(pts)))
    vol = (b - a) * sphere_area(n - 1) / (n - 1) * rho_max ** (n - 1)
    p = hits / samples
    return MCEstimate(vol * p, vol * math.sqrt(p * (1 - p) / samples), samples, seed, {"hits": hits})


def uniform_ball(gen: np.random.Generator, k: int, n: int) -> np.ndarray:
    g = gen.standard_normal((k, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * gen.random(k)[:, None] ** (1.0 / n)


def uniform_sphere(gen: np.random.Generator, k: int, n: int) -> np.ndarray:
    g = gen.standard_normal((k, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# ---------------------------------------------------------------- finite differences

def fd_laplacian(u: Callable[[np.ndarray], float], x, h: float = 1e-4, check_ball: bool = True) -> float:
    """Second-order central-difference Laplacian of a scalar field at x."""
    x = np.asarray(x, dtype=float)
    if h <= 0:
        raise ValueError("h must be positive")
    if check_ball and 1.0 - np.linalg.norm(x) <= 2 * h:
        raise TooCloseToBoundaryError(f"dist(x, boundary) = {1 - np.linalg.norm(x):.3e} <= 2h")
    u0 = float(u(x))
    acc = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        acc += float(u(x + e)) + float(u(x - e)) - 2.0 * u0
    return acc / (h * h)


def central_diff(func: Callable[[float], float], t: float, h: float) -> float:
    return (func(t + h) - func(t - h)) / (2 * h)


def weighted_slope(xs, ys, ses) -> tuple:
    """Weighted least-squares slope of ys on xs and its standard error (weights 1/se^2)."""
    xs, ys, ses = (np.asarray(a, dtype=float) for a in (xs, ys, ses))
    w = 1.0 / np.maximum(ses, 1e-300) ** 2
    xb = np.sum(w * xs) / np.sum(w)
    yb = np.sum(w * ys) / np.sum(w)
    sxx = np.sum(w * (xs - xb) ** 2)
    if sxx == 0:
        raise ValueError("slope needs at least two distinct abscissae")
    return float(np.sum(w * (xs - xb) * (ys - yb)) / sxx), float(math.sqrt(1.0 / sxx))
