"""Distribution functions of the normalised kernel and region-union volumes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import betainc, betaincinv

from .errors import InsufficientGridError, InvalidSError
from .geometry import RegionSpec, constants, f_argmax, f_top, profile_f, region_mask
from .kernels import kernel_K0, proven_H
from .numerics import MCEstimate, mc_axisymmetric_volume, rng_for, sphere_area, uniform_ball


@dataclass(frozen=True)
class MeasureSpec:
    """kind: lebesgue-ball | surface-hausdorff | lambda-regular-test.

    The test measure is Lebesgue measure on the k-dimensional slice disk
    {x : x_{k+1} = ... = x_n = 0, |x| <= 1}; it obeys nu(B(a,r)) <= |B_k| r^k."""

    kind: str
    lam: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("lebesgue-ball", "surface-hausdorff", "lambda-regular-test"):
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def lebesgue(cls, n: int) -> "MeasureSpec":
        return cls("lebesgue-ball", float(n), {"n": n})

    @classmethod
    def surface(cls, n: int) -> "MeasureSpec":
        return cls("surface-hausdorff", float(n - 1), {"n": n})

    @classmethod
    def slice_disk(cls, n: int, k: int) -> "MeasureSpec":
        if not 1 <= k <= n:
            raise ValueError("slice dimension must lie in 1..n")
        return cls("lambda-regular-test", float(k), {"n": n, "dim": k})

    def total_mass(self, n: int) -> float:
        if self.kind == "lebesgue-ball":
            return sphere_area(n) / n
        if self.kind == "surface-hausdorff":
            return sphere_area(n)
        k = self.params["dim"]
        return sphere_area(k) / k if k > 1 else 2.0

    def regularity_constant(self, n: int) -> float:
        """C0 in nu(B(a,r)) <= C0 r^lam."""
        if self.kind == "lebesgue-ball":
            return sphere_area(n) / n
        if self.kind == "surface-hausdorff":
            # B(a,r) meets the sphere in a cap of chordal radius <= 2r, whose angular
            # radius is <= pi r; cap area <= omega_{n-2} phi^{n-1}/(n-1)
            return sphere_area(n - 1) / (n - 1) * math.pi ** (n - 1)
        k = self.params["dim"]
        return sphere_area(k) / k if k > 1 else 2.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "params": dict(self.params)}


@dataclass(frozen=True)
class LevelSetEstimate:
    s: float
    point: tuple
    estimate: MCEstimate
    sampling_radius: float
    normalization: str = "K0"

    def prefactor(self, n: int) -> tuple:
        """s^{n/(n-2)} times the estimate and its standard error."""
        scale = self.s ** (n / (n - 2.0))
        return scale * self.estimate.value, scale * self.estimate.std_error

    def to_dict(self, n: Optional[int] = None) -> dict:
        d = {"s": self.s, "point": list(self.point), "estimate": self.estimate.to_dict(),
             "sampling_radius": self.sampling_radius, "normalization": self.normalization}
        if n is not None:
            p, e = self.prefactor(n)
            d["prefactor"] = p
            d["prefactor_stderr"] = e
        return d


def sampling_radius(s: float, n: int) -> float:
    """Radius outside which |K0(x,.)| <= s, from |K0| <= H |x-z|^{2-n}."""
    return (proven_H(n) / s) ** (1.0 / (n - 2))


def _check_s(s):
    if not (s > 0 and math.isfinite(s)):
        raise InvalidSError(f"s must be positive and finite, got {s}")


def _hit_or_miss(gen, samples, sampler, vol, indicator, seed, chunk=1 << 16) -> MCEstimate:
    hits = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        hits += int(np.count_nonzero(indicator(sampler(gen, k))))
        done += k
    p = hits / samples
    return MCEstimate(vol * p, vol * math.sqrt(p * (1 - p) / samples), samples, seed, {"hits": hits})


def lambda1(s: float, x, n: int, samples: int = 1_000_000, seed: int = 0, stream: int = 0) -> LevelSetEstimate:
    """|{z in B_n : |K0(x,z)| > s}| by hit-or-miss in B(x, r_s)."""
    _check_s(s)
    x = np.asarray(x, dtype=float)
    r = sampling_radius(s, n)
    gen = rng_for(seed, stream)

    def sampler(g, k):
        return x + r * uniform_ball(g, k, n)

    def indicator(z):
        inside = np.einsum("ij,ij->i", z, z) < 1.0
        v = np.abs(kernel_K0(x, z, n, check=False))
        return inside & (v > s)

    est = _hit_or_miss(gen, samples, sampler, constants(n).vol_B * r ** n, indicator, seed)
    return LevelSetEstimate(float(s), tuple(map(float, x)), est, r)


def _cap_sampler(center_dir, c0, n):
    """Uniform points on {u in S^{n-1} : u.center_dir >= c0} and the cap area."""
    a = 0.5 * (n - 1)
    # work with the lower tail of (1 - t)/2 to keep small caps accurate
    top = betainc(a, a, 0.5 * (1.0 - c0)) if c0 > -1 else 1.0
    area = sphere_area(n) * top
    e = center_dir / np.linalg.norm(center_dir)

    def sampler(g, k):
        w = g.random(k) * top
        t = 1.0 - 2.0 * betaincinv(a, a, w)
        v = g.standard_normal((k, n))
        v -= np.outer(v @ e, e)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return t[:, None] * e + np.sqrt(np.clip(1.0 - t * t, 0, None))[:, None] * v

    return sampler, area


def lambda2(s: float, z, measure: MeasureSpec, n: int, samples: int = 1_000_000, seed: int = 0,
            stream: int = 0) -> LevelSetEstimate:
    """nu({x : |K0(x,z)| > s}); the x-level set lies in B(z, r_s) by the same kernel bound."""
    _check_s(s)
    z = np.asarray(z, dtype=float)
    r = sampling_radius(s, n)
    gen = rng_for(seed, stream)

    def level(x):
        return np.abs(kernel_K0(x, z, n, check=False)) > s

    if measure.kind == "lebesgue-ball":
        def sampler(g, k):
            return z + r * uniform_ball(g, k, n)

        def indicator(x):
            return (np.einsum("ij,ij->i", x, x) <= 1.0) & level(x)

        est = _hit_or_miss(gen, samples, sampler, constants(n).vol_B * r ** n, indicator, seed)
    elif measure.kind == "surface-hausdorff":
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            c0 = -2.0 if r > 1.0 else 2.0
            direction = np.eye(n)[0]
        else:
            c0 = (1.0 + nz * nz - r * r) / (2.0 * nz)
            direction = z
        if c0 >= 1.0:
            est = MCEstimate(0.0, 0.0, samples, seed, {"hits": 0})
        else:
            sampler, area = _cap_sampler(direction, max(c0, -1.0), n)
            est = _hit_or_miss(gen, samples, sampler, area, level, seed)
    else:
        k = measure.params["dim"]
        proj = np.zeros(n)
        proj[:k] = z[:k]
        d_perp2 = float(np.sum(z[k:] ** 2))
        if d_perp2 >= r * r:
            est = MCEstimate(0.0, 0.0, samples, seed, {"hits": 0})
        else:
            rr = math.sqrt(r * r - d_perp2)
            vol_k = (sphere_area(k) / k if k > 1 else 2.0) * rr ** k

            def sampler(g, m):
                pts = np.zeros((m, n))
                pts[:, :k] = proj[:k] + rr * uniform_ball(g, m, k)
                return pts

            def indicator(x):
                return (np.einsum("ij,ij->i", x, x) <= 1.0) & level(x)

            est = _hit_or_miss(gen, samples, sampler, vol_k, indicator, seed)
    return LevelSetEstimate(float(s), tuple(map(float, z)), est, r)


@dataclass(frozen=True)
class AsymptoticFit:
    prefactor: float
    std_error: float
    table: list


def fit_asymptotic_constant_detail(x, n: int, s_grid: Sequence[float], samples: int = 200_000,
                                   seed: int = 0) -> AsymptoticFit:
    s_grid = np.asarray(sorted(s_grid), dtype=float)
    if s_grid.size < 3 or s_grid[-1] / s_grid[0] < 100.0 * (1 - 1e-12):
        raise InsufficientGridError("need at least 3 levels spanning two decades")
    ratios = s_grid[1:] / s_grid[:-1]
    if np.ptp(np.log(ratios)) > 1e-9 * max(1.0, abs(np.log(ratios[0]))):
        raise InsufficientGridError("s_grid must be geometric")
    beta = n / (n - 2.0)
    logs, wts, table = [], [], []
    for i, s in enumerate(s_grid):
        est = lambda1(float(s), x, n, samples, seed, stream=i).estimate
        if est.value <= 0:
            raise InsufficientGridError(f"no hits at s={s:g}; raise samples")
        rel = est.std_error / est.value
        logs.append(math.log(est.value) + beta * math.log(s))
        wts.append(1.0 / max(rel * rel, 1e-30))
        table.append({"s": float(s), "estimate": est.to_dict(), "prefactor": est.value * s ** beta})
    logs, wts = np.array(logs), np.array(wts)
    log_a = float(np.sum(wts * logs) / np.sum(wts))
    se = math.exp(log_a) / math.sqrt(float(np.sum(wts)))
    return AsymptoticFit(math.exp(log_a), se, table)


def fit_asymptotic_constant(x, n: int, s_grid: Sequence[float], samples: int = 200_000, seed: int = 0) -> float:
    """Fitted prefactor A in lambda1(s,x) ~ A s^{-n/(n-2)} with the slope held fixed."""
    return fit_asymptotic_constant_detail(x, n, s_grid, samples, seed).prefactor


def prefactor_sweep(n: int, s: float, radii: Sequence[float], samples: int = 1_000_000, seed: int = 0):
    """s^{n/(n-2)} lambda1(s, r e1) for each r in radii."""
    out = []
    for i, r in enumerate(radii):
        x = np.zeros(n)
        x[0] = r
        est = lambda1(s, x, n, samples, seed, stream=i)
        p, e = est.prefactor(n)
        out.append({"radius": float(r), "prefactor": p, "stderr": e, "estimate": est.estimate.to_dict()})
    return out


def theorem_bound(n: int) -> float:
    """Sharp asymptotic prefactor: |B_n| for n = 3, 4, |G_n| for n >= 5."""
    c = constants(n)
    return c.vol_B if n <= 4 else c.vol_G


# ---------------------------------------------------------------- region unions

def union_cylinder(n: int, theta: float):
    """Cylinder about the e1 axis containing E(theta) and D(theta); see region_extent."""
    rho = max(1.0, math.sqrt(max(profile_f(f_argmax(n), n), 0.0))) * 1.001
    return (0.0, max(1.0 + theta, f_top(n) - theta) + 1e-9), rho


def union_volume_ED(theta: float, n: int, samples: int = 1_000_000, seed: int = 0, stream: int = 0) -> MCEstimate:
    e = RegionSpec("E", n, theta)
    d = RegionSpec("D", n, theta)
    y1_range, rho = union_cylinder(n, theta)
    return mc_axisymmetric_volume(lambda y: region_mask(e, y) | region_mask(d, y), n, y1_range, rho,
                                  samples, seed, stream)


def region_volume(spec: RegionSpec, samples: int = 1_000_000, seed: int = 0, stream: int = 0) -> MCEstimate:
    from .geometry import region_extent
    lo, hi, rho = region_extent(spec)
    return mc_axisymmetric_volume(lambda y: region_mask(spec, y), spec.n, (lo, hi), rho * 1.001,
                                  samples, seed, stream)


def lambda2_exact_origin(s: float, n: int) -> float:
    """Lebesgue lambda2(s, 0): K0(x, 0) = |x|^{2-n} - n/2 for every x, so the level set
    is the ball of radius (s + n/2)^{-1/(n-2)} once s > n/2 - 1."""
    if s <= n / 2.0 - 1.0:
        raise InvalidSError("closed form needs s > n/2 - 1")
    return constants(n).vol_B * (s + n / 2.0) ** (-n / (n - 2.0))
