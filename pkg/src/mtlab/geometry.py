"""Dimension constants, scalar profiles and the region predicates of the level-set argument."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import BracketFailureError, DomainError, UnsupportedDimensionError
from .numerics import bisect_root, gauss_integrate, make_bracket

BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class Constants:
    n: int
    omega: float
    c_n: float
    vol_B: float
    vol_G: float
    alpha_n: float
    theta0: float
    theta1: float
    theta00: float

    def to_dict(self) -> dict:
        return asdict(self)


def sphere_area(n: int) -> float:
    """omega_{n-1}, the surface measure of S^{n-1} in R^n."""
    return 2.0 * math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n))


def vol_G_closed(n: int) -> float:
    p = n / (n - 2.0)
    log_v = (0.5 * (n - 1) * math.log(math.pi) - math.log(n) + p * math.log(2 * n - 4.0)
             + gammaln(0.5 + p) - gammaln(0.5 * n + p))
    return math.exp(log_v)


@lru_cache(maxsize=None)
def constants(n: int) -> Constants:
    if n < 3:
        raise UnsupportedDimensionError(f"n must be >= 3, got {n}")
    omega = sphere_area(n)
    c_n = 1.0 / ((n - 2) * omega)
    vol_B = omega / n
    vol_G = vol_G_closed(n)
    base = c_n ** (-n / (n - 2.0))
    alpha = base / (vol_B if n <= 4 else vol_G)
    theta0 = 0.5 * ((2 * n - 4.0) ** (1.0 / (n - 2)) - 1.0)
    theta1 = (2 * n - 4.0) ** -0.5
    theta00 = 0.5 * (math.sqrt(1.0 + 2.0 / (n - 2)) - 1.0)
    return Constants(n, omega, c_n, vol_B, vol_G, alpha, theta0, theta1, theta00)


def vol_G_spherical(n: int, order: int = 200) -> float:
    """|G_n| from its polar form: (omega_{n-2}/n)(2n-4)^{n/(n-2)} int_0^1 t^{2n/(n-2)}(1-t^2)^{(n-3)/2} dt.

    The substitution t = sin(phi) turns the endpoint factor into cos^{n-2}, which
    keeps Gauss-Legendre spectrally accurate for even n."""
    p = 2.0 * n / (n - 2)
    integral = gauss_integrate(lambda ph: np.sin(ph) ** p * np.cos(ph) ** (n - 2), 0.0, math.pi / 2, order)
    return sphere_area(n - 1) / n * (2 * n - 4.0) ** (n / (n - 2.0)) * integral


# ---------------------------------------------------------------- profiles

def profile_f(v, n: int):
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr < 0):
        raise DomainError("profile_f needs v >= 0")
    out = (2 * n - 4.0) ** (2.0 / n) * v_arr ** (4.0 / n) - v_arr ** 2
    return float(out) if np.ndim(v) == 0 else out


def profile_h(v):
    v_arr = np.asarray(v, dtype=float)
    out = 1.0 - v_arr ** 2
    return float(out) if np.ndim(v) == 0 else out


def f_top(n: int) -> float:
    """Positive zero of f: (2n-4)^{1/(n-2)}."""
    return (2 * n - 4.0) ** (1.0 / (n - 2))


def f_argmax(n: int) -> float:
    return (2.0 / n) ** (n / (2 * n - 4.0)) * f_top(n)


def phi_b(b, theta, n: int):
    return (1.0 + 4.0 * theta * b) ** (n / 4.0) - math.sqrt(2 * n - 4.0) * (b + theta)


def psi(z, n: int):
    return (1.0 + 2.0 * np.asarray(z, dtype=float) / (n - 2)) ** (n / 2.0) - z * z - z


def F_theta(theta, n: int):
    return 2.0 ** (-2.0 / (n - 1)) * profile_f(theta, n)


def F_theta_prime(theta, n: int):
    th = np.asarray(theta, dtype=float)
    fp = (2 * n - 4.0) ** (2.0 / n) * (4.0 / n) * th ** (4.0 / n - 1.0) - 2.0 * th
    return 2.0 ** (-2.0 / (n - 1)) * fp


def q_theta(theta, n: int):
    one_minus = 1.0 - np.asarray(F_theta(theta, n))
    if np.any(one_minus < 0):
        raise DomainError("q(theta) needs F(theta) <= 1")
    out = theta + np.sqrt(one_minus)
    return float(out) if np.ndim(theta) == 0 else out


# ---------------------------------------------------------------- lambda_n

LAMBDA_BRACKETS = (
    (13, 20, 2.67, 2.79),
    (21, 32, 2.61, 2.67),
    (33, 65, 2.56, 2.61),
    (66, None, 2.51, 2.56),
)


def g_lambda(lam: float, n: Optional[int] = None) -> float:
    """(1+2 lam/(n-2))^{n/4} - 1 - lam; n=None is the n -> infinity limit e^{lam/2} - 1 - lam."""
    if n is None:
        return math.exp(0.5 * lam) - 1.0 - lam
    return (1.0 + 2.0 * lam / (n - 2)) ** (n / 4.0) - 1.0 - lam


def lambda_bracket_table(n: int):
    for lo_n, hi_n, a, b in LAMBDA_BRACKETS:
        if n >= lo_n and (hi_n is None or n <= hi_n):
            return a, b
    raise DomainError(f"lambda_n is tabulated only for n >= 13, got {n}")


def lambda_star(n: int, tol: float = 1e-12):
    """Positive root of g(., n) with the tabulated bracket certified by sign evaluations."""
    if n < 13:
        raise DomainError("lambda_star needs n >= 13")
    a, b = lambda_bracket_table(n)
    br = make_bracket(lambda t: g_lambda(t, n), a, b)
    if not (br.f_lo < 0 < br.f_hi):
        raise BracketFailureError(f"n={n}: g({a})={br.f_lo:.3e}, g({b})={br.f_hi:.3e}")
    return br, bisect_root(lambda t: g_lambda(t, n), br, tol)


# ---------------------------------------------------------------- regions

REGION_TAGS = ("Gn", "B", "G", "D", "D0", "Et", "E", "Bstar")


@dataclass(frozen=True)
class RegionSpec:
    """Tagged region. `E` is E(theta) = E(theta, 0); `Et` carries t.

    `c_const` is the constant multiplying t in E(theta,t); its value is not pinned
    down by the source, 1 is used by default."""

    tag: str
    n: int
    theta: float = 0.0
    t: float = 0.0
    c_const: float = 1.0

    def __post_init__(self):
        if self.tag not in REGION_TAGS:
            raise ValueError(f"unknown region tag {self.tag!r}")
        if self.n < 3:
            raise UnsupportedDimensionError("n must be >= 3")
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError("theta must lie in [0,1]")
        if not 0.0 <= self.t < 1.0:
            raise DomainError("t must lie in [0,1)")

    def label(self) -> str:
        if self.tag == "Gn":
            return "G_n"
        if self.tag == "Et":
            return f"E({self.theta:g},{self.t:g})"
        return f"{self.tag}({self.theta:g})"


def _sq(y):
    return np.einsum("ij,ij->i", y, y)


def region_mask(spec: RegionSpec, y) -> np.ndarray:
    """Vectorised membership over the rows of y (shape (k, n))."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    n, th = spec.n, spec.theta
    y1 = y[:, 0]
    k = 2 * n - 4.0
    tag = spec.tag
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if tag == "Gn":
            return (y1 > 0) & (_sq(y) ** (n / 2.0) < k * y1 ** 2)
        if tag == "B":
            yy = y.copy()
            yy[:, 0] -= th
            return _sq(yy) <= 1.0
        if tag == "G":
            v = y1 + th
            yy = y.copy()
            yy[:, 0] = v
            return (v >= 0) & (v <= f_top(n)) & (_sq(yy) ** (n / 2.0) <= k * v * v)
        if tag == "Bstar":
            yy = y.copy()
            yy[:, 0] -= th
            return _sq(yy) ** (n / 2.0) <= k * th * y1
        if tag == "D":
            yy = y.copy()
            yy[:, 0] += th
            return (y1 >= 0) & (_sq(yy) ** (n / 2.0) <= k * y1 * (y1 + th))
        if tag == "D0":
            yp = y.copy()
            yp[:, 0] += th
            rp = _sq(yp)
            ym = y.copy()
            ym[:, 0] -= th
            rm = _sq(ym)
            lhs = (1.0 + k * y1 * (y1 + th) / rp) * rp ** ((2 - n) / 2.0) - rm ** ((2 - n) / 2.0)
            lhs = np.where(rp == 0, np.inf, lhs)
            return (y1 >= 0) & (lhs > 1.0)
        if tag in ("E", "Et"):
            t = spec.t if tag == "Et" else 0.0
            ym = y.copy()
            ym[:, 0] -= th
            rm = _sq(ym)
            w = (1.0 - th * t) * y
            w[:, 0] += th
            rw = _sq(w)
            second = (1.0 + k * y1 * (y1 + th - th * t * y1) / rw) * rw ** ((2 - n) / 2.0)
            lhs = (1.0 + spec.c_const * t) * rm ** ((2 - n) / 2.0) - second
            lhs = np.where(rm == 0, np.inf, lhs)
            return (y1 >= 0) & (lhs > 1.0)
    raise ValueError(tag)


def in_region(spec: RegionSpec, y) -> bool:
    return bool(region_mask(spec, np.asarray(y, dtype=float)[None, :])[0])


def region_extent(spec: RegionSpec):
    """(y1_lo, y1_hi, rho_max) of a cylinder about the e1 axis that contains the region.

    B(theta) is the unit ball about theta e1. D(theta) sits inside G(theta), whose
    meridian radius is at most sqrt(max f) and whose y1 extent ends at the zero of f,
    so D lies in y1 <= f_top - theta; D0 is a subset of D. E-type sets satisfy
    |y - theta e1| < 1 directly from their defining inequality since the subtracted
    term is nonnegative for y1 >= 0. For B*(theta), R = |y - theta e1| obeys
    R^n <= (2n-4) theta (theta + R), which bounds R by the positive root."""
    n, th = spec.n, spec.theta
    rho_f = math.sqrt(max(profile_f(f_argmax(n), n), 0.0))
    top = f_top(n)
    tag = spec.tag
    if tag == "B":
        return th - 1.0, th + 1.0, 1.0
    if tag == "G":
        return -th, top - th, rho_f
    if tag == "Gn":
        return 0.0, top, rho_f
    if tag == "D":
        return 0.0, max(top - th, 0.0) + 1e-12, rho_f
    if tag == "D0":
        return 0.0, max(top - th, 0.0) + 1e-12, rho_f
    if tag in ("E", "Et"):
        return 0.0, th + 1.0, 1.0
    if tag == "Bstar":
        if th == 0:
            return 0.0, 1e-12, 1e-12
        k = 2 * n - 4.0
        g = lambda r: r ** n - k * th * (th + r)
        r = bisect_root(g, make_bracket(g, 0.0, 2.0 + k * th)) * (1 + 1e-9)
        return 0.0, th + r, r
    raise ValueError(tag)
