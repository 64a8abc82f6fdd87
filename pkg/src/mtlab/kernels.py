"""Pointwise kernels on the unit ball.

Every function broadcasts over leading axes: x and z have shape (..., n). With
check=True (the default) a pole inside the inputs raises SingularPointError; the
integrators pass check=False after excluding poles themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularPointError
from .geometry import constants
from .numerics import rng_for, uniform_ball

KINDS = ("N", "G", "P", "R", "K", "K0", "g-profile")


@dataclass(frozen=True)
class KernelEval:
    value: float
    x: tuple
    z: tuple
    kind: str


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def img_sq(x, z):
    """|x* - |x| z|^2 = 1 - 2 x.z + |x|^2 |z|^2, equal to 1 at x = 0.

    Evaluated as |x-z|^2 + (1-|x|^2)(1-|z|^2): algebraically identical, free of
    cancellation when x and z are close, and exactly |x-z|^2 on the sphere."""
    d = x - z
    return _dot(d, d) + (1.0 - _dot(x, x)) * (1.0 - _dot(z, z))


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def _prep(x, z=None):
    x = np.asarray(x, dtype=float)
    if z is None:
        return x
    return x, np.asarray(z, dtype=float)


def newton(x, n: int, check: bool = True):
    x = _prep(x)
    r2 = _dot(x, x)
    if check and np.any(r2 == 0):
        raise SingularPointError("newton kernel at x = 0")
    with np.errstate(divide="ignore"):
        return _out(-constants(n).c_n * r2 ** ((2 - n) / 2.0))


def newton_2d(x):
    """Logarithmic kernel of the plane, (1/2pi) log|x|. Documentation only."""
    x = np.asarray(x, dtype=float)
    return _out(np.log(np.sqrt(_dot(x, x))) / (2 * math.pi))


def _pair_check(x, z, check):
    d2 = _dot(x - z, x - z)
    if check and np.any(d2 == 0):
        raise SingularPointError("kernel evaluated at x = z")
    return d2


def _img_check(s, check):
    if check and np.any(s <= 0):
        raise SingularPointError("1 - 2x.y + |x|^2|y|^2 = 0")
    return s


def green(x, z, n: int, check: bool = True):
    x, z = _prep(x, z)
    d2 = _pair_check(x, z, check)
    s = img_sq(x, z)
    with np.errstate(divide="ignore"):
        return _out(-constants(n).c_n * (d2 ** ((2 - n) / 2.0) - s ** ((2 - n) / 2.0)))


def poisson_ext(x, y, n: int, check: bool = True):
    x, y = _prep(x, y)
    s = _img_check(img_sq(x, y), check)
    num = 1.0 - _dot(x, x) * _dot(y, y)
    with np.errstate(divide="ignore"):
        return _out(num / (constants(n).omega * s ** (n / 2.0)))


def bergman(x, y, n: int, check: bool = True):
    x, y = _prep(x, y)
    s = _img_check(img_sq(x, y), check)
    p = _dot(x, x) * _dot(y, y)
    num = (n - 4) * p * p + (8.0 * _dot(x, y) - 2 * n - 4) * p + n
    with np.errstate(divide="ignore"):
        return _out(num / (constants(n).omega * s ** ((n + 2) / 2.0)))


def kernel_K0(x, z, n: int, check: bool = True):
    """Normalised kernel -K/c_n."""
    x, z = _prep(x, z)
    d2 = _pair_check(x, z, check)
    s = img_sq(x, z)
    zz = _dot(z, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (d2 ** ((2 - n) / 2.0) - s ** ((2 - n) / 2.0)
             - 0.5 * (n - 2) * (1.0 - zz) * (1.0 - _dot(x, x) * zz) / s ** (n / 2.0))
    return _out(v)


def kernel_K(x, z, n: int, check: bool = True):
    x, z = _prep(x, z)
    d2 = _pair_check(x, z, check)
    s = img_sq(x, z)
    c = constants(n)
    zz = _dot(z, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = -c.c_n * (d2 ** ((2 - n) / 2.0) - s ** ((2 - n) / 2.0))
        p = (1.0 - _dot(x, x) * zz) / (c.omega * s ** (n / 2.0))
    return _out(g + 0.5 * (1.0 - zz) * p)


def asymptotic_g(x, z, n: int, check: bool = True):
    """2(n-2) [x*.(x*-z)] [x*.(x*-|x|z)] / |x*-|x|z|^2 with x* = x/|x|, i.e.
    2(n-2)(1 - x.z/|x|)(1 - x.z)/s."""
    x, z = _prep(x, z)
    r2 = _dot(x, x)
    if check and np.any(r2 == 0):
        raise SingularPointError("g profile needs x != 0")
    s = _img_check(img_sq(x, z), check)
    xz = _dot(x, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _out(2.0 * (n - 2) * (1.0 - xz / np.sqrt(r2)) * (1.0 - xz) / s)


_FUNCS = {
    "N": lambda x, z, n: newton(np.asarray(x) - np.asarray(z), n),
    "G": green, "P": poisson_ext, "R": bergman, "K": kernel_K, "K0": kernel_K0,
    "g-profile": asymptotic_g,
}


def evaluate(kind: str, x, z, n: int) -> KernelEval:
    """Single-pair evaluation tagged with its kind; N is taken at x - z."""
    if kind not in _FUNCS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    v = _FUNCS[kind](np.asarray(x, float), np.asarray(z, float), n)
    return KernelEval(float(v), tuple(map(float, x)), tuple(map(float, z)), kind)


def all_kernels(x, z, n: int) -> dict:
    """Every kernel at one pair. x = z raises; P, R, g are reported where defined."""
    x = np.asarray(x, float)
    z = np.asarray(z, float)
    if np.array_equal(x, z):
        raise SingularPointError("x = z")
    out = {}
    for kind in KINDS:
        try:
            out[kind] = evaluate(kind, x, z, n).value
        except SingularPointError:
            out[kind] = None
    return out


# ---------------------------------------------------------------- empirical bound

def proven_H(n: int) -> float:
    """A rigorous constant for |K0(x,z)| <= H |x-z|^{2-n}.

    K0 = A - B - C with A = |x-z|^{2-n} >= B = s^{(2-n)/2} >= 0 and C >= 0.
    Since 1 - |z|^2 and 1 - |x|^2|z|^2 are both at most 2 sqrt(s), C <= (2n-4) s^{(2-n)/2}
    <= (2n-4) A, so |K0| <= (2n-3) A."""
    return 2.0 * n - 3.0


def estimate_H(n: int, samples: int = 1_000_000, seed: int = 0, boundary_fraction: float = 0.5):
    """Empirical sup of |K0(x,z)| |x-z|^{n-2} over random pairs.

    Half of the x samples sit on the sphere, where the supremum is approached."""
    gen = rng_for(seed, 101)
    best = 0.0
    done = 0
    chunk = 1 << 16
    while done < samples:
        k = min(chunk, samples - done)
        x = uniform_ball(gen, k, n)
        nb = int(k * boundary_fraction)
        x[:nb] /= np.linalg.norm(x[:nb], axis=1, keepdims=True)
        # z near x so that the ratio is probed at all scales
        z = uniform_ball(gen, k, n)
        mix = gen.random(k) < 0.5
        scale = 10.0 ** (-4 * gen.random(k))
        z[mix] = x[mix] + scale[mix, None] * uniform_ball(gen, int(mix.sum()), n)
        inside = _dot(z, z) < 1.0
        x, z = x[inside], z[inside]
        d2 = _dot(x - z, x - z)
        ok = d2 > 0
        r = np.abs(kernel_K0(x[ok], z[ok], n, check=False)) * d2[ok] ** ((n - 2) / 2.0)
        if r.size:
            best = max(best, float(r.max()))
        done += k
    return best
