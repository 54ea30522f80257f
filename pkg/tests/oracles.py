"""Independent reference implementations used by the tests.

Nothing here imports lattice_disperse; each oracle uses a different
algorithm from the package code it checks.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np
import scipy.special


# ---------------------------------------------------------------------------
# Bessel functions

def bessel_series_mp(n: int, t: float, dps: int = 40) -> float:
    """J_n(t) from the power series summed in high precision.

    The terms grow to about e^t before cancelling, so the working precision
    is raised by log10(e) t digits.
    """
    dps = dps + int(0.44 * abs(t)) + 1
    sign = 1
    if n < 0:
        n, sign = -n, (-1) ** n
    with mpmath.workdps(dps):
        x = mpmath.mpf(t) / 2
        term = x ** n / mpmath.factorial(n)
        total = term
        k = 0
        while abs(term) > mpmath.mpf(10) ** (-dps + 5) * max(1, abs(total)) or k < 2 * t:
            k += 1
            term *= -x * x / (k * (n + k))
            total += term
        return sign * float(total)


def bessel_miller_table(nmax: int, t) -> np.ndarray:
    """J_0..J_nmax on a grid of t >= 0 by backward recurrence in extended
    precision, normalised with J_0 + 2 sum_k J_2k = 1.

    Returns an array of shape (nmax + 1, len(t)).
    """
    t = np.asarray(t, dtype=np.longdouble)
    out = np.zeros((nmax + 1, t.size), dtype=np.longdouble)
    zero = t == 0
    tt = np.where(zero, 1, t)
    start = int(max(nmax, float(t.max())) + 60 + 4 * float(t.max()) ** (1 / 3))
    start += start % 2
    nxt = np.zeros_like(tt)
    cur = np.full_like(tt, 1e-300)
    norm = np.zeros_like(tt)
    for k in range(start, 0, -1):
        prev = 2 * k / tt * cur - nxt
        nxt, cur = cur, prev
        # index k - 1 now holds cur
        if k - 1 <= nmax:
            out[k - 1] = cur
        if (k - 1) % 2 == 0:
            norm += cur if k - 1 == 0 else 2 * cur
        big = np.abs(cur) > 1e300
        if big.any():
            s = np.where(big, 1e-300, 1)
            cur, nxt, norm, out = cur * s, nxt * s, norm * s, out * s
    out /= norm
    out[:, zero] = 0
    out[0, zero] = 1
    return out.astype(float)


# ---------------------------------------------------------------------------
# Lattice kernels

def torus_propagator(n, t: float, points: int = 96) -> complex:
    """(2 pi)^-d int exp(i n.k + i t sum cos k_j) dk by the trapezoid rule,
    evaluated as a product of one-dimensional rules."""
    k = 2 * np.pi * np.arange(points) / points
    out = 1 + 0j
    for nj in n:
        out *= np.mean(np.exp(1j * nj * k + 1j * t * np.cos(k)))
    return complex(out)


def torus_resolvent_trapezoid(n, z: complex, points: int = 160) -> complex:
    """(2 pi)^-d int exp(i n.k) / (sum_j cos k_j - z) dk on a full grid."""
    d = len(n)
    k = 2 * np.pi * np.arange(points) / points
    grids = np.meshgrid(*([k] * d), indexing="ij")
    band = sum(np.cos(g) for g in grids)
    phase = np.exp(1j * sum(nj * g for nj, g in zip(n, grids)))
    return complex(np.mean(phase / (band - z)))


def resolvent_1d(n: int, z: complex) -> complex:
    """Closed form kernel of (cos k - z)^-1 on Z: -w^|n| / s with
    w the root of w^2 - 2 z w + 1 inside the unit disc and s = (1/w - w)/2."""
    roots = np.roots([1, -2 * z, 1])
    w = roots[np.argmin(np.abs(roots))]
    s = (1 / w - w) / 2
    return complex(-w ** abs(n) / s)


def neumann_dense(n, z: complex, dim: int, terms: int) -> complex:
    """-sum_k (Delta^k delta_0)(n) / z^(k+1) with Delta applied on a zero-padded
    array large enough that every retained term is exact."""
    R = terms + max(abs(x) for x in n) + 1
    shape = (2 * R + 1,) * dim
    v = np.zeros(shape)
    v[(R,) * dim] = 1
    idx = tuple(R + x for x in n)
    total = 0j
    for k in range(terms):
        total -= v[idx] / z ** (k + 1)
        w = np.zeros_like(v)
        for ax in range(dim):
            w += 0.5 * (np.roll(v, 1, ax) + np.roll(v, -1, ax))
        v = w
    return total


def dirichlet_spectrum(radius: int, dim: int) -> np.ndarray:
    """Eigenvalues of the nearest-neighbour averaging operator on a box of
    side M = 2 radius + 1 with zero boundary values."""
    M = 2 * radius + 1
    one = np.cos(np.arange(1, M + 1) * np.pi / (M + 1))
    vals = np.zeros(1)
    for _ in range(dim):
        vals = (vals[:, None] + one[None, :]).ravel()
    return np.sort(vals)


def power_deflation(A: np.ndarray, iters: int = 20000, tol: float = 1e-13) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix by power iteration on a shifted
    matrix with Hotelling deflation."""
    A = np.array(A, dtype=complex)
    n = len(A)
    shift = np.abs(A).sum(axis=1).max()
    B = A + shift * np.eye(n)  # positive semidefinite, dominant = largest
    rng = np.random.default_rng(1)
    out = []
    for _ in range(n):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        lam = 0.0
        for _ in range(iters):
            y = B @ x
            new = float(np.real(np.vdot(x, y)))
            ny = np.linalg.norm(y)
            if ny == 0:
                break
            x = y / ny
            if abs(new - lam) <= tol * max(1.0, abs(new)):
                lam = new
                break
            lam = new
        # Rayleigh refinement with a few inverse-iteration steps
        for _ in range(3):
            try:
                y = np.linalg.solve(B - (lam + 1e-10) * np.eye(n), x)
            except np.linalg.LinAlgError:
                break
            x = y / np.linalg.norm(y)
            lam = float(np.real(np.vdot(x, B @ x)))
        out.append(lam - shift)
        B = B - lam * np.outer(x, np.conj(x))
    return np.sort(out)


# ---------------------------------------------------------------------------
# Sums and integrals

def brute_convolution(f: dict, g: dict) -> dict:
    """(f * g)_n = sum_m f_m g_{n-m} by a double loop over dict supports."""
    out: dict = {}
    for a, fa in f.items():
        for b, gb in g.items():
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0) + fa * gb
    return {k: v for k, v in out.items() if v != 0}


def brute_young_lhs(f: dict, g: dict, h: dict) -> float:
    """|sum_{n, m} f_n g_{n-m} h_m| by a double loop."""
    total = 0j
    for n, fn in f.items():
        for m, hm in h.items():
            diff = tuple(x - y for x, y in zip(n, m))
            total += fn * g.get(diff, 0) * hm
    return abs(total)


def direct_summation(alpha: float, beta: float, t: float, M: int) -> float:
    """sum_{|n|,|m| <= M} (1+|n|)^-a (1+|m|)^-a (1+||n-m|-t|)^-b by blocks."""
    n = np.arange(-M, M + 1)
    a = (1.0 + np.abs(n)) ** (-alpha)
    total = 0.0
    step = 512
    for i in range(0, len(n), step):
        diff = np.abs(n[i:i + step, None] - n[None, :])
        w = (1.0 + np.abs(diff - t)) ** (-beta)
        total += float(a[i:i + step] @ w @ a)
    return total


def simpson(f, a: float, b: float, panels: int) -> float:
    """Composite Simpson rule with an even number of panels."""
    panels += panels % 2
    x = np.linspace(a, b, panels + 1)
    y = f(x)
    h = (b - a) / panels
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


def bessel_cube_simpson(order: int, a: float, b: float, h: float = 0.004) -> float:
    """int_a^b |J_order|^3 by composite Simpson with scipy's jv."""
    return simpson(lambda x: np.abs(scipy.special.jv(order, x)) ** 3, a, b,
                   int(math.ceil((b - a) / h)))


def lattice_points(dim: int, radius: int):
    return itertools.product(range(-radius, radius + 1), repeat=dim)
