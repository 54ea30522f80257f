"""Closed-form constants and admissibility ranges for the weighted estimates.

Every evaluator checks its own domain and raises ``ConstantDomainError``
instead of clamping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConstantDomainError(ValueError):
    """A constant was requested outside the region where it is defined."""


def _check_gamma(gamma: float) -> None:
    if not 0 <= gamma <= 1:
        raise ConstantDomainError(f"gamma={gamma} must lie in [0, 1]")


def _check_p_gamma(p: float, gamma: float) -> None:
    _check_gamma(gamma)
    if not p > 2 + 2 * gamma:
        raise ConstantDomainError(f"need p > 2 + 2 gamma, got p={p}, gamma={gamma}")


# ---------------------------------------------------------------------------

def gamma_big(q: float, d: int, gamma: float) -> float:
    """The piecewise constant Gamma(q, d, gamma) of the weighted resolvent bound.

    For q = 2 the value is 1 (d != 4) or (1 - gamma)^-1 (d = 4).  For d = 4
    and q > 2 this evaluates the formula exactly as printed; see
    :func:`gamma_big_derived` for the value recomputed from
    :func:`kappa_norm_bound`.
    """
    d = int(d)
    _check_gamma(gamma)
    if d < 3:
        raise ConstantDomainError("Gamma(q, d, gamma) needs d >= 3")
    if q < 2:
        raise ConstantDomainError(f"q={q} must be >= 2")
    if q == 2:
        if d == 4:
            if gamma >= 1:
                raise ConstantDomainError("Gamma(2, 4, gamma) needs gamma < 1")
            return 1.0 / (1.0 - gamma)
        return 1.0
    if d == 3:
        den = 12 - (5 + 2 * gamma) * q
        if den <= 0:
            raise ConstantDomainError(f"denominator 12 - (5 + 2 gamma) q = {den} is not positive")
        return (3 + 12 * (q - 2) / den) ** (3 * (q - 2) / q)
    if d == 4:
        den = 8 - (3 + gamma) * q
        if den <= 0:
            raise ConstantDomainError(f"denominator 8 - (3 + gamma) q = {den} is not positive")
        return (3 + 2 * ((5 * q - 2) / den) ** (1 + q / (4 * (q - 2)))) ** (4 * (q - 2) / q)
    den = 6 * d - (2 * d + 1 + 3 * gamma) * q
    if den <= 0:
        raise ConstantDomainError(f"denominator 6d - (2d + 1 + 3 gamma) q = {den} is not positive")
    return (3 + 6 * d * (q - 2) / den) ** (d * (q - 2) / q)


def gamma_big_derived(q: float, d: int, gamma: float) -> float:
    """Gamma(q, d, gamma) recomputed as kappa_norm_bound(d, gamma, q/(q-2))^d.

    Agrees with :func:`gamma_big` for d != 4; for d = 4 the numerator reads
    5q - 8 instead of the printed 5q - 2.
    """
    if q == 2:
        return gamma_big(q, d, gamma)
    gamma_big(q, d, gamma)  # domain checks
    r = q / (q - 2)
    return kappa_norm_bound(d, gamma, r) ** d


def c_d_gamma(d: int, gamma: float) -> float:
    """C_d^gamma: 8/(1-2g)+8 (d=3), 4/(1-g) (d=4), 14 2^{d/4}/(d-4) (d>4)."""
    d = int(d)
    _check_gamma(gamma)
    if d < 3:
        raise ConstantDomainError("C_d^gamma needs d >= 3")
    if not d > 2 + 2 * gamma:
        raise ConstantDomainError(f"need d > 2 + 2 gamma, got d={d}, gamma={gamma}")
    if d == 3:
        return 8 / (1 - 2 * gamma) + 8
    if d == 4:
        return 4 / (1 - gamma)
    return 14 * 2 ** (d / 4) / (d - 4)


def gamma_dq(d: int, q: float) -> float:
    """Hoelder-exponent ceiling: 6/q - 5/2 (d=3), 2d/q - (2d+1)/3 (d>=4)."""
    d = int(d)
    if d < 3:
        raise ConstantDomainError("gamma_{d,q} needs d >= 3")
    if q < 2:
        raise ConstantDomainError(f"q={q} must be >= 2")
    if d == 3:
        return 6 / q - 5 / 2
    return 2 * d / q - (2 * d + 1) / 3


def c_a(a: float) -> float:
    """C_a = 3 (1 + 2a/(2a - 1)) for a > 1/2."""
    if not a > 0.5:
        raise ConstantDomainError(f"C_a needs a > 1/2, got a={a}")
    return 3 * (1 + 2 * a / (2 * a - 1))


def c_p_gamma(p: float, gamma: float) -> float:
    """Constant of the weighted L^p Bessel estimate."""
    _check_p_gamma(p, gamma)
    if p < 4:
        return 8 * (1 / (p - 2 - 2 * gamma) + 1 / (4 - p))
    if p == 4:
        if gamma >= 1:
            raise ConstantDomainError("p = 4 needs gamma < 1")
        return 4 / (1 - gamma)
    return 14 * 2 ** (p / 4) / (p - 4)


def kappa_p_gamma(n: int, p: float, gamma: float) -> float:
    """Decay profile kappa_p^gamma(n); equals 1 at n = 0."""
    _check_p_gamma(p, gamma)
    m = abs(int(n))
    if m == 0:
        return 1.0
    if p < 4:
        return m ** (-0.5 + (1 + gamma) / p)
    if p == 4:
        return m ** (-(1 - gamma) / 4) * (1 + math.log(m)) ** 0.25
    return m ** (-1 / 3 + 1 / (3 * p) + gamma / p)


def kappa_p_gamma_array(n, p: float, gamma: float) -> np.ndarray:
    """Vectorised :func:`kappa_p_gamma` over integer arrays."""
    _check_p_gamma(p, gamma)
    m = np.abs(np.asarray(n)).astype(float)
    safe = np.where(m == 0, 1.0, m)
    if p < 4:
        out = safe ** (-0.5 + (1 + gamma) / p)
    elif p == 4:
        out = safe ** (-(1 - gamma) / 4) * (1 + np.log(safe)) ** 0.25
    else:
        out = safe ** (-1 / 3 + 1 / (3 * p) + gamma / p)
    return np.where(m == 0, 1.0, out)


def kappa_tilde(n, d: int, gamma: float) -> float:
    """Product over coordinates of kappa_d^gamma(n_j)."""
    d = int(d)
    n = np.atleast_1d(np.asarray(n))
    if n.shape[-1] != d:
        raise ValueError(f"lattice vector has {n.shape[-1]} coordinates, expected {d}")
    if not d > 2 + 2 * gamma:
        raise ConstantDomainError(f"need d > 2 + 2 gamma, got d={d}, gamma={gamma}")
    return float(np.prod(kappa_p_gamma_array(n, d, gamma)))


def kappa_tilde_array(coords, d: int, gamma: float) -> np.ndarray:
    coords = np.asarray(coords)
    if not d > 2 + 2 * gamma:
        raise ConstantDomainError(f"need d > 2 + 2 gamma, got d={d}, gamma={gamma}")
    return np.prod(kappa_p_gamma_array(coords, d, gamma), axis=-1)


def r_p_gamma(p: float, gamma: float) -> float:
    """Summability threshold: kappa_p^gamma lies in l^r for r > r_p^gamma."""
    _check_p_gamma(p, gamma)
    if p <= 4:
        return 2 * p / (p - 2 - 2 * gamma)
    return 3 * p / (p - 1 - 3 * gamma)


def kappa_norm_bound(p: float, gamma: float, r: float) -> float:
    """Closed-form upper bound on the l^r(Z) norm of kappa_p^gamma."""
    rp = r_p_gamma(p, gamma)
    if math.isinf(r):
        if p == 4:
            if gamma >= 1:
                raise ConstantDomainError("p = 4 needs gamma < 1")
            return 1 / (1 - gamma)
        return 1.0
    if not r > rp:
        raise ConstantDomainError(f"need r > r_p^gamma = {rp}, got r={r}")
    x = r / rp - 1
    if p != 4:
        return (3 + 2 / x) ** (1 / r)
    return (3 + 2 * ((1 + r / 4) / x) ** (1 + r / 4)) ** (1 / r)


def d_qd(q: float, d: int) -> float:
    """D_{q,d} = (q/2)^{d(q-2)/q}, equal to 1 at q = 2."""
    if q < 2:
        raise ConstantDomainError(f"q={q} must be >= 2")
    if int(d) < 3:
        raise ConstantDomainError("D_{q,d} needs d >= 3")
    if q == 2:
        return 1.0
    return (q / 2) ** (d * (q - 2) / q)


@dataclass(frozen=True)
class Range:
    """Half-open interval [lo, hi)."""
    lo: float
    hi: float

    def __contains__(self, x: float) -> bool:
        return self.lo <= x < self.hi

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    def as_list(self) -> list[float]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class AdmissibilityRanges:
    d: int
    weight_q: Range
    potential_p: Range
    lipschitz_q: Range | None
    finiteness_p: Range

    def as_dict(self) -> dict:
        return {"d": self.d, "weight_q": self.weight_q.as_list(),
                "potential_p": self.potential_p.as_list(),
                "lipschitz_q": None if self.lipschitz_q is None else self.lipschitz_q.as_list(),
                "finiteness_p": self.finiteness_p.as_list()}


def admissibility(d: int) -> AdmissibilityRanges:
    """Exponent ranges for weights, potentials, Lipschitz continuity and
    finiteness of the point spectrum.

    ``lipschitz_q`` is ``None`` for d < 5.  ``finiteness_p`` is empty for
    d < 5 (its upper end 3d/(2d+4) is below 1 there).
    """
    d = int(d)
    if d < 3:
        raise ConstantDomainError("admissibility ranges need d >= 3")
    if d == 3:
        wq, pp = Range(2, 12 / 5), Range(1, 6 / 5)
    else:
        wq, pp = Range(2, 6 * d / (2 * d + 1)), Range(1, 3 * d / (2 * d + 1))
    lip = Range(2, 6 * d / (2 * d + 4)) if d >= 5 else None
    return AdmissibilityRanges(d, wq, pp, lip, Range(1, 3 * d / (2 * d + 4)))


def small_coupling_threshold(p: float, d: int) -> float:
    """(1 + C_d^0 Gamma(2p, d, 0))^-1: below it no Birman-Schwinger spectrum."""
    ranges = admissibility(d)
    if p not in ranges.potential_p:
        raise ConstantDomainError(
            f"p={p} outside the potential range [{ranges.potential_p.lo}, {ranges.potential_p.hi})")
    return 1 / (1 + c_d_gamma(d, 0) * gamma_big(2 * p, d, 0))


@dataclass(frozen=True)
class ExponentConfig:
    """The exponent tuple (d, q, p, gamma, a, kappa)."""
    d: int = 3
    q: float = 2.0
    p: float = 1.0
    gamma: float = 0.0
    a: float = 1.0
    kappa: float = 0.0

    def weight_admissible(self) -> bool:
        return self.q in admissibility(self.d).weight_q

    def potential_admissible(self) -> bool:
        return self.p in admissibility(self.d).potential_p

    def holder_admissible(self) -> bool:
        return 0 <= self.gamma <= 1 and self.gamma < gamma_dq(self.d, self.q) \
            and self.d > 2 + 2 * self.gamma

    def kappa_admissible(self) -> bool:
        if math.isinf(self.q):
            return self.a > 0.5 and 0 <= self.kappa <= self.a
        return self.a > 0.5 and 0 <= self.kappa <= self.a * (self.q - 2) / self.q


# name -> (callable, parameter names) for the command line
REGISTRY = {
    "gamma_big": (gamma_big, ("q", "d", "gamma")),
    "gamma_big_derived": (gamma_big_derived, ("q", "d", "gamma")),
    "c_d_gamma": (c_d_gamma, ("d", "gamma")),
    "gamma_dq": (gamma_dq, ("d", "q")),
    "c_a": (c_a, ("a",)),
    "c_p_gamma": (c_p_gamma, ("p", "gamma")),
    "kappa_p_gamma": (kappa_p_gamma, ("n", "p", "gamma")),
    "r_p_gamma": (r_p_gamma, ("p", "gamma")),
    "kappa_norm_bound": (kappa_norm_bound, ("p", "gamma", "r")),
    "d_qd": (d_qd, ("q", "d")),
    "small_coupling_threshold": (small_coupling_threshold, ("p", "d")),
}
