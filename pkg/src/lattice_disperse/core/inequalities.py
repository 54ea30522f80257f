"""Numerical checks of the discrete Young, Riesz-Thorin and summation
inequalities."""

from __future__ import annotations

import math

import numpy as np

from ..verdict import DESCRIPTIVE, FAIL, PASS, SLACK, VerdictRecord
from .lattice import LatticeSequence, convolve, norm


def _recip(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def verify_young(f: LatticeSequence, g: LatticeSequence, h: LatticeSequence,
                 p: float, s: float, r: float, slack: float = SLACK) -> VerdictRecord:
    """|sum_{n,m} f_n g_{n-m} h_m| <= ||f||_p ||g||_s ||h||_r with 1/p+1/s+1/r = 2."""
    if min(p, s, r) < 1:
        raise ValueError("Young exponents must be >= 1")
    scaling = _recip(p) + _recip(s) + _recip(r)
    if abs(scaling - 2) > 1e-12:
        raise ValueError(f"1/p + 1/s + 1/r = {scaling}, expected 2")
    gh = convolve(g, h)
    # sum_n f_n (g*h)_n over the common support
    lhs = 0j
    if len(f) and len(gh):
        keys = {tuple(c): v for c, v in zip(gh.coords.tolist(), gh.values)}
        for c, v in zip(f.coords.tolist(), f.values):
            lhs += v * keys.get(tuple(c), 0)
    lhs = abs(lhs)
    rhs = norm(f, p) * norm(g, s) * norm(h, r)
    status = PASS if lhs <= rhs * (1 + slack) else FAIL
    return VerdictRecord("core.young", {"p": p, "s": s, "r": r, "dim": f.dim,
                                        "supports": [len(f), len(g), len(h)]},
                         lhs, rhs, status, "young-inequality")


def _interp(e0: float, e1: float, t: float) -> float:
    inv = (1 - t) * _recip(e0) + t * _recip(e1)
    return math.inf if inv == 0 else 1.0 / inv


def _extremal_inputs(g: LatticeSequence) -> list[LatticeSequence]:
    """Inputs attaining the l^1 -> l^q and l^inf -> l^inf norms of f -> g*f."""
    out = [LatticeSequence.delta(tuple(np.zeros(g.dim, int)))]
    phase = np.conj(g.values) / np.abs(g.values)
    out.append(LatticeSequence.from_arrays(-g.coords, phase, g.dim))
    out.append(LatticeSequence.from_arrays(-g.coords, np.abs(g.values), g.dim))
    return out


def _random_input(rng: np.random.Generator, dim: int, radius: int) -> LatticeSequence:
    from .lattice import random_sequence
    kind = rng.integers(3)
    if kind == 0:
        return random_sequence(rng, dim, radius)
    if kind == 1:
        return random_sequence(rng, dim, radius, density=0.3)
    # positive, smooth-ish inputs keep ratios near the l^p -> l^q norm
    f = random_sequence(rng, dim, radius, complex_values=False)
    return LatticeSequence.from_arrays(f.coords, np.abs(f.values), dim)


def verify_riesz_thorin(g: LatticeSequence, exponent_endpoints, t: float, samples: int = 200,
                        seed: int = 0, radius: int = 4, slack: float = SLACK) -> VerdictRecord:
    """Interpolation probe for the convolution operator f -> g*f.

    M_0 and M_1 are the largest sampled ratios ||g*f||_{q_i}/||f||_{p_i}
    (the sample set always contains the extremisers of the l^1 and l^inf
    endpoint norms).  Fresh samples are then checked against
    M_0^{1-t} M_1^t ||f||_{p_t}.  Sampled maxima are lower estimates of the
    true norms, so this is a necessary-condition probe.
    """
    (p0, q0), (p1, q1) = exponent_endpoints
    if min(p0, q0, p1, q1) < 1:
        raise ValueError("exponents must lie in [1, inf]")
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train = _extremal_inputs(g) + [_random_input(rng, g.dim, radius) for _ in range(samples)]

    def ratio(f, pe, qe):
        nf = norm(f, pe)
        return norm(convolve(g, f), qe) / nf if nf else 0.0

    M0 = max(ratio(f, p0, q0) for f in train)
    M1 = max(ratio(f, p1, q1) for f in train)
    pt, qt = _interp(p0, p1, t), _interp(q0, q1, t)
    Mt = M0 ** (1 - t) * M1 ** t
    test = _extremal_inputs(g) + [_random_input(rng, g.dim, radius) for _ in range(samples)]
    worst = max(ratio(f, pt, qt) for f in test)
    status = PASS if worst <= Mt * (1 + slack) else FAIL
    return VerdictRecord("core.riesz_thorin",
                         {"endpoints": [[p0, q0], [p1, q1]], "t": t, "samples": samples,
                          "seed": seed},
                         worst, Mt, status, "riesz-thorin",
                         {"M0": M0, "M1": M1, "p_t": pt, "q_t": qt,
                          "note": "sampled maxima are lower estimates of the endpoint norms"})


def summation_constant(alpha: float, beta: float, numerator: float = 16.0) -> float:
    """Bracketed constant of the summation estimate, with the given
    numerator in the (numerator/(1-beta))^{1/r} factor."""
    p = (1 + beta) / (1 - beta)
    r = (1 + beta) / (2 * beta)
    return (2 * alpha ** 2 / (alpha - 1) ** 2
            + 4 * alpha / ((alpha - 1) * (p * alpha - 1) ** (1 / p))
            * (numerator / (1 - beta)) ** (1 / r))


def summation_sum(alpha: float, beta: float, t: float, M: int | None = None,
                  max_M: int = 2 ** 18) -> tuple[float, float, int]:
    """Truncated double sum and a rigorous bound on the discarded part.

    Returns ``(S_M, tail, M)`` with ``S_M <= S(t) <= S_M + tail``.
    """
    if M is None:
        # smallest power of two with the tail below 1e-10 of the partial sum
        M = 1024
        while M < max_M:
            T = 2 * (1 + M) ** (1 - alpha) / (alpha - 1)
            if 2 * T * alpha / (alpha - 1) < 1e-10:
                break
            M *= 2
        M = min(M, max_M)
    n = np.arange(-M, M + 1)
    a = (1.0 + np.abs(n)) ** (-alpha)
    L = 2 * len(a)
    fa = np.fft.rfft(a, L)
    # c_k = sum_n a_n a_{n+k} for k = -2M..2M
    corr = np.fft.irfft(fa * np.conj(fa), L)
    k = np.arange(L)
    k = np.where(k <= 2 * M, k, k - L)
    w = (1.0 + np.abs(np.abs(k) - t)) ** (-beta)
    S = float(np.sum(corr * w))
    A = float(a.sum())
    T = 2 * (1 + M) ** (1 - alpha) / (alpha - 1)
    # pairs with |n| > M or |m| > M: at most 2 T (A + T), using w <= 1
    tail = 2 * T * (A + T)
    rounding = 64 * np.finfo(float).eps * A * A * math.log2(L)
    return S, tail + rounding, M


def verify_summation_estimate(alpha: float, beta: float, t: float, M: int | None = None,
                              slack: float = SLACK) -> VerdictRecord:
    """Double sum with (1+||n-m|-t|)^-beta decay against its closed-form bound.

    The left side is a certified upper end of the sum: the smaller of the
    truncated sum plus its tail bound and the trivial bound A^2 with
    A = sum_n (1+|n|)^-alpha.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if t < 1:
        raise ValueError("t must be >= 1")
    S, tail, M = summation_sum(alpha, beta, t, M)
    T = 2 * (1 + M) ** (1 - alpha) / (alpha - 1)
    a_upper = float(np.sum((1.0 + np.abs(np.arange(-M, M + 1))) ** (-alpha))) + T
    upper = min(S + tail, a_upper ** 2)
    rhs = summation_constant(alpha, beta, 16.0) * t ** (-beta)
    status = PASS if upper <= rhs * (1 + slack) else FAIL
    return VerdictRecord("core.summation_estimate", {"alpha": alpha, "beta": beta, "t": t},
                         upper, rhs, status, "summation-estimate",
                         {"partial_sum": S, "tail_bound": tail, "truncation": M,
                          "empirical_constant": upper * t ** beta,
                          "constant_16": summation_constant(alpha, beta, 16.0),
                          "constant_12": summation_constant(alpha, beta, 12.0),
                          "constant_24": summation_constant(alpha, beta, 24.0)})


def summation_trend(alpha: float, beta: float, ts) -> VerdictRecord:
    """Descriptive record of S(t) t^beta over a list of t."""
    vals = []
    for t in ts:
        S, tail, M = summation_sum(alpha, beta, t)
        vals.append({"t": t, "S": S, "scaled": S * t ** beta, "tail": tail})
    worst = max(v["scaled"] for v in vals)
    return VerdictRecord("core.summation_trend", {"alpha": alpha, "beta": beta, "ts": list(ts)},
                         worst, summation_constant(alpha, beta), DESCRIPTIVE,
                         "summation-estimate", {"values": vals})
