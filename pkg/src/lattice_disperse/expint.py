"""Generalised exponential integral E_alpha(x) = int_1^inf e^{-xu} u^{-alpha} du
for complex x with Re x >= 0 and alpha a positive integer or half-integer."""

from __future__ import annotations

import math

import numpy as np
import scipy.special

SMALL = 2.0
TINY = 1e-300


def _start(alpha0: float, x: np.ndarray) -> np.ndarray:
    if alpha0 == 1.0:
        return scipy.special.exp1(x)
    # alpha0 == 0.5: E_{1/2}(x) = sqrt(pi/x) erfc(sqrt(x))
    r = np.sqrt(x)
    return np.sqrt(np.pi) / r * scipy.special.erfc(r)


def _recurrence(alpha: float, x: np.ndarray) -> np.ndarray:
    """Forward recurrence E_{a+1} = (e^{-x} - x E_a)/a, stable for |x| small."""
    frac = alpha - math.floor(alpha)
    alpha0 = 0.5 if abs(frac - 0.5) < 1e-12 else 1.0
    E = _start(alpha0, x)
    ex = np.exp(-x)
    a = alpha0
    while a < alpha - 1e-12:
        E = (ex - x * E) / a
        a += 1.0
    return E


def _continued_fraction(alpha: float, x: np.ndarray, maxiter: int = 100_000) -> np.ndarray:
    """Modified Lentz evaluation of the continued fraction for E_alpha."""
    b = x + alpha
    c = np.full_like(x, 1 / TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, bool)
    for i in range(1, maxiter):
        an = -i * (alpha - 1 + i)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < TINY, TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < TINY, TINY, c)
        d = 1.0 / d
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > 1e-16
        if not active.any():
            break
    else:
        raise ArithmeticError("continued fraction for E_alpha did not converge")
    return h * np.exp(-x)


def expint_e(alpha: float, x) -> np.ndarray:
    """E_alpha(x) for Re x >= 0 (x = 0 allowed when alpha > 1).

    ``alpha`` must be a positive integer or half-integer.
    """
    x = np.asarray(x, dtype=complex)
    shape = x.shape
    x = x.ravel()
    if alpha <= 0 or abs(2 * alpha - round(2 * alpha)) > 1e-12:
        raise ValueError("alpha must be a positive integer or half-integer")
    if np.any(x.real < -1e-14):
        raise ValueError("E_alpha needs Re x >= 0")
    out = np.empty_like(x)
    zero = x == 0
    if zero.any():
        if alpha <= 1:
            raise ValueError("E_alpha(0) diverges for alpha <= 1")
        out[zero] = 1.0 / (alpha - 1)
    small = ~zero & (np.abs(x) < SMALL)
    big = ~zero & ~small
    if small.any():
        out[small] = _recurrence(alpha, x[small])
    if big.any():
        out[big] = _continued_fraction(alpha, x[big])
    return out.reshape(shape)


def oscillatory_tail(omega, alpha: float, T: float) -> np.ndarray:
    """int_T^inf e^{i omega t} t^{-alpha} dt for Im omega >= 0.

    Substituting t = T u gives T^{1-alpha} E_alpha(-i omega T).
    """
    omega = np.asarray(omega, dtype=complex)
    return T ** (1 - alpha) * expint_e(alpha, -1j * omega * T)
