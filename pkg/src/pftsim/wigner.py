"""Wigner small-d rotation matrices in the site/magnetic-number ordering.

Rows and columns are ordered by ascending magnetic number, m = -l..+l, so
row r maps to m' = -l + r (equivalently to site j = r + 1 of an extent-M
axis with M = 2l + 1).  The convention is fixed by the spin-1/2 block

    d(2l=1, beta) = [[cos(b/2), -sin(b/2)],
                     [sin(b/2),  cos(b/2)]]

which makes the engineered-chain propagator exp(-iHt) equal elementwise to
the quarter-turn phases times d (see dynamics.propagator_analytic_1d).

Three evaluation paths are provided:

* ``wigner_d``        -- Clebsch-Gordan half-step recursion; numerically
                         stable over the whole supported range (error
                         ~1e-14 up to 2l = 60).
* ``wigner_d_sum``    -- the explicit factorial-sum formula with exact
                         integer coefficient ratios and sign bookkeeping;
                         accuracy decays with size (~1e-11 at 2l = 40,
                         ~1e-8 at 2l = 60).
* ``wigner_d_oracle`` -- eigendecomposition of the tridiagonal generator;
                         intended for tests only.

Sizes above 2l = 60 are refused rather than evaluated inaccurately.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from .lattice import UnsupportedSizeError, i_power

MAX_TWO_L = 60


@dataclass(frozen=True)
class WignerD:
    """A real (2l+1)x(2l+1) rotation matrix with ascending-m ordering."""

    two_l: int
    beta: float
    matrix: np.ndarray


def _check_two_l(two_l: int) -> int:
    two_l = int(two_l)
    if two_l < 0:
        raise ValueError(f"2l must be nonnegative, got {two_l}")
    if two_l > MAX_TWO_L:
        raise UnsupportedSizeError(
            f"2l = {two_l} exceeds the supported cap {MAX_TWO_L}")
    return two_l


def _half_step(d: np.ndarray, p: float, q: float) -> np.ndarray:
    # Couple the previous representation with one extra spin-1/2;
    # d grows from (n x n) to (n+1 x n+1), n = 2j after the step.
    two_j = d.shape[0]
    sq = np.sqrt(np.arange(two_j + 1))
    up, down = sq[1:], sq[1:][::-1]
    new = np.zeros((two_j + 1, two_j + 1))
    new[1:, 1:] += q * np.outer(up, up) * d
    new[1:, :-1] += p * np.outer(up, down) * d
    new[:-1, 1:] -= p * np.outer(down, up) * d
    new[:-1, :-1] += q * np.outer(down, down) * d
    return new / two_j


def wigner_d(two_l: int, beta: float) -> WignerD:
    """Rotation matrix d^l(beta) via the half-step recursion (stable path)."""
    two_l = _check_two_l(two_l)
    p, q = np.sin(beta / 2), np.cos(beta / 2)
    d = np.array([[1.0]])
    for _ in range(two_l):
        d = _half_step(d, p, q)
    return WignerD(two_l=two_l, beta=float(beta), matrix=d)


def wigner_d_levels(two_l_max: int, beta: float):
    """Yield (two_l, matrix) for every level 0..two_l_max of one recursion pass."""
    two_l_max = _check_two_l(two_l_max)
    p, q = np.sin(beta / 2), np.cos(beta / 2)
    d = np.array([[1.0]])
    yield 0, d
    for two_l in range(1, two_l_max + 1):
        d = _half_step(d, p, q)
        yield two_l, d


@lru_cache(maxsize=None)
def _sum_tables(two_l: int):
    # Per-entry summation index tables for the factorial-sum formula.
    # Coefficients are exact integer ratios, rounded once on conversion.
    f = [factorial(k) for k in range(two_l + 1)]
    rows, cols, coefs, cos_pow, sin_pow = [], [], [], [], []
    for r in range(two_l + 1):
        for c in range(two_l + 1):
            num = f[two_l - r] * f[r] * f[two_l - c] * f[c]
            for s in range(max(0, r - c), min(two_l - c, r) + 1):
                den = f[two_l - c - s] * f[s] * f[c - r + s] * f[r - s]
                coef = sqrt(float(Fraction(num, den * den)))
                rows.append(r)
                cols.append(c)
                coefs.append(-coef if (c - r + s) % 2 else coef)
                cos_pow.append(two_l + r - c - 2 * s)
                sin_pow.append(c - r + 2 * s)
    return (np.array(rows), np.array(cols), np.array(coefs),
            np.array(cos_pow, dtype=float), np.array(sin_pow, dtype=float))


def wigner_d_sum(two_l: int, beta: float) -> WignerD:
    """Rotation matrix from the explicit factorial-sum formula.

    Same ordering and convention as ``wigner_d``.  Cancellation grows with
    size; trust it to ~1e-10 only up to 2l = 40.
    """
    two_l = _check_two_l(two_l)
    rows, cols, coefs, cos_pow, sin_pow = _sum_tables(two_l)
    q, p = np.cos(beta / 2), np.sin(beta / 2)
    terms = coefs * np.power(q, cos_pow) * np.power(p, sin_pow)
    out = np.zeros((two_l + 1, two_l + 1))
    np.add.at(out, (rows, cols), terms)
    return WignerD(two_l=two_l, beta=float(beta), matrix=out)


def rotation_generator(two_l: int) -> np.ndarray:
    """Tridiagonal generator G with d(beta) = exp(i*beta*G) in ascending-m order."""
    two_l = _check_two_l(two_l)
    n = two_l + 1
    j = np.arange(1, n)
    c = 0.5 * np.sqrt(j * (n - j))
    g = np.zeros((n, n), dtype=complex)
    g[np.arange(n - 1), np.arange(1, n)] = 1j * c
    g[np.arange(1, n), np.arange(n - 1)] = -1j * c
    return g


def wigner_d_oracle(two_l: int, beta: float) -> WignerD:
    """Independent evaluation by eigendecomposition of the tridiagonal generator."""
    two_l = _check_two_l(two_l)
    w, v = np.linalg.eigh(rotation_generator(two_l))
    d = (v * np.exp(1j * beta * w)) @ v.conj().T
    if np.abs(d.imag).max() > 1e-10:
        raise np.linalg.LinAlgError("rotation matrix came out non-real")
    return WignerD(two_l=two_l, beta=float(beta), matrix=d.real)


def quarter_turn_phase(m_prime, m) -> complex:
    """Exact i**(m' - m); the difference must be an integer."""
    diff = Fraction(m_prime) - Fraction(m)
    if diff.denominator != 1:
        raise ValueError(
            f"magnetic numbers {m_prime} and {m} differ by a non-integer; "
            "they belong to different representations")
    return i_power(int(diff))
