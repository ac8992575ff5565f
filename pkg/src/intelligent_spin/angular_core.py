"""Special functions and angular-momentum matrices for integer l.

Conventions used throughout the package:

* hbar = 1, so ``L2`` has eigenvalue ``l*(l+1)``.
* Condon-Shortley phase in both the ladder matrices and ``Y_lm``.
* Vectors and matrices over ``|l, m>`` are ordered by ascending ``m``,
  i.e. index ``i`` holds ``m = i - l``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

_TABLE_SIZE = 2048
_LOG_FACTORIAL = gammaln(np.arange(_TABLE_SIZE, dtype=float) + 1.0)
_LOG_FACTORIAL.setflags(write=False)


def log_factorial(n: int) -> float:
    """Return ``ln(n!)``."""
    n = int(n)
    if n < 0:
        raise DomainError(f"log_factorial needs n >= 0, got {n}")
    if n < _TABLE_SIZE:
        return float(_LOG_FACTORIAL[n])
    return math.lgamma(n + 1.0)


def _log_factorial_array(n):
    # caller guarantees n >= 0; entries beyond the table go through gammaln
    n = np.asarray(n)
    small = n < _TABLE_SIZE
    if np.all(small):
        return _LOG_FACTORIAL[n]
    return np.where(small, _LOG_FACTORIAL[np.minimum(n, _TABLE_SIZE - 1)], gammaln(n + 1.0))


class CGKey(NamedTuple):
    """Labels of ``<l1 m1 l2 m2 | l m>`` (integer momenta only)."""

    l1: int
    l2: int
    m1: int
    m2: int
    l: int
    m: int


def _cg_allowed(l1, l2, m1, m2, l, m):
    return (
        (m == m1 + m2)
        & (np.abs(m1) <= l1)
        & (np.abs(m2) <= l2)
        & (np.abs(m) <= l)
        & (l >= np.abs(l1 - l2))
        & (l <= l1 + l2)
    )


def _cg_zero_projection(l1, l2, l):
    # <l1 l2 0 0|l 0>: single-product closed form, vanishes for odd l1+l2+l
    big = l1 + l2 + l
    g = big // 2
    lf = _log_factorial_array
    log_mag = (
        0.5 * (np.log(2 * l + 1.0) + lf(big - 2 * l1) + lf(big - 2 * l2) + lf(big - 2 * l) - lf(big + 1))
        + lf(g)
        - lf(g - l1)
        - lf(g - l2)
        - lf(g - l)
    )
    sign = np.where((g - l) % 2 == 0, 1.0, -1.0)
    return np.where(big % 2 == 0, sign * np.exp(log_mag), 0.0)


def clebsch_gordan_array(l1, l2, m1, m2, l, m) -> np.ndarray:
    """Vectorized Clebsch-Gordan coefficients ``<l1 l2 m1 m2 | l m>``.

    Arguments broadcast against each other. Keys violating the selection
    rules give exactly 0. The Racah single sum is evaluated term by term in
    log space with explicit signs. Its alternating terms cancel, so general
    keys keep ~1e-12 accuracy only up to l ~ 30. Two families stay exact at
    any size: stretched keys (``m1 = +-l1`` or ``m2 = +-l2``), where the sum
    has a single term, and zero-projection keys ``<l1 l2 0 0|l 0>``, which
    use a closed product form.
    """
    l1, l2, m1, m2, l, m = np.broadcast_arrays(
        *(np.asarray(a, dtype=np.int64) for a in (l1, l2, m1, m2, l, m))
    )
    out = np.zeros(l1.shape, dtype=float)
    ok = _cg_allowed(l1, l2, m1, m2, l, m)
    if not np.any(ok):
        return out
    zero = ok & (m1 == 0) & (m2 == 0)
    if np.any(zero):
        out[zero] = _cg_zero_projection(l1[zero], l2[zero], l[zero])
    ok &= ~zero
    if not np.any(ok):
        return out
    l1, l2, m1, m2, l, m = (a[ok] for a in (l1, l2, m1, m2, l, m))

    lf = _log_factorial_array
    log_pref = 0.5 * (
        np.log(2 * l + 1.0)
        + lf(l + l1 - l2)
        + lf(l - l1 + l2)
        + lf(l1 + l2 - l)
        - lf(l1 + l2 + l + 1)
        + lf(l + m)
        + lf(l - m)
        + lf(l1 - m1)
        + lf(l1 + m1)
        + lf(l2 - m2)
        + lf(l2 + m2)
    )

    t_min = np.maximum.reduce([np.zeros_like(l), l2 - l - m1, l1 - l + m2])
    t_max = np.minimum.reduce([l1 + l2 - l, l1 - m1, l2 + m2])
    width = int(np.max(t_max - t_min)) + 1
    t = t_min[:, None] + np.arange(width)[None, :]
    valid = t <= t_max[:, None]
    args = [
        t,
        (l1 + l2 - l)[:, None] - t,
        (l1 - m1)[:, None] - t,
        (l2 + m2)[:, None] - t,
        (l - l2 + m1)[:, None] + t,
        (l - l1 - m2)[:, None] + t,
    ]
    log_den = sum(lf(np.where(valid, a, 0)) for a in args)
    log_terms = log_pref[:, None] - log_den
    log_terms = np.where(valid, log_terms, -np.inf)
    peak = np.max(log_terms, axis=1)
    signs = np.where(t % 2 == 0, 1.0, -1.0)
    total = np.sum(np.where(valid, signs * np.exp(log_terms - peak[:, None]), 0.0), axis=1)
    out[ok] = total * np.exp(peak)
    return out


def clebsch_gordan(l1: int, l2: int, m1: int, m2: int, l: int, m: int) -> float:
    """Condon-Shortley ``<l1 l2 m1 m2 | l m>``; exactly 0 off the selection rules.

    A :class:`CGKey` can be passed splatted: ``clebsch_gordan(*key)``.
    """
    for name, value in (("l1", l1), ("l2", l2), ("l", l)):
        if value < 0:
            raise DomainError(f"{name} must be non-negative, got {value}")
    return float(clebsch_gordan_array(l1, l2, m1, m2, l, m))


def legendre_table(l_max: int, theta) -> np.ndarray:
    """Orthonormalized associated Legendre functions for ``0 <= m <= l <= l_max``.

    Returns an array of shape ``(l_max + 1, l_max + 1, len(theta))`` with
    ``out[l, m] = Y_lm(theta, 0)``. Entries with ``m > l`` are zero. Uses the
    standard sectoral-then-vertical recurrence, which is stable well past
    l = 1000 in double precision.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.cos(theta)
    y = np.sin(theta)
    out = np.zeros((l_max + 1, l_max + 1, theta.size))
    out[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, l_max + 1):
        out[m, m] = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * y * out[m - 1, m - 1]
    for m in range(0, l_max):
        out[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * out[m, m]
        for l in range(m + 2, l_max + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def spherical_harmonic(l: int, m: int, theta, phi):
    """Orthonormal ``Y_l^m(theta, phi)`` with the Condon-Shortley phase.

    ``theta`` and ``phi`` may be arrays of the same shape.
    """
    if l < 0 or abs(m) > l:
        raise DomainError(f"need |m| <= l, got l={l}, m={m}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    table = legendre_table(l, theta.ravel())
    p = table[l, abs(m)].reshape(theta.shape)
    if m < 0:
        p = p * (-1) ** m
    value = p * np.exp(1j * m * phi)
    return complex(value) if value.ndim == 0 else value


def m_values(l: int) -> np.ndarray:
    return np.arange(-l, l + 1)


def ladder_elements(l: int) -> np.ndarray:
    """``sqrt(l(l+1) - m(m+1))`` for ``m = -l .. l-1``."""
    m = np.arange(-l, l, dtype=float)
    return np.sqrt(l * (l + 1.0) - m * (m + 1.0))


OPERATORS = ("Lz", "Lplus", "Lminus", "Lx", "Ly", "L2")


def operator_matrix(l: int, which: str) -> np.ndarray:
    """Matrix of an angular-momentum operator in the ascending-m ``|l, m>`` basis."""
    if l < 0:
        raise DomainError(f"l must be non-negative, got {l}")
    n = 2 * l + 1
    if which == "Lz":
        return np.diag(m_values(l).astype(complex))
    if which == "L2":
        return l * (l + 1.0) * np.eye(n, dtype=complex)
    plus = np.diag(ladder_elements(l).astype(complex), -1)
    if which == "Lplus":
        return plus
    if which == "Lminus":
        return plus.T.copy()
    if which == "Lx":
        return 0.5 * (plus + plus.T)
    if which == "Ly":
        return -0.5j * (plus - plus.T)
    raise ValueError(f"unknown operator {which!r}; expected one of {OPERATORS}")
