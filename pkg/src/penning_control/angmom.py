"""Reduced Wigner d-matrices and Clebsch-Gordan coefficients.

All angular momenta are passed as *doubled* integers (``j2 = 2j``,
``m2 = 2m``) so half-integer values never touch floating point.

Phase convention: Condon-Shortley, active rotations, i.e.

    d^j_{m'm}(b) = <j m'| exp(-i b J_y) |j m>

which gives ``d^1_{1,0}(b) = -sin(b)/sqrt(2)``.  Observable cross sections
depend only on squared moduli, so the choice is unobservable downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

TwiceInt = int

MAX_J2 = 20
"""Largest supported ``2j``; ample for atomic fine structure."""

# Racah sums reach (j1 + j2 + J + 1)! <= 31!
_FACTORIAL = tuple(float(math.factorial(n)) for n in range(3 * MAX_J2 // 2 + 2))


def _fact(n: int) -> float:
    return _FACTORIAL[n]


def check_jm(j2: TwiceInt, m2: TwiceInt) -> None:
    """Raise :class:`DomainError` unless ``(j, m)`` is a valid ket label."""
    if j2 < 0:
        raise DomainError(f"negative angular momentum 2j={j2}")
    if j2 > MAX_J2:
        raise DomainError(f"2j={j2} exceeds supported maximum {MAX_J2}")
    if abs(m2) > j2:
        raise DomainError(f"|2m|={abs(m2)} exceeds 2j={j2}")
    if (j2 - m2) % 2:
        raise DomainError(f"parity mismatch between 2j={j2} and 2m={m2}")


def m_values(j2: TwiceInt) -> list[TwiceInt]:
    """Doubled projections ``2j, 2j-2, ..., -2j`` (descending)."""
    return list(range(j2, -j2 - 1, -2))


def wigner_d(j2: TwiceInt, mp2: TwiceInt, m2: TwiceInt, theta: float) -> float:
    """Reduced rotation matrix element ``d^j_{m',m}(theta)``.

    Evaluated with Wigner's explicit sum.

    >>> round(wigner_d(4, 4, 0, math.pi / 2), 7)
    0.6123724
    """
    check_jm(j2, mp2)
    check_jm(j2, m2)
    jpm, jmm = (j2 + m2) // 2, (j2 - m2) // 2
    jpmp, jmmp = (j2 + mp2) // 2, (j2 - mp2) // 2
    dm = (mp2 - m2) // 2

    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    pref = math.sqrt(_fact(jpmp) * _fact(jmmp) * _fact(jpm) * _fact(jmm))

    total = 0.0
    for k in range(max(0, -dm), min(jpm, jmmp) + 1):
        denom = _fact(jpm - k) * _fact(k) * _fact(dm + k) * _fact(jmmp - k)
        sign = -1.0 if (dm + k) % 2 else 1.0
        total += sign / denom * c ** (j2 - dm - 2 * k) * s ** (dm + 2 * k)
    return pref * total


@dataclass(frozen=True)
class DMatrix:
    """Full ``(2j+1) x (2j+1)`` reduced rotation matrix.

    Rows are indexed by ``m'`` and columns by ``m``, both descending from
    ``j`` to ``-j``.
    """

    j2: TwiceInt
    angle: float
    entries: np.ndarray

    def element(self, mp2: TwiceInt, m2: TwiceInt) -> float:
        return float(self.entries[(self.j2 - mp2) // 2, (self.j2 - m2) // 2])


def d_matrix(j2: TwiceInt, theta: float) -> DMatrix:
    if j2 < 0:
        raise DomainError(f"negative angular momentum 2j={j2}")
    ms = m_values(j2)
    entries = np.array([[wigner_d(j2, mp, m, theta) for m in ms] for mp in ms])
    entries.setflags(write=False)
    return DMatrix(j2, theta, entries)


@lru_cache(maxsize=None)
def _d_rows(j2: TwiceInt, theta: float) -> tuple[tuple[float, ...], ...]:
    # Plain-float copy for the scalar/array kernels in `states`
    return tuple(tuple(float(x) for x in row) for row in d_matrix(j2, theta).entries)


@lru_cache(maxsize=4096)
def clebsch_gordan(
    j1: TwiceInt, m1: TwiceInt, j2: TwiceInt, m2: TwiceInt, J: TwiceInt, M: TwiceInt
) -> float:
    """Condon-Shortley coefficient ``<j1 m1; j2 m2 | J M>`` (doubled labels).

    Vanishes exactly when ``M != m1 + m2`` or the triangle rule fails.
    """
    check_jm(j1, m1)
    check_jm(j2, m2)
    check_jm(J, M)
    if (j1 + j2 + J) % 2:
        raise DomainError(f"2j1+2j2+2J={j1 + j2 + J} must be even")
    if M != m1 + m2:
        return 0.0
    if J < abs(j1 - j2) or J > j1 + j2:
        return 0.0

    # Half-sums below are all integers thanks to the parity checks above.
    a = (j1 + j2 - J) // 2
    b = (j1 - m1) // 2
    c = (j2 + m2) // 2
    d = (J - j2 + m1) // 2
    e = (J - j1 - m2) // 2

    tri = (
        (J + 1)
        * _fact((J + j1 - j2) // 2)
        * _fact((J - j1 + j2) // 2)
        * _fact(a)
        / _fact((j1 + j2 + J) // 2 + 1)
    )
    norm = (
        _fact((J + M) // 2)
        * _fact((J - M) // 2)
        * _fact(b)
        * _fact((j1 + m1) // 2)
        * _fact((j2 - m2) // 2)
        * _fact(c)
    )

    total = 0.0
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        denom = _fact(k) * _fact(a - k) * _fact(b - k) * _fact(c - k) * _fact(d + k) * _fact(e + k)
        total += (-1.0 if k % 2 else 1.0) / denom
    return math.sqrt(tri * norm) * total
