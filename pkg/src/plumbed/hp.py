"""High-precision complex helpers built on mpmath.

Phases are always passed as exact rationals (numerator, denominator) and
only converted to floating point inside :func:`root_of_unity`.
"""

from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp

DEFAULT_DPS = 64


def workdps(dps):
    return mp.workdps(dps)


@lru_cache(maxsize=200_000)
def _root_cached(num, den, dps):
    with mp.workdps(dps + 5):
        z = mpmath.expjpi(mpmath.mpf(2 * num) / den)
    with mp.workdps(dps):
        return +z


def root_of_unity(num, den=1):
    """Return e(num/den) = exp(2 pi i num/den) at the current precision.

    ``num`` is reduced modulo ``den`` exactly before any float work.
    """
    if den <= 0:
        raise ValueError("denominator must be positive")
    num = int(num) % int(den)
    if num == 0:
        return mpmath.mpc(1)
    return _root_cached(num, int(den), mp.dps)


def e_frac(x):
    """e(x) for an exact rational ``x`` (Fraction or int)."""
    x = Fraction(x)
    return root_of_unity(x.numerator, x.denominator)


def hp_sqrt(x):
    return mpmath.sqrt(mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator)


class KahanSum:
    """Compensated accumulator for mpmath complex values."""

    __slots__ = ("re", "im", "_cre", "_cim")

    def __init__(self):
        self.re = mpmath.mpf(0)
        self.im = mpmath.mpf(0)
        self._cre = mpmath.mpf(0)
        self._cim = mpmath.mpf(0)

    def add(self, z):
        z = mpmath.mpc(z)
        y = z.real - self._cre
        t = self.re + y
        self._cre = (t - self.re) - y
        self.re = t
        y = z.imag - self._cim
        t = self.im + y
        self._cim = (t - self.im) - y
        self.im = t

    def extend(self, values):
        for z in values:
            self.add(z)

    @property
    def value(self):
        return mpmath.mpc(self.re, self.im)


def to_decimal_str(x, digits=30):
    return mpmath.nstr(x, digits, strip_zeros=False)


def complex_to_json(z, digits=30):
    z = mpmath.mpc(z)
    return {"re": to_decimal_str(z.real, digits), "im": to_decimal_str(z.imag, digits)}
