"""Working-precision conventions.

Values are :class:`mpmath.mpf` numbers; every public routine receives its
precision in bits and evaluates inside ``mp.workprec``.  Exact parameters
(weight data, polynomial coefficients of theta and sigma) are kept as
:class:`fractions.Fraction` and converted on demand.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction

from mpmath import mp, mpf

#: Arbitrary-precision real used throughout (value plus the ambient precision).
BigReal = mpf

DEFAULT_PREC = 256


def default_prec() -> int:
    """Precision in bits, overridable with the ``DOP_PREC`` environment variable."""
    raw = os.environ.get("DOP_PREC")
    if not raw:
        return DEFAULT_PREC
    prec = int(raw)
    if prec < 32:
        raise ValueError("DOP_PREC must be at least 32 bits")
    return prec


def to_fraction(x) -> Fraction:
    """Exact rational for a parameter given as int, str, float, Fraction or mpf.

    Floats are read through their shortest decimal repr, so ``0.7`` means
    7/10 and not the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite parameter {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, mpf):
        man, exp = x.man_exp
        return Fraction(man) * Fraction(2) ** exp
    return Fraction(x)


def to_mpf(q) -> mpf:
    """Round an exact rational (or any real) to the ambient precision."""
    if isinstance(q, Fraction):
        if q.denominator == 1:
            return mpf(q.numerator)
        return mpf(q.numerator) / q.denominator
    return mpf(q)


def rounded(x, prec: int) -> mpf:
    """Round ``x`` to ``prec`` bits."""
    with mp.workprec(prec):
        return +mpf(x)


def tolerance(bits: int) -> mpf:
    """The power of two ``2**-bits`` as an exact mpf."""
    return mpf(2) ** (-bits)


def digits(prec: int) -> int:
    """Decimal digits that faithfully represent ``prec`` bits."""
    return int(math.ceil(prec * math.log10(2))) + 1
