"""Exact-number helpers: parsing user input into Fractions and rendering them back."""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, float, str, Decimal, Fraction]


def to_fraction(value: Number) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Strings may be integers, decimals (``"0.25"``) or ratios (``"1/3"``).
    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``
    rather than the binary approximation.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, (Decimal, str)):
        return Fraction(str(value).strip())
    raise TypeError(f"cannot interpret {value!r} as a number")


def _decimal_places(value: Fraction) -> int | None:
    """Digits after the point in the terminating expansion, or None if it repeats."""
    d = value.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    return max(twos, fives) if d == 1 else None


def format_exact(value: Fraction | int) -> str:
    """Render as a plain decimal when the expansion terminates, else ``p/q``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    places = _decimal_places(value)
    if places is None:
        return f"{value.numerator}/{value.denominator}"
    scaled = abs(value) * 10**places
    digits = str(scaled.numerator).rjust(places + 1, "0")
    sign = "-" if value < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"
