# -*- coding: utf-8 -*-
"""Parsing of scalar tokens used in scenario files and command-line flags.

Supported token types
---------------------
- Half-integers (spins, magnetic numbers):
    ``3/2``, ``-1/2``, ``+5/2``, ``2``, ``1.5``
- Reals:
    ``0.9``, ``1e-3``, ``-2.5E+1``
- Lists of either, separated by whitespace or commas:
    ``1/2 1 3/2``

If the file grammar changes, only this module should need edits.
"""

from __future__ import annotations

import math
import re
from typing import Callable, List, TypeVar

from spin_sbs.core.errors import ValidationError

T = TypeVar("T")

_FLOAT = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"

RE_FLOAT = re.compile(rf"^{_FLOAT}$")
RE_FRACTION = re.compile(r"^([-+]?\d+)\s*/\s*(\d+)$")
RE_INT = re.compile(r"^[-+]?\d+$")
RE_SPLIT = re.compile(r"[\s,]+")


def is_finite(x: float) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def parse_float(text: str) -> float:
    s = str(text).strip()
    if not RE_FLOAT.match(s):
        raise ValidationError(f"not a real number: {text!r}")
    x = float(s)
    if not is_finite(x):
        raise ValidationError(f"not a finite number: {text!r}")
    return x


def parse_int(text: str) -> int:
    s = str(text).strip()
    if not RE_INT.match(s):
        raise ValidationError(f"not an integer: {text!r}")
    return int(s)


def parse_twice(text: str) -> int:
    """Parse a half-integer token and return twice its value.

    ``"3/2"`` -> 3, ``"-1/2"`` -> -1, ``"2"`` -> 4, ``"1.5"`` -> 3.
    """
    s = str(text).strip()
    m = RE_FRACTION.match(s)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if den == 1:
            return 2 * num
        if den == 2:
            return num
        raise ValidationError(f"not a half-integer: {text!r}")
    if RE_INT.match(s):
        return 2 * int(s)
    if RE_FLOAT.match(s):
        doubled = 2.0 * float(s)
        if doubled == round(doubled):
            return int(round(doubled))
    raise ValidationError(f"not a half-integer: {text!r}")


def format_half(twice: int) -> str:
    """Inverse of :func:`parse_twice` in canonical form."""
    twice = int(twice)
    if twice % 2 == 0:
        return str(twice // 2)
    return f"{twice}/2"


def format_float(x: float) -> str:
    """Shortest text that reads back to the same double."""
    return repr(float(x))


def parse_list(text: str, item: Callable[[str], T]) -> List[T]:
    s = str(text).strip()
    if not s:
        return []
    return [item(tok) for tok in RE_SPLIT.split(s) if tok]
