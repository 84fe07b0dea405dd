# -*- coding: utf-8 -*-
"""Exception hierarchy.

The CLI maps these to exit codes (see :mod:`spin_sbs.app`).
"""

from __future__ import annotations

from typing import Iterable, List, Tuple


class SpinSbsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SpinSbsError, ValueError):
    """A precondition on an input value does not hold."""


class NumericalError(SpinSbsError, ArithmeticError):
    """An internal consistency check failed during a computation."""


class OutputError(SpinSbsError, OSError):
    """Writing results failed."""


class ConfigError(SpinSbsError):
    """Scenario configuration is invalid.

    Collects every problem found, each as ``(key_path, message)``.
    """

    def __init__(self, problems: Iterable[Tuple[str, str]]):
        self.problems: List[Tuple[str, str]] = list(problems)
        super().__init__("; ".join(f"{k}: {m}" for k, m in self.problems) or "invalid configuration")
