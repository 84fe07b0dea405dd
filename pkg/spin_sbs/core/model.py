# -*- coding: utf-8 -*-
"""Tabular results and their text renderings.

This layer does no file I/O, so it can be tested in isolation; files are
written by :mod:`spin_sbs.io.run_writer`.

Every table has a fixed column schema (the header names below are part of
the output format). Reals are written with 17 significant digits, which
reads back to the same double.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Sequence, Tuple

import numpy as np

from spin_sbs import config
from spin_sbs.core.errors import NumericalError, ValidationError
from spin_sbs.core.spin import SpinQuantumNumber

AVERAGE = "avg"


class Column:
    T = "t"
    J = "j"
    THETA = "theta"
    REALIZATION = "realization"
    GAMMA_RE = "gamma_re"
    GAMMA_IM = "gamma_im"
    ABS_GAMMA = "abs_gamma"
    FIDELITY = "fidelity"
    FIDELITY_MAC = "fidelity_mac"
    DECOHERENCE = "decoherence_term"
    DISTINGUISHABILITY = "distinguishability_term"
    BOUND = "bound"
    ABS_GAMMA_SHORT = "abs_gamma_short"
    FIDELITY_MAC_SHORT = "fidelity_mac_short"
    SZ_VARIANCE = "sz_variance"
    QFI = "qfi"

    @staticmethod
    def fidelity_mac(i: int) -> str:
        return f"fidelity_mac_{i}"


GAMMA_PURE_COLUMNS = (Column.T, Column.J, Column.THETA, Column.GAMMA_RE, Column.GAMMA_IM, Column.ABS_GAMMA)
GAMMA_GENERAL_COLUMNS = (Column.T, Column.J, Column.GAMMA_RE, Column.GAMMA_IM, Column.ABS_GAMMA)
THERMAL_COLUMNS = (Column.T, Column.J, Column.GAMMA_RE, Column.GAMMA_IM, Column.ABS_GAMMA, Column.FIDELITY)
BOUND_COLUMNS = (Column.T, Column.J, Column.ABS_GAMMA, Column.DECOHERENCE,
                 Column.DISTINGUISHABILITY, Column.BOUND)
SHORT_TIME_COLUMNS = (Column.T, Column.J, Column.ABS_GAMMA, Column.ABS_GAMMA_SHORT,
                      Column.FIDELITY_MAC, Column.FIDELITY_MAC_SHORT, Column.SZ_VARIANCE, Column.QFI)


def ensemble_columns(fractions: int) -> Tuple[str, ...]:
    return (Column.T, Column.J, Column.REALIZATION, Column.ABS_GAMMA, Column.BOUND) + tuple(
        Column.fidelity_mac(i) for i in range(fractions))


def format_real(x: float) -> str:
    return format(float(x), f".{config.CSV_DIGITS}g")


def _cell(v: Any) -> str:
    if isinstance(v, SpinQuantumNumber):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return format_real(v)
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, SpinQuantumNumber):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


@dataclass
class ResultTable:
    columns: Tuple[str, ...]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValidationError(f"row has {len(values)} values, schema has {len(self.columns)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> List[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def check_finite(self) -> None:
        for n, row in enumerate(self.rows):
            for name, v in zip(self.columns, row):
                if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                    raise NumericalError(f"row {n}: {name} is not finite ({v!r})")

    def to_csv(self) -> str:
        self.check_finite()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def to_json_lines(self) -> str:
        self.check_finite()
        lines = [json.dumps({k: _json_value(v) for k, v in zip(self.columns, row)}, allow_nan=False)
                 for row in self.rows]
        return "".join(line + "\n" for line in lines)

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json-lines":
            return self.to_json_lines()
        raise ValidationError(f"unknown output format {fmt!r}")


def extension(fmt: str) -> str:
    return ".jsonl" if fmt == "json-lines" else ".csv"


# ----- table builders -----

def ensemble_table(run, realizations: Iterable[int] = (), average: bool = True) -> ResultTable:
    """Rows for the selected realization positions and/or the average.

    ``realizations`` are positions into ``run.realization_indices``; the
    realization column holds the absolute index.
    """
    fractions = run.config.fractions
    table = ResultTable(ensemble_columns(fractions))
    picks = list(realizations)
    for j, s in run.series.items():
        blocks = [(run.realization_indices[p], s.abs_gamma[p], s.bound[p], s.fidelity[p]) for p in picks]
        if average:
            blocks.append((AVERAGE, s.mean_abs_gamma, s.mean_bound, s.mean_fidelity))
        for label, g, b, f in blocks:
            for k, t in enumerate(run.time_grid):
                table.add_row(float(t), j, label, float(g[k]), float(b[k]),
                              *(float(f[i][k]) for i in range(fractions)))
    return table


def complex_rows(table: ResultTable, t: Sequence[float], j: SpinQuantumNumber,
                 values: Sequence[complex], *extra_before: Any) -> None:
    """Append (t, j, *extra_before, Re, Im, |.|) rows."""
    for ti, v in zip(np.atleast_1d(t), np.atleast_1d(values)):
        v = complex(v)
        table.add_row(float(ti), j, *extra_before, v.real, v.imag, abs(v))
