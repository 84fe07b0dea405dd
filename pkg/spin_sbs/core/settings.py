# -*- coding: utf-8 -*-
"""Scenario files.

Scenarios are INI files read and written through Qt's QSettings in
IniFormat, with an explicit schema of "group/key" entries. Every value is
stored as text in the grammar of :mod:`spin_sbs.core.values`, so a saved
file reads back to an equal ScenarioConfig.

This module is independent from the command-line front end; flags reach it
as "group/key" overrides.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from PyQt5 import QtCore

from spin_sbs import config
from spin_sbs.core.ensemble import CouplingDistribution, CouplingKind, ExperimentConfig, coupling_problems
from spin_sbs.core.errors import ConfigError, OutputError, SpinSbsError, ValidationError
from spin_sbs.core.spin import SpinQuantumNumber
from spin_sbs.core.values import (
    format_float,
    format_half,
    parse_float,
    parse_int,
    parse_list,
    parse_twice,
)


class ScenarioMode:
    MEASUREMENT_LIMIT = "measurement_limit"
    THERMAL = "thermal"
    ENSEMBLE = "ensemble"
    SBS_BOUND = "sbs_bound"
    SHORT_TIME = "short_time"

    ALL = (MEASUREMENT_LIMIT, THERMAL, ENSEMBLE, SBS_BOUND, SHORT_TIME)


class OutputFormat:
    CSV = "csv"
    JSON_LINES = "json-lines"

    ALL = (CSV, JSON_LINES)


def _spin(text: str) -> SpinQuantumNumber:
    return SpinQuantumNumber.parse(text)


def _half(text: str) -> float:
    return parse_twice(text) / 2.0


def _fmt_half(x: float) -> str:
    return format_half(int(round(2.0 * x)))


def _opt_float(text: str) -> Optional[float]:
    return None if not str(text).strip() else parse_float(text)


def _fmt_opt_float(x: Optional[float]) -> str:
    return "" if x is None else format_float(x)


def _choice(*allowed: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        s = str(text).strip()
        if s not in allowed:
            raise ValidationError(f"{s!r} is not one of {', '.join(allowed)}")
        return s
    return parse


def _u64(text: str) -> int:
    v = parse_int(text)
    if not 0 <= v < 2 ** 64:
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {v}")
    return v


def _default_j_list() -> Tuple[SpinQuantumNumber, ...]:
    return tuple(parse_list(config.DEFAULT_J_LIST, _spin))


@dataclass
class ScenarioConfig:
    # [scenario]
    mode: str = ScenarioMode.THERMAL
    seed: int = config.DEFAULT_SEED
    format: str = config.DEFAULT_FORMAT
    out: str = ""

    # [spin]
    j_s: SpinQuantumNumber = field(default_factory=lambda: _spin(config.DEFAULT_J_S))
    j: SpinQuantumNumber = field(default_factory=lambda: _spin("1"))
    j_list: Tuple[SpinQuantumNumber, ...] = field(default_factory=_default_j_list)
    m: float = _half(config.DEFAULT_M)
    m_prime: float = _half(config.DEFAULT_M_PRIME)
    theta: float = math.pi / 2.0
    phi: float = 0.0

    # [environment]
    beta_omega: float = config.DEFAULT_BETA_OMEGA
    g: float = 1.0
    tunneling: Tuple[float, ...] = ()

    # [coupling]
    coupling_kind: str = CouplingKind.UNIFORM
    coupling_low: float = config.DEFAULT_G_LOW
    coupling_high: float = config.DEFAULT_G_HIGH

    # [layout]
    unobserved_size: int = config.DEFAULT_UNOBSERVED_SIZE
    fraction_size: int = config.DEFAULT_FRACTION_SIZE
    fractions: int = config.DEFAULT_FRACTIONS

    # [ensemble]
    realizations: int = config.DEFAULT_REALIZATIONS
    realization_offset: int = 0
    workers: int = 1
    sample_realization: int = 0

    # [time]
    t_start: float = config.DEFAULT_T_START
    t_stop: float = config.DEFAULT_T_STOP
    t_points: int = config.DEFAULT_T_POINTS
    t: Optional[float] = None

    def time_grid(self) -> np.ndarray:
        """The single time ``t`` when set, otherwise the linear grid."""
        if self.t is not None:
            return np.array([float(self.t)])
        return np.linspace(self.t_start, self.t_stop, int(self.t_points))

    def coupling(self) -> CouplingDistribution:
        return CouplingDistribution(self.coupling_kind, self.coupling_low, self.coupling_high, self.seed)

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            j_list=tuple(self.j_list),
            time_grid=self.time_grid(),
            beta_omega=self.beta_omega,
            j_s=self.j_s,
            m=self.m,
            m_prime=self.m_prime,
            unobserved_size=self.unobserved_size,
            fraction_size=self.fraction_size,
            fractions=self.fractions,
            coupling=self.coupling(),
            tunneling=tuple(self.tunneling) or None,
            realizations=self.realizations,
            realization_offset=self.realization_offset,
            workers=self.workers,
        )

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


class _Entry(NamedTuple):
    key: str
    attr: str
    parse: Callable[[str], Any]
    fmt: Callable[[Any], str]


def _join(fmt: Callable[[Any], str]) -> Callable[[Any], str]:
    return lambda values: " ".join(fmt(v) for v in values)


SCHEMA: Tuple[_Entry, ...] = (
    _Entry("scenario/mode", "mode", _choice(*ScenarioMode.ALL), str),
    _Entry("scenario/seed", "seed", _u64, str),
    _Entry("scenario/format", "format", _choice(*OutputFormat.ALL), str),
    _Entry("scenario/out", "out", lambda s: str(s).strip(), str),

    _Entry("spin/j_s", "j_s", _spin, str),
    _Entry("spin/j", "j", _spin, str),
    _Entry("spin/j_list", "j_list", lambda s: tuple(parse_list(s, _spin)), _join(str)),
    _Entry("spin/m", "m", _half, _fmt_half),
    _Entry("spin/m_prime", "m_prime", _half, _fmt_half),
    _Entry("spin/theta", "theta", parse_float, format_float),
    _Entry("spin/phi", "phi", parse_float, format_float),

    _Entry("environment/beta_omega", "beta_omega", parse_float, format_float),
    _Entry("environment/g", "g", parse_float, format_float),
    _Entry("environment/tunneling", "tunneling", lambda s: tuple(parse_list(s, parse_float)), _join(format_float)),

    _Entry("coupling/kind", "coupling_kind", _choice(*CouplingKind.ALL), str),
    _Entry("coupling/low", "coupling_low", parse_float, format_float),
    _Entry("coupling/high", "coupling_high", parse_float, format_float),

    _Entry("layout/unobserved_size", "unobserved_size", parse_int, str),
    _Entry("layout/fraction_size", "fraction_size", parse_int, str),
    _Entry("layout/fractions", "fractions", parse_int, str),

    _Entry("ensemble/realizations", "realizations", parse_int, str),
    _Entry("ensemble/realization_offset", "realization_offset", parse_int, str),
    _Entry("ensemble/workers", "workers", parse_int, str),
    _Entry("ensemble/sample_realization", "sample_realization", parse_int, str),

    _Entry("time/start", "t_start", parse_float, format_float),
    _Entry("time/stop", "t_stop", parse_float, format_float),
    _Entry("time/points", "t_points", parse_int, str),
    _Entry("time/t", "t", _opt_float, _fmt_opt_float),
)

_BY_KEY: Dict[str, _Entry] = {e.key: e for e in SCHEMA}
_BY_ATTR: Dict[str, _Entry] = {e.attr: e for e in SCHEMA}


def key_of(attr: str) -> str:
    """Schema key ("group/key") of a ScenarioConfig attribute."""
    return _BY_ATTR[attr].key


def _as_text(value: Any) -> str:
    # IniFormat turns "a, b" into a QStringList
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return "" if value is None else str(value)


def _check_ranges(cfg: ScenarioConfig) -> List[Tuple[str, str]]:
    out: List[Tuple[str, str]] = []
    for attr in ("m", "m_prime"):
        try:
            cfg.j_s.index_of(getattr(cfg, attr))
        except ValidationError as e:
            out.append((key_of(attr), str(e)))
    if cfg.m == cfg.m_prime:
        out.append((key_of("m_prime"), "m and m_prime must differ"))
    if not 0.0 <= cfg.theta <= math.pi:
        out.append((key_of("theta"), f"must lie in [0, pi], got {cfg.theta!r}"))
    if not math.isfinite(cfg.phi):
        out.append((key_of("phi"), "must be finite"))
    for attr in ("beta_omega", "g"):
        v = getattr(cfg, attr)
        if not (math.isfinite(v) and v >= 0.0):
            out.append((key_of(attr), f"must be finite and >= 0, got {v!r}"))
    if any(not (math.isfinite(w) and w > 0.0) for w in cfg.tunneling):
        out.append((key_of("tunneling"), "tunneling energies must be finite and > 0"))
    elif cfg.tunneling and len(cfg.tunneling) != cfg.unobserved_size + cfg.fractions * cfg.fraction_size:
        out.append((key_of("tunneling"), "need one value per environment spin"))
    for path, msg in coupling_problems(cfg.coupling_kind, cfg.coupling_low, cfg.coupling_high, cfg.seed):
        out.append((path, msg))
    for attr, low in (("unobserved_size", 1), ("fraction_size", 1), ("fractions", 1),
                      ("realizations", 1), ("realization_offset", 0), ("workers", 1),
                      ("t_points", 1)):
        v = getattr(cfg, attr)
        if v < low:
            out.append((key_of(attr), f"must be >= {low}, got {v}"))
    if not 0 <= cfg.sample_realization < cfg.realizations:
        out.append((key_of("sample_realization"),
                    f"must lie in [0, realizations={cfg.realizations}), got {cfg.sample_realization}"))
    if not (math.isfinite(cfg.t_start) and math.isfinite(cfg.t_stop)):
        out.append((key_of("t_start"), "time bounds must be finite"))
    elif cfg.t_stop < cfg.t_start:
        out.append((key_of("t_stop"), f"stop={cfg.t_stop!r} < start={cfg.t_start!r}"))
    if cfg.t is not None and not math.isfinite(cfg.t):
        out.append((key_of("t"), "must be finite"))
    if not cfg.j_list:
        out.append((key_of("j_list"), "at least one environment spin is required"))
    return out


def read_ini(path: str) -> Dict[str, str]:
    """Raw "group/key" -> text mapping of an INI file."""
    if not os.path.isfile(path):
        raise ConfigError([(path, "scenario file not found")])
    q = QtCore.QSettings(path, QtCore.QSettings.IniFormat)
    if q.status() != QtCore.QSettings.NoError:
        raise ConfigError([(path, "scenario file is not valid INI")])
    return {k: _as_text(q.value(k)) for k in q.allKeys()}


def parse_config(path: Optional[str] = None,
                 overrides: Optional[Mapping[str, str]] = None,
                 base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Defaults (or ``base``), then the file at ``path``, then ``overrides``.

    Raises ConfigError listing every problem found.
    """
    raw: Dict[str, str] = {}
    if path:
        raw.update(read_ini(path))
    if overrides:
        raw.update({k: _as_text(v) for k, v in overrides.items()})

    problems: List[Tuple[str, str]] = []
    values: Dict[str, Any] = {}
    for key in sorted(raw):
        entry = _BY_KEY.get(key)
        if entry is None:
            problems.append((key, "unknown key"))
            continue
        try:
            values[entry.attr] = entry.parse(raw[key])
        except SpinSbsError as e:
            problems.append((key, str(e)))

    # range checks run on whatever parsed; a key that failed to parse is reported once
    cfg = dataclasses.replace(base or ScenarioConfig(), **values)
    failed = {key for key, _ in problems}
    problems.extend(p for p in _check_ranges(cfg) if p[0] not in failed)
    if problems:
        raise ConfigError(problems)
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> Dict[str, str]:
    """Flat "group/key" -> text mapping, in schema order."""
    return {e.key: e.fmt(getattr(cfg, e.attr)) for e in SCHEMA}


def save_config(cfg: ScenarioConfig, path: str) -> str:
    q = QtCore.QSettings(path, QtCore.QSettings.IniFormat)
    q.clear()
    for key, text in config_to_dict(cfg).items():
        q.setValue(key, text)
    q.sync()
    if q.status() != QtCore.QSettings.NoError:
        raise OutputError(f"could not write scenario file {path}")
    return path
