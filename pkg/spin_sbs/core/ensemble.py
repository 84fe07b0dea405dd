# -*- coding: utf-8 -*-
"""Random-coupling ensembles of the thermal central-spin model.

Every realization draws its couplings from its own Philox stream keyed by
``(seed, realization_index)``, so the numbers do not depend on how
realizations are scheduled across workers. The same draw is shared by every
j of a run, which makes the j comparison paired.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from spin_sbs import config
from spin_sbs.core.errors import ConfigError, NumericalError, ValidationError
from spin_sbs.core.sbs import MacrofractionLayout, ThermalEnvironment, sbs_bound
from spin_sbs.core.spin import SpinQuantumNumber, SystemState
from spin_sbs.core.values import parse_twice

logger = logging.getLogger(__name__)

_U64 = 2 ** 64


class CouplingKind:
    UNIFORM = "uniform"

    ALL = (UNIFORM,)


@dataclass(frozen=True)
class CouplingDistribution:
    """g_k / Omega ~ kind(low, high)."""

    kind: str = CouplingKind.UNIFORM
    low: float = config.DEFAULT_G_LOW
    high: float = config.DEFAULT_G_HIGH
    seed: int = config.DEFAULT_SEED

    def __post_init__(self):
        problems = coupling_problems(self.kind, self.low, self.high, self.seed)
        if problems:
            raise ValidationError("; ".join(msg for _, msg in problems))


def coupling_problems(kind: str, low: float, high: float, seed: int) -> List[Tuple[str, str]]:
    """Problems with a coupling distribution as (key path, message)."""
    out = []
    if kind not in CouplingKind.ALL:
        out.append(("coupling/kind", f"unknown distribution {kind!r}"))
    if not (math.isfinite(low) and math.isfinite(high)):
        out.append(("coupling/low", "bounds must be finite"))
    elif low < 0.0:
        out.append(("coupling/low", f"couplings must be >= 0, got {low!r}"))
    elif low > high:
        out.append(("coupling/high", f"high={high!r} < low={low!r}"))
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < _U64:
        out.append(("scenario/seed", f"seed must be an unsigned 64-bit integer, got {seed!r}"))
    return out


def realization_rng(seed: int, realization_index: int) -> np.random.Generator:
    """Philox generator keyed by (seed, realization index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(realization_index)])))


def sample_couplings(dist: CouplingDistribution, n: int, realization_index: int) -> np.ndarray:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n!r}")
    if realization_index < 0:
        raise ValidationError(f"realization index must be >= 0, got {realization_index!r}")
    rng = realization_rng(dist.seed, realization_index)
    return rng.uniform(dist.low, dist.high, size=int(n))


def average_series(per_realization: np.ndarray) -> np.ndarray:
    """Mean over axis 0 with exactly rounded sums (independent of order)."""
    a = np.asarray(per_realization, dtype=float)
    if a.ndim == 0 or a.shape[0] == 0:
        raise ValidationError("need at least one realization to average")
    flat = a.reshape(a.shape[0], -1)
    sums = np.array([math.fsum(col) for col in flat.T])
    return (sums / a.shape[0]).reshape(a.shape[1:])


def default_time_grid() -> np.ndarray:
    return np.linspace(config.DEFAULT_T_START, config.DEFAULT_T_STOP, config.DEFAULT_T_POINTS)


def _default_j_list() -> Tuple[SpinQuantumNumber, ...]:
    return tuple(SpinQuantumNumber.parse(tok) for tok in config.DEFAULT_J_LIST.split())


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything the ensemble experiment needs; defaults are the standard random-coupling run."""

    j_list: Tuple[SpinQuantumNumber, ...] = field(default_factory=_default_j_list)
    time_grid: np.ndarray = field(default_factory=default_time_grid)
    beta_omega: float = config.DEFAULT_BETA_OMEGA
    j_s: SpinQuantumNumber = field(default_factory=lambda: SpinQuantumNumber.parse(config.DEFAULT_J_S))
    m: float = parse_twice(config.DEFAULT_M) / 2.0
    m_prime: float = parse_twice(config.DEFAULT_M_PRIME) / 2.0
    unobserved_size: int = config.DEFAULT_UNOBSERVED_SIZE
    fraction_size: int = config.DEFAULT_FRACTION_SIZE
    fractions: int = config.DEFAULT_FRACTIONS
    coupling: CouplingDistribution = field(default_factory=CouplingDistribution)
    tunneling: Optional[Tuple[float, ...]] = None
    realizations: int = config.DEFAULT_REALIZATIONS
    realization_offset: int = 0
    workers: int = 1

    @property
    def environment_count(self) -> int:
        return self.unobserved_size + self.fractions * self.fraction_size

    def validate(self) -> List[Tuple[str, str]]:
        """All problems as (key path, message); empty when valid."""
        out: List[Tuple[str, str]] = []
        if not self.j_list:
            out.append(("spin/j_list", "at least one environment spin is required"))
        t = np.asarray(self.time_grid, dtype=float)
        if t.ndim != 1 or t.size < 1:
            out.append(("time/points", "time grid must be a non-empty 1-d array"))
        elif not np.all(np.isfinite(t)):
            out.append(("time/start", "time grid must be finite"))
        elif np.any(np.diff(t) < 0.0):
            out.append(("time/start", "time grid must be sorted"))
        if not (math.isfinite(self.beta_omega) and self.beta_omega >= 0.0):
            out.append(("environment/beta_omega", f"must be finite and >= 0, got {self.beta_omega!r}"))
        for key, m in (("spin/m", self.m), ("spin/m_prime", self.m_prime)):
            try:
                self.j_s.index_of(m)
            except ValidationError as e:
                out.append((key, str(e)))
        if self.m == self.m_prime:
            out.append(("spin/m_prime", "m and m_prime must differ"))
        for key, v, low in (("layout/unobserved_size", self.unobserved_size, 1),
                            ("layout/fraction_size", self.fraction_size, 1),
                            ("layout/fractions", self.fractions, 1),
                            ("ensemble/realizations", self.realizations, 1),
                            ("ensemble/realization_offset", self.realization_offset, 0),
                            ("ensemble/workers", self.workers, 1)):
            if int(v) != v or v < low:
                out.append((key, f"must be an integer >= {low}, got {v!r}"))
        if self.tunneling is not None:
            om = np.asarray(self.tunneling, dtype=float)
            if om.size != self.environment_count:
                out.append(("environment/tunneling",
                            f"expected {self.environment_count} values, got {om.size}"))
            elif not np.all(np.isfinite(om)) or np.any(om <= 0.0):
                out.append(("environment/tunneling", "tunneling energies must be finite and > 0"))
        return out

    def realization_indices(self) -> range:
        return range(self.realization_offset, self.realization_offset + self.realizations)

    def layout(self, realization_index: int) -> MacrofractionLayout:
        g = sample_couplings(self.coupling, self.environment_count, realization_index)
        return MacrofractionLayout.contiguous(
            self.unobserved_size, [self.fraction_size] * self.fractions, g, self.tunneling)


@dataclass(frozen=True, eq=False)
class SpinSeries:
    """Per-realization curves for one environment spin.

    Shapes: abs_gamma and bound are (R, T); fidelity is (R, fractions, T).
    """

    j: SpinQuantumNumber
    abs_gamma: np.ndarray
    fidelity: np.ndarray
    bound: np.ndarray

    @property
    def mean_abs_gamma(self) -> np.ndarray:
        return average_series(self.abs_gamma)

    @property
    def mean_fidelity(self) -> np.ndarray:
        return average_series(self.fidelity)

    @property
    def mean_bound(self) -> np.ndarray:
        return average_series(self.bound)


@dataclass(frozen=True, eq=False)
class EnsembleRun:
    config: ExperimentConfig
    time_grid: np.ndarray
    realization_indices: Tuple[int, ...]
    series: Dict[SpinQuantumNumber, SpinSeries]
    seed: int
    wall_time_s: float = 0.0

    def __getitem__(self, j: SpinQuantumNumber) -> SpinSeries:
        return self.series[j]


def _run_realization(cfg: ExperimentConfig, index: int, t: np.ndarray):
    layout = cfg.layout(index)
    system = SystemState.equal_superposition(cfg.j_s, cfg.m, cfg.m_prime)
    out = {}
    for j in cfg.j_list:
        report = sbs_bound(system, layout, ThermalEnvironment(j, cfg.beta_omega), t)
        pair = report.per_pair[(cfg.m, cfg.m_prime)]
        out[j] = (
            np.asarray(pair.abs_gamma, dtype=float),
            np.array([np.asarray(f, dtype=float) for f in pair.fidelities]),
            np.asarray(report.bound, dtype=float),
        )
    logger.debug("realization %d done (g = %s)", index, np.array2string(layout.couplings, precision=3))
    return out


def run_experiment(cfg: ExperimentConfig) -> EnsembleRun:
    """Sample, evolve and collect all realizations; see ExperimentConfig."""
    problems = cfg.validate()
    if problems:
        raise ConfigError(problems)

    t = np.asarray(cfg.time_grid, dtype=float)
    indices = tuple(cfg.realization_indices())
    logger.info(
        "ensemble: %d realizations (offset %d), j in [%s], N=%d, beta*Omega=%g, %d time points, %d worker(s)",
        len(indices), cfg.realization_offset, ", ".join(str(j) for j in cfg.j_list),
        cfg.environment_count, cfg.beta_omega, t.size, cfg.workers,
    )
    t0 = time.perf_counter()
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=int(cfg.workers)) as pool:
            results = list(pool.map(lambda i: _run_realization(cfg, i, t), indices))
    else:
        results = [_run_realization(cfg, i, t) for i in indices]

    series = {}
    for j in cfg.j_list:
        series[j] = SpinSeries(
            j=j,
            abs_gamma=np.stack([r[j][0] for r in results]),
            fidelity=np.stack([r[j][1] for r in results]),
            bound=np.stack([r[j][2] for r in results]),
        )
        for name in ("abs_gamma", "fidelity", "bound"):
            if not np.all(np.isfinite(getattr(series[j], name))):
                raise NumericalError(f"non-finite {name} values for j={j}")
    wall = time.perf_counter() - t0
    logger.info("ensemble finished in %.2f s", wall)
    return EnsembleRun(
        config=cfg,
        time_grid=t,
        realization_indices=indices,
        series=series,
        seed=int(cfg.coupling.seed),
        wall_time_s=wall,
    )
