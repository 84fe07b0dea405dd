# -*- coding: utf-8 -*-
"""Macrofraction products, the SBS distance bound and short-time formulas.

The environment E is split into an unobserved part E_unobs and observed
macrofractions. For a pointer pair (m, m'):

    Gamma_mm'(t)  = prod_{k in E_unobs} gamma^(k)_mm'(t)
    F^mac_mm'(t)  = prod_{k in mac}     F^(k)_mm'(t)

and the distance of the partially traced state to the nearest SBS state is
bounded by

    sum_{m != m'} |alpha_mm'| |Gamma_mm'| + sum_{m != m'} sqrt(alpha_m alpha_m') sum_mac F^mac_mm'.
"""

from __future__ import annotations

import abc
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from spin_sbs import config
from spin_sbs.core.errors import ValidationError
from spin_sbs.core.measurement_limit import (
    AxialPCoefficients,
    extract_axial_coefficients,
    gamma_general,
)
from spin_sbs.core.spin import (
    SpinQuantumNumber,
    SpinState,
    SystemState,
    build_spin_operators,
    expectation,
    fidelity,
    magnetic_numbers,
    partition_function,
    thermal_state,
)
from spin_sbs.core.thermal import ThermalParams, fidelity_thermal, gamma_thermal

TimeLike = Union[float, np.ndarray]


def _out(a: np.ndarray):
    if np.ndim(a) == 0:
        return complex(a) if np.iscomplexobj(a) else float(a)
    return a


# ----- single-environment models -----

class SpinEnvironment(abc.ABC):
    """One environment spin: gamma and fidelity as functions of (g, t, m, m').

    ``omega`` is the tunneling energy of this spin relative to the reference
    Omega; it rescales beta*Omega, g/Omega and t.
    """

    j: SpinQuantumNumber

    @abc.abstractmethod
    def gamma(self, g: float, t: TimeLike, m: float, m_prime: float, omega: float = 1.0) -> TimeLike:
        ...

    @abc.abstractmethod
    def fidelity(self, g: float, t: TimeLike, m: float, m_prime: float, omega: float = 1.0) -> TimeLike:
        ...


@dataclass(frozen=True)
class ThermalEnvironment(SpinEnvironment):
    """Thermal state of -2 Omega S_x evolving under H_m = 2(m g S_z - Omega S_x)."""

    j: SpinQuantumNumber
    beta_omega: float = config.DEFAULT_BETA_OMEGA

    def _params(self, g, t, m, m_prime, omega) -> ThermalParams:
        if not (math.isfinite(omega) and omega > 0.0):
            raise ValidationError(f"tunneling energy must be positive, got {omega!r}")
        return ThermalParams(
            j=self.j,
            beta_omega=self.beta_omega * omega,
            g_over_omega=g / omega,
            m=m,
            m_prime=m_prime,
            t=np.asarray(t, dtype=float) * omega,
        )

    def gamma(self, g, t, m, m_prime, omega=1.0):
        return gamma_thermal(self._params(g, t, m, m_prime, omega))

    def fidelity(self, g, t, m, m_prime, omega=1.0):
        return fidelity_thermal(self._params(g, t, m, m_prime, omega))


@dataclass(frozen=True, eq=False)
class MeasurementLimitEnvironment(SpinEnvironment):
    """Arbitrary initial state under H = m g S_z alone (no self-Hamiltonian).

    ``omega`` is accepted for interface parity and ignored.
    """

    state: SpinState
    coeffs: AxialPCoefficients = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", extract_axial_coefficients(self.state))

    @property
    def j(self) -> SpinQuantumNumber:
        return self.state.j

    def gamma(self, g, t, m, m_prime, omega=1.0):
        return gamma_general(self.coeffs, g, t, m - m_prime)

    def fidelity(self, g, t, m, m_prime, omega=1.0):
        mz = magnetic_numbers(self.j)
        diff = np.subtract.outer(mz, mz)
        rho = self.state.rho

        def one(ti: float) -> float:
            # exp(-i t m g S_z) rho exp(+i t m g S_z) acts elementwise
            a = SpinState(self.j, rho * np.exp(-1j * ti * m * g * diff))
            b = SpinState(self.j, rho * np.exp(-1j * ti * m_prime * g * diff))
            return fidelity(a, b)

        ts = np.asarray(t, dtype=float)
        if ts.ndim == 0:
            return one(float(ts))
        return np.array([one(float(x)) for x in ts.reshape(-1)]).reshape(ts.shape)


# ----- layout -----

@dataclass(frozen=True, eq=False)
class MacrofractionLayout:
    """Partition of N environment spins (0-based indices) with their couplings."""

    n: int
    unobserved: Tuple[int, ...]
    macrofractions: Tuple[Tuple[int, ...], ...]
    couplings: np.ndarray
    tunneling: Optional[np.ndarray] = None

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValidationError(f"N must be >= 1, got {self.n!r}")
        object.__setattr__(self, "n", n)

        g = np.array(self.couplings, dtype=float).reshape(-1)
        if g.size != n:
            raise ValidationError(f"expected {n} couplings, got {g.size}")
        if not np.all(np.isfinite(g)) or np.any(g < 0.0):
            raise ValidationError("couplings must be finite and >= 0")
        g.setflags(write=False)
        object.__setattr__(self, "couplings", g)

        if self.tunneling is None:
            om = np.ones(n)
        else:
            om = np.array(self.tunneling, dtype=float).reshape(-1)
            if om.size != n:
                raise ValidationError(f"expected {n} tunneling energies, got {om.size}")
            if not np.all(np.isfinite(om)) or np.any(om <= 0.0):
                raise ValidationError("tunneling energies must be finite and > 0")
        om.setflags(write=False)
        object.__setattr__(self, "tunneling", om)

        unobs = tuple(int(i) for i in self.unobserved)
        fracs = tuple(tuple(int(i) for i in f) for f in self.macrofractions)
        object.__setattr__(self, "unobserved", unobs)
        object.__setattr__(self, "macrofractions", fracs)

        seen = set()
        for name, idx in itertools.chain([("unobserved", unobs)],
                                         ((f"macrofraction {i}", f) for i, f in enumerate(fracs))):
            if not idx:
                raise ValidationError(f"{name} is empty")
            for k in idx:
                if not 0 <= k < n:
                    raise ValidationError(f"{name}: index {k} outside [0, {n})")
                if k in seen:
                    raise ValidationError(f"{name}: index {k} is used twice")
                seen.add(k)

    @classmethod
    def contiguous(cls, unobserved_size: int, fraction_sizes: Sequence[int],
                   couplings: Sequence[float],
                   tunneling: Optional[Sequence[float]] = None) -> "MacrofractionLayout":
        """Unobserved spins first, then each macrofraction, in index order."""
        sizes = [int(unobserved_size)] + [int(s) for s in fraction_sizes]
        if any(s < 1 for s in sizes):
            raise ValidationError(f"every group needs at least one spin, got sizes {sizes}")
        bounds = np.cumsum([0] + sizes)
        groups = [tuple(range(int(a), int(b))) for a, b in zip(bounds[:-1], bounds[1:])]
        return cls(
            n=int(bounds[-1]),
            unobserved=groups[0],
            macrofractions=tuple(groups[1:]),
            couplings=np.asarray(couplings, dtype=float),
            tunneling=None if tunneling is None else np.asarray(tunneling, dtype=float),
        )

    @property
    def fraction_count(self) -> int:
        return len(self.macrofractions)

    def mean_g2(self, indices: Sequence[int]) -> float:
        """Empirical <<g^2>> over a group."""
        return float(np.mean(self.couplings[list(indices)] ** 2))


def _decoherence_product(env: SpinEnvironment, layout: MacrofractionLayout,
                         indices: Sequence[int], m: float, m_prime: float, t: TimeLike) -> TimeLike:
    total = np.ones(np.shape(t), dtype=complex)
    for k in indices:
        total = total * env.gamma(layout.couplings[k], t, m, m_prime, layout.tunneling[k])
    return _out(total)


def _fidelity_product(env: SpinEnvironment, layout: MacrofractionLayout,
                      indices: Sequence[int], m: float, m_prime: float, t: TimeLike) -> TimeLike:
    total = np.ones(np.shape(t))
    for k in indices:
        total = total * env.fidelity(layout.couplings[k], t, m, m_prime, layout.tunneling[k])
    return _out(total)


def total_decoherence_factor(layout: MacrofractionLayout, env: SpinEnvironment,
                             m: float, m_prime: float, t: TimeLike) -> TimeLike:
    """Gamma_mm'(t): product of single-spin factors over E_unobs."""
    return _decoherence_product(env, layout, layout.unobserved, m, m_prime, t)


def macrofraction_fidelity(layout: MacrofractionLayout, env: SpinEnvironment, fraction: int,
                           m: float, m_prime: float, t: TimeLike) -> TimeLike:
    """F^mac_mm'(t): product of single-spin fidelities over one macrofraction."""
    if not 0 <= fraction < layout.fraction_count:
        raise ValidationError(f"macrofraction index {fraction} outside [0, {layout.fraction_count})")
    return _fidelity_product(env, layout, layout.macrofractions[fraction], m, m_prime, t)


# ----- the bound -----

@dataclass(frozen=True, eq=False)
class PairTerms:
    """Contribution of one ordered pointer pair (m, m')."""

    abs_gamma: TimeLike
    fidelities: Tuple[TimeLike, ...]
    coherence: float      # |alpha_mm'|
    weight: float         # sqrt(alpha_m alpha_m')

    @property
    def decoherence(self) -> TimeLike:
        return self.coherence * self.abs_gamma

    @property
    def distinguishability(self) -> TimeLike:
        return self.weight * sum(self.fidelities)


@dataclass(frozen=True, eq=False)
class SbsBoundReport:
    t: TimeLike
    decoherence_term: TimeLike
    distinguishability_term: TimeLike
    per_pair: Dict[Tuple[float, float], PairTerms]

    @property
    def bound(self) -> TimeLike:
        return self.decoherence_term + self.distinguishability_term


def sbs_bound(system: SystemState, layout: MacrofractionLayout, env: SpinEnvironment,
              t: TimeLike) -> SbsBoundReport:
    """Right-hand side of the trace-distance bound to the nearest SBS state.

    The observed sum runs over macrofractions, each contributing its product
    fidelity.
    """
    ms = magnetic_numbers(system.j_s)
    pops = system.populations()
    shape = np.shape(t)
    decoh = np.zeros(shape)
    dist = np.zeros(shape)
    per_pair: Dict[Tuple[float, float], PairTerms] = {}

    for a, b in itertools.combinations(range(system.j_s.dimension), 2):
        m, mp = float(ms[a]), float(ms[b])
        weight = math.sqrt(max(pops[a], 0.0) * max(pops[b], 0.0))
        coh_ab, coh_ba = abs(system.alpha[a, b]), abs(system.alpha[b, a])
        if coh_ab == 0.0 and coh_ba == 0.0 and weight == 0.0:
            continue
        # |Gamma_m'm| = |Gamma_mm'| and F is symmetric, so one evaluation serves both orders
        abs_gamma = np.abs(total_decoherence_factor(layout, env, m, mp, t))
        fids = tuple(np.asarray(macrofraction_fidelity(layout, env, i, m, mp, t))
                     for i in range(layout.fraction_count))

        for key, coh in (((m, mp), coh_ab), ((mp, m), coh_ba)):
            terms = PairTerms(abs_gamma=_out(abs_gamma), fidelities=tuple(_out(f) for f in fids),
                              coherence=float(coh), weight=weight)
            per_pair[key] = terms
            decoh = decoh + terms.decoherence
            dist = dist + terms.distinguishability

    return SbsBoundReport(t=t, decoherence_term=_out(decoh),
                          distinguishability_term=_out(dist), per_pair=per_pair)


# ----- thermal averages and short-time formulas -----

def _sx2_moment(j: SpinQuantumNumber, beta_omega: float) -> float:
    """<S_x^2> of exp(-2 beta Omega S_x)/Z from the level sum."""
    l = magnetic_numbers(j)
    w = np.exp(-2.0 * beta_omega * (l + j.j))
    w = w / np.sum(w)
    return float(np.sum(w * l * l))


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


def sz_variance_thermal(j: SpinQuantumNumber, beta_omega: float) -> float:
    """<S_z^2> = (1/4) coth(x) [(2j+1) coth((2j+1)x) - coth(x)], x = beta Omega."""
    x = float(beta_omega)
    if not math.isfinite(x) or x < 0.0:
        raise ValidationError(f"beta_omega must be finite and >= 0, got {beta_omega!r}")
    if x < config.SMALL_BETA_OMEGA:
        # <S_y^2> = <S_z^2> around the x axis
        sx2 = _sx2_moment(j, x)
        return 0.5 * (j.j * (j.j + 1.0) - sx2)
    a = j.dimension
    return 0.25 * _coth(x) * (a * _coth(a * x) - _coth(x))


def sz_variance_oracle(j: SpinQuantumNumber, beta_omega: float) -> float:
    """Tr[S_z^2 rho_th] with dense matrices."""
    _, _, sz = build_spin_operators(j)
    return expectation(thermal_state(j, beta_omega), sz.matrix @ sz.matrix)


def quantum_fisher_information(j: SpinQuantumNumber, beta_omega: float) -> float:
    """Fisher information of exp(-2 beta Omega S_x)/Z for rotations about z.

    (2j+1) tanh(x) coth((2j+1)x) - 1, with x = beta Omega. Tends to 0 for
    x -> 0 and to 2j for x -> infinity.
    """
    x = float(beta_omega)
    if not math.isfinite(x) or x < 0.0:
        raise ValidationError(f"beta_omega must be finite and >= 0, got {beta_omega!r}")
    if x < config.SMALL_BETA_OMEGA:
        # nearest-neighbour level sum; p_{l+1} = p_l exp(-2x)
        l = magnetic_numbers(j)
        w = np.exp(-2.0 * x * (l + j.j))
        p = w / np.sum(w)
        lower = np.argsort(l)[:-1]
        ladder = j.j * (j.j + 1.0) - l[lower] * (l[lower] + 1.0)
        step = math.expm1(-2.0 * x) ** 2 / (1.0 + math.exp(-2.0 * x))
        return float(step * np.sum(p[lower] * ladder))
    a = j.dimension
    return a * math.tanh(x) * _coth(a * x) - 1.0


def quantum_fisher_information_oracle(j: SpinQuantumNumber, beta_omega: float) -> float:
    """2 sum_{l,l'} (p_l - p_l')^2/(p_l + p_l') |<l|S_x|l'>|^2, p_l = exp(-2 l beta Omega)/Z."""
    sx, _, _ = build_spin_operators(j)
    l = magnetic_numbers(j)
    p = np.exp(-2.0 * beta_omega * l) / partition_function(j, beta_omega)
    num = np.subtract.outer(p, p) ** 2
    den = np.add.outer(p, p)
    return float(2.0 * np.sum(num / den * np.abs(sx.matrix) ** 2))


def gamma_short_time(n_bar: float, mean_g2: float, delta_m: float, t: TimeLike,
                     j: SpinQuantumNumber, beta_omega: float, large_j: bool = False) -> TimeLike:
    """Gaussian decay of |Gamma| at short times.

    exp(-2 N <<g^2>> dm^2 t^2 <S_z^2>); with ``large_j`` the variance is
    replaced by (j/2) coth(beta Omega).
    """
    t = np.asarray(t, dtype=float)
    if large_j and not beta_omega > 0.0:
        raise ValidationError("the large-j form needs beta_omega > 0")
    if large_j:
        rate = 0.5 * n_bar * j.twice_j * mean_g2 * delta_m ** 2 * _coth(beta_omega)
    else:
        rate = 2.0 * n_bar * mean_g2 * delta_m ** 2 * sz_variance_thermal(j, beta_omega)
    return _out(np.exp(-rate * t * t))


def fidelity_short_time(n_mac: float, mean_g2: float, delta_m: float, t: TimeLike,
                        j: SpinQuantumNumber, beta_omega: float, large_j: bool = False) -> TimeLike:
    """Gaussian decay of F^mac at short times.

    exp(-(1/2) N_mac <<g^2>> dm^2 t^2 QFI); with ``large_j`` the Fisher
    information is replaced by 2j tanh(beta Omega).
    """
    t = np.asarray(t, dtype=float)
    if large_j:
        qfi = j.twice_j * math.tanh(beta_omega)
    else:
        qfi = quantum_fisher_information(j, beta_omega)
    return _out(np.exp(-0.5 * n_mac * mean_g2 * delta_m ** 2 * qfi * t * t))


def fidelity_short_time_single(g: float, delta_m: float, t: TimeLike,
                               j: SpinQuantumNumber, beta_omega: float) -> TimeLike:
    """1 - (1/2) g^2 dm^2 t^2 QFI for one environment spin."""
    t = np.asarray(t, dtype=float)
    qfi = quantum_fisher_information(j, beta_omega)
    return _out(1.0 - 0.5 * g * g * delta_m ** 2 * t * t * qfi)

