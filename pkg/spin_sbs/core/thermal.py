# -*- coding: utf-8 -*-
"""Thermal spin-j environment under H_m = 2(m g S_z - Omega S_x).

Closed forms
------------
Everything is nondimensionalised by Omega (Omega = 1): the public inputs are
beta*Omega, g/Omega and t in units of 1/Omega.

U_{m'}^dagger U_m is an SU(2) element. For spin 1/2 it reads
``gamma0 * 1 - i (gammax sx + gammay sy + gammaz sz)``; the eigenvalues of
the representation matrices for any j are then powers of a single number:

- decoherence factor: lambda = kappa + sqrt(kappa^2 - 1),
  kappa = gamma0 cosh(bO) + i gammax sinh(bO),
  gamma = sum_l lambda^(2l) / sum_l lambda0^(2l), lambda0 = e^bO;
- fidelity: lambda~ = kappa~ + sqrt(kappa~^2 - 1),
  kappa~ = gammaz^2 + gammay^2 + (gamma0^2 + gammax^2) cosh(2 bO),
  F = sum_l lambda~^l / sum_l lambda~0^l, lambda~0 = e^(2 bO).

The geometric ratios are evaluated as explicit (2j+1)-term power sums, both
sums scaled by the largest denominator term. This is algebraically the
same ratio; it has no removable singularity at lambda = +-1, and swapping
lambda for 1/lambda leaves the sum unchanged. lambda and lambda~ are carried
as logarithms relative to lambda0 and lambda~0, so any finite beta*Omega
gives finite results.

Every kernel accepts ``t`` as a float or a numpy array.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg

from spin_sbs import config
from spin_sbs.core.errors import NumericalError, ValidationError
from spin_sbs.core.spin import (
    SpinQuantumNumber,
    build_spin_operators,
    hermitian_matrix_function,
    thermal_state,
    unitary_evolution,
)

TimeLike = Union[float, np.ndarray]


def _check_magnetic(m: float, name: str) -> float:
    m = float(m)
    if not math.isfinite(m) or 2.0 * m != round(2.0 * m):
        raise ValidationError(f"{name}={m!r} is not a half-integer")
    return m


@dataclass(frozen=True, eq=False)
class ThermalParams:
    j: SpinQuantumNumber
    beta_omega: float
    g_over_omega: float
    m: float
    m_prime: float
    t: TimeLike = 0.0
    j_s: Optional[SpinQuantumNumber] = None

    def __post_init__(self):
        for name in ("beta_omega", "g_over_omega"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "m", _check_magnetic(self.m, "m"))
        object.__setattr__(self, "m_prime", _check_magnetic(self.m_prime, "m_prime"))
        if self.j_s is not None:
            self.j_s.index_of(self.m)
            self.j_s.index_of(self.m_prime)
        if not np.all(np.isfinite(np.asarray(self.t, dtype=float))):
            raise ValidationError("t must be finite")

    @property
    def delta_m(self) -> float:
        return self.m - self.m_prime

    def at(self, t: TimeLike) -> "ThermalParams":
        return dataclasses.replace(self, t=t)

    def swapped(self) -> "ThermalParams":
        """Same parameters with m and m' exchanged."""
        return dataclasses.replace(self, m=self.m_prime, m_prime=self.m)


@dataclass(frozen=True, eq=False)
class GammaKernel:
    """Pauli components of U_{m'}^dagger U_m and the two precession frequencies."""

    gamma0: TimeLike
    gammax: TimeLike
    gammay: TimeLike
    gammaz: TimeLike
    omega_m: float
    omega_mprime: float

    def norm_sq(self) -> TimeLike:
        return self.gamma0 ** 2 + self.gammax ** 2 + self.gammay ** 2 + self.gammaz ** 2


def _scalar_or_array(a: np.ndarray):
    if np.ndim(a) == 0:
        return complex(a) if np.iscomplexobj(a) else float(a)
    return a


def gamma_kernel(params: ThermalParams) -> GammaKernel:
    g, m, mp = params.g_over_omega, params.m, params.m_prime
    t = np.asarray(params.t, dtype=float)
    wm = math.hypot(1.0, m * g)
    wmp = math.hypot(1.0, mp * g)
    cm, sm = np.cos(wm * t), np.sin(wm * t)
    cmp, smp = np.cos(wmp * t), np.sin(wmp * t)

    gamma0 = cm * cmp + (1.0 + m * mp * g * g) / (wm * wmp) * sm * smp
    gammax = smp * cm / wmp - sm * cmp / wm
    gammay = -(m - mp) * g / (wm * wmp) * sm * smp
    gammaz = g * (m * sm * cmp / wm - mp * smp * cm / wmp)
    return GammaKernel(
        gamma0=_scalar_or_array(gamma0),
        gammax=_scalar_or_array(gammax),
        gammay=_scalar_or_array(gammay),
        gammaz=_scalar_or_array(gammaz),
        omega_m=wm,
        omega_mprime=wmp,
    )


def _unit_kernel(params: ThermalParams) -> GammaKernel:
    k = gamma_kernel(params)
    drift = np.max(np.abs(np.asarray(k.norm_sq()) - 1.0))
    if drift > config.KAPPA_FAIL_TOL:
        raise NumericalError(f"|U_m'^dagger U_m| deviates from SU(2) by {drift!r}")
    return k


def _finite(values, what: str):
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"{what} is not finite")
    return _scalar_or_array(values)


def _log_eigenvalue_scaled(params: ThermalParams) -> np.ndarray:
    """log(lambda) - beta Omega for the root with |lambda| >= 1.

    With s = exp(-bO), kappa s = (gamma0 + i gammax)/2 + s^2 (gamma0 - i gammax)/2
    and lambda s = kappa s + sqrt((kappa s)^2 - s^2); the root sign is taken
    along kappa s, so nothing cancels and nothing overflows for large bO.
    """
    k = _unit_kernel(params)
    s2 = math.exp(-2.0 * params.beta_omega)
    g0, gx = np.asarray(k.gamma0), np.asarray(k.gammax)
    kappa_s = 0.5 * (g0 + 1j * gx) + 0.5 * s2 * (g0 - 1j * gx)
    root = np.sqrt(kappa_s * kappa_s - s2 + 0j)
    root = np.where(np.real(kappa_s * np.conj(root)) < 0.0, -root, root)
    with np.errstate(divide="ignore"):
        return np.log(kappa_s + root)


def thermal_eigenvalue(params: ThermalParams, branch: int = 1) -> TimeLike:
    """Root of lambda^2 - 2 kappa lambda + 1 = 0 with |lambda| >= 1 (branch=-1: its inverse)."""
    log_lam = params.beta_omega + _log_eigenvalue_scaled(params)
    return _scalar_or_array(np.exp(log_lam if branch >= 0 else -log_lam))


def _denominator(twice_j: int, log_base0: float) -> float:
    # sum_l base0^(2l) / base0^(2j) for the power set 2l = 2j, 2j-2, ..., -2j
    e = np.arange(twice_j, -twice_j - 1, -2, dtype=float)
    return float(np.sum(np.exp((e - twice_j) * log_base0)))


def _power_sum(log_lam_scaled: np.ndarray, twice_j: int, x: float) -> np.ndarray:
    # sum_e lambda^e / lambda0^(2j) with log(lambda) = x + log_lam_scaled
    num = np.zeros(np.shape(log_lam_scaled), dtype=complex)
    for e in range(twice_j, -twice_j - 1, -2):
        num = num + np.exp((e - twice_j) * x + e * log_lam_scaled)
    return num / _denominator(twice_j, x)


def gamma_from_eigenvalue(lam: TimeLike, j: SpinQuantumNumber, beta_omega: float) -> TimeLike:
    """sum_l lambda^(2l) / sum_l lambda0^(2l), lambda0 = exp(beta Omega)."""
    x = float(beta_omega)
    log_lam = np.log(np.asarray(lam, dtype=complex))
    return _scalar_or_array(_power_sum(log_lam - x, j.twice_j, x))


def gamma_thermal(params: ThermalParams) -> TimeLike:
    """gamma_{mm'}(t) = Tr[rho_th U_{m'}^dagger U_m]."""
    if params.m == params.m_prime:
        return _scalar_or_array(np.ones(np.shape(params.t), dtype=complex))
    x = params.beta_omega
    with np.errstate(over="ignore", invalid="ignore"):
        values = _power_sum(_log_eigenvalue_scaled(params), params.j.twice_j, x)
    return _finite(values, "gamma")


def fidelity_kappa(params: ThermalParams) -> TimeLike:
    """kappa~ = 1 + 2 (gamma0^2 + gammax^2) sinh^2(beta Omega)."""
    k = _unit_kernel(params)
    a = np.asarray(k.gamma0) ** 2 + np.asarray(k.gammax) ** 2
    with np.errstate(over="ignore"):
        kt = 1.0 + 2.0 * a * np.sinh(params.beta_omega) ** 2
    return _finite(kt, "kappa~")


def _fidelity_log_gap(params: ThermalParams):
    """(log D, 2 bO) with lambda~ - 1 = D exp(2 bO).

    With u = exp(-2 bO) and A = gamma0^2 + gammax^2,
    D = A (1-u)^2 / 2 + sqrt(A/2) (1-u) sqrt(2u + A (1-u)^2 / 2), free of cancellation.
    """
    k = _unit_kernel(params)
    x2 = 2.0 * params.beta_omega
    u = math.exp(-x2)
    one_minus_u = -math.expm1(-x2)
    a = np.asarray(k.gamma0) ** 2 + np.asarray(k.gammax) ** 2
    half_gap = 0.5 * a * one_minus_u ** 2
    d = half_gap + np.sqrt(0.5 * a) * one_minus_u * np.sqrt(2.0 * u + half_gap)
    with np.errstate(divide="ignore"):
        return np.log(d), x2


def fidelity_log_kernel(params: ThermalParams) -> TimeLike:
    """log(lambda~) = arccosh(kappa~), stable near kappa~ = 1 and for large beta Omega."""
    log_d, x2 = _fidelity_log_gap(params)
    return _scalar_or_array(np.logaddexp(0.0, log_d + x2))


def fidelity_kernel(params: ThermalParams) -> TimeLike:
    """lambda~ = kappa~ + sqrt(kappa~^2 - 1) >= 1."""
    return _scalar_or_array(np.exp(np.asarray(fidelity_log_kernel(params))))


def fidelity_thermal(params: ThermalParams) -> TimeLike:
    """F(rho_m(t), rho_m'(t)) for the thermal initial state."""
    if params.m == params.m_prime:
        return _scalar_or_array(np.ones(np.shape(params.t)))
    log_d, x2 = _fidelity_log_gap(params)
    # log(lambda~) - 2 bO
    scaled = np.logaddexp(-x2, log_d)
    twice_j = params.j.twice_j
    num = np.zeros(np.shape(scaled))
    for e in range(twice_j, -twice_j - 1, -2):
        # lambda~^l with l = e/2, scaled by lambda~0^j
        num = num + np.exp(0.5 * (e - twice_j) * x2 + 0.5 * e * scaled)
    return _finite(num / _denominator(twice_j, 0.5 * x2), "fidelity")


# ----- dense-matrix oracles -----

def thermal_hamiltonian(j: SpinQuantumNumber, m: float, g_over_omega: float) -> np.ndarray:
    """H_m = 2 (m g S_z - S_x) in units of Omega."""
    sx, _, sz = build_spin_operators(j)
    return 2.0 * (m * g_over_omega * sz.matrix - sx.matrix)


def _oracle_over_time(params: ThermalParams, one):
    t = np.asarray(params.t, dtype=float)
    if t.ndim == 0:
        return one(float(t))
    return np.array([one(float(ti)) for ti in t.reshape(-1)]).reshape(t.shape)


def oracle_gamma(params: ThermalParams) -> TimeLike:
    """(1/Z) Tr[exp(-2 bO S_x) U_{m'}^dagger U_m] with dense matrices."""
    rho0 = thermal_state(params.j, params.beta_omega).rho
    hm = thermal_hamiltonian(params.j, params.m, params.g_over_omega)
    hmp = thermal_hamiltonian(params.j, params.m_prime, params.g_over_omega)

    def one(t: float) -> complex:
        um = unitary_evolution(hm, t)
        ump = unitary_evolution(hmp, t)
        return complex(np.trace(rho0 @ ump.conj().T @ um))

    return _oracle_over_time(params, one)


def oracle_fidelity(params: ThermalParams) -> TimeLike:
    """Uhlmann fidelity of U_m rho_th U_m^dagger and U_m' rho_th U_m'^dagger.

    Evaluated as the trace norm ||sqrt(rho_m') sqrt(rho_m)||_1 with
    sqrt(rho_m) = U_m exp(-beta Omega S_x) U_m^dagger / sqrt(Z), so the
    smallest thermal weights never go through a numerical square root.
    """
    j, x = params.j, params.beta_omega
    sx, _, _ = build_spin_operators(j)
    # exp(-x (S_x + j)): the shift cancels in the normalisation below
    half = hermitian_matrix_function(sx, lambda w: np.exp(-x * (w + j.j)))
    norm = float(np.real(np.trace(half @ half)))
    hm = thermal_hamiltonian(j, params.m, params.g_over_omega)
    hmp = thermal_hamiltonian(j, params.m_prime, params.g_over_omega)

    def one(t: float) -> float:
        um = unitary_evolution(hm, t)
        ump = unitary_evolution(hmp, t)
        root_m = um @ half @ um.conj().T
        root_mp = ump @ half @ ump.conj().T
        return float(np.sum(scipy.linalg.svdvals(root_mp @ root_m)) / norm)

    return _oracle_over_time(params, one)
