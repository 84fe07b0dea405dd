# -*- coding: utf-8 -*-
"""Decoherence factors in the measurement limit H_SE = S_z (x) sum_k g_k S_z^(k).

A single environment contributes gamma(t) = Tr[rho_0 exp(-i g t dm S_z)],
dm = m - m'. This module provides:

- the closed form for a spin-coherent initial state (and |gamma|^2, and its
  short-time Gaussian),
- the general formula for any initial state through the axial coefficients
  c_l of its diagonal P-representation,
- the dense-matrix oracles both are checked against.

All scalar-time functions also accept numpy arrays for ``t``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg
import scipy.special

from spin_sbs import config
from spin_sbs.core.errors import NumericalError, ValidationError
from spin_sbs.core.spin import (
    SpinQuantumNumber,
    SpinState,
    magnetic_numbers,
    spin_coherent_state,
)

TimeLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class CoherentGammaParams:
    """Environment in the spin-coherent state at polar angle theta.

    Only the product g * t * delta_m enters the decoherence factor.
    """

    j: SpinQuantumNumber
    theta: float
    g: float
    t: TimeLike
    delta_m: float

    @property
    def phase(self) -> TimeLike:
        """g t dm."""
        return self.g * np.asarray(self.t, dtype=float) * self.delta_m


@dataclass(frozen=True, eq=False)
class AxialPCoefficients:
    """c_l = c_{l0}, l = 0..2j, of rho_0 = sum_l c_l Yhat_{l0}."""

    j: SpinQuantumNumber
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if c.size != self.j.dimension:
            raise ValidationError(f"expected {self.j.dimension} coefficients, got {c.size}")
        c0 = 0.5 / math.sqrt(math.pi)
        if abs(c[0] - c0) > config.STRUCTURE_TOL:
            raise ValidationError(f"c_0 must be 1/(2 sqrt(pi)), got {c[0]!r}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def isotropic(cls, j: SpinQuantumNumber) -> "AxialPCoefficients":
        """Coefficients of the maximally mixed state."""
        c = np.zeros(j.dimension)
        c[0] = 0.5 / math.sqrt(math.pi)
        return cls(j, c)


# ----- spin-coherent environment -----

def gamma_pure(params: CoherentGammaParams) -> Union[complex, np.ndarray]:
    """[cos(a/2) + i sin(a/2) cos(theta)]^(2j), a = g t dm."""
    half = 0.5 * params.phase
    base = np.cos(half) + 1j * np.sin(half) * math.cos(params.theta)
    out = base ** params.j.twice_j
    return complex(out) if np.ndim(out) == 0 else out


def gamma_pure_modsq(params: CoherentGammaParams) -> Union[float, np.ndarray]:
    """[cos^2(theta) + cos^2(a/2) sin^2(theta)]^(2j)."""
    half = 0.5 * params.phase
    bracket = math.cos(params.theta) ** 2 + np.cos(half) ** 2 * math.sin(params.theta) ** 2
    out = bracket ** params.j.twice_j
    return float(out) if np.ndim(out) == 0 else out


def gamma_pure_short_time(params: CoherentGammaParams) -> Union[float, np.ndarray]:
    """Gaussian approximation of |gamma_pure| for g t dm << 1."""
    a = params.phase
    out = np.exp(-0.25 * params.j.j * math.sin(params.theta) ** 2 * a ** 2)
    return float(out) if np.ndim(out) == 0 else out


def gamma_pure_oracle(params: CoherentGammaParams, phi: float = 0.0) -> complex:
    """<n| exp(-i g t dm S_z) |n> with dense matrices (scalar t only)."""
    state = spin_coherent_state(params.j, params.theta, phi)
    return gamma_trace_oracle(state, params.g, float(params.t), params.delta_m)


# ----- general initial state -----

def gamma_trace_oracle(rho: SpinState, g: float, t: float, delta_m: float) -> complex:
    """Tr[rho exp(-i g t dm S_z)]; S_z is diagonal, so only diag(rho) enters."""
    phases = np.exp(-1j * g * t * delta_m * magnetic_numbers(rho.j))
    return complex(np.sum(np.diag(rho.rho) * phases))


def dirichlet_kernel(j: SpinQuantumNumber, g: float, t: TimeLike, delta_m: float) -> Union[complex, np.ndarray]:
    """(1/(2j+1)) sum_l exp(-i g t dm l): the maximally mixed environment."""
    a = g * np.asarray(t, dtype=float) * delta_m
    m = magnetic_numbers(j)
    out = np.mean(np.exp(-1j * np.multiply.outer(a, m)), axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def legendre_moment(l: int, k: int) -> float:
    """I_lk = integral_{-1}^{1} x^k P_l(x) dx.

    With l = 2n + p, k = 2r + p (p the common parity) and r >= n:
        I_lk = r!/(r-n)! * Gamma(r + p + 1/2) / Gamma(n + r + p + 3/2)
    and zero for opposite parity or k < l. The moments are all non-negative.
    """
    if l < 0 or k < 0:
        raise ValidationError(f"l and k must be non-negative, got l={l}, k={k}")
    if (k + l) % 2 or k < l:
        return 0.0
    p = l % 2
    n, r = (l - p) // 2, (k - p) // 2
    falling = scipy.special.poch(r - n + 1, n)          # r!/(r-n)!
    ratio = 1.0 / scipy.special.poch(r + p + 0.5, n + 1)  # Gamma(a)/Gamma(a+n+1)
    return float(falling * ratio)


def legendre_moment_quadrature(l: int, k: int, nodes: int = 0) -> float:
    """Gauss-Legendre evaluation of I_lk (exact once nodes > (k+l)/2)."""
    n = nodes or (k + l) // 2 + 2
    x, w = np.polynomial.legendre.leggauss(n)
    return float(np.sum(w * x ** k * scipy.special.eval_legendre(l, x)))


def _binomial_row(twice_j: int) -> np.ndarray:
    return scipy.special.comb(twice_j, np.arange(twice_j + 1), exact=False)


def gamma_general(coeffs: AxialPCoefficients, g: float, t: TimeLike, delta_m: float) -> Union[complex, np.ndarray]:
    """gamma = sqrt(pi) sum_l c_l sqrt(2l+1) sum_{k>=l} C(2j,k) c^(2j-k) (i s)^k I_lk.

    c = cos(g t dm / 2), s = sin(g t dm / 2).
    """
    n2j = coeffs.j.twice_j
    half = 0.5 * g * np.asarray(t, dtype=float) * delta_m
    c, s = np.cos(half), np.sin(half)
    binom = _binomial_row(n2j)

    # terms[k] = C(2j,k) c^(2j-k) (i s)^k
    terms = [binom[k] * c ** (n2j - k) * (1j * s) ** k for k in range(n2j + 1)]
    total = np.zeros(np.shape(half), dtype=complex)
    for l in range(n2j + 1):
        cl = coeffs.c[l]
        if cl == 0.0:
            continue
        inner = np.zeros(np.shape(half), dtype=complex)
        for k in range(l, n2j + 1):
            ilk = legendre_moment(l, k)
            if ilk:
                inner = inner + terms[k] * ilk
        total = total + cl * math.sqrt(2 * l + 1) * inner
    out = math.sqrt(math.pi) * total
    return complex(out) if np.ndim(out) == 0 else out


# ----- P-representation basis -----

@functools.lru_cache(maxsize=64)
def _coherent_nodes(j: SpinQuantumNumber, nodes: int):
    """Gauss-Legendre nodes x = cos(theta), weights, and |<m|n(theta)>|^2 per node."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    pops = np.array([np.real(np.diag(spin_coherent_state(j, math.acos(xi)).rho)) for xi in x])
    return x, w, pops


def _yhat_diagonal(l: int, j: SpinQuantumNumber, nodes: int) -> np.ndarray:
    x, w, pops = _coherent_nodes(j, nodes)
    ylm = math.sqrt((2 * l + 1) / (4.0 * math.pi)) * scipy.special.eval_legendre(l, x)
    # phi integral gives 2*pi on the diagonal and kills the off-diagonal terms
    return 2.0 * math.pi * (w * ylm) @ pops


def build_yhat(l: int, j: SpinQuantumNumber) -> np.ndarray:
    """Yhat_{l0} = integral d^2n Y_{l0}(theta) |n><n|, diagonal in the S_z basis.

    Gauss-Legendre over cos(theta), starting at 2(2j+1) nodes and doubling
    until successive results agree to QUAD_TOL.
    """
    if not 0 <= l <= j.twice_j:
        raise ValidationError(f"l must lie in [0, 2j={j.twice_j}], got {l}")
    nodes = 2 * j.dimension
    prev = _yhat_diagonal(l, j, nodes)
    for _ in range(config.QUAD_MAX_DOUBLINGS):
        nodes *= 2
        cur = _yhat_diagonal(l, j, nodes)
        if np.max(np.abs(cur - prev)) < config.QUAD_TOL:
            return np.diag(cur).astype(complex)
        prev = cur
    raise NumericalError(f"Yhat_{l}0 quadrature did not converge for j={j}")


@functools.lru_cache(maxsize=None)
def yhat_table(j: SpinQuantumNumber) -> np.ndarray:
    """Columns are diag(Yhat_{l0}) for l = 0..2j."""
    cols = [np.real(np.diag(build_yhat(l, j))) for l in range(j.dimension)]
    table = np.column_stack(cols)
    table.setflags(write=False)
    return table


def extract_axial_coefficients(rho: SpinState) -> AxialPCoefficients:
    """Least-squares projection of diag(rho) onto span{diag(Yhat_{l0})}."""
    table = yhat_table(rho.j)
    target = np.real(np.diag(rho.rho))
    c, _, rank, _ = scipy.linalg.lstsq(table, target)
    if rank < rho.j.dimension:
        raise NumericalError(f"Yhat basis is rank deficient ({rank} < {rho.j.dimension})")
    c = np.array(c, dtype=float)
    c0 = 0.5 / math.sqrt(math.pi)
    if abs(c[0] - c0) > config.DERIVED_TOL:
        raise NumericalError(f"extracted c_0={c[0]!r} differs from 1/(2 sqrt(pi))")
    c[0] = c0
    return AxialPCoefficients(rho.j, c)
