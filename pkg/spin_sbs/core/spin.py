# -*- coding: utf-8 -*-
"""Spin-j operator algebra, states and distance measures.

Conventions
-----------
- Spins are stored as ``twice_j`` (an integer) so half-integers stay exact.
- The S_z basis is ordered by *descending* magnetic number,
  ``m = +j, j-1, ..., -j``; ``|j;-j>`` is the last basis vector.
- hbar = 1; every matrix function goes through a full Hermitian
  eigendecomposition (dimensions here are small).

Everything in this module is a pure function of its inputs; returned
arrays are marked read-only.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from spin_sbs import config
from spin_sbs.core.errors import NumericalError, ValidationError
from spin_sbs.core.values import format_half, parse_twice

ArrayLike = Union[np.ndarray, Sequence[Sequence[complex]]]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpinQuantumNumber:
    """Spin quantum number j, stored as the integer 2j."""

    twice_j: int

    def __post_init__(self):
        if isinstance(self.twice_j, bool) or int(self.twice_j) != self.twice_j:
            raise ValidationError(f"twice_j must be an integer, got {self.twice_j!r}")
        object.__setattr__(self, "twice_j", int(self.twice_j))
        if self.twice_j < 0:
            raise ValidationError(f"twice_j must be non-negative, got {self.twice_j}")
        if self.twice_j > config.MAX_TWICE_J:
            raise ValidationError(f"2j={self.twice_j} exceeds the cap {config.MAX_TWICE_J}")

    @classmethod
    def parse(cls, text: str) -> "SpinQuantumNumber":
        return cls(parse_twice(text))

    @classmethod
    def of(cls, j: Union["SpinQuantumNumber", float, int, str]) -> "SpinQuantumNumber":
        """Coerce a spin given as a SpinQuantumNumber, a number or a token."""
        if isinstance(j, SpinQuantumNumber):
            return j
        if isinstance(j, str):
            return cls.parse(j)
        doubled = 2.0 * float(j)
        if doubled != round(doubled):
            raise ValidationError(f"not a half-integer spin: {j!r}")
        return cls(int(round(doubled)))

    @property
    def j(self) -> float:
        return self.twice_j / 2.0

    @property
    def dimension(self) -> int:
        return self.twice_j + 1

    def magnetic_numbers(self) -> np.ndarray:
        """Magnetic numbers in basis order: +j ... -j."""
        return magnetic_numbers(self)

    def index_of(self, m: float) -> int:
        """Basis index of magnetic number m."""
        twice_m = 2.0 * float(m)
        if twice_m != round(twice_m):
            raise ValidationError(f"m={m!r} is not a half-integer")
        twice_m = int(round(twice_m))
        if abs(twice_m) > self.twice_j or (self.twice_j - twice_m) % 2:
            raise ValidationError(f"m={m!r} is not a magnetic number of j={self}")
        return (self.twice_j - twice_m) // 2

    def __str__(self) -> str:
        return format_half(self.twice_j)


def magnetic_numbers(j: SpinQuantumNumber) -> np.ndarray:
    return j.twice_j / 2.0 - np.arange(j.dimension, dtype=float)


def _check_hermitian(a: np.ndarray, tol: float, what: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what} has non-finite entries")
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise ValidationError(f"{what} is not Hermitian (max deviation {dev:.3g})")


@dataclass(frozen=True, eq=False)
class SpinOperator:
    """Dense Hermitian (2j+1)x(2j+1) operator tagged with its spin."""

    j: SpinQuantumNumber
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.j.dimension, self.j.dimension):
            raise ValidationError(f"operator shape {m.shape} does not match 2j+1={self.j.dimension}")
        object.__setattr__(self, "matrix", _frozen(m))

    def __matmul__(self, other: "SpinOperator") -> np.ndarray:
        return self.matrix @ _as_matrix(other)


@dataclass(frozen=True, eq=False)
class SpinState:
    """Density matrix of a single spin-j system."""

    j: SpinQuantumNumber
    rho: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rho, dtype=complex)
        if r.shape != (self.j.dimension, self.j.dimension):
            raise ValidationError(f"state shape {r.shape} does not match 2j+1={self.j.dimension}")
        _check_hermitian(r, config.STRUCTURE_TOL, "density matrix")
        r = 0.5 * (r + r.conj().T)
        tr = float(np.real(np.trace(r)))
        if abs(tr - 1.0) > config.STRUCTURE_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        wmin = float(np.min(scipy.linalg.eigvalsh(r)))
        if wmin < -config.STATE_NEG_TOL:
            raise ValidationError(f"density matrix has negative eigenvalue {wmin:.3g}")
        object.__setattr__(self, "rho", _frozen(r))

    @classmethod
    def pure(cls, j: SpinQuantumNumber, vector: Sequence[complex]) -> "SpinState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValidationError("state vector is zero")
        v = v / norm
        return cls(j, np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, j: SpinQuantumNumber) -> "SpinState":
        return cls(j, np.eye(j.dimension, dtype=complex) / j.dimension)

    @property
    def dimension(self) -> int:
        return self.j.dimension


@dataclass(frozen=True, eq=False)
class SystemState:
    """Initial central-spin state, alpha[a, b] = <m_a| sigma_0S |m_b>."""

    j_s: SpinQuantumNumber
    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex)
        n = self.j_s.dimension
        if a.shape != (n, n):
            raise ValidationError(f"alpha shape {a.shape} does not match 2j_S+1={n}")
        diag = np.diag(a)
        if np.max(np.abs(diag.imag)) > config.STRUCTURE_TOL:
            raise ValidationError("alpha diagonal must be real")
        if np.min(diag.real) < -config.STRUCTURE_TOL:
            raise ValidationError("alpha diagonal must be non-negative")
        if abs(float(np.sum(diag.real)) - 1.0) > config.STRUCTURE_TOL:
            raise ValidationError("alpha diagonal must sum to 1")
        object.__setattr__(self, "alpha", _frozen(a))

    @classmethod
    def equal_superposition(cls, j_s: SpinQuantumNumber, m: float, m_prime: float) -> "SystemState":
        """(|m> + |m'>)/sqrt(2) for two distinct magnetic numbers."""
        a, b = j_s.index_of(m), j_s.index_of(m_prime)
        if a == b:
            raise ValidationError("m and m_prime must differ")
        v = np.zeros(j_s.dimension, dtype=complex)
        v[a] = v[b] = 1.0 / math.sqrt(2.0)
        return cls(j_s, np.outer(v, v.conj()))

    @classmethod
    def from_populations(cls, j_s: SpinQuantumNumber, populations: Sequence[float]) -> "SystemState":
        """Diagonal (fully dephased) system state."""
        p = np.asarray(populations, dtype=float)
        return cls(j_s, np.diag(p).astype(complex))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.alpha))


def _as_matrix(a: Union[SpinOperator, SpinState, ArrayLike]) -> np.ndarray:
    if isinstance(a, SpinOperator):
        return a.matrix
    if isinstance(a, SpinState):
        return a.rho
    return np.asarray(a, dtype=complex)


@functools.lru_cache(maxsize=None)
def build_spin_operators(j: SpinQuantumNumber) -> Tuple[SpinOperator, SpinOperator, SpinOperator]:
    """(S_x, S_y, S_z) for spin j in the descending S_z basis."""
    m = magnetic_numbers(j)
    n = j.dimension
    jj = j.j * (j.j + 1.0)

    # S+|m> = sqrt(j(j+1) - m(m+1)) |m+1>, and |m+1> sits one index earlier.
    s_plus = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        s_plus[i - 1, i] = math.sqrt(jj - m[i] * (m[i] + 1.0))
    s_minus = s_plus.conj().T

    sx = 0.5 * (s_plus + s_minus)
    sy = -0.5j * (s_plus - s_minus)
    sz = np.diag(m).astype(complex)
    return SpinOperator(j, sx), SpinOperator(j, sy), SpinOperator(j, sz)


def hermitian_matrix_function(a: Union[SpinOperator, SpinState, ArrayLike],
                              f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """U f(Lambda) U^dagger from the eigendecomposition of a Hermitian matrix.

    ``f`` receives the real eigenvalue array and may return complex values,
    so ``f = lambda w: np.exp(-1j * t * w)`` gives exp(-itA).
    """
    m = _as_matrix(a)
    _check_hermitian(m, config.DERIVED_TOL, "matrix")
    w, u = scipy.linalg.eigh(0.5 * (m + m.conj().T))
    return (u * f(w)) @ u.conj().T


def unitary_evolution(h: Union[SpinOperator, ArrayLike], t: float) -> np.ndarray:
    """exp(-i t H) for Hermitian H."""
    return hermitian_matrix_function(h, lambda w: np.exp(-1j * float(t) * w))


def _sqrt_psd(w: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(w, 0.0, None))


def fidelity(rho: SpinState, sigma: SpinState) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho))."""
    if rho.dimension != sigma.dimension:
        raise ValidationError(f"dimension mismatch: {rho.dimension} vs {sigma.dimension}")
    root = hermitian_matrix_function(rho.rho, _sqrt_psd)
    inner = root @ sigma.rho @ root
    w = scipy.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    if w.size and w.min() < -config.FIDELITY_NEG_TOL:
        raise NumericalError(f"sqrt(rho) sigma sqrt(rho) has eigenvalue {w.min():.3g}")
    return float(np.sum(_sqrt_psd(w)))


def trace_distance(rho: SpinState, sigma: SpinState) -> float:
    """(1/2) ||rho - sigma||_1."""
    if rho.dimension != sigma.dimension:
        raise ValidationError(f"dimension mismatch: {rho.dimension} vs {sigma.dimension}")
    w = scipy.linalg.eigvalsh(rho.rho - sigma.rho)
    return 0.5 * float(np.sum(np.abs(w)))


def purity(state: SpinState) -> float:
    return float(np.real(np.trace(state.rho @ state.rho)))


def expectation(state: SpinState, op: Union[SpinOperator, ArrayLike]) -> float:
    """<A> = Tr(rho A), real part (A Hermitian)."""
    return float(np.real(np.trace(state.rho @ _as_matrix(op))))


def spin_coherent_state(j: SpinQuantumNumber, theta: float, phi: float = 0.0) -> SpinState:
    """|n> = exp[-i theta (sin(phi) S_x - cos(phi) S_y)] |j;-j>.

    <S> = j (sin(theta) cos(phi), sin(theta) sin(phi), -cos(theta));
    theta = 0 is the pole state |j;-j>.
    """
    if not (0.0 <= theta <= math.pi):
        raise ValidationError(f"theta must lie in [0, pi], got {theta!r}")
    sx, sy, _ = build_spin_operators(j)
    generator = math.sin(phi) * sx.matrix - math.cos(phi) * sy.matrix
    rot = unitary_evolution(generator, theta)
    return SpinState.pure(j, rot[:, -1])


def _check_beta_omega(beta_omega: float) -> float:
    x = float(beta_omega)
    if not math.isfinite(x) or x < 0.0:
        raise ValidationError(f"beta_omega must be finite and >= 0, got {beta_omega!r}")
    return x


def partition_function(j: SpinQuantumNumber, beta_omega: float) -> float:
    """Z = Tr exp(-2 beta Omega S_x) = sinh((2j+1) x) / sinh(x), x = beta Omega."""
    x = _check_beta_omega(beta_omega)
    a = j.dimension
    if x == 0.0:
        return float(a)
    if a * x < 300.0:
        return math.sinh(a * x) / math.sinh(x)
    # same ratio, factored to keep sinh from overflowing
    return math.exp(j.twice_j * x) * (-math.expm1(-2.0 * a * x)) / (-math.expm1(-2.0 * x))


def thermal_state(j: SpinQuantumNumber, beta_omega: float, axis: str = "x") -> SpinState:
    """exp(-2 beta Omega S_axis) / Z; the environment default is the x axis."""
    x = _check_beta_omega(beta_omega)
    ops = dict(zip("xyz", build_spin_operators(j)))
    if axis not in ops:
        raise ValidationError(f"axis must be one of x, y, z, got {axis!r}")
    # shift the exponent by its maximum (at eigenvalue -j)
    unnorm = hermitian_matrix_function(ops[axis], lambda w: np.exp(-2.0 * x * (w + j.j)))
    return SpinState(j, unnorm / np.real(np.trace(unnorm)))
