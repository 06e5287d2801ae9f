"""Domain types, Hamiltonians and parity for the quantum Rabi model.

Units: the cavity frequency is fixed to 1, so the atomic splitting
``delta``, the coupling ``g`` and every energy are dimensionless.

Lab-frame basis ordering is ``|e,0>..|e,M>, |g,0>..|g,M>``.  The rotated
(parity-resolved) frame carries a single coefficient vector ``c_0..c_M`` per
parity block; see :func:`rotate_to_lab` for the map back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

METHODS = ("exact", "ed-oracle", "rwa", "order0", "order1", "order2", "series")


class QRMError(Exception):
    """Base class for errors raised by this package."""


class DecoupledModelError(QRMError, ValueError):
    """Raised when an operation needs g != 0 (use the closed forms instead)."""


class NumericalError(QRMError, ArithmeticError):
    """Non-finite intermediate, failed eigensolve, or degenerate configuration."""


class Parity(IntEnum):
    """Eigenvalue of (-1)**(photon number + atomic excitation)."""

    EVEN = 1
    ODD = -1

    @property
    def sign(self) -> int:
        return int(self)

    @property
    def label(self) -> str:
        return "even" if self is Parity.EVEN else "odd"

    @classmethod
    def parse(cls, value: "str | int | Parity") -> "Parity":
        if isinstance(value, Parity):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("even", "+", "+1", "e"):
                return cls.EVEN
            if key in ("odd", "-", "-1", "o"):
                return cls.ODD
            raise ValueError(f"unknown parity {value!r}")
        return cls(int(value))


@dataclass(frozen=True)
class ModelParams:
    """Atomic splitting ``delta`` and coupling ``g`` (cavity frequency = 1)."""

    delta: float
    g: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and math.isfinite(self.g)):
            raise ValueError(f"parameters must be finite, got delta={self.delta}, g={self.g}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    @property
    def detuning(self) -> float:
        return self.delta - 1.0

    @property
    def is_resonant(self) -> bool:
        return self.delta == 1.0

    def with_g(self, g: float) -> "ModelParams":
        return ModelParams(self.delta, g)


@dataclass(frozen=True, eq=False)
class SpinFockState:
    """Two-component state: ``upper`` = atom excited, ``lower`` = atom ground."""

    upper: FloatArray
    lower: FloatArray

    def __post_init__(self) -> None:
        upper = np.asarray(self.upper, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        if upper.shape != lower.shape or upper.ndim != 1:
            raise ValueError("upper and lower must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(upper)) and np.all(np.isfinite(lower))):
            raise NumericalError("state amplitudes must be finite")
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "lower", lower)

    @property
    def truncation(self) -> int:
        return self.upper.size - 1

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.upper**2) + np.sum(self.lower**2)))

    def vector(self) -> FloatArray:
        """Concatenated lab-frame amplitudes in the canonical basis order."""
        return np.concatenate([self.upper, self.lower])

    @classmethod
    def from_vector(cls, vec: Sequence[float]) -> "SpinFockState":
        vec = np.asarray(vec, dtype=float)
        if vec.size % 2:
            raise ValueError("vector length must be even")
        half = vec.size // 2
        return cls(vec[:half].copy(), vec[half:].copy())

    @classmethod
    def bare(cls, atom: str, n: int, M: int) -> "SpinFockState":
        """Bare product state ``|atom, n>`` with ``atom`` in {'e', 'g'}."""
        if not 0 <= n <= M:
            raise ValueError(f"photon number {n} outside 0..{M}")
        upper = np.zeros(M + 1)
        lower = np.zeros(M + 1)
        if atom == "e":
            upper[n] = 1.0
        elif atom == "g":
            lower[n] = 1.0
        else:
            raise ValueError(f"atom must be 'e' or 'g', got {atom!r}")
        return cls(upper, lower)

    def padded(self, M: int) -> "SpinFockState":
        """Zero-pad (never truncate) to photon cutoff ``M``."""
        if M < self.truncation:
            raise ValueError(f"cannot pad truncation {self.truncation} down to {M}")
        extra = M - self.truncation
        return SpinFockState(np.pad(self.upper, (0, extra)), np.pad(self.lower, (0, extra)))

    def normalized(self) -> "SpinFockState":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero state")
        return SpinFockState(self.upper / nrm, self.lower / nrm)

    def flip_atom(self) -> "SpinFockState":
        """Apply ``|e><g| + |g><e|``: swap the two components."""
        return SpinFockState(self.lower.copy(), self.upper.copy())


@dataclass(frozen=True, eq=False)
class ParityBlockState:
    """Rotated-frame coefficients ``c_0..c_M`` of one parity sector."""

    parity: Parity
    coeffs: FloatArray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-d array")
        object.__setattr__(self, "parity", Parity.parse(self.parity))
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def truncation(self) -> int:
        return self.coeffs.size - 1


@dataclass(frozen=True)
class EnergyLevel:
    index: int
    parity: Parity
    energy: float
    method: str
    truncation: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.energy):
            raise NumericalError(f"non-finite energy at level {self.index}")
        if self.index < 0:
            raise ValueError("level index must be >= 0")
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")


@dataclass(frozen=True)
class Spectrum:
    """Levels sorted by energy; exact ties put even parity first."""

    levels: tuple[EnergyLevel, ...]
    params: ModelParams

    @classmethod
    def from_values(
        cls,
        energies: Iterable[float],
        parities: Iterable[Parity | int],
        params: ModelParams,
        method: str,
        truncation: int = 0,
        count: int | None = None,
    ) -> "Spectrum":
        energies = np.asarray(list(energies), dtype=float)
        signs = np.asarray([int(p) for p in parities], dtype=int)
        if energies.shape != signs.shape:
            raise ValueError("energies and parities differ in length")
        # lexsort keys: last is primary; -sign puts EVEN (+1) first on ties
        order = np.lexsort((-signs, energies))
        if count is not None:
            order = order[:count]
        levels = tuple(
            EnergyLevel(i, Parity(int(signs[j])), float(energies[j]), method, truncation)
            for i, j in enumerate(order)
        )
        return cls(levels, params)

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, i: int) -> EnergyLevel:
        return self.levels[i]

    @property
    def energies(self) -> FloatArray:
        return np.array([lvl.energy for lvl in self.levels])

    @property
    def parities(self) -> list[Parity]:
        return [lvl.parity for lvl in self.levels]

    def of_parity(self, parity: Parity) -> list[EnergyLevel]:
        return [lvl for lvl in self.levels if lvl.parity is parity]


@dataclass(frozen=True, eq=False)
class TridiagonalBlock:
    """Symmetric tridiagonal matrix stored as its diagonal and off-diagonal."""

    diag: FloatArray
    off: FloatArray
    parity: Parity = field(default=Parity.EVEN)

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> FloatArray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def gershgorin(self) -> tuple[float, float]:
        radius = np.zeros_like(self.diag)
        radius[:-1] += np.abs(self.off)
        radius[1:] += np.abs(self.off)
        return float(np.min(self.diag - radius)), float(np.max(self.diag + radius))


def _check_truncation(M: int) -> None:
    if int(M) != M or M < 1:
        raise ValueError(f"truncation M must be an integer >= 1, got {M}")


def build_lab_hamiltonian(params: ModelParams, M: int) -> FloatArray:
    """Dense ``H = (delta/2) sz + a^dag a + g (a^dag + a) sx`` on 2(M+1) states."""
    _check_truncation(M)
    n = np.arange(M + 1, dtype=float)
    size = M + 1
    field_op = np.diag(np.sqrt(n[1:]), 1)
    field_op = field_op + field_op.T
    H = np.zeros((2 * size, 2 * size))
    H[:size, :size] = np.diag(n + params.delta / 2)
    H[size:, size:] = np.diag(n - params.delta / 2)
    H[:size, size:] = params.g * field_op
    H[size:, :size] = params.g * field_op
    return H


def block_diagonal(params: ModelParams, parity: Parity, M: int) -> FloatArray:
    """Diagonal ``d_m = m - s (delta/2) (-1)^m`` of one parity block."""
    m = np.arange(M + 1)
    alternating = np.where(m % 2 == 0, 1.0, -1.0)
    return m - Parity.parse(parity).sign * (params.delta / 2) * alternating


def build_parity_block(params: ModelParams, parity: Parity, M: int) -> TridiagonalBlock:
    """Tridiagonal block with off-diagonal ``g sqrt(m+1)`` between rows m, m+1."""
    _check_truncation(M)
    parity = Parity.parse(parity)
    off = params.g * np.sqrt(np.arange(1, M + 1, dtype=float))
    return TridiagonalBlock(block_diagonal(params, parity, M), off, parity)


def parity_diagonal(M: int) -> FloatArray:
    n = np.arange(M + 1)
    even_n = np.where(n % 2 == 0, 1.0, -1.0)
    return np.concatenate([-even_n, even_n])


def parity_operator(M: int) -> FloatArray:
    """Diagonal ``(-1)**N_exc``: ``(-1)^(n+1)`` on ``|e,n>``, ``(-1)^n`` on ``|g,n>``."""
    _check_truncation(M)
    return np.diag(parity_diagonal(M))


def parity_expectation(state: SpinFockState, *, atol: float = 1e-8) -> float:
    norm = state.norm
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state must be normalized (norm = {norm:.3e})")
    vec = state.vector()
    return float(np.dot(parity_diagonal(state.truncation), vec * vec))


def fix_phase(vec: FloatArray, rtol: float = 1e-12) -> FloatArray:
    """Flip the overall sign so that the first non-negligible entry is positive."""
    vec = np.asarray(vec, dtype=float)
    scale = np.max(np.abs(vec)) if vec.size else 0.0
    nonzero = np.flatnonzero(np.abs(vec) > rtol * scale)
    if nonzero.size and vec[nonzero[0]] < 0:
        return -vec
    return vec


def rotate_to_lab(block: ParityBlockState) -> SpinFockState:
    """Map rotated-frame coefficients back to a normalized lab-frame state.

    The rotated-frame spinor is ``(c_n, s (-1)^n c_n)``; applying
    ``(1/sqrt2) [[1, -1], [1, 1]]`` gives
    ``upper_n = (1 - s(-1)^n) c_n / sqrt2`` and
    ``lower_n = (1 + s(-1)^n) c_n / sqrt2``.
    """
    c = block.coeffs
    if not np.all(np.isfinite(c)):
        raise NumericalError("block coefficients must be finite")
    if not np.any(c):
        raise ValueError("all-zero coefficient vector")
    n = np.arange(c.size)
    twist = block.parity.sign * np.where(n % 2 == 0, 1.0, -1.0)
    upper = (c - twist * c) / math.sqrt(2.0)
    lower = (c + twist * c) / math.sqrt(2.0)
    vec = fix_phase(np.concatenate([upper, lower]))
    vec = vec / np.linalg.norm(vec)
    return SpinFockState.from_vector(vec)

