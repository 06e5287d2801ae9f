"""Zero-, first- and second-order truncations of the parity-block determinant.

The second-order levels come from 3x3 sections ``m, m+1, m+2`` of a parity
block.  At resonance (``delta = 1``) the section determinant is one of two
cubic families with closed-form coefficients; away from resonance the section
is diagonalized numerically.

Root selection is by ascending order: the physical doublet level is the middle
root of its cubic, and the two lowest levels of the model (ground state and
first excited state) are the smallest roots of the ``m = 0`` cubics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    DecoupledModelError,
    ModelParams,
    NumericalError,
    Parity,
    ParityBlockState,
    Spectrum,
    block_diagonal,
    build_parity_block,
)
from .cubic import CubicSolution, solve_cubic_real


class Family(Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"


@dataclass(frozen=True)
class CubicFamily:
    """Which resonant cubic a section ``(m, parity)`` produces.

    Case1 is ``m`` even with even parity or ``m`` odd with odd parity;
    Case2 is the complement.
    """

    family: Family
    m: int

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("ladder index m must be >= 0")

    @classmethod
    def of(cls, m: int, parity: Parity) -> "CubicFamily":
        parity = Parity.parse(parity)
        same = (m % 2 == 0) == (parity is Parity.EVEN)
        return cls(Family.CASE1 if same else Family.CASE2, m)

    @property
    def parity(self) -> Parity:
        even_m = self.m % 2 == 0
        if self.family is Family.CASE1:
            return Parity.EVEN if even_m else Parity.ODD
        return Parity.ODD if even_m else Parity.EVEN


class LevelKind(Enum):
    GS = "GS"
    FIRST_EXCITED = "FirstExcited"
    BRANCH1 = "Branch1n"
    BRANCH2 = "Branch2n"


@dataclass(frozen=True)
class SecondOrderLevelLabel:
    kind: LevelKind
    n: int = 0

    def __post_init__(self) -> None:
        if self.kind is LevelKind.BRANCH1 and self.n < 1:
            raise ValueError(
                "Branch1n needs n >= 1; the n = 0 member is the ground state (label GS)"
            )
        if self.kind is LevelKind.BRANCH2 and self.n < 0:
            raise ValueError("Branch2n needs n >= 0")
        if self.kind in (LevelKind.GS, LevelKind.FIRST_EXCITED) and self.n != 0:
            raise ValueError(f"{self.kind.value} takes no manifold index")

    @classmethod
    def gs(cls) -> "SecondOrderLevelLabel":
        return cls(LevelKind.GS)

    @classmethod
    def first_excited(cls) -> "SecondOrderLevelLabel":
        return cls(LevelKind.FIRST_EXCITED)

    @classmethod
    def branch1(cls, n: int) -> "SecondOrderLevelLabel":
        return cls(LevelKind.BRANCH1, n)

    @classmethod
    def branch2(cls, n: int) -> "SecondOrderLevelLabel":
        return cls(LevelKind.BRANCH2, n)

    @property
    def cubic_family(self) -> CubicFamily:
        if self.kind is LevelKind.GS:
            return CubicFamily(Family.CASE1, 0)
        if self.kind is LevelKind.FIRST_EXCITED:
            return CubicFamily(Family.CASE2, 0)
        if self.kind is LevelKind.BRANCH1:
            return CubicFamily(Family.CASE1, self.n - 1)
        return CubicFamily(Family.CASE2, self.n)

    @property
    def root_position(self) -> int:
        """0 for the smallest root, 1 for the middle one."""
        return 0 if self.kind in (LevelKind.GS, LevelKind.FIRST_EXCITED) else 1

    @property
    def parity(self) -> Parity:
        return self.cubic_family.parity

    def __str__(self) -> str:
        if self.kind in (LevelKind.GS, LevelKind.FIRST_EXCITED):
            return self.kind.value
        return f"{self.kind.value}(n={self.n})"


def omega_m(E: float, m: int, parity: Parity, params: ModelParams) -> float:
    """Diagonal kernel ``[m - E - s (delta/2) (-1)^m] / g``."""
    if params.g == 0:
        raise DecoupledModelError("the kernel divides by g; g = 0 is not allowed")
    sign = Parity.parse(parity).sign
    alternating = 1.0 if m % 2 == 0 else -1.0
    return (m - E - sign * params.delta / 2 * alternating) / params.g


def zero_order_level(m: int, parity: Parity, params: ModelParams) -> float:
    if m < 0:
        raise ValueError("m must be >= 0")
    sign = Parity.parse(parity).sign
    return m - sign * params.delta / 2 * (1.0 if m % 2 == 0 else -1.0)


def first_order_level(m: int, branch: int, params: ModelParams) -> float:
    """Roots of the 2x2 section ``m, m+1``; ``branch`` is -1 (lower) or +1 (upper)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if branch not in (-1, 1):
        raise ValueError("branch must be -1 or +1")
    root = math.sqrt((1 - params.delta) ** 2 + 4 * params.g**2 * (m + 1))
    return m + 0.5 + branch * 0.5 * root


def resonant_cubic(fam: CubicFamily, g: float) -> tuple[float, float, float]:
    """Monic coefficients ``(b, c, d)`` of the resonant section determinant."""
    m, g2 = fam.m, g * g
    if fam.family is Family.CASE1:
        b = -(3 * m + 2.5)
        c = (m + 1.5) * (3 * m + 0.5) - (2 * m + 3) * g2
        d = -(m - 0.5) * (m + 1.5) ** 2 + (2 * m * m + 4 * m + 0.5) * g2
    else:
        b = -(3 * m + 3.5)
        c = (m + 0.5) * (3 * m + 5.5) - (2 * m + 3) * g2
        d = -((m + 0.5) ** 2) * (m + 2.5) + (2 * m * m + 6 * m + 3.5) * g2
    return b, c, d


def _require_resonance(params: ModelParams) -> None:
    if not params.is_resonant:
        raise ValueError(
            f"closed-form cubics need delta = 1 (got {params.delta}); use det2nd_general"
        )


def resonant_cubic_solution(fam: CubicFamily, g: float) -> CubicSolution:
    return solve_cubic_real(*resonant_cubic(fam, g))


def second_order_energy(label: SecondOrderLevelLabel, g: float) -> float:
    """Resonant second-order energy of ``label`` from its closed-form cubic."""
    if g < 0:
        raise ValueError("g must be >= 0 (the spectrum is even in g)")
    sol = resonant_cubic_solution(label.cubic_family, g)
    if len(sol.roots) != 3:
        raise NumericalError(f"cubic for {label} has a single real root (Gamma = {sol.Gamma})")
    return sol.roots[label.root_position]


def det2nd_general(m: int, parity: Parity, params: ModelParams) -> np.ndarray:
    """Ascending roots of the 3x3 section ``m, m+1, m+2`` at any detuning."""
    if params.g == 0:
        raise DecoupledModelError("det2nd_general needs g != 0")
    if m < 0:
        raise ValueError("m must be >= 0")
    block = build_parity_block(params, parity, m + 2)
    section = block.dense()[m : m + 3, m : m + 3]
    return np.linalg.eigvalsh(section)


def second_order_energy_general(label: SecondOrderLevelLabel, params: ModelParams) -> float:
    """Same root selection as :func:`second_order_energy`, for any ``delta``."""
    if params.is_resonant:
        return second_order_energy(label, abs(params.g))
    fam = label.cubic_family
    if params.g == 0:
        d = block_diagonal(params, fam.parity, fam.m + 2)[fam.m :]
        return float(np.sort(d)[label.root_position])
    return float(det2nd_general(fam.m, fam.parity, params)[label.root_position])


def series_energy(kind: str, n: int, g: float) -> float:
    """Truncated small-g expansions of the resonant second-order levels.

    ``kind`` is one of ``E1n`` (n >= 1), ``E2n`` (n >= 0), ``EGS``, ``E1EX``.
    """
    if kind == "E1n":
        if n < 1:
            raise ValueError("E1n needs n >= 1")
        return (
            n + 0.5 - g * math.sqrt(n + 1) + n / 4 * g**2
            + (3 * n + 4) * n / (32 * math.sqrt(n + 1)) * g**3
        )
    if kind == "E2n":
        if n < 0:
            raise ValueError("E2n needs n >= 0")
        return (
            n + 0.5 + g * math.sqrt(n + 1) - (n + 2) / 4 * g**2
            - (n + 2) * (3 * n + 2) / (32 * math.sqrt(n + 1)) * g**3
        )
    if kind == "EGS":
        if n != 0:
            raise ValueError("EGS takes n = 0")
        return -0.5 - g**2 / 2 - g**4 / 8
    if kind == "E1EX":
        if n != 0:
            raise ValueError("E1EX takes n = 0")
        return 0.5 - g - g**2 / 2 + g**3 / 8
    raise ValueError(f"unknown series kind {kind!r}")


def series_energy_of(label: SecondOrderLevelLabel, g: float) -> float:
    kind = {
        LevelKind.GS: "EGS",
        LevelKind.FIRST_EXCITED: "E1EX",
        LevelKind.BRANCH1: "E1n",
        LevelKind.BRANCH2: "E2n",
    }[label.kind]
    return series_energy(kind, label.n, g)


def second_order_state(
    label: SecondOrderLevelLabel, g: float, M: int | None = None
) -> ParityBlockState:
    """Three-coefficient rotated-frame state of a resonant second-order level.

    ``c_m : c_{m+1} : c_{m+2} = -sqrt(m+1)/Omega_m : 1 : -sqrt(m+2)/Omega_{m+2}``,
    normalized and zero-padded to truncation ``M`` (default ``m + 2``).
    """
    if g == 0:
        raise DecoupledModelError("second-order states need g != 0")
    fam = label.cubic_family
    m, parity = fam.m, fam.parity
    params = ModelParams(1.0, g)
    E = second_order_energy(label, abs(g))
    om_lo = omega_m(E, m, parity, params)
    om_hi = omega_m(E, m + 2, parity, params)
    if om_lo == 0 or om_hi == 0:
        raise NumericalError(f"kernel vanishes at E={E} for {label}: degenerate section")
    M = m + 2 if M is None else M
    if M < m + 2:
        raise ValueError(f"truncation {M} cannot hold indices up to {m + 2}")
    coeffs = np.zeros(M + 1)
    coeffs[m : m + 3] = [-math.sqrt(m + 1) / om_lo, 1.0, -math.sqrt(m + 2) / om_hi]
    coeffs /= np.linalg.norm(coeffs)
    if coeffs[np.flatnonzero(coeffs)[0]] < 0:
        coeffs = -coeffs
    return ParityBlockState(parity, coeffs)


def second_order_labels(count: int) -> list[SecondOrderLevelLabel]:
    """Enough labels to cover the lowest ``count`` levels at moderate g."""
    top = count // 2 + 3
    labels = [SecondOrderLevelLabel.gs(), SecondOrderLevelLabel.first_excited()]
    labels += [SecondOrderLevelLabel.branch2(n) for n in range(0, top + 1)]
    labels += [SecondOrderLevelLabel.branch1(n) for n in range(1, top + 1)]
    return labels


def second_order_levels(
    params: ModelParams, count: int
) -> list[tuple[SecondOrderLevelLabel, float]]:
    """Lowest ``count`` second-order levels with their labels, ascending."""
    pairs = [
        (lab, second_order_energy_general(lab, params)) for lab in second_order_labels(count)
    ]
    pairs.sort(key=lambda p: (p[1], -p[0].parity.sign))
    return pairs[:count]


def second_order_spectrum(params: ModelParams, count: int) -> Spectrum:
    pairs = second_order_levels(params, count)
    return Spectrum.from_values(
        [e for _, e in pairs], [lab.parity for lab, _ in pairs], params, "order2"
    )


def series_spectrum(params: ModelParams, count: int) -> Spectrum:
    _require_resonance(params)
    labels = second_order_labels(count)
    energies = [series_energy_of(lab, params.g) for lab in labels]
    return Spectrum.from_values(
        energies, [lab.parity for lab in labels], params, "series", 0, count
    )


def zero_order_spectrum(params: ModelParams, count: int) -> Spectrum:
    energies, parities = [], []
    for m in range(count + 1):
        for parity in (Parity.EVEN, Parity.ODD):
            energies.append(zero_order_level(m, parity, params))
            parities.append(parity)
    return Spectrum.from_values(energies, parities, params, "order0", 0, count)


def first_order_spectrum(params: ModelParams, count: int) -> Spectrum:
    """Zero-order ground state plus both roots of every 2x2 section."""
    energies = [zero_order_level(0, Parity.EVEN, params)]
    parities = [Parity.EVEN]
    for m in range(count + 2 + int(params.g**2)):
        parity = Parity.ODD if m % 2 == 0 else Parity.EVEN
        for branch in (-1, 1):
            energies.append(first_order_level(m, branch, params))
            parities.append(parity)
    return Spectrum.from_values(energies, parities, params, "order1", 0, count)
