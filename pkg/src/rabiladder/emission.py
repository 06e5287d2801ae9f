"""Vacuum Rabi splitting: emission peak positions and heights.

An initial odd-parity state is expanded on the odd-parity dressed states.  Peak
``i`` sits at ``E_i - E_GS`` (decay to the dressed ground state) and has height
``h_i = |<i|initial>|^2``.  Ranks are global excited-state indices taken from
the sorted spectrum of the same method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import approx2
from .approx2 import SecondOrderLevelLabel
from .core import (
    DecoupledModelError,
    ModelParams,
    Parity,
    ParityBlockState,
    SpinFockState,
    build_parity_block,
    rotate_to_lab,
)
from .exact import (
    SolverConfig,
    block_eigensystem,
    block_eigenvector,
    converge_spectrum,
    exact_spectrum,
    find_levels,
)

CAPTURE_TOL = 1e-6
DEFAULT_M = 40
EMISSION_METHODS = ("series", "second-order", "exact")


class InitialKind(Enum):
    VGS = "vgs"
    E0 = "e0"

    @classmethod
    def parse(cls, value: "str | InitialKind") -> "InitialKind":
        if isinstance(value, InitialKind):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"initial kind must be 'vgs' or 'e0', got {value!r}") from None


@dataclass(frozen=True)
class Peak:
    rank: int
    frequency: float
    height: float


@dataclass(frozen=True)
class PeakSet:
    """Peaks of one initial state; ``incomplete`` flags weight missing from the basis."""

    peaks: tuple[Peak, ...]
    method: str
    captured_weight: float = 1.0
    incomplete: bool = False

    @property
    def total_height(self) -> float:
        return float(sum(p.height for p in self.peaks))

    def by_rank(self) -> dict[int, Peak]:
        return {p.rank: p for p in self.peaks}

    def visible(self, threshold: float = 1e-2) -> list[Peak]:
        return [p for p in self.peaks if p.height > threshold]

    def sorted_by_frequency(self) -> "PeakSet":
        peaks = tuple(sorted(self.peaks, key=lambda p: (p.frequency, p.rank)))
        return PeakSet(peaks, self.method, self.captured_weight, self.incomplete)

    def main_pair(self) -> tuple[Peak, Peak]:
        """The two lowest-ranked peaks (the 1EX/2EX pair at weak coupling)."""
        ordered = sorted(self.peaks, key=lambda p: p.rank)
        if len(ordered) < 2:
            raise ValueError("fewer than two peaks")
        return ordered[0], ordered[1]

    @property
    def main_ratio(self) -> float:
        h1, h2 = self.main_pair()
        return h1.height / h2.height


def _check_method(method: str) -> None:
    if method not in EMISSION_METHODS:
        raise ValueError(f"method must be one of {EMISSION_METHODS}, got {method!r}")


def _require_resonance(params: ModelParams, method: str) -> None:
    if not params.is_resonant:
        raise ValueError(f"method {method!r} is only defined at resonance (delta = 1)")


def _exact_ground_block(params: ModelParams, M: int) -> ParityBlockState:
    E = find_levels(params, Parity.EVEN, M, 1)[0]
    return ParityBlockState(Parity.EVEN, block_eigenvector(E, build_parity_block(params, Parity.EVEN, M)))


def prepare_initial(
    kind: InitialKind | str, params: ModelParams, method: str = "exact", M: int = DEFAULT_M
) -> SpinFockState:
    kind = InitialKind.parse(kind)
    if method not in ("second-order", "exact"):
        raise ValueError("initial states are prepared with 'second-order' or 'exact'")
    if kind is InitialKind.E0:
        return SpinFockState.bare("e", 0, M)
    if method == "exact":
        ground = rotate_to_lab(_exact_ground_block(params, M))
    else:
        _require_resonance(params, method)
        if params.g == 0:
            ground = SpinFockState.bare("g", 0, M)
        else:
            ground = rotate_to_lab(approx2.second_order_state(SecondOrderLevelLabel.gs(), params.g, M))
    return ground.flip_atom().normalized()


def _overlaps(initial: SpinFockState, states: list[SpinFockState]) -> np.ndarray:
    M = max(initial.truncation, max(s.truncation for s in states))
    vec = initial.padded(M).vector()
    return np.array([np.dot(s.padded(M).vector(), vec) for s in states])


def _decompose_exact(initial: SpinFockState, params: ModelParams, M: int) -> PeakSet:
    odd_E, odd_vecs = block_eigensystem(params, Parity.ODD, M)
    even_E = find_levels(params, Parity.EVEN, M, M + 1)
    ground = even_E[0]
    merged = np.concatenate([even_E, odd_E])
    signs = np.concatenate([np.ones(M + 1), -np.ones(M + 1)])
    order = np.lexsort((-signs, merged))
    rank_of = np.empty_like(order)
    rank_of[order] = np.arange(order.size)
    odd_ranks = rank_of[M + 1 :]

    kept = initial
    lost = 0.0
    if initial.truncation > M:
        tail = np.concatenate([initial.upper[M + 1 :], initial.lower[M + 1 :]])
        lost = float(np.dot(tail, tail))
        kept = SpinFockState(initial.upper[: M + 1], initial.lower[: M + 1])
    states = [rotate_to_lab(ParityBlockState(Parity.ODD, odd_vecs[:, j])) for j in range(M + 1)]
    amps = _overlaps(kept, states)
    heights = amps**2
    peaks = tuple(
        Peak(int(odd_ranks[j]), float(odd_E[j] - ground), float(heights[j])) for j in range(M + 1)
    )
    captured = float(np.sum(heights))
    return PeakSet(peaks, "exact", captured, lost > CAPTURE_TOL or 1 - captured > CAPTURE_TOL)


def _decompose_second_order(initial: SpinFockState, params: ModelParams) -> PeakSet:
    _require_resonance(params, "second-order")
    if params.g == 0:
        raise DecoupledModelError("second-order eigenstates need g != 0; use method 'series'")
    g = params.g
    count = max(8, 2 * initial.truncation + 4)
    levels = approx2.second_order_levels(params, count)
    ground = levels[0][1]
    M = max(initial.truncation, count + 4)
    peaks = []
    captured = 0.0
    for rank, (label, energy) in enumerate(levels):
        if label.parity is not Parity.ODD:
            continue
        state = rotate_to_lab(approx2.second_order_state(label, g, M))
        amp = _overlaps(initial, [state])[0]
        captured += amp**2
        peaks.append(Peak(rank, float(energy - ground), float(amp**2)))
    return PeakSet(tuple(peaks), "second-order", float(captured), abs(1 - captured) > CAPTURE_TOL)


def decompose_odd(
    initial: SpinFockState, params: ModelParams, method: str = "exact", M: int = DEFAULT_M
) -> PeakSet:
    """Overlap probabilities of ``initial`` on the odd-parity eigenstates."""
    norm = initial.norm
    if abs(norm - 1) > 1e-8:
        raise ValueError(f"initial state must be normalized (norm = {norm:.3e})")
    if method == "exact":
        return _decompose_exact(initial, params, M)
    if method == "second-order":
        return _decompose_second_order(initial, params)
    raise ValueError("decompose_odd supports 'second-order' and 'exact'")


def heights_series(kind: InitialKind | str, g: float) -> list[float]:
    """Small-g peak heights: four for VGS (ranks 1, 2, 5, 6), two for E0 (ranks 1, 2)."""
    kind = InitialKind.parse(kind)
    if kind is InitialKind.VGS:
        return [
            0.5 + g / 4 + 11 / 32 * g**3 - g**4 / 16,
            0.5 - g / 4 - 11 / 32 * g**3 - g**4 / 16,
            3 / 64 * g**6,
            g**4 / 16 + math.sqrt(3) / 48 * g**5,
        ]
    return [
        0.5 - g / 4 + 5 / 32 * g**3 - g**4 / 16,
        0.5 + g / 4 - 5 / 32 * g**3 - g**4 / 16,
    ]


# labels carrying the series heights, in the order heights_series returns them
_SERIES_LABELS = (
    SecondOrderLevelLabel.first_excited(),
    SecondOrderLevelLabel.branch2(0),
    SecondOrderLevelLabel.branch1(2),
    SecondOrderLevelLabel.branch2(2),
)


def _series_peaks(kind: InitialKind, params: ModelParams) -> PeakSet:
    _require_resonance(params, "series")
    g = params.g
    heights = heights_series(kind, g)
    labels = approx2.second_order_labels(12)
    energies = {str(lab): approx2.series_energy_of(lab, g) for lab in labels}
    ordered = sorted(labels, key=lambda lab: (energies[str(lab)], -lab.parity.sign))
    rank_of = {str(lab): r for r, lab in enumerate(ordered)}
    ground = approx2.series_energy("EGS", 0, g)
    peaks = tuple(
        Peak(rank_of[str(lab)], energies[str(lab)] - ground, h)
        for lab, h in zip(_SERIES_LABELS, heights)
    )
    return PeakSet(peaks, "series", float(sum(heights)), False)


def emission_peaks(
    kind: InitialKind | str, params: ModelParams, method: str = "exact", M: int = DEFAULT_M
) -> PeakSet:
    """Peak frequencies and heights, sorted by frequency."""
    _check_method(method)
    kind = InitialKind.parse(kind)
    if method == "series":
        return _series_peaks(kind, params).sorted_by_frequency()
    initial = prepare_initial(kind, params, method, M)
    return decompose_odd(initial, params, method, M).sorted_by_frequency()


def splitting(
    params: ModelParams, method: str = "series", M: int | None = None
) -> tuple[float, float]:
    """Splitting of the two lowest excited levels and the RWA value ``2g``."""
    _check_method(method)
    g = params.g
    rwa_value = 2 * abs(g)
    if method == "series":
        _require_resonance(params, method)
        return 2 * g - g**3 / 4, rwa_value
    if method == "second-order":
        _require_resonance(params, method)
        e1 = approx2.second_order_energy(SecondOrderLevelLabel.first_excited(), abs(g))
        e2 = approx2.second_order_energy(SecondOrderLevelLabel.branch2(0), abs(g))
        return e2 - e1, rwa_value
    if M is None:
        spectrum, _ = converge_spectrum(params, SolverConfig(level_count=3))
    else:
        spectrum = exact_spectrum(params, M, 3)
    return spectrum[2].energy - spectrum[1].energy, rwa_value
