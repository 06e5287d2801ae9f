"""Rotating-wave (Jaynes-Cummings) ladder: closed-form doublets and ground state."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ModelParams, Parity, Spectrum, SpinFockState


@dataclass(frozen=True)
class RwaDoublet:
    """Manifold ``{|e,n>, |g,n+1>}``; amplitudes are ``(amp_c, amp_d)`` per branch."""

    n: int
    E_lower: float
    E_upper: float
    amp_c: tuple[float, float]
    amp_d: tuple[float, float]
    rabi: float

    @property
    def parity(self) -> Parity:
        return Parity.ODD if self.n % 2 == 0 else Parity.EVEN

    def state(self, branch: int, M: int | None = None) -> SpinFockState:
        """Lab-frame state of branch 0 (lower) or 1 (upper)."""
        M = self.n + 1 if M is None else M
        if M < self.n + 1:
            raise ValueError("truncation too small for this manifold")
        upper = np.zeros(M + 1)
        lower = np.zeros(M + 1)
        upper[self.n] = self.amp_c[branch]
        lower[self.n + 1] = self.amp_d[branch]
        return SpinFockState(upper, lower)


def rabi_frequency(params: ModelParams, n: int) -> float:
    return math.sqrt(params.detuning**2 + 4 * params.g**2 * (n + 1))


def rwa_doublet(params: ModelParams, n: int) -> RwaDoublet:
    if n < 0:
        raise ValueError("manifold index must be >= 0")
    R = rabi_frequency(params, n)
    centre = n + 0.5
    coupling = params.g * math.sqrt(n + 1)
    half_detuning = params.detuning / 2
    # |e,n> sits at centre + detuning/2, |g,n+1> at centre - detuning/2
    if R == 0:
        amps = ((1.0, 0.0), (0.0, 1.0))
    elif coupling == 0:
        bare_e_upper = half_detuning >= 0
        amps = ((0.0, 1.0), (1.0, 0.0)) if bare_e_upper else ((1.0, 0.0), (0.0, 1.0))
    else:
        amps = []
        for lam in (-R / 2, R / 2):
            # rows of (h - lam) v = 0; take the one without cancellation
            if abs(lam - half_detuning) >= abs(lam + half_detuning):
                c, d = coupling, lam - half_detuning
            else:
                c, d = lam + half_detuning, coupling
            nrm = math.hypot(c, d)
            c, d = c / nrm, d / nrm
            if c < 0 or (c == 0 and d < 0):
                c, d = -c, -d
            amps.append((c, d))
    return RwaDoublet(
        n=n,
        E_lower=centre - R / 2,
        E_upper=centre + R / 2,
        amp_c=(amps[0][0], amps[1][0]),
        amp_d=(amps[0][1], amps[1][1]),
        rabi=R,
    )


def rwa_ground(params: ModelParams, M: int = 1) -> tuple[float, SpinFockState]:
    return -params.delta / 2, SpinFockState.bare("g", 0, M)


def rwa_spectrum(params: ModelParams, count: int) -> Spectrum:
    """Lowest ``count`` RWA levels: ``|g,0>`` plus every doublet branch."""
    energies = [-params.delta / 2]
    parities = [Parity.EVEN]
    # lower branches increase with n once n + 1 > g^2 / 4
    n = 0
    while True:
        dbl = rwa_doublet(params, n)
        energies += [dbl.E_lower, dbl.E_upper]
        parities += [dbl.parity, dbl.parity]
        if len(energies) >= count:
            floor = (n + 1) + 0.5 - rabi_frequency(params, n + 1) / 2
            if floor > sorted(energies)[count - 1] and 4 * (n + 1) > params.g**2:
                break
        n += 1
    return Spectrum.from_values(energies, parities, params, "rwa", 0, count)
