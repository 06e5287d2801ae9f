"""Real roots of monic cubics ``x^3 + b x^2 + c x + d`` in trigonometric form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

GAMMA_ZERO_RTOL = 1e-12
TRIPLE_ATOL = 1e-12
MAX_POLISH_STEPS = 4


@dataclass(frozen=True)
class CubicSolution:
    """Coefficients, the invariants ``A, B, C``, ``Gamma = B^2 - 4AC`` and roots.

    ``theta`` is ``nan`` unless ``Gamma < 0``.  Roots are ascending; a double
    root appears twice.
    """

    b: float
    c: float
    d: float
    A: float
    B: float
    C: float
    Gamma: float
    theta: float
    roots: tuple[float, ...]

    def residuals(self) -> np.ndarray:
        r = np.asarray(self.roots)
        return ((r + self.b) * r + self.c) * r + self.d


def _exact_value(x: float, b: float, c: float, d: float) -> Fraction:
    X = Fraction(x)
    return ((X + Fraction(b)) * X + Fraction(c)) * X + Fraction(d)


def _newton_polish(x: float, b: float, c: float, d: float) -> float:
    """Newton steps on the exactly evaluated cubic, kept only while |p| shrinks.

    Exact evaluation matters for close root pairs, where the rounding error of
    Horner's rule divided by the small derivative swamps the root.
    """
    p = _exact_value(x, b, c, d)
    for _ in range(MAX_POLISH_STEPS):
        if p == 0:
            break
        dp = (3 * x + 2 * b) * x + c
        if dp == 0 or not math.isfinite(float(p) / dp):
            break
        y = x - float(p) / dp
        q = _exact_value(y, b, c, d)
        # near a double root a step can overshoot
        if abs(q) >= abs(p):
            break
        x, p = y, q
    return x


def _classify(b: float, c: float, d: float) -> tuple[float, list[float]]:
    """Angle and unpolished roots of a cubic with O(1) coefficients."""
    A = b * b - 3 * c
    B = b * c - 9 * d
    C = c * c - 3 * b * d
    Gamma = B * B - 4 * A * C
    scale = max(B * B, abs(4 * A * C), np.finfo(float).tiny)
    theta = math.nan

    if abs(A) <= TRIPLE_ATOL and abs(B) <= TRIPLE_ATOL:
        roots = [-b / 3] * 3
    elif abs(Gamma) <= GAMMA_ZERO_RTOL * scale:
        K = B / A
        roots = [-b + K, -K / 2, -K / 2]
    elif Gamma < 0:
        sqrt_A = math.sqrt(A)
        arg = (2 * A * b - 3 * B) / (2 * A * sqrt_A)
        theta = math.acos(min(1.0, max(-1.0, arg))) / 3
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        roots = [
            (-b + sqrt_A * (cos_t + math.sqrt(3) * sin_t)) / 3,
            (-b + sqrt_A * (cos_t - math.sqrt(3) * sin_t)) / 3,
            (-b - 2 * sqrt_A * cos_t) / 3,
        ]
    else:
        root_gamma = math.sqrt(Gamma)
        Y1 = A * b + 1.5 * (-B + root_gamma)
        Y2 = A * b + 1.5 * (-B - root_gamma)
        roots = [(-b - (np.cbrt(Y1) + np.cbrt(Y2))) / 3]
    return theta, roots


def solve_cubic_real(b: float, c: float, d: float) -> CubicSolution:
    if not all(math.isfinite(v) for v in (b, c, d)):
        raise ValueError(f"cubic coefficients must be finite: {(b, c, d)}")
    # x = s y brings the coefficients to O(1), so A, B, C cannot under- or overflow
    s = max(abs(b), math.sqrt(abs(c)), abs(d) ** (1 / 3))
    if s == 0:
        return CubicSolution(b, c, d, 0.0, 0.0, 0.0, 0.0, math.nan, (0.0, 0.0, 0.0))
    theta, roots = _classify(b / s, c / s / s, d / s / s / s)
    roots = sorted(_newton_polish(float(r) * s, b, c, d) for r in roots)
    A = b * b - 3 * c
    B = b * c - 9 * d
    C = c * c - 3 * b * d
    return CubicSolution(b, c, d, A, B, C, B * B - 4 * A * C, theta, tuple(roots))
