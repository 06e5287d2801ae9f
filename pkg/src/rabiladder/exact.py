"""Numerically exact spectrum from the parity-resolved three-term recurrence.

Each parity sector reduces to a symmetric tridiagonal block.  Its eigenvalues
are the zeros of the truncation boundary condition of the recurrence; they are
located here by Sturm-count bisection on the block, which has the same zeros
but never overflows and cannot skip close roots.  :func:`ed_oracle` is an
independent dense diagonalization of the lab-frame Hamiltonian kept for
cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FloatArray,
    DecoupledModelError,
    ModelParams,
    NumericalError,
    Parity,
    ParityBlockState,
    QRMError,
    Spectrum,
    TridiagonalBlock,
    block_diagonal,
    build_lab_hamiltonian,
    build_parity_block,
    fix_phase,
    parity_diagonal,
)

RESCALE_THRESHOLD = 1e100
REFERENCE_STEP = 20
ABS_FLOOR_ENERGY = 1e-3
ABS_TOL_ENERGY = 1e-9


class ConvergenceError(QRMError):
    """Raised when ``M_max`` is reached; carries the partial result."""

    def __init__(self, message: str, spectrum: Spectrum, report: "ConvergenceReport"):
        super().__init__(message)
        self.spectrum = spectrum
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`converge_spectrum`.

    ``M`` is the starting truncation (``None`` picks the smallest one that
    holds ``level_count`` levels across both parities).
    """

    level_count: int = 20
    M: int | None = None
    tol_energy: float = 1e-7
    tol_root: float = 1e-12
    M_max: int = 400

    def __post_init__(self) -> None:
        if self.level_count < 1:
            raise ValueError("level_count must be >= 1")
        if not 0 < self.tol_root <= self.tol_energy:
            raise ValueError("need 0 < tol_root <= tol_energy")
        if self.M is not None and self.M < self.level_count / 2 + 2:
            raise ValueError(f"fixed M={self.M} too small for {self.level_count} levels")
        if self.M_max < self.start_truncation():
            raise ValueError("M_max below the starting truncation")

    def start_truncation(self) -> int:
        if self.M is not None:
            return self.M
        return max(1, math.ceil(self.level_count / 2))


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-level change between truncation ``M_final`` and ``M_final + 20``.

    ``per_level_delta`` is relative, except for levels with
    ``|E| < 1e-3`` where the absolute change is rescaled so that the same
    ``tol_energy`` threshold means ``|dE| < 1e-9``.
    """

    M_final: int
    per_level_delta: tuple[float, ...]
    converged: tuple[bool, ...]
    tol_energy: float

    @property
    def all_converged(self) -> bool:
        return all(self.converged)

    @property
    def converged_count(self) -> int:
        return sum(self.converged)


@dataclass(frozen=True, eq=False)
class RecurrenceResult:
    """Scaled coefficients: the true value is ``scaled[m] * exp(log_scale[m])``."""

    scaled: FloatArray
    log_scale: FloatArray

    def values(self) -> FloatArray:
        with np.errstate(over="ignore"):
            return self.scaled * np.exp(self.log_scale)


def _require_coupling(params: ModelParams) -> None:
    if params.g == 0:
        raise DecoupledModelError("g = 0 decouples the model; use the zero-order closed forms")


def recurrence_coefficients(
    E: float, params: ModelParams, parity: Parity, M: int
) -> RecurrenceResult:
    """Run the forward recurrence from ``c_0 = 1`` up to ``c_{M+1}``.

    ``c_{m+1} = [E - m + s(delta/2)(-1)^m] c_m / (g sqrt(m+1)) - sqrt(m/(m+1)) c_{m-1}``.
    Whenever the rolling pair exceeds 1e100 it is rescaled and the factor is
    accumulated in ``log_scale``.
    """
    _require_coupling(params)
    if M < 1:
        raise ValueError("M must be >= 1")
    parity = Parity.parse(parity)
    g = params.g
    d = block_diagonal(params, parity, M + 1)
    scaled = np.zeros(M + 2)
    log_scale = np.zeros(M + 2)
    scaled[0] = 1.0
    scaled[1] = (E - d[0]) / g
    log_acc = 0.0
    prev, cur = scaled[0], scaled[1]
    for m in range(1, M + 1):
        nxt = (E - d[m]) * cur / (g * math.sqrt(m + 1)) - math.sqrt(m / (m + 1)) * prev
        if not math.isfinite(nxt):
            raise NumericalError(f"non-finite recurrence value at m={m + 1}")
        prev, cur = cur, nxt
        big = max(abs(prev), abs(cur))
        if big > RESCALE_THRESHOLD:
            prev /= big
            cur /= big
            log_acc += math.log(big)
        scaled[m + 1] = cur
        log_scale[m + 1] = log_acc
        if big > RESCALE_THRESHOLD:
            scaled[m] = prev
            log_scale[m] = log_acc
    return RecurrenceResult(scaled, log_scale)


def boundary_value(
    E: float, params: ModelParams, parity: Parity, M: int
) -> tuple[int, float]:
    """Sign and log-magnitude of ``[E - M + s(delta/2)(-1)^M] c_M - g sqrt(M) c_{M-1}``.

    Returns ``(0, -inf)`` at an exact zero.
    """
    rec = recurrence_coefficients(E, params, parity, M)
    # c_M and c_{M-1} are stored on the scale of c_M
    shift = rec.log_scale[M] - rec.log_scale[M - 1]
    c_prev = rec.scaled[M - 1] * math.exp(-shift) if shift else rec.scaled[M - 1]
    d_M = block_diagonal(params, parity, M)[M]
    value = (E - d_M) * rec.scaled[M] - params.g * math.sqrt(M) * c_prev
    if value == 0:
        return 0, -math.inf
    return (1 if value > 0 else -1), math.log(abs(value)) + float(rec.log_scale[M])


def _sturm_counts(block: TridiagonalBlock, shifts: FloatArray) -> np.ndarray:
    """Number of eigenvalues strictly below each shift (negative LDL^T pivots)."""
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
    off_sq = block.off**2
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(off_sq, initial=0.0)))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        q = block.diag[0] - shifts
        q = np.where(q == 0.0, pivmin, q)
        count = (q < 0).astype(np.int64)
        for i in range(1, block.size):
            q = (block.diag[i] - shifts) - off_sq[i - 1] / q
            q = np.where(q == 0.0, pivmin, q)
            count += q < 0
    return count


def eig_count_below(E: float, params: ModelParams, parity: Parity, M: int) -> int:
    return int(_sturm_counts(build_parity_block(params, parity, M), np.array([E]))[0])


def bisect_block(block: TridiagonalBlock, k: int, tol_root: float = 1e-12) -> FloatArray:
    """The ``k`` lowest eigenvalues of ``block`` by simultaneous bisection."""
    if k > block.size:
        raise ValueError(f"requested {k} levels from a block of size {block.size}")
    if k <= 0:
        return np.empty(0)
    if not np.any(block.off):
        return np.sort(block.diag)[:k]
    lo_g, hi_g = block.gershgorin()
    pad = 1e-12 * max(1.0, abs(lo_g), abs(hi_g))
    lo = np.full(k, lo_g - pad)
    hi = np.full(k, hi_g + pad)
    target = np.arange(k)
    for _ in range(400):
        width = hi - lo
        active = width > tol_root
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        if np.all(stuck | ~active):
            break
        above = _sturm_counts(block, mid) > target
        hi = np.where(active & above, mid, hi)
        lo = np.where(active & ~above, mid, lo)
    return 0.5 * (lo + hi)


def find_levels(
    params: ModelParams, parity: Parity, M: int, k: int, tol_root: float = 1e-12
) -> FloatArray:
    """The ``k`` lowest roots of the boundary equation for one parity, ascending."""
    block = build_parity_block(params, parity, M)
    if k > M + 1:
        raise ValueError(f"k={k} exceeds the M+1={M + 1} roots available")
    return bisect_block(block, k, tol_root)


def exact_spectrum(
    params: ModelParams, M: int, count: int | None = None, tol_root: float = 1e-12
) -> Spectrum:
    """Both parity sectors at fixed truncation ``M``, merged and sorted."""
    per_block = M + 1 if count is None else min(count, M + 1)
    energies: list[float] = []
    parities: list[Parity] = []
    for parity in (Parity.EVEN, Parity.ODD):
        vals = find_levels(params, parity, M, per_block, tol_root)
        energies.extend(vals)
        parities.extend([parity] * vals.size)
    return Spectrum.from_values(energies, parities, params, "exact", M, count)


def _relative_change(values: FloatArray, reference: FloatArray, tol_energy: float) -> FloatArray:
    diff = np.abs(values - reference)
    scale = np.where(
        np.abs(reference) >= ABS_FLOOR_ENERGY, np.abs(reference), ABS_TOL_ENERGY / tol_energy
    )
    return diff / scale


def convergence_at(
    params: ModelParams,
    M: int,
    level_count: int,
    tol_energy: float = 1e-7,
    tol_root: float = 1e-12,
) -> tuple[Spectrum, ConvergenceReport]:
    """Compare the lowest ``level_count`` levels at ``M`` against ``M + 20``."""
    current = exact_spectrum(params, M, level_count, tol_root)
    reference = exact_spectrum(params, M + REFERENCE_STEP, level_count, tol_root)
    n = min(len(current), level_count)
    delta = _relative_change(current.energies[:n], reference.energies[:n], tol_energy)
    # levels the truncated space cannot hold count as unconverged
    per_level = [float(x) for x in delta] + [math.inf] * (level_count - n)
    report = ConvergenceReport(
        M_final=M,
        per_level_delta=tuple(per_level),
        converged=tuple(x < tol_energy for x in per_level),
        tol_energy=tol_energy,
    )
    return current, report


def converge_spectrum(
    params: ModelParams, config: SolverConfig | None = None
) -> tuple[Spectrum, ConvergenceReport]:
    """Grow ``M`` one step at a time until every requested level has converged.

    Raises :class:`ConvergenceError` (with the last partial report) if
    ``config.M_max`` is reached first.
    """
    config = config or SolverConfig()
    M = config.start_truncation()
    while True:
        spectrum, report = convergence_at(
            params, M, config.level_count, config.tol_energy, config.tol_root
        )
        if report.all_converged:
            return spectrum, report
        if M >= config.M_max:
            raise ConvergenceError(
                f"{report.converged_count}/{config.level_count} levels converged at M_max={M}",
                spectrum,
                report,
            )
        M += 1


def block_eigenvector(E: float, block: TridiagonalBlock) -> FloatArray:
    """Normalized eigenvector of ``block`` for the (converged) eigenvalue ``E``.

    The forward sweep is the three-term recurrence written for the ratios
    ``c_{m+1}/c_m``; a backward sweep runs the same recurrence from the
    truncation edge.  The two are joined where the twist is smallest, which
    keeps the minimal solution accurate where a one-sided run would be swamped
    by the growing one.
    """
    n = block.size
    d = block.diag - E
    off = block.off
    if n == 1:
        return np.ones(1)
    tiny = np.finfo(float).eps * max(1.0, float(np.max(np.abs(block.diag))), float(np.max(np.abs(off), initial=0.0)))
    fwd = np.empty(n)
    bwd = np.empty(n)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        fwd[0] = d[0]
        for i in range(1, n):
            prev = fwd[i - 1] if fwd[i - 1] != 0 else tiny
            fwd[i] = d[i] - off[i - 1] ** 2 / prev
        bwd[n - 1] = d[n - 1]
        for i in range(n - 2, -1, -1):
            nxt = bwd[i + 1] if bwd[i + 1] != 0 else tiny
            bwd[i] = d[i] - off[i] ** 2 / nxt
        twist = fwd + bwd - d
    twist = np.where(np.isfinite(twist), twist, np.inf)
    k = int(np.argmin(np.abs(twist)))
    z = np.zeros(n)
    z[k] = 1.0
    for i in range(k - 1, -1, -1):
        piv = fwd[i] if fwd[i] != 0 else tiny
        z[i] = -(off[i] / piv) * z[i + 1]
    for i in range(k + 1, n):
        piv = bwd[i] if bwd[i] != 0 else tiny
        z[i] = -(off[i - 1] / piv) * z[i - 1]
    if not np.all(np.isfinite(z)):
        raise NumericalError(f"eigenvector construction failed at E={E}")
    return fix_phase(z / np.linalg.norm(z))


def _residual(block: TridiagonalBlock, vec: FloatArray, E: float) -> float:
    Tv = block.diag * vec
    Tv[:-1] += block.off * vec[1:]
    Tv[1:] += block.off * vec[:-1]
    return float(np.linalg.norm(Tv - E * vec))


def eigenstate_at(
    E: float, params: ModelParams, parity: Parity, M: int, *, max_residual: float = 1e-4
) -> tuple[ParityBlockState, float]:
    """Coefficient vector at truncation ``M`` plus a truncation-aware residual.

    The residual is ``||T c - E c||`` for the block at ``M + 20``, with ``c``
    rebuilt by the recurrence at that larger truncation; it is small only if
    ``E`` is also an eigenvalue of the enlarged block.
    """
    parity = Parity.parse(parity)
    block = build_parity_block(params, parity, M)
    coeffs = block_eigenvector(E, block)
    big = build_parity_block(params, parity, M + REFERENCE_STEP)
    residual = _residual(big, block_eigenvector(E, big), E)
    if residual > max_residual:
        raise NumericalError(
            f"residual {residual:.2e} at E={E}: root unconverged in M or misbracketed"
        )
    return ParityBlockState(parity, coeffs), residual


def block_eigensystem(
    params: ModelParams, parity: Parity, M: int, tol_root: float = 1e-12
) -> tuple[FloatArray, FloatArray]:
    """All eigenvalues of one block and their vectors (columns)."""
    block = build_parity_block(params, parity, M)
    energies = bisect_block(block, block.size, tol_root)
    vectors = np.column_stack([block_eigenvector(E, block) for E in energies])
    return energies, vectors


def ed_eigensystem(params: ModelParams, M: int) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Dense diagonalization of the lab-frame matrix.

    Returns ``(energies, vectors, parity_signs)``.  Inside exactly degenerate
    clusters (g = 0, or level crossings) the vectors are rotated to diagonalize
    the parity operator, so every returned vector has definite parity.
    """
    H = build_lab_hamiltonian(params, M)
    try:
        energies, vectors = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"dense eigensolver failed: {exc}") from exc
    pdiag = parity_diagonal(M)
    scale = max(1.0, float(np.max(np.abs(energies))))
    start = 0
    n = energies.size
    while start < n:
        stop = start + 1
        while stop < n and energies[stop] - energies[stop - 1] < 1e-9 * scale:
            stop += 1
        if stop - start > 1:
            sub = vectors[:, start:stop]
            _, rot = np.linalg.eigh(sub.T @ (pdiag[:, None] * sub))
            vectors[:, start:stop] = sub @ rot
        start = stop
    expect = np.einsum("ij,i,ij->j", vectors, pdiag, vectors)
    signs = np.sign(expect)
    if np.any(np.abs(np.abs(expect) - 1.0) > 1e-8):
        raise NumericalError("eigenvector without definite parity in dense diagonalization")
    for j in range(n):
        vectors[:, j] = fix_phase(vectors[:, j])
    return energies, vectors, signs


def ed_oracle(params: ModelParams, M: int) -> Spectrum:
    energies, _, signs = ed_eigensystem(params, M)
    return Spectrum.from_values(energies, signs.astype(int), params, "ed-oracle", M)
