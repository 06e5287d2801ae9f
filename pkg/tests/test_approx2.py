import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabiladder.approx2 import (
    CubicFamily,
    Family,
    LevelKind,
    SecondOrderLevelLabel,
    det2nd_general,
    first_order_level,
    first_order_spectrum,
    omega_m,
    resonant_cubic,
    resonant_cubic_solution,
    second_order_energy,
    second_order_energy_general,
    second_order_labels,
    second_order_spectrum,
    second_order_state,
    series_energy,
    series_energy_of,
    series_spectrum,
    zero_order_level,
    zero_order_spectrum,
)
from rabiladder.core import (
    DecoupledModelError,
    ModelParams,
    Parity,
    build_parity_block,
    parity_expectation,
    rotate_to_lab,
)
from rabiladder.exact import exact_spectrum

GS = SecondOrderLevelLabel.gs()
FX = SecondOrderLevelLabel.first_excited()


def test_omega_vanishes_at_zero_order_root():
    assert omega_m(-0.5, 0, Parity.EVEN, ModelParams(1.0, 0.1)) == 0.0
    assert omega_m(0.0, 1, Parity.ODD, ModelParams(1.0, 0.5)) == pytest.approx(1.0)


def test_omega_rejects_zero_coupling():
    with pytest.raises(DecoupledModelError):
        omega_m(0.0, 0, Parity.EVEN, ModelParams(1.0, 0.0))


def test_zero_order_levels():
    p = ModelParams(1.0, 0.3)
    assert [zero_order_level(m, Parity.EVEN, p) for m in range(4)] == [-0.5, 1.5, 1.5, 3.5]
    assert [zero_order_level(m, Parity.ODD, p) for m in range(4)] == [0.5, 0.5, 2.5, 2.5]
    with pytest.raises(ValueError):
        zero_order_level(-1, Parity.EVEN, p)


def test_first_order_resonant():
    p = ModelParams(1.0, 0.1)
    assert first_order_level(0, -1, p) == pytest.approx(0.4)
    assert first_order_level(3, 1, p) == pytest.approx(3.7)
    with pytest.raises(ValueError):
        first_order_level(0, 0, p)


@pytest.mark.parametrize(
    "m, parity, family",
    [
        (0, Parity.EVEN, Family.CASE1),
        (1, Parity.ODD, Family.CASE1),
        (0, Parity.ODD, Family.CASE2),
        (1, Parity.EVEN, Family.CASE2),
        (4, Parity.EVEN, Family.CASE1),
        (7, Parity.EVEN, Family.CASE2),
    ],
)
def test_cubic_family_assignment(m, parity, family):
    fam = CubicFamily.of(m, parity)
    assert fam.family is family
    assert fam.parity is parity


def test_label_mapping():
    assert (GS.cubic_family, GS.root_position) == (CubicFamily(Family.CASE1, 0), 0)
    assert (FX.cubic_family, FX.root_position) == (CubicFamily(Family.CASE2, 0), 0)
    b1 = SecondOrderLevelLabel.branch1(3)
    assert (b1.cubic_family, b1.root_position) == (CubicFamily(Family.CASE1, 2), 1)
    b2 = SecondOrderLevelLabel.branch2(0)
    assert (b2.cubic_family, b2.root_position) == (CubicFamily(Family.CASE2, 0), 1)
    assert GS.parity is Parity.EVEN and FX.parity is Parity.ODD
    assert b1.kind is LevelKind.BRANCH1


def test_branch1_requires_positive_index():
    with pytest.raises(ValueError):
        SecondOrderLevelLabel.branch1(0)


def test_resonant_cubic_decoupled_roots():
    # g = 0: Case1 m=0 has the zero-order roots {-1/2, 3/2, 3/2} and Gamma = 0
    sol = resonant_cubic_solution(CubicFamily(Family.CASE1, 0), 0.0)
    assert sol.Gamma == 0.0
    assert sol.roots == pytest.approx((-0.5, 1.5, 1.5))
    assert resonant_cubic(CubicFamily(Family.CASE1, 0), 0.0) == (-2.5, 0.75, 1.125)
    sol2 = resonant_cubic_solution(CubicFamily(Family.CASE2, 0), 0.0)
    assert sol2.roots == pytest.approx((0.5, 0.5, 2.5))


@pytest.mark.parametrize("m", [0, 1, 2, 5])
@pytest.mark.parametrize("parity", list(Parity))
def test_resonant_cubic_is_section_determinant(m, parity):
    g = 0.37
    fam = CubicFamily.of(m, parity)
    roots = resonant_cubic_solution(fam, g).roots
    section = build_parity_block(ModelParams(1.0, g), parity, m + 2).dense()[m:, m:]
    assert np.allclose(roots, np.linalg.eigvalsh(section), atol=1e-12)


def test_omega_roots_match_case1_cubic():
    g = 0.1
    # zero of the 3x3 determinant written through the kernels
    for E in resonant_cubic_solution(CubicFamily(Family.CASE1, 0), g).roots:
        p = ModelParams(1.0, g)
        o0, o1, o2 = (omega_m(E, k, Parity.EVEN, p) for k in range(3))
        det = o0 * o1 * o2 - 2 * o0 - o2
        assert abs(det) < 1e-10 * max(1.0, abs(o0 * o1 * o2))


def test_gamma_negative_across_ladder():
    worst = -math.inf
    for m in range(51):
        for family in Family:
            for g in np.linspace(0.01, 2.0, 60):
                worst = max(worst, resonant_cubic_solution(CubicFamily(family, m), g).Gamma)
    assert worst < 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 50), st.sampled_from(list(Family)), st.floats(1e-3, 2.0))
def test_resonant_root_sum(m, family, g):
    sol = resonant_cubic_solution(CubicFamily(family, m), g)
    assert len(sol.roots) == 3
    assert abs(sum(sol.roots) + sol.b) < 1e-10


def test_second_order_energies_at_weak_coupling():
    g = 0.1
    assert second_order_energy(GS, g) == pytest.approx(-0.5050124, abs=1e-7)
    assert second_order_energy(FX, g) == pytest.approx(0.3951363, abs=1e-7)
    assert second_order_energy(SecondOrderLevelLabel.branch1(1), g) == pytest.approx(1.3612395, abs=1e-7)


def test_second_order_energy_rejects_negative_g():
    with pytest.raises(ValueError):
        second_order_energy(GS, -0.1)


def test_general_detuning_reduces_to_resonant_cubic():
    for label in second_order_labels(10):
        fam = label.cubic_family
        roots = det2nd_general(fam.m, fam.parity, ModelParams(1.0, 0.2))
        assert roots[label.root_position] == pytest.approx(second_order_energy(label, 0.2), abs=1e-12)


def test_general_detuning_example():
    roots = det2nd_general(0, Parity.EVEN, ModelParams(1.1, 0.05))
    assert len(roots) == 3
    assert roots[0] < -0.55


def test_general_detuning_decoupled_limit():
    p = ModelParams(1.3, 0.0)
    assert second_order_energy_general(GS, p) == pytest.approx(-0.65)
    with pytest.raises(DecoupledModelError):
        det2nd_general(0, Parity.EVEN, p)


def test_series_values():
    g = 0.1
    assert series_energy("EGS", 0, g) == pytest.approx(-0.5050125)
    assert series_energy("E1EX", 0, g) == pytest.approx(0.5 - 0.1 - 0.005 + 0.000125)
    assert series_energy("E2n", 0, g) == pytest.approx(0.5 + 0.1 - 0.005 - 0.000125)
    with pytest.raises(ValueError):
        series_energy("E1n", 0, g)
    with pytest.raises(ValueError):
        series_energy("bogus", 0, g)


def test_series_branch1_order_g4():
    # error(2 g0) / error(g0) for E1n, n = 1
    label = SecondOrderLevelLabel.branch1(1)
    err = [abs(second_order_energy(label, g) - series_energy_of(label, g)) for g in (0.01, 0.02)]
    assert 12 <= err[1] / err[0] <= 20


def test_series_ground_state_order_g5_or_better():
    err = [abs(second_order_energy(GS, g) - series_energy_of(GS, g)) for g in (0.01, 0.02)]
    assert err[1] / err[0] >= 2**5 * 0.9


@pytest.mark.parametrize("label", [GS, FX, SecondOrderLevelLabel.branch1(2), SecondOrderLevelLabel.branch2(3)])
def test_second_order_state_is_section_eigenvector(label):
    g = 0.2
    state = second_order_state(label, g)
    fam = label.cubic_family
    section = build_parity_block(ModelParams(1.0, g), fam.parity, fam.m + 2).dense()[fam.m :, fam.m :]
    v = state.coeffs[fam.m :]
    E = second_order_energy(label, g)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert np.allclose(section @ v, E * v, atol=1e-10)
    lab = rotate_to_lab(second_order_state(label, g, 12))
    assert parity_expectation(lab) == pytest.approx(label.parity.sign)


def test_second_order_state_padding():
    with pytest.raises(ValueError):
        second_order_state(FX, 0.1, M=1)
    with pytest.raises(DecoupledModelError):
        second_order_state(FX, 0.0)


def test_second_order_ground_state_weak_admixture():
    coeffs = second_order_state(GS, 0.1).coeffs
    assert coeffs[0] > 0.99
    # counter-rotating admixture of |e,1>: -g / (1 + delta)
    assert coeffs[1] == pytest.approx(-0.05, rel=0.01)


def test_low_levels_track_exact_at_weak_coupling():
    # ground state and the 1EX/2EX pair; frozen from the exact solver
    p = ModelParams(1.0, 0.1)
    exact = exact_spectrum(p, 60, 3).energies
    approx = second_order_spectrum(p, 3).energies
    assert np.max(np.abs(exact - approx)) < 5e-5


@pytest.mark.parametrize("g", [0.02, 0.05])
def test_excited_doublet_deviation_is_a_missing_g2_shift(g):
    # the 3x3 section drops the coupling to index m-1; for Branch n the
    # resulting error is (n/4 + 1/2) g^2 to leading order
    p = ModelParams(1.0, g)
    exact = exact_spectrum(p, 60, 12)
    for n in (1, 2):
        label = SecondOrderLevelLabel.branch1(n)
        E2 = second_order_energy(label, g)
        Ex = min(exact.energies, key=lambda e: abs(e - E2))
        assert E2 - Ex == pytest.approx((n / 4 + 0.5) * g**2, rel=0.1)


def test_spectrum_builders():
    p = ModelParams(1.0, 0.1)
    assert zero_order_spectrum(p, 3).energies == pytest.approx([-0.5, 0.5, 0.5])
    assert first_order_spectrum(p, 3).energies == pytest.approx([-0.5, 0.4, 0.6])
    assert series_spectrum(p, 1).energies == pytest.approx([-0.5050125])
    spec = second_order_spectrum(p, 8)
    assert len(spec) == 8
    assert np.all(np.diff(spec.energies) >= 0)
    with pytest.raises(ValueError):
        series_spectrum(ModelParams(1.2, 0.1), 4)


def test_second_order_spectrum_off_resonance():
    p = ModelParams(1.5, 0.1)
    spec = second_order_spectrum(p, 6)
    exact = exact_spectrum(p, 40, 6)
    assert abs(spec.energies[0] - exact.energies[0]) < 1e-4
