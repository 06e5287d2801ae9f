import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabiladder.cubic import solve_cubic_real

roots_st = st.floats(-20, 20, allow_nan=False)


def poly_from_roots(r1, r2, r3):
    return -(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3


def test_three_distinct_roots():
    sol = solve_cubic_real(*poly_from_roots(1.0, 2.0, 3.0))
    assert sol.roots == pytest.approx((1.0, 2.0, 3.0), abs=1e-13)
    assert sol.Gamma < 0
    assert 0 <= sol.theta <= math.pi / 3


def test_invariants_of_known_cubic():
    # x^3 - 6x^2 + 11x - 6
    sol = solve_cubic_real(-6.0, 11.0, -6.0)
    assert (sol.A, sol.B, sol.C) == (3.0, -12.0, 13.0)
    assert sol.Gamma == pytest.approx(144 - 156)


def test_double_root():
    sol = solve_cubic_real(*poly_from_roots(-0.5, 1.5, 1.5))
    assert sol.Gamma == 0
    assert sol.roots == pytest.approx((-0.5, 1.5, 1.5), abs=1e-12)


def test_triple_root():
    sol = solve_cubic_real(*poly_from_roots(2.0, 2.0, 2.0))
    assert sol.roots == pytest.approx((2.0, 2.0, 2.0))


def test_single_real_root():
    # (x - 1)(x^2 + 1)
    sol = solve_cubic_real(-1.0, 1.0, -1.0)
    assert sol.Gamma > 0
    assert sol.roots == pytest.approx((1.0,))
    assert math.isnan(sol.theta)


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        solve_cubic_real(math.nan, 0.0, 0.0)


@settings(max_examples=300, deadline=None)
@given(roots_st, roots_st, roots_st)
def test_recovers_three_real_roots(r1, r2, r3):
    spread = max(abs(r1), abs(r2), abs(r3), 1.0)
    sol = solve_cubic_real(*poly_from_roots(r1, r2, r3))
    expected = sorted((r1, r2, r3))
    if len(sol.roots) == 3:
        assert list(sol.roots) == sorted(sol.roots)
        # clustered roots are ill-conditioned: compare with a sqrt-eps allowance
        assert np.allclose(sol.roots, expected, atol=1e-6 * spread)
    else:
        # a near-coincident pair can be lost to rounding; the survivor is still a root
        assert min(abs(sol.roots[0] - r) for r in expected) <= 1e-4 * spread


@settings(max_examples=300, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_roots_satisfy_polynomial(b, c, d):
    sol = solve_cubic_real(b, c, d)
    assert len(sol.roots) in (1, 3)
    for r in sol.roots:
        scale = max(1.0, abs(r) ** 3, abs(b) * r * r, abs(c * r), abs(d))
        assert abs(((r + b) * r + c) * r + d) <= 1e-10 * scale


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 5), st.floats(0.1, 5))
def test_root_sum_identity_well_separated(r1, gap1, gap2):
    sol = solve_cubic_real(*poly_from_roots(r1, r1 + gap1, r1 + gap1 + gap2))
    assert len(sol.roots) == 3
    assert abs(sum(sol.roots) + sol.b) < 1e-10 * max(1.0, abs(r1) + gap1 + gap2)
    assert sol.roots[0] < sol.roots[1] < sol.roots[2]
    assert np.max(np.abs(sol.residuals())) <= 1e-10 * max(1.0, max(abs(r) for r in sol.roots) ** 3)
