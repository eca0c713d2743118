import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino_growth.kasteleyn import characteristic_polynomial
from domino_growth.laurent import newton_polygon
from domino_growth.thermo import (
    BOUNDARY,
    ROUGH,
    SMOOTH,
    classify_slope,
    edge_probabilities_at_field,
    gradient_from_slope,
    legendre_dual_ronkin,
    mean_slope_from_edges,
    ronkin,
    ronkin_full,
    ronkin_gradient,
    slope_from_gradient,
    smooth_slopes,
    surface_tension,
    torus_gap,
    vertex_edges,
)
from domino_growth.weights import PeriodicWeights, gauge_transform, spider_step

CATALAN = 0.915965594177219015054603514932
P_UNIFORM = characteristic_polynomial(PeriodicWeights.uniform(1))
W2 = PeriodicWeights.random(2, np.random.default_rng(2))
P2 = characteristic_polynomial(W2)
W1 = PeriodicWeights.random(1, np.random.default_rng(11))
P1 = characteristic_polynomial(W1)


def trapezoid_ronkin(P, B, M=2048):
    """Plain tensor trapezoid of log|P| on the torus at B (independent oracle)."""
    t = 2 * np.pi * (np.arange(M) + 0.5) / M
    Z, W = np.meshgrid(np.exp(B[0] + 1j * t), np.exp(B[1] + 1j * t), indexing="ij")
    return float(np.log(np.abs(P(Z, W))).mean())


def test_uniform_ronkin_at_origin():
    assert ronkin(P_UNIFORM, (0, 0)) == pytest.approx(4 * CATALAN / math.pi, abs=1e-9)


def test_ronkin_is_linear_off_the_amoeba():
    # |z| = e^3 dominates: R = log|c_(1,0)| + B1 with c_(1,0) = -1
    assert ronkin(P_UNIFORM, (3.0, 0.0)) == pytest.approx(3.0, abs=1e-10)
    assert np.allclose(ronkin_gradient(P_UNIFORM, (3.0, 0.0)), [1.0, 0.0])
    assert torus_gap(P_UNIFORM, (3.0, 0.0)) > 0


@pytest.mark.parametrize("B", [(0.3, -0.2), (0.0, 0.0), (1.0, 0.5), (-0.7, 0.9)])
def test_ronkin_matches_trapezoid_oracle(B):
    assert ronkin(P2, B) == pytest.approx(trapezoid_ronkin(P2, B), abs=2e-5)


@settings(max_examples=15, deadline=None)
@given(b1=st.floats(-2, 2), b2=st.floats(-2, 2))
def test_gradient_matches_finite_difference(b1, b2):
    h = 1e-4
    g = ronkin_gradient(P1, (b1, b2))
    fd = [
        (ronkin_full(P1, (b1 + h, b2)).value - ronkin_full(P1, (b1 - h, b2)).value) / (2 * h),
        (ronkin_full(P1, (b1, b2 + h)).value - ronkin_full(P1, (b1, b2 - h)).value) / (2 * h),
    ]
    assert np.allclose(g, fd, atol=1e-3)


@settings(max_examples=15, deadline=None)
@given(a=st.tuples(st.floats(-3, 3), st.floats(-3, 3)), b=st.tuples(st.floats(-3, 3), st.floats(-3, 3)))
def test_ronkin_convex_and_gradient_in_polygon(a, b):
    a, b = np.array(a), np.array(b)
    mid = ronkin_full(P2, (a + b) / 2).value
    assert mid <= (ronkin_full(P2, a).value + ronkin_full(P2, b).value) / 2 + 1e-9
    poly = newton_polygon(P2)
    assert poly.contains(tuple(ronkin_gradient(P2, a)), tol=1e-9)


def test_slope_frame_round_trip():
    rho = np.array([0.3, -0.7])
    assert np.allclose(slope_from_gradient(gradient_from_slope(rho)), rho)


@pytest.mark.parametrize("rho", [(0.0, 0.0), (0.3, 0.2), (-0.5, 0.1), (0.6, -0.25)])
def test_surface_tension_hits_the_slope(rho):
    st_ = surface_tension(P1, rho)
    assert np.allclose(slope_from_gradient(ronkin_gradient(P1, st_.B)), rho, atol=1e-8)
    assert st_.mismatch <= 1e-6


def test_uniform_surface_tension_at_zero():
    assert surface_tension(P_UNIFORM, (0, 0)).sigma == pytest.approx(-4 * CATALAN / math.pi, abs=1e-8)


def test_surface_tension_rejects_outside_slopes():
    with pytest.raises(ValueError):
        surface_tension(P_UNIFORM, (1.0, 0.0))
    with pytest.raises(ValueError):
        surface_tension(P_UNIFORM, (0.8, 0.8))


def test_surface_tension_shifts_by_a_constant_under_the_dynamics():
    w_next = spider_step(W1)
    P_next = characteristic_polynomial(w_next)
    shifts = []
    for rho in [(0.0, 0.3), (0.4, 0.1), (-0.2, -0.5)]:
        shifts.append(surface_tension(P_next, rho).sigma - surface_tension(P1, rho).sigma)
    assert np.ptp(shifts) < 1e-6


def test_legendre_dual_bounds_ronkin_from_below():
    B = np.array([0.2, -0.1])
    star = slope_from_gradient(ronkin_gradient(P1, B))
    far = [tuple(star + d) for d in ((0.2, 0.0), (0.0, -0.2))]
    assert legendre_dual_ronkin(P1, B, far) < ronkin(P1, B)
    # the supremum is attained at the slope selected by B
    assert legendre_dual_ronkin(P1, B, [tuple(star)] + far) == pytest.approx(ronkin(P1, B), abs=1e-6)


def test_classification_examples():
    assert classify_slope(P_UNIFORM, (0, 0)) == ROUGH
    assert classify_slope(P_UNIFORM, (0.3, 0.1)) == ROUGH
    assert classify_slope(P_UNIFORM, (1, 0)) == BOUNDARY
    assert smooth_slopes(P_UNIFORM) == set()
    two_periodic = PeriodicWeights.from_face_tuples(1, 0, {(0, 0): (0.5,) * 4, (1, 1): (1.0,) * 4})
    assert smooth_slopes(characteristic_polynomial(two_periodic)) == {(0, 0)}


def test_generic_two_periodic_census():
    found = smooth_slopes(P2)
    assert len(found) == 5
    assert classify_slope(P2, next(iter(found))) == SMOOTH


def test_uniform_edge_probabilities_are_quarter():
    edges = [(0, 0, "h"), (0, 0, "v"), (1, 0, "h"), (0, 1, "v"), (-1, 0, "h")]
    res = edge_probabilities_at_field(PeriodicWeights.uniform(1), (0.0, 0.0), edges)
    assert np.allclose(res.values, 0.25, atol=1e-6)
    assert res.imag_residue < 1e-6


@pytest.mark.parametrize("B", [(0.1, -0.3), (0.5, 0.4)])
def test_vertex_sums_and_gauge_invariance(B):
    verts = [(x, y) for x in range(4) for y in range(4)]
    edges = [e for v in verts for e in vertex_edges(*v)]
    p = edge_probabilities_at_field(W2, B, edges, P=P2).values.reshape(len(verts), 4)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-6)
    assert np.all((p > -1e-9) & (p < 1 + 1e-9))
    f = np.random.default_rng(3).uniform(0.5, 2.0, (4, 4))
    g = gauge_transform(W2, f)
    q = edge_probabilities_at_field(g, B, edges).values.reshape(len(verts), 4)
    assert np.allclose(p, q, atol=1e-6)


@pytest.mark.parametrize("B", [(0.1, -0.3), (0.8, 0.2)])
def test_mean_slope_matches_ronkin_gradient(B):
    expected = slope_from_gradient(ronkin_gradient(P2, B))
    assert np.allclose(mean_slope_from_edges(W2, B, P=P2), expected, atol=1e-6)
