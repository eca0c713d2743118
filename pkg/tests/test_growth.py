import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino_growth.growth import (
    EmpiricalShape,
    NotResolved,
    SmoothSlopeError,
    SpeedEstimate,
    SpeedTerms,
    StencilError,
    boundary_profile,
    bump_weights,
    corner_identity_residual,
    corner_profile,
    empirical_limit_shape,
    envelopes,
    facets,
    fit_growth_models,
    fluctuation_stats,
    hessian_from_stencil,
    limit_shape_hessian,
    shape_from_heights,
    speed_from_terms,
    speed_hessian,
    speed_kasteleyn,
    speed_limit_shape,
)
from domino_growth.growth import _gradient
from domino_growth.shuffle import sample_aztec_batch
from domino_growth.weights import PeriodicWeights

UNIFORM = PeriodicWeights.uniform(1)


def synthetic_shape(func, n=1, N=400, cells=41, spacing=2):
    """EmpiricalShape whose cell means are ``func(X1, X2)`` on a regular grid inside Q."""
    dx = 2 * n / (2 * n * N)
    centers = (np.arange(cells) - (cells - 1) / 2) * dx
    X1, X2 = np.meshgrid(centers, centers, indexing="ij")
    psi = func(X1, X2)
    psi = np.where(np.abs(X1) + np.abs(X2) <= 1 / (2 * n), psi, np.nan)
    return EmpiricalShape(n, N, 10, 0, 2 * n, spacing, centers, centers.copy(), psi, np.full(psi.shape, 1e-4),
                          _gradient(psi, spacing, dx), np.full((2 * N + 1, 2 * N + 1), np.nan))


# ---------------------------------------------------------------------------
# boundary data


@settings(max_examples=50)
@given(t=st.floats(0, 1))
def test_corner_profiles_match_boundary_and_envelopes(t):
    for n in (1, 2):
        half = 1 / (2 * n)
        x = (half * t, -half * (1 - t))  # lower-right boundary edge
        assert corner_profile(x, (n, 0), n) == pytest.approx(boundary_profile(x, n), abs=1e-12)
        assert corner_profile(x, (0, n), n) == pytest.approx(boundary_profile(x, n), abs=1e-12)
        lo, hi = envelopes(x, n)
        assert lo - 1e-12 <= boundary_profile(x, n) <= hi + 1e-12


def test_envelope_examples():
    assert envelopes((0, 0), 1) == (-0.25, 0.25)
    assert envelopes((0.5, 0), 1) == (0.25, 0.25)
    assert envelopes((0, -0.25), 2) == (-0.25, -0.25)
    with pytest.raises(ValueError):
        envelopes((0.4, 0.2), 1)


# ---------------------------------------------------------------------------
# speed bookkeeping


def test_speed_estimate_invariants():
    with pytest.raises(ValueError):
        SpeedEstimate((0, 0), 0.1, "KasteleynSum", {}, -1.0)
    d = SpeedEstimate((0, 0), 0.1, "LimitShape", {"N": 8}, 0.01, x=(0.1, 0.2)).to_dict()
    assert d["method"] == "LimitShape" and d["x"] == [0.1, 0.2]


def test_bump_weights():
    g = bump_weights(64)
    assert g.sum() == pytest.approx(1.0)
    assert np.allclose(g, g[::-1])
    assert g[0] < 1e-20


def test_speed_from_terms():
    a = np.full(16, 0.4)
    for avg in ("cesaro", "weighted"):
        v, err = speed_from_terms(a, np.zeros(16), avg)
        assert v == pytest.approx(0.1) and err == pytest.approx(0.0, abs=1e-15)
    # periodic terms: Cesaro averages converge like 1/K, bump averages much faster
    b = np.cos(2 * np.pi * 0.3819660112501051 * np.arange(128))
    vc, ec = speed_from_terms(b, np.zeros(128), "cesaro")
    vw, ew = speed_from_terms(b, np.zeros(128), "weighted")
    assert abs(vw) < 1e-6 < abs(vc) + 1e-6 and ew < ec
    with pytest.raises(ValueError):
        speed_from_terms(a, a, "median")


def test_hessian_from_stencil_exact_on_quadratics():
    h = 0.1
    A = np.array([[-0.7, 0.2], [0.2, 0.5]])
    f = {(a, b): 0.5 * np.array([a, b]) @ A @ np.array([a, b]) * h * h + 0.3 * a * h for a in (-1, 0, 1) for b in (-1, 0, 1)}
    e = {k: 1e-6 for k in f}
    D, det, det_err, E = hessian_from_stencil(f, e, h)
    assert np.allclose(D, A)
    assert det == pytest.approx(np.linalg.det(A))
    assert det_err > 0 and np.all(E > 0)


def test_uniform_speed_at_origin_vanishes():
    est = speed_kasteleyn(UNIFORM, (0, 0), k_max=8)
    assert abs(est.v) < 1e-6 and est.error_bar < 1e-3
    assert est.method == "KasteleynSum" and est.truncation["k_max"] == 8


def test_uniform_speed_frozen_value():
    # value recorded from the Kasteleyn sum and cross-checked against sampled limit shapes
    est = speed_kasteleyn(UNIFORM, (0.3, 0.2), k_max=16)
    assert est.v == pytest.approx(-0.017641, abs=2e-6)


def test_speed_symmetry_for_uniform_weights():
    a = speed_kasteleyn(UNIFORM, (0.3, 0.1), k_max=8).v
    b = speed_kasteleyn(UNIFORM, (-0.3, -0.1), k_max=8).v
    assert a == pytest.approx(b, abs=1e-6)


def test_smooth_slope_rejected():
    w2 = PeriodicWeights.random(2, np.random.default_rng(2))
    with pytest.raises(SmoothSlopeError):
        SpeedTerms(w2, (0, 0))


def test_stencil_checks():
    with pytest.raises(StencilError):
        speed_hessian(UNIFORM, (0.85, 0.0), h=0.1)
    w1 = PeriodicWeights.random(1, np.random.default_rng(11))
    with pytest.raises(StencilError):
        speed_hessian(w1, (0.1, 0.1), h=0.1)  # (0, 0) is smooth for these weights


# ---------------------------------------------------------------------------
# limit-shape estimators on synthetic shapes


def test_limit_shape_speed_on_a_quadratic():
    a, b = -2.0, 3.0  # psi Hessian diag(a, b); v = psi - x.rho at grad psi = rho
    shape = synthetic_shape(lambda x, y: 0.5 * a * x * x + 0.5 * b * y * y + 0.01)
    rho = (0.05, -0.06)
    est = speed_limit_shape(shape, rho)
    x_star = (rho[0] / a, rho[1] / b)
    assert est.x == pytest.approx(x_star, abs=1e-9)
    assert est.v == pytest.approx(0.01 - rho[0] ** 2 / (2 * a) - rho[1] ** 2 / (2 * b), abs=1e-9)
    D, det = limit_shape_hessian(shape, rho)
    assert np.allclose(D, np.diag([-1 / a, -1 / b]), atol=1e-6)
    assert det < 0
    with pytest.raises(NotResolved):
        speed_limit_shape(shape, (5.0, 5.0))


def test_facet_detection_on_a_plateau():
    r0 = np.array([1.0, 0.0])

    def psi(x, y):
        d = np.maximum(np.hypot(x - 0.1, y) - 0.05, 0.0)
        return r0[0] * x + r0[1] * y + 0.02 + 30 * d**3

    shape = synthetic_shape(psi)
    found = facets(shape, (1, 0))
    assert len(found) == 1
    F = found[0]
    assert F.diameter >= 5 and F.v_spread < 1e-3 and F.x_spread > 0.02
    assert np.allclose(F.v_values, 0.02, atol=1e-3)
    est = speed_limit_shape(shape, (1, 0))
    assert est.v == pytest.approx(0.02, abs=1e-3)
    assert len(est.details["matches"]) == len(F.cells)


def test_fit_growth_models():
    k = np.arange(0, 257)
    rng = np.random.default_rng(0)
    log_var = 0.06 * np.log(np.maximum(k, 1)) * (1 + 0.03 * rng.normal(size=k.size))
    sse, scale = fit_growth_models(k, log_var)
    assert sse["log"] < sse["const"] and 2 * sse["log"] < sse["linear"]
    assert scale["log"] == pytest.approx(0.06, rel=0.02)
    flat = 0.07 * (1 + 0.05 * rng.normal(size=k.size))
    sse, _ = fit_growth_models(k, flat)
    assert sse["const"] < sse["log"]


# ---------------------------------------------------------------------------
# small sampled shapes


def test_shape_from_heights_is_chunk_independent():
    _, _, h = sample_aztec_batch(32, UNIFORM, range(6))
    one = shape_from_heights([h], 32, 1)
    two = shape_from_heights([h[:2], h[2:]], 32, 1)
    assert np.allclose(one.psi, two.psi, equal_nan=True)
    assert np.allclose(one.psi_se, two.psi_se, equal_nan=True)
    assert one.samples == 6


def test_sampled_shape_boundary_and_envelopes():
    N = 64
    shape = empirical_limit_shape(UNIFORM, N, 4, seed=0)
    assert shape.boundary_deviation() == pytest.approx(0.0, abs=1e-12)
    assert shape.envelope_violation() <= 1 / (2 * N)
    for corner in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        assert corner_identity_residual(shape, corner) <= 1 / (2 * N)
    with pytest.raises(ValueError):
        empirical_limit_shape(UNIFORM, 16, 4, seed=0)


def test_fluctuation_stats_small():
    fs = fluctuation_stats(UNIFORM, (0.0, 0.0), 24, 50, seed=3, window=(4, None))
    assert fs.variance[0] == 0.0
    assert fs.variance.shape == (25,) and np.all(fs.variance >= 0)
    assert fs.model in ("log", "const")
    with pytest.raises(ValueError):
        fluctuation_stats(UNIFORM, (0.0, 0.0), 24, 10, seed=3)
    with pytest.raises(ValueError):
        fluctuation_stats(UNIFORM, (0.6, 0.0), 24, 50, seed=3)
