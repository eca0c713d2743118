import numpy as np
import pytest

from oracles import torus_partition_function
from domino_growth.kasteleyn import (
    InterpolationError,
    KasteleynEvaluator,
    characteristic_polynomial,
    charpoly_ratio,
)
from domino_growth.laurent import newton_polygon
from domino_growth.weights import PeriodicWeights, gauge_transform, spider_step


def _random(n, seed):
    return PeriodicWeights.random(n, np.random.default_rng(seed))


def test_uniform_characteristic_polynomial():
    P = characteristic_polynomial(PeriodicWeights.uniform(1))
    expected = {(0, 0): -4, (1, 0): -1, (-1, 0): -1, (0, 1): -1, (0, -1): -1}
    assert set(P.coeffs) == set(expected)
    for k, c in expected.items():
        assert P.coeffs[k] == pytest.approx(c, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_interpolant_reproduces_determinant(n):
    w = _random(n, 10 + n)
    P = characteristic_polynomial(w)
    ev = KasteleynEvaluator(w)
    rng = np.random.default_rng(0)
    z = np.exp(rng.normal(0, 0.4, 6) + 1j * rng.uniform(0, 6.3, 6))
    x = np.exp(rng.normal(0, 0.4, 6) + 1j * rng.uniform(0, 6.3, 6))
    assert np.allclose(P(z, x), ev.det(z, x), rtol=1e-9)
    assert ev.size == 2 * n * n


def test_degree_bound_enforced():
    with pytest.raises(InterpolationError):
        characteristic_polynomial(_random(2, 0), degree=1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_newton_polygon_is_the_diamond(n):
    poly = newton_polygon(characteristic_polynomial(_random(n, n)))
    assert set(poly.vertices) == {(n, 0), (-n, 0), (0, n), (0, -n)}
    assert len(poly.interior_lattice_points()) == 2 * n * (n - 1) + 1


def _cover_det(ev, k, z, w):
    """Product of P over all k-th roots of (z, w): det K of the k x k cover."""
    out = 1.0 + 0j
    for a in range(k):
        for b in range(k):
            zz = np.exp(1j * (np.angle(z) + 2 * np.pi * a) / k)
            ww = np.exp(1j * (np.angle(w) + 2 * np.pi * b) / k)
            out *= ev.det(zz, ww)
    return out


@pytest.mark.parametrize("n,k,seed", [(1, 1, None), (1, 2, None), (1, 3, 1), (1, 2, 2), (2, 1, 3), (1, 4, 4), (2, 2, 5)])
def test_torus_partition_function_from_four_signs(n, k, seed):
    """Z of the 2nk torus from det K at the four sign choices, vs a transfer matrix."""
    w = PeriodicWeights.uniform(n) if seed is None else _random(n, seed)
    L = 2 * n * k
    Z = torus_partition_function(w.hor, w.ver, L, L)
    ev = KasteleynEvaluator(w)
    d = {(s, t): _cover_det(ev, k, (-1.0) ** s + 0j, (-1.0) ** t + 0j) for s in (0, 1) for t in (0, 1)}
    if (n * k) % 2 == 0:  # parity of half the torus side
        combo = -d[0, 0] + d[0, 1] + d[1, 0] + d[1, 1]
    else:
        combo = d[0, 0] + d[0, 1] + d[1, 0] - d[1, 1]
    assert abs(combo) / 2 == pytest.approx(Z, rel=1e-8)


def test_gauge_scales_determinant():
    w = _random(2, 7)
    f = np.random.default_rng(1).uniform(0.5, 2.0, (4, 4))
    g = gauge_transform(w, f)
    z, x = 0.8 + 0.3j, 1.1 - 0.4j
    ratio = KasteleynEvaluator(g).det(z, x) / KasteleynEvaluator(w).det(z, x)
    assert ratio == pytest.approx(np.prod(f), rel=1e-10)


@pytest.mark.parametrize("n,seed", [(1, 0), (2, 1), (2, 2), (3, 3)])
def test_spider_step_rescales_charpoly(n, seed):
    w = _random(n, seed)
    c, dev = charpoly_ratio(w)
    assert dev < 1e-8
    P0 = characteristic_polynomial(w)
    P1 = characteristic_polynomial(spider_step(w))
    assert np.allclose(P1(0.9, 1.2 + 0.1j), c * P0(0.9, 1.2 + 0.1j), rtol=1e-8)
