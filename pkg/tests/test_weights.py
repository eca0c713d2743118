import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino_growth.weights import (
    PeriodicWeights,
    WeightError,
    creation_probabilities,
    gauge_invariants,
    gauge_normalize,
    gauge_transform,
    load_weights,
    save_weights,
    spider_step,
    spider_step_inverse,
    trajectory,
)

seeds = st.integers(0, 2**32 - 1)
sizes = st.sampled_from([1, 2, 3])


def _random(n, seed, parity=0):
    return PeriodicWeights.random(n, np.random.default_rng(seed), time_parity=parity)


def test_rejects_bad_weights():
    with pytest.raises(WeightError):
        PeriodicWeights(1, 0, -np.ones((2, 2)), np.ones((2, 2)))
    with pytest.raises(WeightError):
        PeriodicWeights(1, 0, np.full((2, 2), np.inf), np.ones((2, 2)))
    with pytest.raises(WeightError):
        PeriodicWeights(1, 0, np.ones((3, 3)), np.ones((3, 3)))
    with pytest.raises(WeightError):
        PeriodicWeights(0, 0, np.ones((0, 0)), np.ones((0, 0)))


def test_face_tuple_layout():
    w = _random(1, 4)
    a, b, c, d = w.face_tuple((0, 0))
    assert (a, b, c, d) == (w.hor[0, 1], w.ver[1, 0], w.hor[0, 0], w.ver[0, 0])
    with pytest.raises(WeightError):
        w.face_tuple((0, 1))
    # faces even at one parity cover every edge exactly once
    assert PeriodicWeights.from_face_tuples(1, 0, w.face_tuples()) == w


def test_uniform_spider_step():
    w = spider_step(PeriodicWeights.uniform(1))
    assert w.time_parity == 1
    assert np.allclose(w.hor, 0.5) and np.allclose(w.ver, 0.5)
    assert np.allclose(gauge_normalize(w).hor, 1.0) and np.allclose(gauge_normalize(w).ver, 1.0)


@settings(max_examples=40, deadline=None)
@given(n=sizes, seed=seeds, parity=st.integers(0, 1))
def test_spider_inverse_round_trip(n, seed, parity):
    w = _random(n, seed, parity)
    for other in (spider_step_inverse(spider_step(w)), spider_step(spider_step_inverse(w))):
        assert other.time_parity == w.time_parity
        assert np.allclose(other.hor, w.hor, rtol=1e-12)
        assert np.allclose(other.ver, w.ver, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=sizes, seed=seeds)
def test_magnetic_coordinates_conserved(n, seed):
    w = _random(n, seed)
    g0 = gauge_invariants(w)
    g = gauge_invariants(spider_step(w))
    assert g.W1 == pytest.approx(g0.W1, rel=1e-12)
    assert g.W2 == pytest.approx(g0.W2, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=sizes, seed=seeds)
def test_gauge_transform_and_normalize_preserve_invariants(n, seed):
    rng = np.random.default_rng(seed)
    w = _random(n, seed)
    f = rng.uniform(0.2, 5.0, (2 * n, 2 * n))
    g = gauge_transform(w, f)
    assert gauge_invariants(g).close_to(gauge_invariants(w))
    nw = gauge_normalize(w)
    assert gauge_invariants(nw).close_to(gauge_invariants(w))
    # normalizing two gauge-equivalent weights gives the same representative
    assert np.allclose(gauge_normalize(g).hor, nw.hor, rtol=1e-9)
    assert np.allclose(gauge_normalize(g).ver, nw.ver, rtol=1e-9)


@settings(max_examples=25, deadline=None)
@given(n=sizes, seed=seeds)
def test_gauge_normalize_idempotent_and_vertex_means(n, seed):
    nw = gauge_normalize(_random(n, seed))
    again = gauge_normalize(nw)
    assert np.allclose(again.hor, nw.hor, rtol=1e-12) and np.allclose(again.ver, nw.ver, rtol=1e-12)
    lh, lv = np.log(nw.hor), np.log(nw.ver)
    per_vertex = lh + np.roll(lh, 1, axis=0) + lv + np.roll(lv, 1, axis=1)
    assert np.allclose(per_vertex, 0, atol=1e-10)


def test_face_weight_product_is_one():
    # alternating products over all faces telescope to one on the torus
    for seed in range(5):
        fw = gauge_invariants(_random(2, seed)).face_weights
        assert np.prod(fw) == pytest.approx(1.0, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_creation_probabilities(seed):
    w = _random(2, seed)
    for f in w.even_faces():
        ph, pv = creation_probabilities(w, f)
        assert ph + pv == pytest.approx(1.0)
        assert pv == pytest.approx(w.vertical_probability_table[f])


def test_trajectory_normalized():
    w0 = _random(1, 9)
    traj = trajectory(w0, 6)
    assert len(traj) == 7
    assert [w.time_parity for w in traj] == [0, 1, 0, 1, 0, 1, 0]
    for w in traj:
        assert gauge_invariants(w).W1 == pytest.approx(gauge_invariants(w0).W1, rel=1e-10)


def test_json_round_trip(tmp_path):
    w = _random(2, 17, parity=1)
    assert PeriodicWeights.from_json(w.to_json()) == w
    path = tmp_path / "w.json"
    save_weights(w, path)
    back = load_weights(path)
    assert back == w and back.sha256() == w.sha256()
    assert w.sha256() != _random(2, 18, parity=1).sha256()


def test_json_errors():
    data = _random(1, 2).to_dict()
    data["faces"] = data["faces"][:-1]
    with pytest.raises(WeightError):
        PeriodicWeights.from_dict(data)
    with pytest.raises(WeightError):
        PeriodicWeights.from_dict({"n": 1})
    bad = _random(1, 2).to_dict()
    bad["faces"][0]["a"] = -1.0
    with pytest.raises(WeightError):
        PeriodicWeights.from_json(json.dumps(bad))
