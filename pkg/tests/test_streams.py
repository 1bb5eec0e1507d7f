"""Cost streams: reproducibility, hard norm bounds, empirical bound constants, loaders."""

import json

import numpy as np
import pytest

from polyregret import streams
from polyregret.domains import Ball, Box, Simplex
from polyregret.errors import ConfigError
from polyregret.streams import (
    AlternatingStream,
    BestResponseStream,
    CostBounds,
    IIDStream,
    Noise,
    RecordedStream,
    declared_cost_bound,
    empirical_bounds,
    iid_costs,
    next_cost,
    recorded_from_csv,
    recorded_from_json,
    stream_costs,
    stream_from_dict,
    stream_to_dict,
)


def test_iid_no_noise_constant():
    s = IIDStream(mean=np.array([0.5, 0.0]))
    for r in (1, 2, 17):
        assert np.array_equal(next_cost(s, r), [0.5, 0.0])


def test_alternating_sign_flip():
    s = AlternatingStream(base=np.array([1.0, 0.0]))
    got = [next_cost(s, r) for r in (1, 2, 3)]
    assert np.array_equal(got, [[-1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])


def test_best_response_requires_action_and_center():
    s = BestResponseStream(bound=1.0)
    with pytest.raises(ConfigError):
        next_cost(s, 1)
    with pytest.raises(ConfigError):
        next_cost(s, 1, learner_action=np.zeros(2))
    a = next_cost(s, 1, learner_action=np.array([2.0, 0.0]), center=np.zeros(2))
    assert np.allclose(a, [1.0, 0.0])
    # at the center the cost vanishes
    z = next_cost(s, 1, learner_action=np.zeros(2), center=np.zeros(2))
    assert np.array_equal(z, np.zeros(2))


def test_iid_reproducible_and_batch_equals_single():
    s = IIDStream(mean=np.array([0.1, -0.2, 0.3]), noise=Noise("uniform_ball", 0.5), seed=99)
    batch = iid_costs(s, 1, 64)
    again = iid_costs(s, 1, 64)
    assert np.array_equal(batch, again)
    singles = np.array([next_cost(s, r) for r in range(1, 65)])
    assert np.array_equal(batch, singles)
    # any round can be generated in isolation
    assert np.array_equal(iid_costs(s, 40, 3), batch[39:42])


def test_iid_different_seeds_differ():
    m = np.zeros(4)
    a = iid_costs(IIDStream(mean=m, noise=Noise("uniform_ball", 1.0), seed=1), 1, 8)
    b = iid_costs(IIDStream(mean=m, noise=Noise("uniform_ball", 1.0), seed=2), 1, 8)
    assert not np.array_equal(a, b)


@pytest.mark.parametrize("kind", ["uniform_ball", "rademacher_scaled"])
def test_noise_norm_bound_holds_everywhere(kind):
    # 1e5 draws: the declared radius is a hard guarantee
    s = IIDStream(mean=np.array([0.3, 0.1, -0.4]), noise=Noise(kind, 0.1), seed=5)
    draws = iid_costs(s, 1, 100_000)
    dev = np.linalg.norm(draws - s.mean, axis=1)
    assert dev.max() <= 0.1 + 1e-15
    if kind == "rademacher_scaled":
        assert np.allclose(dev, 0.1)


def test_declared_bounds_dominate_empirical():
    s = IIDStream(mean=np.array([0.5, -0.2]), noise=Noise("uniform_ball", 0.3), seed=11)
    costs = iid_costs(s, 1, 20_000)
    b = empirical_bounds(costs, mean=s.mean, domain=Box(2))
    assert b.L <= declared_cost_bound(s) + 1e-12
    assert b.R <= 0.3 + 1e-12
    assert not b.mean_is_empirical


def test_empirical_bounds_examples():
    # simplex: range of the entries
    b = empirical_bounds(np.array([[0.0, 0.5, 1.0]]), mean=np.zeros(3), domain=Simplex(3))
    assert b.L_inf == pytest.approx(1.0)
    # box: exhaustive scan over the 4x4 vertex pairs as the oracle
    a = np.array([1.0, 1.0])
    from polyregret.domains import vertices
    V = vertices(Box(2))
    oracle = max(abs(a @ (v - w)) for v in V for w in V)
    b = empirical_bounds(a[None, :], mean=np.zeros(2), domain=Box(2))
    assert oracle == pytest.approx(4.0)
    assert b.L_inf == pytest.approx(oracle)
    # ball: closed form 2 max ||a_i||
    a5 = np.zeros(5)
    a5[0] = 0.7
    b = empirical_bounds(a5[None, :], domain=Ball(5))
    assert b.L_inf == pytest.approx(1.4)
    assert b.mean_is_empirical


def test_empirical_bounds_vertex_pairs_dominate_hull_samples():
    rng = np.random.default_rng(2)
    from polyregret.domains import vertices
    dom = Box(3)
    V = vertices(dom)
    a = rng.standard_normal((5, 3))
    b = empirical_bounds(a, mean=np.zeros(3), domain=dom)
    # random hull pairs never exceed the vertex-pair value and approach it
    W = rng.dirichlet(np.ones(len(V)), size=20_000) @ V
    sampled = max(
        float(np.abs(a @ (W[: 10_000] - W[10_000:]).T).max()), 0.0)
    assert sampled <= b.L_inf + 1e-9
    assert sampled >= 0.5 * b.L_inf  # loose sanity: samples do explore the hull


def test_empirical_bounds_refusal_marks_warning():
    b = empirical_bounds(np.ones((2, 20)), mean=np.zeros(20), domain=Box(20), cap=100)
    assert b.L_inf is None and b.R_inf is None
    assert "unavailable" in b.warning


def test_cost_bounds_invariant():
    with pytest.raises(ConfigError):
        CostBounds(L=1.0, R=3.0)


def test_recorded_stream_and_loaders(tmp_path):
    costs = np.array([[1.0, 2.0], [3.0, -4.0]])
    s = RecordedStream(costs=costs)
    assert np.array_equal(next_cost(s, 2), [3.0, -4.0])
    with pytest.raises(ConfigError):
        next_cost(s, 3)

    csv_path = tmp_path / "costs.csv"
    csv_path.write_text("1.0,2.0\n3.0,-4.0\n")
    loaded = recorded_from_csv(csv_path)
    assert np.array_equal(loaded.costs, costs)

    json_path = tmp_path / "costs.json"
    json_path.write_text(json.dumps(costs.tolist()))
    loaded = recorded_from_json(json_path)
    assert np.array_equal(loaded.costs, costs)


def test_stream_costs_batches():
    s = AlternatingStream(base=np.array([2.0]))
    assert np.array_equal(stream_costs(s, 4), [[-2.0], [2.0], [-2.0], [2.0]])
    with pytest.raises(ConfigError):
        stream_costs(BestResponseStream(bound=1.0), 3)


def test_stream_dict_round_trip():
    specs = [
        IIDStream(mean=np.array([1.0, 0.0]), noise=Noise("uniform_ball", 0.2), seed=3),
        AlternatingStream(base=np.array([1.0])),
        BestResponseStream(bound=2.0),
        RecordedStream(costs=np.array([[1.0, 2.0]])),
    ]
    for s in specs:
        again = stream_from_dict(stream_to_dict(s))
        assert type(again) is type(s)
    with pytest.raises(ConfigError):
        stream_from_dict({"tag": "weather"})


def test_noise_validation():
    with pytest.raises(ConfigError):
        Noise("uniform_ball", -0.1)
    with pytest.raises(ConfigError):
        Noise("white", 0.1)
    with pytest.raises(ConfigError):
        IIDStream(mean=np.array([np.inf]))
