"""End-to-end smoke checks for the compiled module."""

import math

import pytest

import hgf


def test_one_step_binary_chain_matches_the_scalar_oracle():
    net = hgf.preset("binary-2")
    net.set("node.1.tonic_volatility", -2.0)
    net = hgf.propagate(net, {0: 1.0}, 1.0)
    assert net.get("node.1.expected_precision") == pytest.approx(
        0.8807970779778823, abs=1e-12
    )
    assert net.get("node.1.mean") == pytest.approx(0.44216598162254866, abs=1e-12)
    assert net.get("node.1.precision") == pytest.approx(1.1307970779778822, abs=1e-12)
    assert net.get("node.0.expected_mean") == 0.5


def test_presets_expose_structure_and_sequence():
    net = hgf.preset("binary-3")
    assert net.size == 3
    assert net.kinds == ["binary", "continuous", "continuous"]
    assert net.parents(0, "value") == [1]
    assert net.parents(1, "volatility") == [2]
    assert net.sequence == [
        (2, "prediction"),
        (1, "prediction"),
        (0, "prediction"),
        (0, "prediction_error"),
        (1, "posterior_update"),
        (1, "prediction_error"),
        (2, "posterior_update"),
    ]


def test_networks_build_edit_and_validate():
    net = hgf.new_network()
    net = hgf.add_node(net, "binary", mean=0.5)
    net = hgf.add_node(net, "continuous")
    net = hgf.add_node(net, "continuous")
    net = hgf.add_edge(net, 0, 1, "value")
    net = hgf.add_edge(net, 1, 2, "volatility", strength=1.0)
    net = hgf.derive_sequence(net)
    hgf.check_invariants(net)
    assert net.children(2, "volatility") == [1]

    net = hgf.remove_node(net, 2)
    assert net.size == 2
    assert net.parents(1, "volatility") == []

    with pytest.raises(hgf.HgfError):
        hgf.add_edge(hgf.preset("binary-2"), 1, 1, "value")
    with pytest.raises(hgf.HgfError):
        hgf.preset("binary-9")


def test_runs_are_deterministic_and_scored():
    u = hgf.switching_task(120, seed=7)
    assert set(u) == {0.0, 1.0}

    net = hgf.preset("binary-3")
    _, first = hgf.run(net, u)
    _, second = hgf.run(net, u)
    assert first.steps == 120
    assert first.node_count == 3
    for k in range(3):
        assert first.nodes[k].mean == second.nodes[k].mean
        assert first.nodes[k].precision == second.nodes[k].precision

    model = hgf.ResponseModel("temperature-sigmoid", inverse_temperature=1.5)
    probs = hgf.action_probability(first, model)
    assert len(probs) == 120
    assert all(0.0 < p < 1.0 for p in probs)

    actions = hgf.simulate_actions(first, model, seed=3)
    assert hgf.simulate_actions(first, model, seed=3) == actions
    ll = hgf.log_likelihood(first, actions, model)
    assert math.isfinite(ll) and ll < 0.0


def test_surprise_scalars_are_normalized():
    assert hgf.binary_surprise(0.5, 1.0) == pytest.approx(math.log(2.0), abs=1e-15)
    p = math.exp(-hgf.binary_surprise(0.73, 1.0))
    q = math.exp(-hgf.binary_surprise(0.73, 0.0))
    assert p + q == pytest.approx(1.0, abs=1e-14)
    assert hgf.gaussian_surprise(0.0, 1.0, 0.0) == pytest.approx(
        0.5 * math.log(2.0 * math.pi), abs=1e-15
    )


def test_sampling_round_trip_produces_a_summary():
    net = hgf.preset("binary-2")
    net.set("node.1.tonic_volatility", -3.0)
    u = hgf.switching_task(80, seed=21)
    model = hgf.ResponseModel(inverse_temperature=1.5)
    _, traj = hgf.run(net, u)
    actions = hgf.simulate_actions(traj, model, seed=22)

    specs = [
        {"target": "node.1.tonic_volatility", "prior": "normal", "a": -3.0, "b": 2.0},
        {
            "target": "response.inverse_temperature",
            "prior": "normal",
            "a": 0.0,
            "b": 1.0,
            "transform": "log",
            "name": "temperature",
        },
    ]
    samples = hgf.sample(
        net, model, u, actions, specs=specs, chains=2, draws=120, warmup=120, seed=9
    )
    assert samples.names == ["node_1_tonic_volatility", "temperature"]
    assert len(samples.draws) == 2
    assert len(samples.draws[0]) == 120
    assert all(t > 0.0 for t in samples.pooled("temperature"))

    rows = hgf.summarize(samples, hdi_mass=0.9)
    assert [row["name"] for row in rows] == samples.names
    for row in rows:
        assert row["hdi_low"] <= row["mean"] <= row["hdi_high"]
        assert row["sd"] > 0.0 and row["ess_bulk"] > 0.0

    again = hgf.sample(
        net, model, u, actions, specs=specs, chains=2, draws=120, warmup=120, seed=9
    )
    assert again.draws == samples.draws
