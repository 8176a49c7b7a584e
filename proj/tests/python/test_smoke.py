import json
import math

import pytest

import langmpc


def test_canonical_round_trip():
    text = langmpc.canonical("(px - goal_x)^2 + (py - goal_y)^2")
    assert langmpc.canonical(text) == text


def test_evaluate_and_gradient():
    b = {"px": 1.0, "py": 2.0, "goal_x": 4.0, "goal_y": 6.0}
    assert langmpc.evaluate("(px - goal_x)^2 + (py - goal_y)^2", b) == pytest.approx(25.0)
    assert langmpc.gradient("(px - goal_x)^2 + (py - goal_y)^2", b, ["px", "py"]) == pytest.approx([-6.0, -8.0])


def test_dsl_errors_raise():
    with pytest.raises(langmpc.DslError):
        langmpc.canonical("px +")
    with pytest.raises(ValueError):
        langmpc.evaluate("sqrt(px)", {})


def test_constraint_algebra():
    assert langmpc.human_constraint((0.6, 0.0), (0.0, 0.0)) == 0.0
    assert langmpc.human_constraint((1.0, 1.0), (1.0, 1.0)) == 1.0
    assert langmpc.human_constraint((0.0, 1.2), (0.0, 0.0)) == -3.0


def test_weight_rule():
    assert langmpc.ratings_to_weights({"a": 10, "b": 5, "c": 0}) == {"a": 2.0, "b": 1.0, "c": 0.0}


def test_reference_cost_has_mandatory_terms():
    spec = langmpc.reference_cost("goal")
    assert spec["terms"]
    assert "v_ref" in json.dumps(spec)


def test_protocol_validation():
    assert langmpc.PROTOCOL_VERSION == 1
    assert langmpc.parse_inbound_type('{"type": "query", "text": "Be faster."}') == "query"
    with pytest.raises(langmpc.ProtocolError):
        langmpc.parse_inbound_type('{"type": "nonsense"}')


def test_corpus_routing_with_mock():
    rows = langmpc.evaluate_corpus(repetitions=1)
    routing = [r for r in rows if r["group"] == "routing"]
    assert routing and all(r["rate"] == 1.0 for r in routing)


def test_run_batch_single_episode():
    table = langmpc.run_batch("corridor", only=["a"], episodes=1)
    assert [row["label"] for row in table] == ["a"]
    run = table[0]["runs"][0]
    assert not run["collision"]
    assert run["path_length"] > 0 and math.isfinite(run["mean_speed"])


def test_unknown_backend_is_config_error():
    with pytest.raises(langmpc.ConfigError):
        langmpc.run_batch("corridor", only=["a"], episodes=1, llm="bogus")
