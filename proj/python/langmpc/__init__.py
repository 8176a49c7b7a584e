"""Language-steered model predictive control for robot navigation."""

import json
import os
from pathlib import Path

from . import _core
from ._core import (
    PROTOCOL_VERSION,
    ConfigError,
    DslError,
    ProtocolError,
    canonical,
    evaluate,
    gradient,
    human_constraint,
    parse_inbound_type,
    ratings_to_weights,
)

__all__ = [
    "PROTOCOL_VERSION",
    "ConfigError",
    "DslError",
    "ProtocolError",
    "canonical",
    "data_dir",
    "evaluate",
    "evaluate_corpus",
    "gradient",
    "human_constraint",
    "parse_inbound_type",
    "ratings_to_weights",
    "reference_cost",
    "run_batch",
]


def data_dir() -> Path:
    """Bundled scenarios, variants and corpora; LANGMPC_DATA_DIR overrides."""
    override = os.environ.get("LANGMPC_DATA_DIR")
    if override:
        return Path(override)
    bundled = Path(__file__).parent / "data"
    if bundled.is_dir():
        return bundled
    return Path(__file__).resolve().parents[2] / "data"


def _resolve(name, subdir):
    path = Path(name)
    if path.is_file():
        return path
    for candidate in (data_dir() / subdir / name, data_dir() / subdir / f"{name}.json"):
        if candidate.is_file():
            return candidate
    raise ConfigError(f"no {subdir} file named {name!r}")


def reference_cost(name, v_ref=2.0, goal=(19.0, 0.0)):
    return json.loads(_core.reference_cost_json(name, v_ref, tuple(goal)))


def run_batch(scenario, variants="behaviours", only=(), episodes=10, seed=1, llm="mock", fixtures=""):
    """Per-variant metric means, deviations and per-episode runs."""
    return json.loads(
        _core.run_batch_json(
            _resolve(scenario, "scenarios"), _resolve(variants, "variants"), list(only), episodes, seed, llm, fixtures
        )
    )


def evaluate_corpus(corpus="queries", repetitions=10, llm="mock", fixtures=""):
    """Success rate rows for every case in the corpus."""
    return json.loads(_core.evaluate_corpus_json(_resolve(corpus, "corpus"), repetitions, llm, fixtures))
