"""Python front end to the hetgnn C++ core.

Configs are plain dicts with the keys of the JSON "train" section; anything
left out keeps its default.
"""

import json

from . import _core
from ._core import ConfigError, Dataset, SimulatedOom, StalenessViolation

__version__ = _core.version()

STRATEGIES = ("case1", "case2", "case3", "case4", "layer-based")


def default_config():
    return json.loads(_core.default_train_config())


def load(spec="sbm1k", feat_dim=32, seed=1):
    return Dataset.load(spec, feat_dim, seed)


def _cfg(config):
    return json.dumps(config or {})


def train(dataset, config=None, cache_fraction=None):
    """Runs training and returns the run summary as a dict."""
    return json.loads(_core.train(dataset, _cfg(config), cache_fraction))


def simulate(dataset, config=None, strategy="layer-based", cache_fraction=None):
    """Simulated makespan, utilization and transfer for one strategy."""
    return json.loads(_core.simulate(dataset, _cfg(config), strategy, cache_fraction))


def hotness(dataset, config=None):
    """Returns (per-vertex access counts, vertices ranked hottest first)."""
    return _core.hotness(dataset, _cfg(config))


def compare_cache(dataset, config=None, fractions=None):
    if fractions is None:
        fractions = _core.default_budget_fractions()
    return json.loads(_core.compare_cache(dataset, _cfg(config), list(fractions)))


__all__ = [
    "ConfigError",
    "Dataset",
    "SimulatedOom",
    "StalenessViolation",
    "STRATEGIES",
    "compare_cache",
    "default_config",
    "hotness",
    "load",
    "simulate",
    "train",
]
