"""Tests for the *robustlr* library."""

from functools import lru_cache
import json

from robustlr.model import NominalModel

MEAN_SHIFTED = (
    {"family": "gaussian", "mean": -1.0, "var": 1.0},
    {"family": "gaussian", "mean": 1.0, "var": 1.0},
)
MEAN_AND_VARIANCE_SHIFTED = (
    {"family": "gaussian", "mean": -1.0, "var": 1.0},
    {"family": "gaussian", "mean": 1.0, "var": 4.0},
)


@lru_cache(maxsize=None)
def mean_shifted() -> NominalModel:
    """N(-1, 1) against N(1, 1): symmetric, ln l(y) = 2 y."""
    return NominalModel.from_families(*MEAN_SHIFTED)


@lru_cache(maxsize=None)
def mean_and_variance_shifted() -> NominalModel:
    """N(-1, 1) against N(1, 4): l is neither monotone nor symmetric."""
    return NominalModel.from_families(*MEAN_AND_VARIANCE_SHIFTED)


def config_text(experiment: str = "lfd-plot", nominals=MEAN_AND_VARIANCE_SHIFTED, **kw) -> str:
    """JSON text of an experiment configuration, one key per line."""
    content = {
        "nominals": {"f0": nominals[0], "f1": nominals[1]},
        "eps": {"eps0": 0.15, "eps1": 0.05, "eps0_c": 0.02, "eps1_c": 0.02},
        "experiment": experiment,
    }
    content.update(kw)
    return json.dumps(content, indent=2)
