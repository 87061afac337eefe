"""Entropy, Fisher information, Stein discrepancy and W2 inequality checks."""

import json
import math

from ._impl import (
    SteinlabError,
    gaussian_functionals,
    hsi_bound,
    hwsi_bound,
    li,
    lsi_bound,
    preset_names,
    preset_yaml,
    psi,
    talagrand_bound,
    theta,
    ws_bound,
)

_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def _decode(obj):
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


def run(config, inline_yaml=False):
    """Run a scenario and return the report as a dict.

    Non-finite numbers, stored as strings in the JSON report, come back as floats.
    """
    from ._impl import run_json

    return _decode(json.loads(run_json(config, inline_yaml)))


__all__ = [
    "SteinlabError",
    "gaussian_functionals",
    "hsi_bound",
    "hwsi_bound",
    "li",
    "lsi_bound",
    "preset_names",
    "preset_yaml",
    "psi",
    "run",
    "talagrand_bound",
    "theta",
    "ws_bound",
]
