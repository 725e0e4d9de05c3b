"""Python access to the memheat solver, classifier and ODE oracle."""

import json

from ._memheat import (
    Coefficient,
    NotApplicable,
    classify,
    estimate_blowup_time,
    integrate_improper,
    integrate_ode,
    normalize_config,
    run_config,
)

__all__ = [
    "Coefficient",
    "NotApplicable",
    "classify",
    "estimate_blowup_time",
    "integrate_improper",
    "integrate_ode",
    "normalize_config",
    "run",
    "run_config",
]


def run(config, refine=0):
    """Run a scenario given as a dict or a JSON string."""
    text = config if isinstance(config, str) else json.dumps(config)
    return run_config(text, refine)
