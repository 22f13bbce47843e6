"""Python bindings of the iegs scheduling toolkit.

Solutions and reports cross the boundary as JSON text; `solve` and `evaluate`
here return parsed dictionaries.
"""

import json as _json

from ._iegs import (
    Error,
    FrequencyParams,
    Instance,
    NumericError,
    ParseError,
    SolverError,
    ValidationError,
    cantelli_factor,
    compute_ejvp,
    export_conic,
    kappa_residual,
    load_instance,
    moment_soc_min_r,
    nadir_closed_form,
    parse_instance,
    simulate_swing,
    solve_kappa,
    unimodal_soc_min_r,
    vp_factor,
)
from . import _iegs

__all__ = [
    "Error", "FrequencyParams", "Instance", "NumericError", "ParseError", "SolverError", "ValidationError",
    "cantelli_factor", "compare", "compute_ejvp", "evaluate", "export_conic", "kappa_residual", "load_instance",
    "moment_soc_min_r", "nadir_closed_form", "parse_instance", "simulate_swing", "solve", "solve_kappa",
    "unimodal_soc_min_r", "vp_factor",
]


def solve(instance, variant="dr-m", **kwargs):
    """Schedule one variant; returns the solution dictionary."""
    return _json.loads(_iegs.solve(instance, variant, **kwargs))


def evaluate(instance, solution, audit_gas=True):
    """Audit a solution dictionary; returns the single report row."""
    text = solution if isinstance(solution, str) else _json.dumps(solution)
    return _json.loads(_iegs.evaluate(instance, text, audit_gas))["rows"][0]


def compare(instance, variants, sizes=(20,), audit_gas=True):
    """Report rows for every (variant, sample size) pair."""
    return _json.loads(_iegs.compare(instance, list(variants), list(sizes), audit_gas))["rows"]
