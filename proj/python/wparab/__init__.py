"""Weighted parabolic equations: weights, solver and audits."""

import json as _json

from . import _core
from ._core import (
    CoefficientField,
    Error,
    Grid1D,
    SolutionField,
    SpaceTimeField,
    Weight,
    aq_characteristic,
    height,
    height_inverse,
    manufactured_error,
    manufactured_forcing,
    phi_inverse,
    phi_map,
    quasi_distance,
    run_experiment,
    solve_ivbp,
)

_REPORTS = [
    "check_beta_condition",
    "quasi_triangle_audit",
    "oscillation_audit",
    "energy_audit",
    "apriori_ratio",
    "levelset_decay_audit",
]


def _wrap(fn):
    def call(*args, **kwargs):
        return _json.loads(fn(*args, **kwargs))

    call.__name__ = fn.__name__
    call.__doc__ = "Returns the audit report as a dict."
    return call


for _name in _REPORTS:
    globals()[_name] = _wrap(getattr(_core, _name))

__all__ = [
    "CoefficientField",
    "Error",
    "Grid1D",
    "SolutionField",
    "SpaceTimeField",
    "Weight",
    "aq_characteristic",
    "height",
    "height_inverse",
    "manufactured_error",
    "manufactured_forcing",
    "phi_inverse",
    "phi_map",
    "quasi_distance",
    "run_experiment",
    "solve_ivbp",
    *_REPORTS,
]
