"""Monge-Ampère lab: solver, sections, Green's functions, capacity and identity checks."""

import json

from ._malab import (
    MalabError,
    SolverFailure,
    State,
    capacity_json,
    closed_form,
    evaluate,
    green,
    identities,
    run_sweep,
    sections,
    solve,
)


def capacity(state, x0, t, V="section:0.45", heights=()):
    """Capacity of the section S(x0, t) in V as {cap, q_form, sandwich_lo, sandwich_hi}."""
    return json.loads(capacity_json(state, list(x0), t, V, list(heights)))


def sweep(toml_text):
    """Runs an experiment config; returns (exit_code, summary dict)."""
    code, summary = run_sweep(toml_text)
    return code, json.loads(summary)


__all__ = [
    "MalabError",
    "SolverFailure",
    "State",
    "capacity",
    "closed_form",
    "evaluate",
    "green",
    "identities",
    "sections",
    "solve",
    "sweep",
]
