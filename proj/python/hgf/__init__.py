"""Networks of coupled Gaussian beliefs: filtering, simulation and inference.

The heavy lifting lives in the compiled ``_core`` module; this package
re-exports its surface unchanged.
"""

from ._core import (
    HgfError,
    Network,
    NodeTrace,
    PosteriorSamples,
    ResponseModel,
    Trajectory,
    action_probability,
    add_edge,
    add_node,
    binary_surprise,
    check_invariants,
    derive_sequence,
    gaussian_surprise,
    log_likelihood,
    new_network,
    preset,
    propagate,
    remove_node,
    run,
    sample,
    set_edges,
    simulate_actions,
    summarize,
    switching_task,
)

__all__ = [
    "HgfError",
    "Network",
    "NodeTrace",
    "PosteriorSamples",
    "ResponseModel",
    "Trajectory",
    "action_probability",
    "add_edge",
    "add_node",
    "binary_surprise",
    "check_invariants",
    "derive_sequence",
    "gaussian_surprise",
    "log_likelihood",
    "new_network",
    "preset",
    "propagate",
    "remove_node",
    "run",
    "sample",
    "set_edges",
    "simulate_actions",
    "summarize",
    "switching_task",
]

__version__ = "0.1.0"
