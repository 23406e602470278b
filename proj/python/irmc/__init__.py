"""Regression Monte Carlo for finite-horizon impulse control."""

from ._irmc import (
    STACK_FORMAT_VERSION,
    AbortAtStep,
    ConfigError,
    Error,
    FedericoSolution,
    FormatError,
    InvalidModel,
    InvalidParameters,
    Stack,
    VersionMismatch,
    brute_force_dp,
    federico_solution,
    load_stack,
    solve,
)

__all__ = [
    "STACK_FORMAT_VERSION",
    "AbortAtStep",
    "ConfigError",
    "Error",
    "FedericoSolution",
    "FormatError",
    "InvalidModel",
    "InvalidParameters",
    "Stack",
    "VersionMismatch",
    "brute_force_dp",
    "federico_solution",
    "load_stack",
    "solve",
]
