"""Python access to the obskit observability toolkit."""

import json as _json

from ._core import (
    ConfigError,
    InfeasibleStart,
    NumericError,
    ObskitError,
    analytic_lti_gramian,
    command_names,
    delayed_observability_rank,
    effective_output_matrix,
    gramian_metrics,
    nla,
    nla_derivative,
    sta_kernel,
)
from ._core import run_command as _run_command


def run_command(command, config, out=None, seed=None, full=False):
    """Run a CLI command and return its summary as a dict."""
    return _json.loads(_run_command(command, str(config), None if out is None else str(out), seed, full))


__all__ = [
    "ConfigError",
    "InfeasibleStart",
    "NumericError",
    "ObskitError",
    "analytic_lti_gramian",
    "command_names",
    "delayed_observability_rank",
    "effective_output_matrix",
    "gramian_metrics",
    "nla",
    "nla_derivative",
    "run_command",
    "sta_kernel",
]
