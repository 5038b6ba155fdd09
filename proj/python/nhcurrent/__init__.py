"""Continuity-equation analysis for non-Hermitian lattice dynamics.

Thin bindings over the C++ core: parse a run config, simulate it in memory
or write the standard output tables (observables.csv, currents.csv,
fields.ndjson, run_meta.json).
"""

from ._core import (
    ConfigError,
    Error,
    InvalidInput,
    NumericalError,
    RunConfig,
    oracle,
    parse_config,
    parse_config_text,
    run,
    simulate,
    version,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "Error",
    "InvalidInput",
    "NumericalError",
    "RunConfig",
    "oracle",
    "parse_config",
    "parse_config_text",
    "run",
    "simulate",
    "version",
    "__version__",
]
