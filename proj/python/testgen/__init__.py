"""Python access to testgen's value model, resolver, equality and selection."""

from ._testgen import (
    Error,
    canonicalize,
    common_fields_equal,
    flake_verdict,
    instrument,
    resolve_run,
    select_tests,
)

__all__ = [
    "Error",
    "canonicalize",
    "common_fields_equal",
    "flake_verdict",
    "instrument",
    "resolve_run",
    "select_tests",
]
