"""Prover, model checker and test harness for comparative similarity logic."""

from ._csl import (
    Formula,
    ModelError,
    ParseError,
    ResourceLimit,
    crosscheck,
    decide,
    evaluate,
    generate_corpus,
    instantiate,
    is_satisfiable,
    is_valid,
    oracle_sat,
    parse,
    run_cli,
    schema_names,
    to_conditional,
    to_csl,
)

__all__ = [
    "Formula",
    "ModelError",
    "ParseError",
    "ResourceLimit",
    "crosscheck",
    "decide",
    "evaluate",
    "generate_corpus",
    "instantiate",
    "is_satisfiable",
    "is_valid",
    "oracle_sat",
    "parse",
    "run_cli",
    "schema_names",
    "to_conditional",
    "to_csl",
]
