"""Scenario queries over labeled driving traces."""

from ._squery import (
    BudgetExceeded,
    ConfigError,
    FormatError,
    MissingFeature,
    Program,
    RoadMap,
    SemanticError,
    SqueryError,
    SyntaxError,
    Trace,
    TranslationError,
    UnsatisfiableScene,
    UnsupportedFeature,
    ValidationError,
    correspondences,
    fragment_check,
    generate,
    match_window,
    oracle_match,
    query,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
