"""tmkit: a toolkit for the Thinging Machine (TM) modeling notation.

Parse textual TM models, validate and normalize them, simulate the
event chronology as deterministic token flow, and render DOT diagrams.
"""

from .behavior import (
    Chronology,
    EventDef,
    check_region,
    flatten,
    instances,
    region_coverage,
    topological_orders_contains,
)
from .core import (
    Model,
    StageKind,
    is_normalized,
    model_equal,
    normalize,
)
from .diagnostics import Diagnostic, Severity, SourceSpan
from .dsl import ParseResult, from_json, parse, to_json
from .render import RenderMode, RenderOptions, render_dot
from .sim import SimConfig, Trace, coverage, simulate, trace_to_json
from .validate import legality, validate

__version__ = "0.1.0"

__all__ = [
    "Chronology",
    "Diagnostic",
    "EventDef",
    "Model",
    "ParseResult",
    "RenderMode",
    "RenderOptions",
    "Severity",
    "SimConfig",
    "SourceSpan",
    "StageKind",
    "Trace",
    "check_region",
    "coverage",
    "flatten",
    "from_json",
    "instances",
    "is_normalized",
    "legality",
    "model_equal",
    "normalize",
    "parse",
    "region_coverage",
    "render_dot",
    "simulate",
    "to_json",
    "topological_orders_contains",
    "trace_to_json",
    "validate",
]
