"""Intent-driven network slice orchestration for smart distribution grids."""

from .intent_dsl import (
    Application,
    IntentAst,
    KpiClause,
    ServiceRequirementSet,
    SliceCategory,
    Stakeholder,
    Verb,
    parse_intent,
    render,
    translate,
)
from .runtime import GridSliceSystem, SystemInputs, build_system

__version__ = "0.1.0"

__all__ = [
    "Application",
    "GridSliceSystem",
    "IntentAst",
    "KpiClause",
    "ServiceRequirementSet",
    "SliceCategory",
    "Stakeholder",
    "SystemInputs",
    "Verb",
    "build_system",
    "parse_intent",
    "render",
    "translate",
    "__version__",
]
