"""cpforge: constraint-model transpiler with a refactorable pivot IR."""

from .checker import Problem, check, check_cycles, check_domains, check_types
from .frontend import (InjectError, ParseError, extract_source, inject,
                       parse_data, parse_expression, parse_model)
from .ir import PivotModel, duplicate, free_names, fresh_name, substitute
from .oracle import Instance, SolutionSet, equivalent, solutions
from .passes import NameMap, PassError, PassResult, run_chain
from .pipeline import PipelineConfig, StageReport, bench, run

__all__ = [
    "Problem", "check", "check_cycles", "check_domains", "check_types",
    "InjectError", "ParseError", "extract_source", "inject", "parse_data",
    "parse_expression", "parse_model", "PivotModel", "duplicate",
    "free_names", "fresh_name", "substitute", "Instance", "SolutionSet",
    "equivalent", "solutions", "NameMap", "PassError", "PassResult",
    "run_chain", "PipelineConfig", "StageReport", "bench", "run",
]
