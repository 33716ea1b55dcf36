"""Compiles documents and runs them through the full solution flow."""

from engine.assignments import apply_assignments
from engine.compiler import CompiledModel, compile_document
from engine.distributions import Distribution, sample
from engine.limits import Signal, process_limits
from engine.report import emit_report, write_trace
from engine.runner import RunReport, run_document

__all__ = [
    "CompiledModel",
    "Distribution",
    "RunReport",
    "Signal",
    "apply_assignments",
    "compile_document",
    "emit_report",
    "process_limits",
    "run_document",
    "sample",
    "write_trace",
]
