"""
Report Writer
Renders a RunReport as text at the Solved, All or AllDetails level and
writes the repeats trace table.
"""

#####################################
# Import Modules
#####################################

import math
import pathlib
from typing import Dict, List, Optional

import pandas as pd

from engine.runner import PassRecord, RunReport
from solvers.newton import SolveResult
from solvers.wls import EstimateResult
from utils.utils_config import get_trace_delimiter
from utils.utils_logger import logger

SIGNIFICANT_DIGITS = 12

#####################################
# Number Formatting
#####################################


def format_real(value: float) -> str:
    if math.isnan(value) or math.isinf(value):
        return str(value)
    text = f"{value:.{SIGNIFICANT_DIGITS}g}"
    return "0" if text == "-0" else text


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, complex):
        re, im = format_real(value.real), format_real(abs(value.imag))
        sign = "-" if value.imag < 0 else "+"
        return f"{re}{sign}{im}i"
    return format_real(float(value))


def _value_line(name: str, value, indent: str) -> str:
    line = f"{indent}{name} = {format_value(value)}"
    if isinstance(value, complex):
        angle = math.degrees(math.atan2(value.imag, value.real))
        line += f"  (|{name}| = {format_real(abs(value))}, angle = {format_real(angle)} deg)"
    return line


def _values(values: Dict[str, object], indent: str = "  ") -> List[str]:
    return [_value_line(name, value, indent) for name, value in values.items()]


#####################################
# Sections
#####################################


def _attempt_lines(attempt, details: bool) -> List[str]:
    status = "converged" if attempt.converged else f"not converged ({attempt.failure})"
    measure = "|dx|inf" if isinstance(attempt, EstimateResult) else "|r|inf"
    lines = [f"    {attempt.kind} solve: {status}, {attempt.iterations} iteration(s)"]
    for step in attempt.trace:
        lines.append(f"      iter {step.iteration}: {measure} = {step.residual_norm:.6e}")
    if details:
        stats = ", ".join(f"{k}={v}" for k, v in attempt.sparsity.items())
        lines.append(f"      jacobian: {stats}")
        if isinstance(attempt, SolveResult):
            arms = " -> ".join(str(list(a)) for a in attempt.arm_history if a)
            if arms:
                lines.append(f"      active arms: {arms}")
            if attempt.arm_oscillation:
                lines.append("      arm oscillation detected")
        if isinstance(attempt, EstimateResult) and len(attempt.multipliers):
            mu = ", ".join(format_value(complex(m)) for m in attempt.multipliers)
            lines.append(f"      multipliers: {mu}")
    return lines


def _pass_lines(record: PassRecord, details: bool) -> List[str]:
    status = "converged" if record.converged else f"failed ({record.failure})"
    lines = [f"  pass {record.index}: {status}"]
    for sub in record.submodels:
        lines.append(f"    submodel {sub.name}: {'converged' if sub.converged else 'failed'}")
        for attempt in sub.attempts:
            lines.extend("  " + line for line in _attempt_lines(attempt, details))
        if details:
            lines.extend(_values(sub.values, "      "))
    for attempt in record.attempts:
        lines.extend(_attempt_lines(attempt, details))
    if details:
        for entry in record.limit_log:
            lines.append(f"    limits {entry}")
        for signal in record.signals:
            lines.append(f"    signal {signal}")
    return lines


def _residual_lines(run: RunReport) -> List[str]:
    table = run.residuals
    if table is None:
        return []
    lines = ["Measurement residuals:"]
    for row in table.rows:
        lines.append(
            f"  {row.equation} [w={format_real(row.weight)}]: "
            f"r = {format_value(row.residual)}, w|r|^2 = {format_real(row.weighted)}"
        )
    lines.append(f"  J = {format_real(table.objective)}")
    return lines


#####################################
# Public Functions
#####################################


def emit_report(run: RunReport, level: Optional[str] = None) -> str:
    """Deterministic report text for a finished run."""
    level = level or run.report_level
    details = level == "AllDetails"
    lines = [f"Model: {run.name}", f"Type: {run.model_type}", f"Report: {level}"]
    if details:
        lines.append(f"Seed: {run.seed}")

    if run.succeeded:
        converged = run.converged_passes
        lines.append(f"Status: converged ({sum(p.iterations for p in converged)} iteration(s))")
        if run.has_repeats:
            lines.append(f"Repeats: {len(converged)} converged pass(es)")
    else:
        lines.append(f"Status: NOT CONVERGED: {run.failure}")

    if level in ("All", "AllDetails"):
        lines.append("Passes:")
        for record in run.passes:
            lines.extend(_pass_lines(record, details))

    if run.succeeded:
        lines.append("Results:")
        lines.extend(_values(run.outputs))
        if details:
            lines.extend(_residual_lines(run))
    return "\n".join(lines) + "\n"


def _trace_columns(run: RunReport) -> Dict[str, bool]:
    """Out-tagged names mapped to whether they hold complex values."""
    sample = next((p.values for p in run.passes if p.values), {})
    return {name: isinstance(sample.get(name), complex) for name in run.out_names}


def trace_frame(run: RunReport) -> pd.DataFrame:
    columns = ["pass", "converged", "iterations"]
    for name, is_complex in _trace_columns(run).items():
        columns += [f"{name}_re", f"{name}_im", f"{name}_abs"] if is_complex else [name]
    rows = []
    for record in run.passes:
        row = {"pass": record.index, "converged": record.converged, "iterations": record.iterations}
        for name, value in record.values.items():
            if isinstance(value, complex):
                row[f"{name}_re"] = value.real
                row[f"{name}_im"] = value.imag
                row[f"{name}_abs"] = abs(value)
            else:
                row[name] = value
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


def write_trace(run: RunReport, path: pathlib.Path) -> pathlib.Path:
    """Write one row per repeat pass as a delimited table."""
    path = pathlib.Path(path)
    frame = trace_frame(run)
    frame.to_csv(path, sep=get_trace_delimiter(), index=False, float_format="%.12g")
    logger.info(f"Wrote repeats trace ({len(frame)} rows) to {path}")
    return path
