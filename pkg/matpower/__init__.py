"""MATPOWER case reader, Ybus builder, model emitter and reference power flow."""

from matpower.case_parser import CaseData, case_summary, parse_case, read_case
from matpower.config import ConvertOptions, load_config, read_config
from matpower.emitter import bus_voltages, emit_model
from matpower.reference_pf import ReferenceResult, max_voltage_error, reference_power_flow
from matpower.ybus import build_ybus

__all__ = [
    "CaseData",
    "parse_case",
    "read_case",
    "case_summary",
    "build_ybus",
    "ConvertOptions",
    "load_config",
    "read_config",
    "emit_model",
    "bus_voltages",
    "reference_power_flow",
    "ReferenceResult",
    "max_voltage_error",
]
