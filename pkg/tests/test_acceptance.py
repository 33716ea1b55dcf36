"""End-to-end runs of the bundled models and converted MATPOWER cases."""

import cmath

import numpy as np
import pandas as pd
import pytest

from conftest import CASES, solve_text
from engine import emit_report, write_trace
from matpower import ConvertOptions, bus_voltages, emit_model, max_voltage_error, read_case, reference_power_flow

V2 = 0.984267
V3 = 0.969386

CASE_FILES = sorted(CASES.glob("*.m"))


#####################################
# Three-Node Power Flow
#####################################


def test_polar_three_node(run_model):
    run = run_model("example1.mod")
    assert run.succeeded
    assert run.outputs["v_2"] == pytest.approx(V2, abs=1e-5)
    assert run.outputs["v_3"] == pytest.approx(V3, abs=1e-5)


def test_complex_three_node(run_model):
    run = run_model("example2.mod")
    assert run.succeeded
    assert abs(run.outputs["v2"]) == pytest.approx(V2, abs=1e-5)
    assert abs(run.outputs["v3"]) == pytest.approx(V3, abs=1e-5)
    assert "|v2| = 0.9842" in emit_report(run)


def test_polar_and_complex_forms_agree(run_model):
    tight = lambda t: t.replace("eps=1e-6", "eps=1e-12")
    polar = run_model("example1.mod", edit=tight).outputs
    complex_form = run_model("example2.mod", edit=tight).outputs
    for k in (2, 3):
        v = cmath.rect(polar[f"v_{k}"], polar[f"δ_{k}"])
        assert abs(v - complex_form[f"v{k}"]) < 1e-8


#####################################
# Generator Limits
#####################################


def test_regulated_generator_holds_voltage(run_model):
    run = run_model("example3.mod")
    assert run.succeeded
    assert abs(run.outputs["v2"]) == pytest.approx(1.01, abs=1e-8)
    assert run.signals == []
    assert run.outputs["cGen2Reg"] is True


def test_generator_switches_at_upper_limit(run_model):
    run = run_model("example3.mod", edit=lambda t: t.replace("Q2_inj_max=1.6", "Q2_inj_max=0.5"))
    assert run.succeeded
    assert [s.name for s in run.signals] == ["TooHigh"]
    assert run.outputs["cGen2Reg"] is False
    assert run.outputs["Q2_inj"] == pytest.approx(0.5)
    assert abs(run.outputs["v2"]) < 1.01


#####################################
# Volt-VAr Control
#####################################


def volt_var(v: float) -> float:
    plateau = 0.44 * 1.5
    slope = -11.0
    if v < 0.94:
        return plateau
    if v < 1.00:
        return plateau + slope * (v - 0.94)
    if v > 1.10:
        return -plateau
    if v > 1.04:
        return slope * (v - 1.04)
    return 0.0


def test_volt_var_characteristic(run_model):
    run = run_model("example4.mod")
    assert run.succeeded
    v2 = run.outputs["v_2"]
    assert run.outputs["Q2_inj"] == pytest.approx(volt_var(v2), abs=1e-8)


#####################################
# Repeats
#####################################


def test_load_grows_until_collapse(run_model):
    run = run_model("example5.mod")
    assert run.succeeded
    converged = len(run.converged_passes)
    assert converged > 1
    expected = (-1 - 0.3j) - (converged - 1) * (0.02 + 0.01j)
    assert run.outputs["S3_inj"] == pytest.approx(expected, abs=1e-9)
    assert not run.passes[-1].converged or converged == 1000


def test_warm_started_trace_is_continuous(run_model, tmp_path):
    run = run_model("example5.mod", edit=lambda t: t.replace("reInit=true", "reInit=false"))
    assert run.succeeded
    assert not run.passes[-1].converged
    magnitudes = [abs(p.values["v3"]) for p in run.converged_passes]
    assert np.max(np.abs(np.diff(magnitudes))) < 0.05
    trace = write_trace(run, tmp_path / "pv.trace.csv")
    assert len(pd.read_csv(trace)) <= 1000


#####################################
# State Estimation
#####################################


def test_state_estimation_with_constraints(run_model):
    run = run_model("example6.mod")
    assert run.succeeded
    assert abs(run.outputs["v2"]) == pytest.approx(V2, abs=1e-4)
    assert abs(run.outputs["v3"]) == pytest.approx(V3, abs=1e-4)
    assert run.residuals.objective < 1e-6
    assert len(run.residuals.rows) == 6
    estimate = run.passes[0].result
    assert np.max(np.abs(estimate.constraint_residuals)) < 1e-8
    assert len(estimate.multipliers) == 2


def test_noisy_measurements_are_reproducible(run_model):
    first, again = run_model("example7.mod", seed=9), run_model("example7.mod", seed=9)
    assert first.succeeded
    assert first.outputs == again.outputs
    other = run_model("example7.mod", seed=10)
    assert other.outputs["v2_meas"] != first.outputs["v2_meas"]


def test_noise_free_estimate_matches_submodel(run_model):
    run = run_model("example7.mod", edit=lambda t: t.replace("dev=0.02", "dev=0").replace("dev=0.03", "dev=0"))
    assert run.succeeded
    (sub,) = run.passes[0].submodels
    assert run.outputs["v1_meas"] == pytest.approx(1.01)
    for name in ("v2", "v3"):
        assert run.outputs[name] == pytest.approx(sub.values[name], abs=1e-5)


#####################################
# Tap Changer
#####################################


def test_tap_is_discretized(run_model):
    run = run_model("example8.mod")
    assert run.succeeded
    names = [s.name for s in run.signals]
    assert len(names) == 1 and names[0] in ("TooLow", "TooHigh", "Rounding")
    t = run.outputs["t"]
    steps = (t - 1) / 0.0125
    assert steps == pytest.approx(round(steps), abs=1e-9)
    assert run.outputs["LTC_pos"] == round(steps)
    assert isinstance(run.outputs["LTC_pos"], int)
    assert run.outputs["cLTC23Reg"] is False


#####################################
# Converted Cases
#####################################


def solved_voltages(case, options: ConvertOptions) -> np.ndarray:
    run = solve_text(emit_model(case, options), f"{case.name}.mod")
    assert run.succeeded, run.failure
    return bus_voltages(case, options, run.outputs)


@pytest.mark.parametrize("path", CASE_FILES, ids=lambda p: p.stem)
def test_three_forms_agree_with_reference(path):
    case = read_case(path)
    reference = reference_power_flow(case)
    assert reference.converged
    forms = [solved_voltages(case, ConvertOptions(format=fmt)) for fmt in ("polar", "rectangular", "complex")]
    for voltages in forms:
        assert max_voltage_error(reference.V, voltages) < 1e-6
        assert max_voltage_error(forms[0], voltages) < 1e-8


@pytest.mark.parametrize("path", CASE_FILES, ids=lambda p: p.stem)
def test_reactive_limits_agree_with_reference(path):
    case = read_case(path)
    options = ConvertOptions(enforce_q_limits=True)
    reference = reference_power_flow(case, options)
    assert reference.converged
    for fmt in ("polar", "complex"):
        voltages = solved_voltages(case, ConvertOptions(format=fmt, enforce_q_limits=True))
        assert max_voltage_error(reference.V, voltages) < 1e-6


@pytest.mark.parametrize("path", CASE_FILES, ids=lambda p: p.stem)
def test_zip_loads_agree_with_reference(path):
    case = read_case(path)
    options = ConvertOptions(zip_p=(0.3, 0.3, 0.4), zip_q=(0.2, 0.2, 0.6))
    reference = reference_power_flow(case, options)
    assert reference.converged
    for fmt in ("polar", "rectangular", "complex"):
        voltages = solved_voltages(case, options.with_overrides(format=fmt))
        assert max_voltage_error(reference.V, voltages) < 1e-6


def test_converted_case3_matches_hand_model(load_case):
    voltages = solved_voltages(load_case("case3.m"), ConvertOptions())
    assert abs(voltages[1]) == pytest.approx(V2, abs=1e-5)
    assert abs(voltages[2]) == pytest.approx(V3, abs=1e-5)
