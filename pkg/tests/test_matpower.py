"""MATPOWER case reading, Ybus, converter options, model emission and the reference power flow."""

import cmath
import pathlib

import numpy as np
import pytest

from engine import compile_document
from language import ensure_valid, parse_text
from matpower import (
    ConvertOptions,
    build_ybus,
    case_summary,
    emit_model,
    load_config,
    parse_case,
    read_config,
    reference_power_flow,
)
from matpower.case_parser import PQ, PV
from matpower.emitter import bus_data
from matpower.ybus import branch_admittances
from utils.errors import CaseFormatError, ConfigError

CONFIG = pathlib.Path(__file__).resolve().parents[1] / "data" / "config.xml"

TWO_BUS = """
function mpc = two_bus
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 110 1 1.1 0.9;
    2 1 {pd} 10 0 {bs} 1 1 0 110 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 99 -99 1.02 100 1 99 0;
];
mpc.branch = [
    1 2 0.01 0.1 0.02 0 0 0 {tap} {shift} 1 -360 360;
];
"""


def two_bus(pd=50, bs=0, tap=0, shift=0):
    return parse_case(TWO_BUS.format(pd=pd, bs=bs, tap=tap, shift=shift), "two_bus")


#####################################
# Case Files
#####################################


def test_case3_summary(load_case):
    case = load_case("case3.m")
    assert case.name == "case3"
    assert case.base_mva == 100
    assert case_summary(case) == {
        "buses": 3, "pq": 2, "pv": 0, "slack": 1, "generators": 1, "branches": 2,
    }


def test_case9_summary(load_case):
    summary = case_summary(load_case("case9.m"))
    assert (summary["buses"], summary["generators"], summary["branches"]) == (9, 3, 9)


def test_generators_aggregate_per_bus(load_case):
    case = load_case("case5.m")
    buses = bus_data(case)
    bus1 = buses[case.bus_index[1]]
    assert bus1.kind == PV
    assert bus1.pg == pytest.approx(2.1)
    assert bus1.qmax == pytest.approx(1.575)
    assert buses[case.bus_index[2]].kind == PQ


def test_comments_and_row_separators():
    text = TWO_BUS.format(pd=50, bs=0, tap=0, shift=0).replace("mpc.baseMVA = 100;", "mpc.baseMVA = 100; % system base")
    assert parse_case(text).base_mva == 100


@pytest.mark.parametrize(
    "edit, message",
    [
        (lambda t: t.replace("2 1 50", "2 3 50"), "exactly one slack"),
        (lambda t: t.replace("2 1 50", "2 4 50"), "isolated buses"),
        (lambda t: t.replace("1 2 0.01 0.1", "1 7 0.01 0.1"), "unknown bus 7"),
        (lambda t: t.replace("mpc.gen = [\n    1 0", "mpc.gen = [\n    9 0"), "unknown bus 9"),
        (lambda t: t.replace("0.1 0.02", "0.1 x"), "non-numeric"),
        (lambda t: t.replace("1.1 0.9;\n];", "1.1;\n];"), "ragged"),
        (lambda t: t.replace("mpc.baseMVA = 100;", ""), "missing baseMVA"),
        (lambda t: t.split("mpc.branch")[0], "missing branch table"),
    ],
)
def test_malformed_cases(edit, message):
    with pytest.raises(CaseFormatError, match=message):
        parse_case(edit(TWO_BUS.format(pd=50, bs=0, tap=0, shift=0)))


#####################################
# Ybus
#####################################


def test_case3_ybus(load_case):
    ybus = build_ybus(load_case("case3.m")).toarray()
    y = 1 / (0.005 + 0.03j)
    assert ybus[0, 1] == pytest.approx(-(5.405405405405 - 32.432432432432j))
    assert ybus[1, 1] == pytest.approx(2 * y)
    assert ybus[0, 2] == 0
    assert abs(ybus[1, 2]) == pytest.approx(32.8797974610715, rel=1e-12)
    assert cmath.phase(ybus[1, 1]) == pytest.approx(-1.40564764938027, rel=1e-12)
    assert cmath.phase(ybus[1, 2]) == pytest.approx(1.73594500420952, rel=1e-12)


def test_line_charging_and_shunt():
    ys = 1 / (0.01 + 0.1j)
    ybus = build_ybus(two_bus(bs=19)).toarray()
    assert ybus[0, 0] == pytest.approx(ys + 0.01j)
    assert ybus[1, 1] == pytest.approx(ys + 0.01j + 0.19j)
    np.testing.assert_allclose(ybus, ybus.T)


def test_phase_shifter_breaks_symmetry():
    case = two_bus(tap=0.95, shift=30)
    (yff, yft, ytf, ytt), _ = branch_admittances(case)
    tap = 0.95 * cmath.exp(1j * cmath.pi / 6)
    ys = 1 / (0.01 + 0.1j)
    assert yft[0] == pytest.approx(-ys / tap.conjugate())
    assert ytf[0] == pytest.approx(-ys / tap)
    assert yff[0] == pytest.approx((ys + 0.01j) / 0.95**2)
    ybus = build_ybus(case).toarray()
    assert ybus[0, 1] != pytest.approx(ybus[1, 0])


def test_zero_impedance_branch():
    text = TWO_BUS.format(pd=50, bs=0, tap=0, shift=0).replace("0.01 0.1", "0 0")
    with pytest.raises(CaseFormatError, match="zero impedance"):
        build_ybus(parse_case(text))


def test_case14_shunt(load_case):
    case = load_case("case14.m")
    with_shunt = build_ybus(case).toarray()
    case.bus[case.bus_index[9], 5] = 0
    without = build_ybus(case).toarray()
    assert with_shunt[8, 8] - without[8, 8] == pytest.approx(0.19j)


#####################################
# Converter Options
#####################################


def test_defaults_from_empty_config():
    assert load_config("") == ConvertOptions()
    assert ConvertOptions().constant_power


def test_bundled_config():
    options = read_config(CONFIG)
    assert options == ConvertOptions()


def test_config_overrides():
    options = load_config(
        """<config>
          <options><format>rectangular</format><symbols>ascii</symbols><maxIter>7</maxIter></options>
          <variables out="false"/>
          <limits qLimits="true"/>
          <loads><P z="0.5" i="0.25" p="0.25"/></loads>
        </config>"""
    )
    assert options.format == "rectangular"
    assert options.symbols == "ascii"
    assert options.max_iter == 7
    assert options.out is False
    assert options.enforce_q_limits is True
    assert options.zip_p == (0.5, 0.25, 0.25)
    assert options.zip_q == (0.0, 0.0, 1.0)
    assert not options.constant_power


@pytest.mark.parametrize(
    "text, message",
    [
        ("<config><options><format>dq0</format></options></config>", "format must be one of"),
        ("<config><loads><P z='0.5' i='0' p='0.6'/></loads></config>", "must sum to 1"),
        ("<config><loads><Q z='-0.5' i='0.5' p='1'/></loads></config>", "non-negative"),
        ("<config><options><eps>0</eps></options></config>", "eps must be positive"),
        ("<config><limits qLimits='maybe'/></config>", "expected true or false"),
        ("<config><options>", "malformed configuration"),
    ],
)
def test_bad_config(text, message):
    with pytest.raises(ConfigError, match=message):
        load_config(text)


def test_cli_style_overrides_are_checked():
    options = ConvertOptions().with_overrides(format="complex", symbols=None)
    assert options.format == "complex" and options.symbols == "greek"
    with pytest.raises(ConfigError):
        ConvertOptions().with_overrides(report="Everything")


#####################################
# Model Emission
#####################################


def emitted(case, **changes):
    options = ConvertOptions().with_overrides(**changes)
    document = parse_text(emit_model(case, options), f"{case.name}.mod")
    ensure_valid(document)
    return document


@pytest.mark.parametrize("fmt", ["polar", "rectangular", "complex"])
def test_case9_unknown_count(load_case, fmt):
    model = compile_document(emitted(load_case("case9.m"), format=fmt))
    assert len(model.unknowns) == 16


def test_polar_names(load_case):
    text = emit_model(load_case("case3.m"))
    assert "Model [type=NL domain=real" in text
    assert "Vars [out=true]:" in text
    assert "// bus 2: zero injection, current sums" in text
    assert "aY_2_3=" in text and "θ_2_3=" in text
    assert "δ_3" in text
    assert "P_3_inj=-1.0" in text and "Q_3_inj=-0.3" in text


def test_ascii_names(load_case):
    text = emit_model(load_case("case3.m"), ConvertOptions(symbols="ascii"))
    assert "δ" not in text and "θ" not in text
    assert "d_3" in text and "th_2_3=" in text


def test_complex_names(load_case):
    text = emit_model(load_case("case3.m"), ConvertOptions(format="complex"))
    assert "domain=cmplx" in text
    assert "Vars [conj=true out=true]:" in text
    assert "S_3_inj=" in text
    assert "conj(v_3)" in text


def test_rectangular_names(load_case):
    text = emit_model(load_case("case9.m"), ConvertOptions(format="rectangular"))
    assert "G_4_5=" in text and "B_4_5=" in text
    assert "(e_2^2 + f_2^2) = Vsp_2^2" in text


def test_out_flag(load_case):
    text = emit_model(load_case("case3.m"), ConvertOptions(out=False))
    assert "Vars:" in text


def test_reactive_limits_emit_guards_and_group(load_case):
    document = emitted(load_case("case9.m"), enforce_q_limits=True)
    text = emit_model(load_case("case9.m"), ConvertOptions(enforce_q_limits=True))
    assert "if cGen_2:" in text
    assert 'group [name="QLimits"]:' in text
    assert "cGen_3=true [type=bool]" in text
    assert "Qmin_2=-3.0 [type=real]" in text
    (limits,) = document.groups_of("Limits")
    assert limits.statements[0].name == "QLimits"


def test_zip_loads_are_inlined(load_case):
    text = emit_model(load_case("case3.m"), ConvertOptions(zip_p=(0.2, 0.3, 0.5)))
    assert "Pd_3=1.0" in text
    assert "v_3^2" in text
    assert "P_3_inj" not in text


#####################################
# Reference Power Flow
#####################################


def _mismatch(case, V):
    s = V * np.conj(build_ybus(case) @ V)
    buses = bus_data(case)
    scheduled = np.array([complex(b.pg - b.pd, b.qg - b.qd) for b in buses])
    return s - scheduled, buses


@pytest.mark.parametrize("name", ["case3.m", "case5.m", "case9.m", "case14.m"])
def test_reference_satisfies_power_balance(load_case, name):
    case = load_case(name)
    result = reference_power_flow(case)
    assert result.converged
    mismatch, buses = _mismatch(case, result.V)
    for k, bus in enumerate(buses):
        if k == case.slack:
            assert result.V[k] == pytest.approx(bus.vsp)
        elif bus.kind == PV:
            assert abs(result.V[k]) == pytest.approx(bus.vsp, abs=1e-12)
            assert abs(mismatch[k].real) < 1e-9
        else:
            assert abs(mismatch[k]) < 1e-9


def test_reference_case3_voltages(load_case):
    result = reference_power_flow(load_case("case3.m"))
    assert abs(result.V[1]) == pytest.approx(0.984267, abs=1e-6)
    assert abs(result.V[2]) == pytest.approx(0.969386, abs=1e-6)


def test_reference_switches_generators_at_limits(load_case):
    case = load_case("case14.m")
    result = reference_power_flow(case, ConvertOptions(enforce_q_limits=True))
    assert result.converged
    plain = reference_power_flow(case)
    q = (plain.V * np.conj(build_ybus(case) @ plain.V)).imag
    buses = bus_data(case)
    violated = [
        b.id for k, b in enumerate(buses)
        if b.kind == PV and k != case.slack and not b.qmin < q[k] + b.qd < b.qmax
    ]
    assert set(violated) <= set(result.switched)
    if not violated:
        assert result.switched == []
