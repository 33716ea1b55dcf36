"""
Model Emitter
Writes a MATPOWER case as a model file in polar, rectangular or complex
form. The slack bus becomes parameters; every other bus contributes two
equations:

  PQ bus:   real and reactive power balance (ZIP loads inline)
  ZI bus:   real and imaginary current sums
  PV bus:   real power balance plus the voltage magnitude, or the
            reactive power balance once a Q limit has been reached
"""

#####################################
# Import Modules
#####################################

import cmath
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from language.printer import format_expression, format_number
from matpower.case_parser import (
    GEN_BUS,
    PD,
    PG,
    PQ,
    PV,
    QD,
    QG,
    QMAX,
    QMIN,
    VA,
    VG,
    VM,
    CaseData,
)
from matpower.config import ConvertOptions, Zip
from matpower.ybus import build_ybus
from symbolic.expr import Const
from utils.utils_logger import logger

INDENT = "    "

#####################################
# Bus Data
#####################################


@dataclass
class BusData:
    """Per-unit injections and generator data of one bus."""

    id: int
    kind: int
    pg: float = 0.0
    qg: float = 0.0
    pd: float = 0.0
    qd: float = 0.0
    qmin: float = 0.0
    qmax: float = 0.0
    vsp: Optional[float] = None

    @property
    def zero_injection(self) -> bool:
        return self.kind == PQ and self.pd == 0 and self.qd == 0 and self.pg == 0 and self.qg == 0


def bus_data(case: CaseData) -> List[BusData]:
    """Generators aggregated per bus; the first in-service unit sets Vsp."""
    base = case.base_mva
    types = case.effective_types()
    buses = [
        BusData(int(row[0]), int(types[k]), pd=row[PD] / base, qd=row[QD] / base)
        for k, row in enumerate(case.bus)
    ]
    for gen in case.in_service_gens():
        bus = buses[case.bus_index[int(gen[GEN_BUS])]]
        bus.pg += gen[PG] / base
        bus.qg += gen[QG] / base
        bus.qmin += gen[QMIN] / base
        bus.qmax += gen[QMAX] / base
        if bus.vsp is None:
            bus.vsp = float(gen[VG])
    return buses


def slack_voltage(case: CaseData, buses: List[BusData]) -> complex:
    row = case.slack
    magnitude = buses[row].vsp if buses[row].vsp is not None else float(case.bus[row, VM])
    return cmath.rect(magnitude, math.radians(case.bus[row, VA]))


def zip_factor(fractions: Zip, magnitude: float) -> float:
    z, i, p = fractions
    return z * magnitude**2 + i * magnitude + p


#####################################
# Formatting Helpers
#####################################


def _num(value) -> str:
    if isinstance(value, complex):
        return format_expression(Const(value))
    return format_number(float(value))


def _sum(terms: List[str]) -> str:
    text = " + ".join(terms) if terms else "0"
    return text.replace("+ -", "- ")


def _zip_term(name: str, fractions: Zip, square: str, magnitude: str) -> str:
    """`name*(z*V^2 + i*V + p)` with zero fractions left out."""
    z, i, p = fractions
    parts = []
    if z:
        parts.append(f"{_num(z)}*{square}")
    if i:
        parts.append(f"{_num(i)}*{magnitude}")
    if p:
        parts.append(_num(p))
    return f"{name}*({' + '.join(parts)})"


#####################################
# Emitter
#####################################


class _Emitter:
    def __init__(self, case: CaseData, options: ConvertOptions):
        self.case = case
        self.options = options
        self.buses = bus_data(case)
        self.slack = case.slack
        self.v_slack = slack_voltage(case, self.buses)
        self.complex_form = options.format == "complex"
        self.angle = "δ" if options.symbols == "greek" else "d"
        self.theta = "θ" if options.symbols == "greek" else "th"
        ybus = build_ybus(case).tocoo()
        self.ybus: Dict[int, Dict[int, complex]] = {}
        for k, m, y in zip(ybus.row, ybus.col, ybus.data):
            if y != 0:
                self.ybus.setdefault(int(k), {})[int(m)] = complex(y)

    # ---- naming -----------------------------------------------------

    def bid(self, row: int) -> int:
        return self.buses[row].id

    def neighbours(self, k: int) -> List[int]:
        return sorted(self.ybus.get(k, {}))

    def param_type(self) -> str:
        """Real-valued parameters need an explicit type in a complex model."""
        return " [type=real]" if self.complex_form else ""

    # ---- magnitudes ------------------------------------------------

    def square(self, k: int) -> str:
        n = self.bid(k)
        if self.options.format == "polar":
            return f"v_{n}^2"
        if self.options.format == "rectangular":
            return f"(e_{n}^2 + f_{n}^2)"
        return f"v_{n}*conj(v_{n})"

    def magnitude(self, k: int) -> str:
        n = self.bid(k)
        if self.options.format == "polar":
            return f"v_{n}"
        if self.options.format == "rectangular":
            return f"sqrt(e_{n}^2 + f_{n}^2)"
        return f"sqrt(v_{n}*conj(v_{n}))"

    # ---- injections -------------------------------------------------

    def load(self, k: int, which: str) -> str:
        """Load term of bus k for P or Q, empty when the bus has none."""
        bus = self.buses[k]
        value = bus.pd if which == "P" else bus.qd
        if value == 0:
            return ""
        name = f"{which}d_{bus.id}"
        if self.options.constant_power:
            return name
        fractions = self.options.zip_p if which == "P" else self.options.zip_q
        return _zip_term(name, fractions, self.square(k), self.magnitude(k))

    def p_rhs(self, k: int) -> str:
        bus = self.buses[k]
        if self.options.constant_power:
            return f"P_{bus.id}_inj"
        load = self.load(k, "P")
        gen = f"Pg_{bus.id}" if bus.pg else ""
        if gen and load:
            return f"{gen} - {load}"
        return gen or (f"-{load}" if load else "0")

    def q_rhs(self, k: int) -> str:
        """Reactive injection; at a PV bus the generator output is Qg_k."""
        bus = self.buses[k]
        if self.options.constant_power and bus.kind == PQ:
            return f"Q_{bus.id}_inj"
        load = self.load(k, "Q")
        gen = f"Qg_{bus.id}" if bus.kind == PV or bus.qg else ""
        if gen and load:
            return f"{gen} - {load}"
        return gen or (f"-{load}" if load else "0")

    # ---- network sums -----------------------------------------------

    def polar_terms(self, k: int, which: str) -> str:
        n = self.bid(k)
        d, th = self.angle, self.theta
        fn = "cos" if which == "P" else "sin"
        terms = []
        for m in self.neighbours(k):
            j = self.bid(m)
            if m == k:
                sign = "-" if which == "Q" else ""
                terms.append(f"{sign}aY_{n}_{n}*v_{n}*{fn}({th}_{n}_{n})")
            else:
                terms.append(f"aY_{n}_{j}*v_{j}*{fn}({d}_{n}-{th}_{n}_{j}-{d}_{j})")
        return _sum(terms)

    def polar_current(self, k: int, fn: str) -> str:
        n = self.bid(k)
        d, th = self.angle, self.theta
        terms = [
            f"aY_{n}_{self.bid(m)}*v_{self.bid(m)}*{fn}({th}_{n}_{self.bid(m)}+{d}_{self.bid(m)})"
            for m in self.neighbours(k)
        ]
        return _sum(terms)

    def rect_current(self, k: int, part: str) -> str:
        n = self.bid(k)
        terms = []
        for m in self.neighbours(k):
            j = self.bid(m)
            if part == "re":
                terms.append(f"G_{n}_{j}*e_{j} - B_{n}_{j}*f_{j}")
            else:
                terms.append(f"G_{n}_{j}*f_{j} + B_{n}_{j}*e_{j}")
        return _sum(terms)

    def complex_current(self, k: int) -> str:
        n = self.bid(k)
        return _sum([f"Y_{n}_{self.bid(m)}*v_{self.bid(m)}" for m in self.neighbours(k)])

    # ---- equations --------------------------------------------------

    def power_equation(self, k: int, which: str) -> List[str]:
        """Real-domain P or Q balance; complex form returns the equation pair."""
        n = self.bid(k)
        fmt = self.options.format
        if fmt == "polar":
            return [f"v_{n}*({self.polar_terms(k, which)}) = {self.p_rhs(k) if which == 'P' else self.q_rhs(k)}"]
        if fmt == "rectangular":
            ir, ii = self.rect_current(k, "re"), self.rect_current(k, "im")
            if which == "P":
                return [f"e_{n}*({ir}) + f_{n}*({ii}) = {self.p_rhs(k)}"]
            return [f"f_{n}*({ir}) - e_{n}*({ii}) = {self.q_rhs(k)}"]
        current = self.complex_current(k)
        if which == "P":
            return [f"v_{n}*conj({current}) + conj(v_{n})*({current}) = 2*({self.p_rhs(k)})"]
        return [f"v_{n}*conj({current}) - conj(v_{n})*({current}) = 2i*({self.q_rhs(k)})"]

    def complex_pq(self, k: int) -> List[str]:
        n = self.bid(k)
        current = self.complex_current(k)
        if self.options.constant_power:
            rhs, conj_rhs = f"S_{n}_inj", f"conj(S_{n}_inj)"
        else:
            p, q = self.p_rhs(k), self.q_rhs(k)
            rhs, conj_rhs = f"{p} + 1i*({q})", f"{p} - 1i*({q})"
        return [
            f"v_{n}*conj({current}) = {rhs}",
            f"conj(v_{n})*({current}) = {conj_rhs}",
        ]

    def zero_injection(self, k: int) -> List[str]:
        fmt = self.options.format
        if fmt == "polar":
            return [f"{self.polar_current(k, 'cos')} = 0", f"{self.polar_current(k, 'sin')} = 0"]
        if fmt == "rectangular":
            return [f"{self.rect_current(k, 're')} = 0", f"{self.rect_current(k, 'im')} = 0"]
        current = self.complex_current(k)
        return [f"{current} = 0", f"conj({current}) = 0"]

    def magnitude_equation(self, k: int) -> str:
        n = self.bid(k)
        if self.options.format == "polar":
            return f"v_{n} = Vsp_{n}"
        return f"{self.square(k)} = Vsp_{n}^2"

    def q_value(self, k: int) -> str:
        """Generator reactive output expression used by the limit checks."""
        n = self.bid(k)
        fmt = self.options.format
        if fmt == "polar":
            calc = f"v_{n}*({self.polar_terms(k, 'Q')})"
        elif fmt == "rectangular":
            calc = f"f_{n}*({self.rect_current(k, 're')}) - e_{n}*({self.rect_current(k, 'im')})"
        else:
            calc = f"imag(v_{n}*conj({self.complex_current(k)}))"
        load = self.load(k, "Q")
        return f"{calc} + {load}" if load else calc

    # ---- sections ---------------------------------------------------

    def header(self) -> List[str]:
        options = self.options
        domain = "cmplx" if self.complex_form else "real"
        name = f"{self.case.name} ({options.format})"
        return [
            f"// {self.case.name}: {len(self.buses)} buses, converted to {options.format} form",
            "Header:",
            f"{INDENT}maxIter={options.max_iter}",
            f"{INDENT}report={options.report}",
            "end",
            f'Model [type=NL domain={domain} eps={_num(options.eps)} name="{name}"]:',
        ]

    def variables(self) -> List[str]:
        fmt = self.options.format
        attrs = []
        if self.complex_form:
            attrs.append("conj=true")
        if self.options.out:
            attrs.append("out=true")
        lines = [f"Vars [{' '.join(attrs)}]:" if attrs else "Vars:"]
        angle = cmath.phase(self.v_slack)
        for k, bus in enumerate(self.buses):
            if k == self.slack:
                continue
            vm = bus.vsp if bus.kind == PV else 1.0
            n = bus.id
            if fmt == "polar":
                lines.append(f"{INDENT}{self.angle}_{n}={_num(angle)}; v_{n}={_num(vm)}")
            elif fmt == "rectangular":
                lines.append(
                    f"{INDENT}e_{n}={_num(vm * math.cos(angle))}; f_{n}={_num(vm * math.sin(angle))}"
                )
            else:
                lines.append(f"{INDENT}v_{n}={_num(cmath.rect(vm, angle))}")
        return lines

    def admittance_params(self) -> List[str]:
        fmt = self.options.format
        lines = [f"{INDENT}// bus admittance matrix"]
        for k in sorted(self.ybus):
            n = self.bid(k)
            entries = []
            for m in self.neighbours(k):
                y = self.ybus[k][m]
                j = self.bid(m)
                if fmt == "polar":
                    entries.append(f"aY_{n}_{j}={_num(abs(y))}; {self.theta}_{n}_{j}={_num(cmath.phase(y))}")
                elif fmt == "rectangular":
                    entries.append(f"G_{n}_{j}={_num(y.real)}; B_{n}_{j}={_num(y.imag)}")
                else:
                    entries.append(f"Y_{n}_{j}={_num(y)}")
            lines.append(INDENT + "; ".join(entries))
        return lines

    def slack_params(self) -> List[str]:
        n = self.bid(self.slack)
        fmt = self.options.format
        v = self.v_slack
        if fmt == "polar":
            text = f"{self.angle}_{n}={_num(cmath.phase(v))}; v_{n}={_num(abs(v))}"
        elif fmt == "rectangular":
            text = f"e_{n}={_num(v.real)}; f_{n}={_num(v.imag)}"
        else:
            text = f"v_{n}={_num(v)}"
        return [f"{INDENT}// slack bus {n}", INDENT + text]

    def injection_params(self) -> List[str]:
        lines = [f"{INDENT}// injections (per unit on {_num(self.case.base_mva)} MVA)"]
        typed = self.param_type()
        limits = self.options.enforce_q_limits
        for k, bus in enumerate(self.buses):
            if k == self.slack or bus.zero_injection:
                continue
            n = bus.id
            params = []
            if self.options.constant_power:
                if bus.kind == PQ and self.complex_form:
                    params.append(f"S_{n}_inj={_num(complex(bus.pg - bus.pd, bus.qg - bus.qd))}")
                else:
                    params.append(f"P_{n}_inj={_num(bus.pg - bus.pd)}{typed}")
                    if bus.kind == PQ:
                        params.append(f"Q_{n}_inj={_num(bus.qg - bus.qd)}{typed}")
            else:
                if bus.pg:
                    params.append(f"Pg_{n}={_num(bus.pg)}{typed}")
                if bus.pd:
                    params.append(f"Pd_{n}={_num(bus.pd)}{typed}")
            if bus.kind == PV:
                params.append(f"Vsp_{n}={_num(bus.vsp)}{typed}")
                if bus.qd and (limits or not self.options.constant_power):
                    params.append(f"Qd_{n}={_num(bus.qd)}{typed}")
                if limits:
                    params.append(f"Qg_{n}={_num(bus.qg)} [type=real]")
                    params.append(f"Qmin_{n}={_num(bus.qmin)} [type=real]")
                    params.append(f"Qmax_{n}={_num(bus.qmax)} [type=real]")
                    params.append(f"cGen_{n}=true [type=bool]")
            elif not self.options.constant_power:
                if bus.qg:
                    params.append(f"Qg_{n}={_num(bus.qg)}{typed}")
                if bus.qd:
                    params.append(f"Qd_{n}={_num(bus.qd)}{typed}")
            lines.append(INDENT + "; ".join(params))
        return lines

    def equations(self) -> List[str]:
        lines = ["NLEs:"]
        for k, bus in enumerate(self.buses):
            if k == self.slack:
                continue
            n = bus.id
            if bus.zero_injection:
                lines.append(f"{INDENT}// bus {n}: zero injection, current sums")
                lines.extend(INDENT + eq for eq in self.zero_injection(k))
            elif bus.kind == PQ:
                lines.append(f"{INDENT}// bus {n}: PQ")
                if self.complex_form:
                    lines.extend(INDENT + eq for eq in self.complex_pq(k))
                else:
                    lines.extend(INDENT + eq for eq in self.power_equation(k, "P"))
                    lines.extend(INDENT + eq for eq in self.power_equation(k, "Q"))
            else:
                lines.append(f"{INDENT}// bus {n}: PV")
                lines.extend(INDENT + eq for eq in self.power_equation(k, "P"))
                if self.options.enforce_q_limits:
                    lines.append(f"{INDENT}if cGen_{n}:")
                    lines.append(f"{INDENT * 2}{self.magnitude_equation(k)}")
                    lines.append(f"{INDENT}else:")
                    lines.extend(INDENT * 2 + eq for eq in self.power_equation(k, "Q"))
                    lines.append(f"{INDENT}end")
                else:
                    lines.append(f"{INDENT}{self.magnitude_equation(k)}")
        return lines

    def limits(self) -> List[str]:
        pv = [k for k, bus in enumerate(self.buses) if bus.kind == PV and k != self.slack]
        if not self.options.enforce_q_limits or not pv:
            return []
        lines = ["Limits:", 'group [name="QLimits"]:']
        for k in pv:
            n = self.bid(k)
            i1, i2, i3 = INDENT, INDENT * 2, INDENT * 3
            lines += [
                f"{i1}// generator reactive limits at bus {n}",
                f"{i1}if cGen_{n}:",
                f"{i2}Qg_{n} = {self.q_value(k)}",
                f"{i2}if Qg_{n} <= Qmin_{n} [signal=TooLow]:",
                f"{i3}cGen_{n} = false",
                f"{i3}Qg_{n} = Qmin_{n}",
                f"{i2}else:",
                f"{i3}if Qg_{n} >= Qmax_{n} [signal=TooHigh]:",
                f"{i3}{INDENT}cGen_{n} = false",
                f"{i3}{INDENT}Qg_{n} = Qmax_{n}",
                f"{i3}end",
                f"{i2}end",
                f"{i1}end",
            ]
        lines.append("end")
        return lines

    def emit(self) -> str:
        lines = self.header()
        lines += self.variables()
        lines.append("Params:")
        lines += self.slack_params()
        lines += self.admittance_params()
        lines += self.injection_params()
        lines += self.equations()
        lines += self.limits()
        lines.append("end")
        return "\n".join(lines) + "\n"


#####################################
# Public Functions
#####################################


def emit_model(case: CaseData, options: Optional[ConvertOptions] = None) -> str:
    """Model file text equivalent to the case's AC power flow."""
    options = options or ConvertOptions()
    text = _Emitter(case, options).emit()
    logger.info(
        f"Emitted {case.name} in {options.format} form "
        f"({options.symbols} symbols, q-limits {'on' if options.enforce_q_limits else 'off'})"
    )
    return text


def bus_voltages(case: CaseData, options: ConvertOptions, values: Dict[str, object]) -> np.ndarray:
    """Complex bus voltages read back from the solved model's values."""
    buses = bus_data(case)
    angle = "δ" if options.symbols == "greek" else "d"
    voltages = np.zeros(len(buses), dtype=complex)
    for k, bus in enumerate(buses):
        n = bus.id
        if k == case.slack:
            voltages[k] = slack_voltage(case, buses)
        elif options.format == "polar":
            voltages[k] = cmath.rect(float(values[f"v_{n}"]), float(values[f"{angle}_{n}"]))
        elif options.format == "rectangular":
            voltages[k] = complex(float(values[f"e_{n}"]), float(values[f"f_{n}"]))
        else:
            voltages[k] = complex(values[f"v_{n}"])
    return voltages
