"""
Reference Power Flow
A plain polar Newton power flow working directly on CaseData and Ybus,
used to check converted models. It shares no code with the model
language or the model solvers.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from matpower.case_parser import PQ, PV, CaseData
from matpower.config import ConvertOptions
from matpower.emitter import bus_data, slack_voltage
from matpower.ybus import build_ybus
from utils.utils_logger import logger

#####################################
# Result
#####################################


@dataclass
class ReferenceResult:
    V: np.ndarray
    converged: bool
    iterations: int
    mismatch: float
    # buses whose generators hit a reactive limit
    switched: List[int] = field(default_factory=list)


#####################################
# Helper Functions
#####################################


def dS_dV(ybus, V: np.ndarray):
    """Partial derivatives of bus power injections w.r.t. |V| and angle."""
    ibus = ybus @ V
    diag_v = sp.diags(V)
    diag_i = sp.diags(ibus)
    diag_vnorm = sp.diags(V / np.abs(V))
    dS_dVm = diag_v @ (ybus @ diag_vnorm).conj() + diag_i.conj() @ diag_vnorm
    dS_dVa = 1j * diag_v @ (diag_i - ybus @ diag_v).conj()
    return dS_dVm.tocsr(), dS_dVa.tocsr()


def _zip(fractions, vm: np.ndarray):
    z, i, p = fractions
    return z * vm**2 + i * vm + p, 2 * z * vm + i


class _Injections:
    """Scheduled complex injection S(|V|) and its |V| derivative."""

    def __init__(self, case: CaseData, options: ConvertOptions):
        buses = bus_data(case)
        self.pg = np.array([b.pg for b in buses])
        self.qg = np.array([b.qg for b in buses])
        self.pd = np.array([b.pd for b in buses])
        self.qd = np.array([b.qd for b in buses])
        self.options = options

    def __call__(self, vm: np.ndarray):
        fp, dfp = _zip(self.options.zip_p, vm)
        fq, dfq = _zip(self.options.zip_q, vm)
        s = self.pg + 1j * self.qg - (self.pd * fp + 1j * self.qd * fq)
        ds = -(self.pd * dfp + 1j * self.qd * dfq)
        return s, ds


def _newton(ybus, V, inject: _Injections, pv, pq, tol: float, max_iter: int):
    pvpq = np.r_[pv, pq]
    npvpq = len(pvpq)
    vm, va = np.abs(V), np.angle(V)
    for iteration in range(max_iter + 1):
        sbus, dsbus = inject(vm)
        mis = V * np.conj(ybus @ V) - sbus
        F = np.r_[mis[pvpq].real, mis[pq].imag]
        norm = float(np.max(np.abs(F))) if F.size else 0.0
        logger.debug(f"reference iteration {iteration}: |F|inf = {norm:.3e}")
        if norm < tol:
            return V, True, iteration, norm
        if iteration == max_iter:
            break
        dVm, dVa = dS_dV(ybus, V)
        dVm = (dVm - sp.diags(dsbus)).tocsr()
        J = sp.vstack(
            [
                sp.hstack([dVa[pvpq][:, pvpq].real, dVm[pvpq][:, pq].real]),
                sp.hstack([dVa[pq][:, pvpq].imag, dVm[pq][:, pq].imag]),
            ],
            format="csc",
        )
        dx = np.atleast_1d(spsolve(J, F))
        va[pvpq] -= dx[:npvpq]
        vm[pq] -= dx[npvpq:]
        V = vm * np.exp(1j * va)
    return V, False, max_iter, norm


#####################################
# Public Functions
#####################################


def reference_power_flow(
    case: CaseData, options: Optional[ConvertOptions] = None, tol: float = 1e-11, max_iter: int = 50
) -> ReferenceResult:
    """
    Solve the case's AC power flow. With enforce_q_limits, every PV bus
    whose generator output reaches Qmin or Qmax is fixed at that limit
    and re-solved as PQ until no limit is reached.
    """
    options = options or ConvertOptions()
    ybus = build_ybus(case).tocsr()
    buses = bus_data(case)
    inject = _Injections(case, options)
    types = np.array([b.kind for b in buses])
    types[case.slack] = 0

    V = np.ones(len(buses), dtype=complex) * np.exp(1j * np.angle(slack_voltage(case, buses)))
    V[case.slack] = slack_voltage(case, buses)
    for k, bus in enumerate(buses):
        if types[k] == PV:
            V[k] = bus.vsp * np.exp(1j * np.angle(V[k]))

    switched: List[int] = []
    total = 0
    while True:
        pv = np.flatnonzero(types == PV)
        pq = np.flatnonzero(types == PQ)
        V, converged, iterations, norm = _newton(ybus, V, inject, pv, pq, tol, max_iter)
        total += iterations
        if not converged or not options.enforce_q_limits:
            break
        q_load = inject.qd * _zip(options.zip_q, np.abs(V))[0]
        q_gen = (V * np.conj(ybus @ V)).imag + q_load
        hits = []
        for k in pv:
            if q_gen[k] <= buses[k].qmin:
                inject.qg[k] = buses[k].qmin
                hits.append(k)
            elif q_gen[k] >= buses[k].qmax:
                inject.qg[k] = buses[k].qmax
                hits.append(k)
        if not hits:
            break
        for k in hits:
            types[k] = PQ
            switched.append(buses[k].id)
        logger.info(f"Reference power flow: reactive limits at bus(es) {[buses[k].id for k in hits]}")

    logger.info(
        f"Reference power flow for {case.name}: "
        f"{'converged' if converged else 'NOT converged'} in {total} iteration(s)"
    )
    return ReferenceResult(V, converged, total, norm, switched)


def max_voltage_error(reference: np.ndarray, voltages: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(reference) - np.asarray(voltages))))
