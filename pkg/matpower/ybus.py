"""
Bus admittance matrix of a MATPOWER case.
"""

#####################################
# Import Modules
#####################################

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from matpower.case_parser import (
    BR_B,
    BR_R,
    BR_X,
    BS,
    F_BUS,
    GS,
    SHIFT,
    T_BUS,
    TAP,
    CaseData,
)
from utils.errors import CaseFormatError
from utils.utils_logger import logger

#####################################
# Helper Functions
#####################################


def branch_admittances(case: CaseData):
    """
    Two-port admittances (Yff, Yft, Ytf, Ytt) and bus rows (f, t) of the
    in-service branches.
    """
    branch = case.in_service_branches()
    r, x = branch[:, BR_R], branch[:, BR_X]
    zero = (r == 0) & (x == 0)
    if np.any(zero):
        k = int(np.flatnonzero(zero)[0])
        raise CaseFormatError(
            f"branch {int(branch[k, F_BUS])}-{int(branch[k, T_BUS])} has zero impedance"
        )
    ys = 1.0 / (r + 1j * x)
    bc = branch[:, BR_B]
    tap = branch[:, TAP].astype(complex)
    tap[tap == 0] = 1.0
    tap = tap * np.exp(1j * np.pi / 180.0 * branch[:, SHIFT])

    ytt = ys + 1j * bc / 2
    yff = ytt / (tap * np.conj(tap))
    yft = -ys / np.conj(tap)
    ytf = -ys / tap

    f = np.array([case.bus_index[int(b)] for b in branch[:, F_BUS]], dtype=int)
    t = np.array([case.bus_index[int(b)] for b in branch[:, T_BUS]], dtype=int)
    return (yff, yft, ytf, ytt), (f, t)


#####################################
# Public Functions
#####################################


def build_ybus(case: CaseData) -> csr_matrix:
    """Sparse nb x nb bus admittance matrix in per unit."""
    nb = len(case.bus)
    (yff, yft, ytf, ytt), (f, t) = branch_admittances(case)
    ysh = (case.bus[:, GS] + 1j * case.bus[:, BS]) / case.base_mva

    rows = np.concatenate([f, f, t, t, np.arange(nb)])
    cols = np.concatenate([f, t, f, t, np.arange(nb)])
    data = np.concatenate([yff, yft, ytf, ytt, ysh])
    ybus = coo_matrix((data, (rows, cols)), shape=(nb, nb)).tocsr()
    ybus.sum_duplicates()
    logger.debug(f"Ybus for {case.name}: {nb}x{nb}, {ybus.nnz} nonzeros")
    return ybus
