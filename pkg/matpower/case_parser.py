"""
MATPOWER Case Reader
Reads baseMVA and the bus, gen and branch matrices of a MATPOWER `.m`
case file. Column order follows MATPOWER; extra columns are kept.
"""

#####################################
# Import Modules
#####################################

import pathlib
import re
from dataclasses import dataclass, field
from typing import Dict, Union

import numpy as np

from utils.errors import CaseFormatError
from utils.utils_logger import logger

#####################################
# Column Indices
#####################################

# bus
BUS_I, BUS_TYPE, PD, QD, GS, BS, BUS_AREA, VM, VA, BASE_KV = range(10)
# gen
GEN_BUS, PG, QG, QMAX, QMIN, VG, MBASE, GEN_STATUS = range(8)
# branch
F_BUS, T_BUS, BR_R, BR_X, BR_B, RATE_A, RATE_B, RATE_C, TAP, SHIFT, BR_STATUS = range(11)

PQ, PV, REF, NONE = 1, 2, 3, 4

MIN_COLUMNS = {"bus": VA + 1, "gen": GEN_STATUS + 1, "branch": BR_STATUS + 1}

_BASE_MVA = re.compile(r"\w+\.baseMVA\s*=\s*([-+0-9.eE]+)\s*;")
_TABLE = re.compile(r"\w+\.(\w+)\s*=\s*\[(.*?)\]\s*;?", re.DOTALL)

#####################################
# Case Data
#####################################


@dataclass
class CaseData:
    name: str
    base_mva: float
    bus: np.ndarray
    gen: np.ndarray
    branch: np.ndarray
    bus_index: Dict[int, int] = field(default_factory=dict)

    @property
    def bus_ids(self):
        return [int(b) for b in self.bus[:, BUS_I]]

    @property
    def slack(self) -> int:
        """Row of the slack bus."""
        return int(np.flatnonzero(self.bus[:, BUS_TYPE] == REF)[0])

    def in_service_gens(self) -> np.ndarray:
        return self.gen[self.gen[:, GEN_STATUS] > 0]

    def in_service_branches(self) -> np.ndarray:
        return self.branch[self.branch[:, BR_STATUS] > 0]

    def effective_types(self) -> np.ndarray:
        """Bus types with PV buses lacking an in-service generator demoted to PQ."""
        types = self.bus[:, BUS_TYPE].astype(int).copy()
        with_gen = {self.bus_index[int(b)] for b in self.in_service_gens()[:, GEN_BUS]}
        for row, kind in enumerate(types):
            if kind == PV and row not in with_gen:
                types[row] = PQ
        return types


#####################################
# Helper Functions
#####################################


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _parse_matrix(name: str, body: str) -> np.ndarray:
    rows = []
    for raw in re.split(r"[;\n]", body):
        fields = raw.replace(",", " ").split()
        if not fields:
            continue
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise CaseFormatError(f"non-numeric field in {name} row '{raw.strip()}'") from None
    if not rows:
        return np.zeros((0, MIN_COLUMNS.get(name, 0)))
    width = len(rows[0])
    for row in rows:
        if len(row) != width:
            raise CaseFormatError(f"ragged {name} table: rows of {width} and {len(row)} fields")
    return np.array(rows, dtype=float)


def _check(case: CaseData) -> None:
    for name in ("bus", "gen", "branch"):
        table = getattr(case, name)
        if table.shape[1] < MIN_COLUMNS[name]:
            raise CaseFormatError(
                f"{name} table has {table.shape[1]} columns, needs at least {MIN_COLUMNS[name]}"
            )
    if len(case.bus) == 0:
        raise CaseFormatError("case has no buses")
    slack_count = int(np.sum(case.bus[:, BUS_TYPE] == REF))
    if slack_count != 1:
        raise CaseFormatError(f"case needs exactly one slack bus, found {slack_count}")
    if np.any(case.bus[:, BUS_TYPE] == NONE):
        raise CaseFormatError("isolated buses (type 4) are not supported")
    for row in case.branch:
        for end in (F_BUS, T_BUS):
            if int(row[end]) not in case.bus_index:
                raise CaseFormatError(f"branch references unknown bus {int(row[end])}")
    for row in case.gen:
        if int(row[GEN_BUS]) not in case.bus_index:
            raise CaseFormatError(f"generator references unknown bus {int(row[GEN_BUS])}")


#####################################
# Public Functions
#####################################


def parse_case(text: str, name: str = "case") -> CaseData:
    """Parse MATPOWER case text into CaseData."""
    text = _strip_comments(text)
    match = _BASE_MVA.search(text)
    if match is None:
        raise CaseFormatError("missing baseMVA")
    tables = {key: body for key, body in _TABLE.findall(text)}
    for key in ("bus", "gen", "branch"):
        if key not in tables:
            raise CaseFormatError(f"missing {key} table")
    bus = _parse_matrix("bus", tables["bus"])
    case = CaseData(
        name,
        float(match.group(1)),
        bus,
        _parse_matrix("gen", tables["gen"]),
        _parse_matrix("branch", tables["branch"]),
        {int(b): i for i, b in enumerate(bus[:, BUS_I])} if len(bus) else {},
    )
    if len(case.bus_index) != len(bus):
        raise CaseFormatError("duplicate bus ids")
    _check(case)
    return case


def read_case(path: Union[str, pathlib.Path]) -> CaseData:
    path = pathlib.Path(path)
    case = parse_case(path.read_text(encoding="utf-8"), path.stem)
    logger.info(f"Read {path.name}: {case_summary(case)}")
    return case


def case_summary(case: CaseData) -> dict:
    types = case.bus[:, BUS_TYPE].astype(int)
    return {
        "buses": len(case.bus),
        "pq": int(np.sum(types == PQ)),
        "pv": int(np.sum(types == PV)),
        "slack": int(np.sum(types == REF)),
        "generators": len(case.gen),
        "branches": len(case.branch),
    }
