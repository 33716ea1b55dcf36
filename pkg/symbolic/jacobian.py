"""
Sparse symbolic Jacobians.

An entry (i, j) is stored exactly when unknown j occurs in equation i
after conj-normalization. Entries are derived once and re-evaluated
numerically at every iteration.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from symbolic.conj import normalize_conj
from symbolic.diff import dependencies, diff_real, diff_wirtinger
from symbolic.expr import Expr

# (name, conjugated)
Unknown = Tuple[str, bool]

#####################################
# Structure
#####################################


@dataclass
class JacobianStructure:
    equations: List[Expr]
    unknowns: List[Unknown]
    entries: Dict[Tuple[int, int], Expr] = field(default_factory=dict)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.equations), len(self.unknowns)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def pattern(self) -> List[Tuple[int, int]]:
        return sorted(self.entries)

    def row(self, i: int) -> List[Tuple[int, Expr]]:
        return sorted((j, e) for (r, j), e in self.entries.items() if r == i)

    def density(self) -> float:
        rows, cols = self.shape
        return self.nnz / (rows * cols) if rows and cols else 0.0


def column_label(unknown: Unknown) -> str:
    name, conjugated = unknown
    return f"conj({name})" if conjugated else name


def jacobian_structure(
    equations: Sequence[Expr],
    unknowns: Sequence[Unknown],
    wirtinger: bool = False,
    is_real: Optional[Callable[[str], bool]] = None,
) -> JacobianStructure:
    """
    Build the symbolic Jacobian of equations (each meaning expr = 0)
    with respect to unknowns.

    In Wirtinger mode unknowns carry their conjugation flag; otherwise
    every flag must be False and conj() of a name is the name itself.
    """
    if is_real is None:
        is_real = (lambda name: not wirtinger)
    normalized = [normalize_conj(eq, is_real) for eq in equations]
    columns = {u: j for j, u in enumerate(unknowns)}
    structure = JacobianStructure(normalized, list(unknowns))
    for i, eq in enumerate(normalized):
        present = sorted(columns[u] for u in dependencies(eq, wirtinger) if u in columns)
        for j in present:
            name, conjugated = structure.unknowns[j]
            if wirtinger:
                entry = diff_wirtinger(eq, name, conjugated, is_real)
            else:
                entry = diff_real(eq, name)
            structure.entries[(i, j)] = entry
    return structure
