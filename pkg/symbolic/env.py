"""
Name -> typed value bindings for one model or submodel run.

Plain reads never fall back to the parent env; copied parameters are
materialized when a submodel starts. The parent link only serves
`@main.` writes.
"""

#####################################
# Import Modules
#####################################

import math
from dataclasses import dataclass
from typing import Dict, Iterator, Optional

from utils.errors import AssignmentError, EvaluationError

#####################################
# Bindings
#####################################


@dataclass
class Binding:
    value: object
    kind: str  # real | complex | int | bool
    role: str  # param | var
    out: bool = False
    order: int = 0


INTEGRAL_TOLERANCE = 1e-9


def coerce(value, kind: str, name: str = "?"):
    """Convert value to the declared kind or raise AssignmentError."""
    if kind == "bool":
        if isinstance(value, bool):
            return value
        raise AssignmentError(f"'{name}' is boolean; cannot store {value!r}")
    if isinstance(value, bool):
        raise AssignmentError(f"'{name}' is {kind}; cannot store a boolean")
    if kind == "complex":
        return complex(value)
    if isinstance(value, complex):
        if value.imag != 0.0:
            raise AssignmentError(
                f"'{name}' is {kind}; cannot store complex value {value!r}"
            )
        value = value.real
    if kind == "int":
        nearest = round(value)
        if not math.isfinite(value) or abs(value - nearest) > INTEGRAL_TOLERANCE:
            raise AssignmentError(f"'{name}' is int; cannot store {value!r}")
        return int(nearest)
    return float(value)


#####################################
# Env
#####################################


class Env:
    """Binding store with an optional parent and a shared RNG."""

    def __init__(
        self,
        domain: str = "real",
        parent: Optional["Env"] = None,
        rng=None,
        name: str = "main",
    ):
        self.domain = domain
        self.parent = parent
        self.rng = rng
        self.name = name
        self.distributions: Dict[str, object] = {}
        self._bindings: Dict[str, Binding] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._bindings

    def __iter__(self) -> Iterator[str]:
        return iter(self._bindings)

    def declare(self, name: str, value, kind: str, role: str, out: bool = False) -> None:
        order = len(self._bindings)
        self._bindings[name] = Binding(coerce(value, kind, name), kind, role, out, order)

    def binding(self, name: str) -> Binding:
        try:
            return self._bindings[name]
        except KeyError:
            raise EvaluationError(f"unbound identifier '{name}' in {self.name}") from None

    def get(self, name: str):
        return self.binding(name).value

    def set(self, name: str, value) -> None:
        if name not in self._bindings:
            raise AssignmentError(f"cannot assign undeclared name '{name}' in {self.name}")
        slot = self._bindings[name]
        slot.value = coerce(value, slot.kind, name)

    def kind_of(self, name: str) -> str:
        return self.binding(name).kind

    def is_real_typed(self, name: str) -> bool:
        return name in self._bindings and self._bindings[name].kind != "complex"

    def out_names(self) -> list:
        return [n for n, b in self._bindings.items() if b.out]

    def names_with_role(self, role: str) -> list:
        return [n for n, b in self._bindings.items() if b.role == role]

    def snapshot(self) -> Dict[str, object]:
        return {name: b.value for name, b in self._bindings.items()}

    def restore(self, snapshot: Dict[str, object]) -> None:
        for name, value in snapshot.items():
            if name in self._bindings:
                self._bindings[name].value = value

    def changed_since(self, snapshot: Dict[str, object]) -> list:
        return [
            name
            for name, b in self._bindings.items()
            if name in snapshot and not _same_value(snapshot[name], b.value)
        ]

    def draw(self, dist_name: str):
        """Sample the named distribution in this env's domain."""
        if dist_name not in self.distributions:
            raise EvaluationError(f"unknown distribution '{dist_name}' in {self.name}")
        if self.rng is None:
            raise EvaluationError("rnd() needs a random stream; none attached to this run")
        return self.distributions[dist_name].draw(self.rng, self.domain == "complex")


def _same_value(a, b) -> bool:
    if type(a) is not type(b):
        return False
    return a == b
