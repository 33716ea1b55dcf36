"""
Limit groups checked after every converged inner solve.

Groups run in order. The first group in which a signal fires ends the
check; a re-solve is requested only when that group changed the Env.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import List

from engine.assignments import apply_assignments
from language.document import Group
from symbolic.env import Env
from utils.utils_logger import logger

#####################################
# Signals
#####################################


@dataclass
class Signal:
    name: str
    group: str
    case: int
    repeat: int = 0
    outer_pass: int = 0
    changed: List[str] = field(default_factory=list)

    def __str__(self) -> str:
        where = f"group '{self.group}'" if self.group else "unnamed group"
        return f"{self.name} ({where}, case {self.case}, pass {self.repeat}, outer {self.outer_pass})"


@dataclass
class LimitOutcome:
    resolve_needed: bool
    fired: List[Signal] = field(default_factory=list)
    log: List[str] = field(default_factory=list)


#####################################
# Public Functions
#####################################


def limit_groups(groups: List[Group]) -> List[Group]:
    """Every LimitGroup of the given Limits groups, in source order."""
    return [g for limits in groups for g in limits.statements if isinstance(g, Group)]


def process_limits(
    groups: List[Group], env: Env, repeat: int = 0, outer_pass: int = 0
) -> LimitOutcome:
    outcome = LimitOutcome(False)
    for index, group in enumerate(groups):
        label = group.name or f"#{index + 1}"
        if not group.enabled:
            outcome.log.append(f"group {label}: disabled")
            continue
        before = env.snapshot()
        log = apply_assignments(group.statements, env)
        changed = env.changed_since(before)
        if not log.fired:
            outcome.log.append(f"group {label}: clear")
            continue
        for case in log.fired:
            signal = Signal(case.signal, group.name, case.case, repeat, outer_pass, changed)
            outcome.fired.append(signal)
            logger.info(f"Signal {signal}")
        if changed:
            outcome.log.append(f"group {label}: {len(log.fired)} signal(s), changed {', '.join(changed)}")
            outcome.resolve_needed = True
        else:
            outcome.log.append(f"group {label}: signal(s) fired without changing any value")
            logger.warning(f"Limit group {label} fired but changed nothing; no re-solve")
        break
    return outcome
