"""
Assignment Groups
Executes PreProc, ReInit, IterPostP, BasePostP, Repeats, PostProc and
limit-group statements against an Env.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from language.document import AssignStmt, AssignTarget, IfStmt, RepeatMarker, SwitchStmt
from symbolic.env import Env
from symbolic.evaluate import apply_binary, evaluate, evaluate_guard
from utils.errors import AssignmentError

#####################################
# Execution Log
#####################################


@dataclass
class FiredCase:
    signal: str
    # index of the switch case, or 0 for an if guard
    case: int
    line: int = 0


@dataclass
class ExecutionLog:
    written: List[Tuple[bool, str]] = field(default_factory=list)
    fired: List[FiredCase] = field(default_factory=list)
    repeat: bool = False

    def written_names(self, main: bool = False) -> List[str]:
        return [name for is_main, name in self.written if is_main == main]


#####################################
# Helper Functions
#####################################


def _target_env(target: AssignTarget, env: Env) -> Env:
    if not target.main:
        return env
    if env.parent is None:
        raise AssignmentError(f"'{target}' is only valid inside a SubModel")
    return env.parent


def _combine(op: str, current, value):
    if op == "=":
        return value
    return apply_binary(op[0], current, value)


def _as_real(value, target: AssignTarget) -> float:
    if isinstance(value, complex):
        if value.imag != 0.0:
            raise AssignmentError(f"'{target}' takes a real value, got {value!r}")
        return value.real
    if isinstance(value, bool):
        raise AssignmentError(f"'{target}' takes a real value, got a boolean")
    return value


def assign(stmt: AssignStmt, env: Env) -> Tuple[bool, str]:
    """Apply one assignment; returns (is_main, name) of the written slot."""
    target = stmt.target
    scope = _target_env(target, env)
    if target.name not in scope:
        raise AssignmentError(f"cannot assign undeclared name '{target}'")
    value = evaluate(stmt.expr, env)
    current = scope.get(target.name)
    kind = scope.kind_of(target.name)

    if target.component is None:
        scope.set(target.name, _combine(stmt.op, current, value))
    elif kind == "bool":
        raise AssignmentError(f"'{target}': boolean names have no .{target.component} part")
    elif target.component == "real":
        part = _as_real(_combine(stmt.op, complex(current).real, value), target)
        scope.set(target.name, complex(part, complex(current).imag) if kind == "complex" else part)
    else:
        if kind != "complex":
            raise AssignmentError(f"'{target}': .imag of a {kind}-typed name")
        part = _as_real(_combine(stmt.op, current.imag, value), target)
        scope.set(target.name, complex(current.real, part))
    return target.main, target.name


class _Executor:
    def __init__(self, env: Env):
        self.env = env
        self.log = ExecutionLog()

    def run(self, statements) -> None:
        for stmt in statements:
            self.execute(stmt)

    def execute(self, stmt) -> None:
        if isinstance(stmt, AssignStmt):
            self.log.written.append(assign(stmt, self.env))
        elif isinstance(stmt, IfStmt):
            if evaluate_guard(stmt.guard, self.env):
                self._fire(stmt.signal, 0, stmt.line)
                self.run(stmt.then)
            else:
                self.run(stmt.otherwise)
        elif isinstance(stmt, SwitchStmt):
            for k, case in enumerate(stmt.cases):
                if case.is_default or evaluate_guard(case.guard, self.env):
                    self._fire(case.signal, k, case.line)
                    self.run(case.body)
                    break
        elif isinstance(stmt, RepeatMarker):
            self.log.repeat = True
        else:
            raise AssignmentError(
                f"line {stmt.line}: {type(stmt).__name__} cannot run in an assignment group"
            )

    def _fire(self, signal: str, case: int, line: int) -> None:
        if signal:
            self.log.fired.append(FiredCase(signal, case, line))


#####################################
# Public Functions
#####################################


def apply_assignments(statements, env: Env, log: Optional[ExecutionLog] = None) -> ExecutionLog:
    """Run statements in order and report what they wrote and signalled."""
    executor = _Executor(env)
    if log is not None:
        executor.log = log
    executor.run(statements)
    return executor.log
