"""
Run Driver
Executes a compiled model through its full solution flow:

  PreProc (first pass) -> ReInit -> SubModels -> inner solve with
  IterPostP -> limit loop -> BasePostP (first cleared pass) ->
  Repeats -> ... -> PostProc -> report

A failed repeat pass ends repetition normally; a failed first pass
ends the run with a non-converged report.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np

from engine.assignments import ExecutionLog, apply_assignments
from engine.compiler import (
    CompiledModel,
    compile_document,
    copy_parent_params,
    refresh_derived,
    reset_variables,
)
from engine.limits import Signal, limit_groups, process_limits
from language.document import ModelDocument
from solvers.newton import SolveResult, newton_solve
from solvers.wls import EstimateResult, ResidualTable, gauss_newton_wls, residual_report
from utils.errors import (
    AssignmentError,
    EvaluationError,
    LimitCyclingError,
    UnobservableError,
)
from utils.utils_config import get_default_seed
from utils.utils_logger import logger

Result = Union[SolveResult, EstimateResult]

#####################################
# Records
#####################################


@dataclass
class PassRecord:
    index: int
    converged: bool = False
    attempts: List[Result] = field(default_factory=list)
    signals: List[Signal] = field(default_factory=list)
    limit_log: List[str] = field(default_factory=list)
    values: Dict[str, object] = field(default_factory=dict)
    submodels: List["SubModelRecord"] = field(default_factory=list)
    failure: Optional[str] = None

    @property
    def result(self) -> Optional[Result]:
        return self.attempts[-1] if self.attempts else None

    @property
    def iterations(self) -> int:
        return sum(a.iterations for a in self.attempts)


@dataclass
class SubModelRecord:
    name: str
    converged: bool
    attempts: List[Result] = field(default_factory=list)
    values: Dict[str, object] = field(default_factory=dict)
    signals: List[Signal] = field(default_factory=list)
    limit_log: List[str] = field(default_factory=list)


@dataclass
class RunReport:
    name: str
    model_type: str
    report_level: str
    seed: int
    out_names: List[str] = field(default_factory=list)
    passes: List[PassRecord] = field(default_factory=list)
    outputs: Dict[str, object] = field(default_factory=dict)
    has_repeats: bool = False
    succeeded: bool = False
    failure: Optional[str] = None
    residuals: Optional[ResidualTable] = None

    @property
    def converged_passes(self) -> List[PassRecord]:
        return [p for p in self.passes if p.converged]

    @property
    def signals(self) -> List[Signal]:
        return [s for p in self.passes for s in p.signals]


class PassFailed(Exception):
    """A pass could not produce a converged solution."""


#####################################
# Runner
#####################################


class _Runner:
    def __init__(self, model: CompiledModel, report: RunReport):
        self.model = model
        self.report = report

    # ---- helpers -----------------------------------------------------

    def assignments(self, model: CompiledModel, kind: str) -> ExecutionLog:
        log = apply_assignments(model.statements(kind), model.env)
        model.written.update(log.written_names())
        if model.parent is not None:
            model.parent.written.update(log.written_names(main=True))
        return log

    def solve(self, model: CompiledModel) -> Result:
        def iteration_hook(env, iteration):
            if model.has_group("IterPostP"):
                apply_assignments(model.statements("IterPostP"), env)

        eps = model.document.eps
        if model.is_wls:
            return gauss_newton_wls(model.measurements, model.env, eps, model.max_iter, on_iteration=iteration_hook)
        return newton_solve(model.system, model.env, eps, model.max_iter, on_iteration=iteration_hook)

    def solve_with_limits(self, model: CompiledModel, record, repeat: int) -> None:
        """Inner solve plus the outer limit loop; raises PassFailed."""
        groups = limit_groups(model.document.groups_of("Limits"))
        outer = 0
        while True:
            result = self.solve(model)
            record.attempts.append(result)
            if not result.converged:
                raise PassFailed(f"{model.name}: {result.failure}")
            if not groups:
                return
            outcome = process_limits(groups, model.env, repeat, outer)
            record.signals.extend(outcome.fired)
            record.limit_log.extend(f"outer {outer}: {line}" for line in outcome.log)
            if not outcome.resolve_needed:
                return
            outer += 1
            if outer >= model.max_iter:
                raise LimitCyclingError(
                    f"{model.name}: limit groups still firing after {outer} outer passes"
                )
            logger.info(f"Re-solving {model.name} after limit pass {outer}")

    def run_submodel(self, sub: CompiledModel, first: bool) -> SubModelRecord:
        copy_parent_params(sub)
        if first:
            self.assignments(sub, "PreProc")
        if first or sub.document.reinit:
            self.assignments(sub, "ReInit")
        for nested in sub.submodels:
            if first or nested.document.always_on:
                self.run_submodel(nested, first)
        record = SubModelRecord(sub.name, False)
        self.solve_with_limits(sub, record, 0)
        record.converged = True
        self.assignments(sub, "PostProc")
        record.values = {name: sub.env.get(name) for name in sub.env.out_names()}
        refresh_derived(sub.parent)
        logger.info(f"SubModel {sub.name} solved")
        return record

    # ---- passes ------------------------------------------------------

    def run_pass(self, index: int) -> PassRecord:
        model = self.model
        record = PassRecord(index)
        first = index == 0
        try:
            if first:
                written = self.assignments(model, "PreProc").written_names()
            else:
                written = []
                if model.document.reinit:
                    reset_variables(model)
            if first or model.document.reinit:
                written += self.assignments(model, "ReInit").written_names()
            ran_submodels = False
            for sub in model.submodels:
                if first or sub.document.always_on:
                    record.submodels.append(self.run_submodel(sub, first))
                    ran_submodels = True
            if first and ran_submodels:
                # initializers may read parameters the submodels just produced
                reset_variables(model, skip=written)
            self.solve_with_limits(model, record, index)
        except PassFailed as e:
            record.failure = str(e)
            return record
        except (EvaluationError, AssignmentError, UnobservableError) as e:
            record.failure = f"{type(e).__name__}: {e}"
            logger.error(f"Pass {index} failed: {e}")
            return record
        record.converged = True
        return record

    def run(self) -> None:
        model = self.model
        report = self.report
        max_reps = model.document.max_reps
        base_done = False
        checkpoint = None
        index = 0
        while True:
            logger.info(f"Pass {index} of {model.name}")
            record = self.run_pass(index)
            report.passes.append(record)
            if not record.converged:
                if index == 0:
                    report.failure = record.failure
                    logger.error(f"Run failed: {record.failure}")
                    return
                logger.info(f"Repetition stopped at pass {index}: {record.failure}")
                model.env.restore(checkpoint)
                break
            if not base_done:
                self.assignments(model, "BasePostP")
                base_done = True
            record.values = {name: model.env.get(name) for name in report.out_names}
            checkpoint = model.env.snapshot()
            if not report.has_repeats:
                break
            log = self.assignments(model, "Repeats")
            if not log.repeat or index + 1 >= max_reps:
                if log.repeat:
                    logger.info(f"maxReps={max_reps} reached")
                    model.env.restore(checkpoint)
                break
            index += 1

        self.assignments(model, "PostProc")
        report.succeeded = True
        report.outputs = {name: model.env.get(name) for name in report.out_names}
        last = report.converged_passes[-1].result
        if model.is_wls and isinstance(last, EstimateResult):
            report.residuals = residual_report(last, model.measurements)


#####################################
# Public Functions
#####################################


def run_compiled(model: CompiledModel, seed: int, report_level: Optional[str] = None) -> RunReport:
    document = model.document
    report = RunReport(
        document.name or "model",
        document.model_type,
        report_level or document.report_level,
        seed,
        out_names=model.env.out_names(),
        has_repeats=document.group("Repeats") is not None,
    )
    _Runner(model, report).run()
    return report


def run_document(
    document: ModelDocument, seed: Optional[int] = None, report_level: Optional[str] = None
) -> RunReport:
    """Compile and execute a validated document with a seeded RNG."""
    if seed is None:
        seed = get_default_seed()
    rng = np.random.default_rng(seed)
    model = compile_document(document, rng)
    return run_compiled(model, seed, report_level)
