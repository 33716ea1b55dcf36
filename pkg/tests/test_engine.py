"""Assignments, limit groups, distributions, the run driver and reports."""

import math

import numpy as np
import pandas as pd
import pytest

from engine import apply_assignments, compile_document, emit_report, process_limits, sample, write_trace
from engine.distributions import Distribution
from engine.limits import limit_groups
from engine.report import format_value, trace_frame
from language import parse_text
from language.document import AssignStmt, AssignTarget
from language.expr_parser import parse_expression
from language.tokenizer import tokenize
from symbolic.env import Env
from utils.errors import AssignmentError, EvaluationError, LimitCyclingError


def expr(text: str):
    return parse_expression(tokenize(text))


def assignment(target: str, op: str, text: str, main: bool = False, component=None):
    return AssignStmt(AssignTarget(target, main, component), op, expr(text))


def model(params: str = "", groups: str = "", header: str = "", equation: str = "x^2 = 2") -> str:
    return f"""Header:
    maxIter=20
    {header}
end
Model [type=NL domain=real eps=1e-12 name="engine"]:
Vars [out=true]:
    x=1
Params:
    {params or "a=2"}
NLEs:
    {equation}
{groups}end
"""


#####################################
# Assignments
#####################################


@pytest.mark.parametrize(
    "op, value, expected",
    [("=", "5", 5), ("+=", "2", 5), ("-=", "2", 1), ("*=", "2", 6), ("/=", "2", 1.5), ("^=", "2", 9)],
)
def test_compound_operators(op, value, expected):
    env = Env()
    env.declare("x", 3.0, "real", "param")
    apply_assignments([assignment("x", op, value)], env)
    assert env.get("x") == pytest.approx(expected)


def test_complex_decrement():
    env = Env("complex")
    env.declare("S3_inj", -1 - 0.3j, "complex", "param")
    apply_assignments([assignment("S3_inj", "-=", "0.02+0.01i")], env)
    assert env.get("S3_inj") == pytest.approx(-1.02 - 0.31j)


def test_component_targets():
    env = Env("complex")
    env.declare("v", 1 + 2j, "complex", "param")
    env.declare("m", 0.0, "real", "param")
    apply_assignments(
        [assignment("v", "=", "5", component="real"), assignment("v", "+=", "1", component="imag")],
        env,
    )
    assert env.get("v") == 5 + 3j
    apply_assignments([assignment("m", "=", "0.7", component="real")], env)
    assert env.get("m") == pytest.approx(0.7)
    with pytest.raises(AssignmentError, match=".imag"):
        apply_assignments([assignment("m", "=", "1", component="imag")], env)


def test_integer_targets_refuse_fractions():
    env = Env()
    env.declare("n", 0, "int", "param")
    apply_assignments([assignment("n", "=", "4.0")], env)
    assert env.get("n") == 4
    with pytest.raises(AssignmentError, match="int"):
        apply_assignments([assignment("n", "=", "4.5")], env)


def test_main_target_writes_parent():
    parent = Env(name="main")
    parent.declare("m", 0.0, "real", "param")
    child = Env(parent=parent, name="sub")
    child.declare("x", 2.0, "real", "var")
    log = apply_assignments([assignment("m", "=", "x*3", main=True)], child)
    assert parent.get("m") == 6.0
    assert log.written_names(main=True) == ["m"]
    with pytest.raises(AssignmentError, match="only valid inside a SubModel"):
        apply_assignments([assignment("m", "=", "1", main=True)], parent)


def test_switch_fires_first_matching_case(load_model):
    document = parse_text(load_model("example8.mod"))
    (group,) = limit_groups(document.groups_of("Limits"))
    env = compile_document(document).env
    env.set("t", 1.017)
    log = apply_assignments(group.statements, env)
    assert [f.signal for f in log.fired] == ["Rounding"]
    assert env.get("t") == pytest.approx(1.0125)
    assert env.get("cLTC23Reg") is False


#####################################
# Limits
#####################################

LIMITED = model(
    params="a=2; k=2; kmax=1; on=true [type=bool]",
    groups="""Limits:
group [name="K"]:
    if on:
        if k >= kmax [signal=TooHigh]:
            k = kmax
            on = false
        end
    end
end
""",
)


def test_limit_group_fires_and_requests_resolve():
    compiled = compile_document(parse_text(LIMITED))
    groups = limit_groups(compiled.document.groups_of("Limits"))
    outcome = process_limits(groups, compiled.env, repeat=0, outer_pass=0)
    assert outcome.resolve_needed
    (signal,) = outcome.fired
    assert (signal.name, signal.group) == ("TooHigh", "K")
    assert sorted(signal.changed) == ["k", "on"]

    again = process_limits(groups, compiled.env, outer_pass=1)
    assert not again.resolve_needed and again.fired == []
    assert again.log == ["group K: clear"]


def test_disabled_group_is_skipped():
    text = LIMITED.replace('group [name="K"]', 'group [name="K" enabled=false]')
    compiled = compile_document(parse_text(text))
    outcome = process_limits(limit_groups(compiled.document.groups_of("Limits")), compiled.env)
    assert not outcome.fired
    assert outcome.log == ["group K: disabled"]


def test_run_records_limit_signals(run_text):
    run = run_text(LIMITED)
    assert run.succeeded
    assert [s.name for s in run.signals] == ["TooHigh"]
    assert len(run.passes[0].attempts) == 2


def test_endless_limit_group_raises(run_text):
    text = model(
        params="a=2; k=0",
        groups="Limits:\ngroup:\n    if k >= 0 [signal=Bump]:\n        k = k + 1\n    end\nend\n",
        header="",
    ).replace("maxIter=20", "maxIter=5")
    with pytest.raises(LimitCyclingError, match="still firing after 5"):
        run_text(text)


#####################################
# Distributions
#####################################


def test_zero_deviation_returns_mean():
    rng = np.random.default_rng(1)
    assert sample(Distribution("g", mean=0.3, dev=0.0), rng) == 0.3


def test_seeded_draws_repeat():
    draws = [sample(Distribution("g", dev=0.5), np.random.default_rng(11)) for _ in range(2)]
    assert draws[0] == draws[1]
    z = sample(Distribution("g", dev=0.5), np.random.default_rng(11), complex_value=True)
    assert isinstance(z, complex) and z.real == draws[0]


@pytest.mark.parametrize("mean, dev", [(0.3, 0.05), (-2.0, 1.5)])
def test_draws_follow_mean_and_deviation(mean, dev):
    rng = np.random.default_rng(5)
    dist = Distribution("g", mean=mean, dev=dev)
    draws = np.array([sample(dist, rng) for _ in range(20000)])
    # five standard errors
    assert draws.mean() == pytest.approx(mean, abs=5 * dev / math.sqrt(len(draws)))
    assert draws.std(ddof=1) == pytest.approx(dev, rel=0.03)
    pairs = np.array([sample(dist, rng, complex_value=True) for _ in range(20000)])
    for part in (pairs.real, pairs.imag):
        assert part.mean() == pytest.approx(mean, abs=5 * dev / math.sqrt(len(part)))
        assert part.std(ddof=1) == pytest.approx(dev, rel=0.03)


def test_negative_deviation():
    with pytest.raises(EvaluationError, match="negative dev"):
        Distribution("g", dev=-1.0)


def test_seed_controls_random_parameters(run_text):
    text = model(
        params="a=2; n=0 [out=true]",
        groups="Distributions:\n    g [type=Gauss mean=0 dev=1]\nPreProc:\n    n = rnd(g)\n",
    )
    first, again, other = run_text(text, seed=5), run_text(text, seed=5), run_text(text, seed=6)
    assert first.outputs["n"] == again.outputs["n"]
    assert first.outputs["n"] != other.outputs["n"]
    assert first.seed == 5


#####################################
# Runner
#####################################


def test_solved_report(run_text):
    run = run_text(model())
    assert run.succeeded
    assert run.outputs["x"] == pytest.approx(math.sqrt(2))
    text = emit_report(run)
    assert "Status: converged" in text
    assert "x = 1.41421356237" in text
    assert "Passes:" not in text


def test_report_levels(run_text):
    run = run_text(model())
    assert "Passes:" in emit_report(run, "All")
    details = emit_report(run, "AllDetails")
    assert "Seed: 0" in details
    assert "jacobian: equations=1" in details


def test_failed_first_pass(run_text):
    run = run_text(model(equation="x^2 = -a"))
    assert not run.succeeded
    assert run.outputs == {}
    text = emit_report(run)
    assert "Status: NOT CONVERGED" in text
    assert "Results:" not in text


def test_post_processing_power(run_text):
    run = run_text(model(params="a=2; p=3 [out=true]", groups="PostProc:\n    p ^= 2\n"))
    assert run.outputs["p"] == 9


def test_iteration_post_processing_runs_every_step(run_text):
    run = run_text(model(params="a=2; c=0 [type=int out=true]", groups="IterPostP:\n    c += 1\n"))
    assert run.outputs["c"] == run.passes[0].iterations


def test_repeats_stop_at_max_reps(run_text, tmp_path):
    text = model(
        params="a=1 [out=true]",
        groups="Repeats:\n    a += 1\n    repeat\n",
        header="maxReps=4",
        equation="x^2 = a",
    )
    run = run_text(text)
    assert run.has_repeats
    assert len(run.converged_passes) == 4
    assert run.outputs["a"] == 4
    frame = trace_frame(run)
    assert list(frame.columns) == ["pass", "converged", "iterations", "a", "x"]
    np.testing.assert_allclose(frame["x"], np.sqrt([1, 2, 3, 4]), rtol=1e-10)

    path = write_trace(run, tmp_path / "repeats.trace.csv")
    again = pd.read_csv(path)
    assert len(again) == 4
    assert again["a"].tolist() == [1, 2, 3, 4]


def test_format_value():
    assert format_value(True) == "true"
    assert format_value(3) == "3"
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(1 - 2j) == "1-2i"
