"""Command-line solve and convert, aliases and exit codes."""

import shutil

import pandas as pd
import pytest

from cli.model_cli import EXIT_INPUT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main

from conftest import CASES, MODELS


def test_solve_prints_report(capsys):
    assert main(["solve", str(MODELS / "example1.mod")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "Status: converged" in out
    assert "v_3 = 0.96938" in out


def test_model_path_alias(capsys):
    assert main([str(MODELS / "example2.mod"), "--report", "Solved"]) == EXIT_OK
    assert "Status: converged" in capsys.readouterr().out


def test_identical_runs_print_identical_reports(capsys):
    main(["solve", str(MODELS / "example7.mod"), "--seed", "3"])
    first = capsys.readouterr().out
    main(["solve", str(MODELS / "example7.mod"), "--seed", "3"])
    assert capsys.readouterr().out == first


def test_report_written_to_file(tmp_path, capsys):
    out = tmp_path / "example1.txt"
    assert main(["solve", str(MODELS / "example1.mod"), "--out", str(out), "--quiet"]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert "Status: converged" in out.read_text(encoding="utf-8")


def test_repeats_write_trace(tmp_path):
    model = tmp_path / "example5.mod"
    shutil.copy(MODELS / "example5.mod", model)
    assert main(["solve", str(model), "--out", str(tmp_path / "report.txt")]) == EXIT_OK
    trace = pd.read_csv(tmp_path / "example5.trace.csv")
    assert len(trace) > 1
    assert list(trace.columns[:3]) == ["pass", "converged", "iterations"]


def test_missing_model_file(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nothing.mod")]) == EXIT_INPUT_ERROR
    assert "model file not found" in capsys.readouterr().err


def test_validation_errors_are_listed(tmp_path, capsys):
    model = tmp_path / "broken.mod"
    text = (MODELS / "example1.mod").read_text(encoding="utf-8")
    model.write_text(text.replace("= P3_inj", "= P9_inj"), encoding="utf-8")
    assert main(["solve", str(model)]) == EXIT_INPUT_ERROR
    assert "undeclared identifier 'P9_inj'" in capsys.readouterr().err


def test_parse_errors_exit_with_input_error(tmp_path, capsys):
    model = tmp_path / "broken.mod"
    model.write_text("Model [type=NL]:\nend\n", encoding="utf-8")
    assert main(["solve", str(model)]) == EXIT_INPUT_ERROR
    assert "missing Header" in capsys.readouterr().err


def test_undecodable_model_is_an_input_error(tmp_path, capsys):
    model = tmp_path / "binary.mod"
    model.write_bytes(b"Header:\n\xff\nend\n")
    assert main(["solve", str(model)]) == EXIT_INPUT_ERROR
    assert "cannot read input" in capsys.readouterr().err


def test_undecodable_case_is_an_input_error(tmp_path, capsys):
    case = tmp_path / "binary.m"
    case.write_bytes(b"function mpc = binary\n\xff\n")
    assert main(["convert", str(case)]) == EXIT_INPUT_ERROR
    assert "cannot read input" in capsys.readouterr().err


def test_non_convergence_exit_code(tmp_path):
    model = tmp_path / "none.mod"
    model.write_text(
        "Header:\n    maxIter=10\nend\n"
        "Model [type=NL domain=real eps=1e-10]:\nVars [out=true]:\n    x=1\nNLEs:\n    x^2 = -1\nend\n",
        encoding="utf-8",
    )
    assert main(["solve", str(model), "--quiet"]) == EXIT_NOT_CONVERGED


def test_unknown_option_is_an_input_error():
    assert main(["solve", "--frobnicate"]) == EXIT_INPUT_ERROR


def test_convert_writes_model(tmp_path):
    case = tmp_path / "case9.m"
    shutil.copy(CASES / "case9.m", case)
    assert main(["convert", str(case), "--format", "rectangular", "--symbols", "ascii"]) == EXIT_OK
    text = (tmp_path / "case9.mod").read_text(encoding="utf-8")
    assert "e_2=" in text and "G_4_5=" in text


def test_case_path_alias_with_output(tmp_path):
    out = tmp_path / "three.mod"
    assert main([str(CASES / "case3.m"), "--out", str(out)]) == EXIT_OK
    assert out.read_text(encoding="utf-8").startswith("// case3: 3 buses")


@pytest.mark.parametrize("fmt", ["polar", "rectangular", "complex"])
def test_convert_and_verify(tmp_path, capsys, fmt):
    out = tmp_path / f"case9_{fmt}.mod"
    code = main(["convert", str(CASES / "case9.m"), "--format", fmt, "--out", str(out), "--verify"])
    assert code == EXIT_OK
    assert "Verification: max |V - V_ref|" in capsys.readouterr().out


def test_verify_with_reactive_limits(tmp_path, capsys):
    out = tmp_path / "case14_limits.mod"
    code = main(["convert", str(CASES / "case14.m"), "--q-limits", "--out", str(out), "--verify"])
    assert code == EXIT_OK
    assert "(ok)" in capsys.readouterr().out


def test_bad_config_file(tmp_path, capsys):
    config = tmp_path / "config.xml"
    config.write_text("<config><options><format>dq0</format></options></config>", encoding="utf-8")
    code = main(["convert", str(CASES / "case3.m"), "--config", str(config), "--out", str(tmp_path / "x.mod")])
    assert code == EXIT_INPUT_ERROR
    assert "format must be one of" in capsys.readouterr().err


def test_malformed_case(tmp_path, capsys):
    case = tmp_path / "bad.m"
    case.write_text("mpc.baseMVA = 100;\nmpc.bus = [1 3 0 0 0 0 1 1 0 110 1 1.1 0.9];\n", encoding="utf-8")
    assert main(["convert", str(case)]) == EXIT_INPUT_ERROR
    assert "missing gen table" in capsys.readouterr().err
