"""Tokenizer, parser, validator and pretty-printer."""

import pathlib

import pytest

from language import ensure_valid, format_document, parse_file, parse_text, tokenize, validate_document
from language.document import AssignStmt, IfStmt, SwitchStmt
from language.tokenizer import IDENT, IMAG, NUMBER, OP, SEP
from utils.errors import LexicalError, ParseError, ValidationError

MODELS = sorted((pathlib.Path(__file__).resolve().parents[1] / "data" / "models").glob("*.mod"))

NL_TEMPLATE = """Header:
    maxIter=20
end
Model [type=NL domain=real eps=1e-9 name="t"]:
Vars [out=true]:
    x=1
Params:
    a=2
NLEs:
    {body}
end
"""


def nl_model(body: str):
    return parse_text(NL_TEMPLATE.format(body=body), "t.mod")


def messages(document):
    return [d.message for d in validate_document(document) if d.is_error]


#####################################
# Tokenizer
#####################################


def test_tokens_and_values():
    tokens = tokenize("a = 1.5e-3; b += 2i // trailing comment")
    assert [t.kind for t in tokens] == [IDENT, OP, NUMBER, SEP, IDENT, OP, IMAG]
    assert tokens[2].value == pytest.approx(0.0015)
    assert tokens[6].value == 2j
    assert tokens[5].lexeme == "+="


def test_operator_continues_line():
    tokens = tokenize("a = 1 +\n    2\nb")
    assert [t.kind for t in tokens].count(SEP) == 1


def test_open_parenthesis_continues_line():
    tokens = tokenize("f = conj(\n  x)\n")
    assert [t.kind for t in tokens].count(SEP) == 1


def test_unicode_identifiers():
    tokens = tokenize("δ_2 = θ_21")
    assert [t.lexeme for t in tokens] == ["δ_2", "=", "θ_21"]


def test_illegal_character_has_position():
    with pytest.raises(LexicalError) as info:
        tokenize("a = 1\nb $ 2", "bad.mod")
    assert (info.value.line, info.value.column) == (2, 3)
    assert "bad.mod:2:3" in str(info.value)


def test_unterminated_string():
    with pytest.raises(LexicalError, match="unterminated string"):
        tokenize('name="open')


#####################################
# Parser
#####################################


@pytest.mark.parametrize("path", MODELS, ids=lambda p: p.name)
def test_bundled_models_parse_and_validate(path):
    document = parse_file(path)
    diagnostics = ensure_valid(document)
    assert all(not d.is_error for d in diagnostics)


@pytest.mark.parametrize("path", MODELS, ids=lambda p: p.name)
def test_printed_document_reparses_identically(path):
    document = parse_file(path)
    text = format_document(document)
    again = parse_text(text, str(path))
    assert again == document
    assert format_document(again) == text


def test_header_and_model_attributes(load_model):
    document = parse_text(load_model("example1.mod"))
    assert document.report_level == "AllDetails"
    assert document.max_iter() == 50
    assert document.domain == "real"
    assert document.eps == pytest.approx(1e-6)
    assert document.name == "PF for 3 nodes (second node is Zero Injection)"


@pytest.mark.parametrize("spelling", ["cmplx", "cplx", "complex"])
def test_complex_domain_spellings(load_model, spelling):
    text = load_model("example2.mod").replace("domain=cmplx", f"domain={spelling}")
    assert parse_text(text).is_complex


def test_multiline_model_name(load_model):
    document = parse_text(load_model("example5.mod"))
    assert "PV Regulating Generator and its" in document.name
    assert document.reinit
    assert document.max_reps == 1000


def test_if_and_switch_blocks(load_model):
    document = parse_text(load_model("example4.mod"))
    switch = next(s for s in document.statements_of("NLEs") if isinstance(s, SwitchStmt))
    assert len(switch.cases) == 5
    assert switch.cases[-1].is_default

    limits = parse_text(load_model("example3.mod")).group("Limits")
    (gen2,) = limits.statements
    assert gen2.name == "Gen2"
    outer = gen2.statements[0]
    assert isinstance(outer, IfStmt)
    inner = outer.then[1]
    assert inner.signal == "TooLow"
    assert inner.otherwise[0].signal == "TooHigh"


def test_submodel_and_main_targets(load_model):
    document = parse_text(load_model("example7.mod"))
    (submodel,) = document.submodels
    assert submodel.copy_pars == 8
    assert submodel.always_on
    writes = submodel.statements_of("PostProc")
    assert all(isinstance(s, AssignStmt) and s.target.main for s in writes)
    assert writes[0].target.component == "real"
    assert str(writes[0].target) == "@main.v1_meas.real"


def test_documents_with_submodels_compare_equal(load_model):
    text = load_model("example7.mod")
    first, again = parse_text(text), parse_text(text)
    assert first == again
    (submodel,) = first.submodels
    assert submodel.model.body is None
    assert submodel.model.attributes == first.group("SubModel").attributes


def test_last_limit_group_closed_by_model_end(load_model):
    text = load_model("example3.mod")
    trimmed = text.rstrip()[: -len("\nend")]
    document = parse_text(trimmed)
    assert document == parse_text(text)
    (limit_group,) = document.group("Limits").statements
    assert limit_group.name == "Gen2"


def test_weights_on_measurements(load_model):
    document = parse_text(load_model("example6.mod"))
    weights = [s.weight.name for s in document.statements_of("WLSEs")]
    assert weights == ["w_v", "w_v", "w_inj", "w_inj", "w_v", "w_v"]
    assert len(document.statements_of("ECs")) == 2


def test_missing_header():
    with pytest.raises(ParseError, match="missing Header"):
        parse_text('Model [type=NL]:\nNLEs:\n x=1\nend\n')


def test_missing_model_end():
    with pytest.raises(ParseError, match="missing 'end' for Model"):
        parse_text(NL_TEMPLATE.format(body="x = a").rstrip().rsplit("end", 1)[0])


def test_equation_with_two_equals():
    with pytest.raises(ParseError, match="at most one '='"):
        nl_model("x = a = 1")


def test_unbalanced_parentheses():
    with pytest.raises(ParseError, match="unbalanced parentheses"):
        nl_model("(x + a = 0")


def test_wls_group_in_nl_model():
    with pytest.raises(ParseError, match="belongs in a WLS model"):
        parse_text(NL_TEMPLATE.format(body="x = a\nWLSEs:\n    [w=1] x = 1"))


def test_unknown_function():
    with pytest.raises(ParseError, match="unknown function 'cosh'"):
        nl_model("cosh(x) = a")


#####################################
# Validator
#####################################


def test_valid_template():
    assert messages(nl_model("x^2 = a")) == []


def test_undeclared_identifier_is_located():
    diagnostics = validate_document(nl_model("x^2 - b = 0"))
    (error,) = [d for d in diagnostics if d.is_error]
    assert error.message == "undeclared identifier 'b'"
    assert error.line == 10
    assert str(error).startswith("t.mod:10:")


def test_equation_count_must_match_unknowns():
    assert "NL model has 2 equation(s) but 1 unknown(s)" in messages(nl_model("x = a; x = 2*a"))


def test_non_smooth_function_in_equation():
    assert "round() may only appear in assignments, not in equations" in messages(
        nl_model("round(x, 0) = a")
    )


def test_repeat_outside_repeats_group():
    text = NL_TEMPLATE.format(body="x = a\nPostProc:\n    a = 3\n    repeat")
    assert "'repeat' is only allowed in the Repeats group" in messages(parse_text(text))


def test_validation_collects_every_problem():
    document = nl_model("x = b + c")
    with pytest.raises(ValidationError) as info:
        ensure_valid(document)
    found = [d.message for d in info.value.diagnostics]
    assert "undeclared identifier 'b'" in found
    assert "undeclared identifier 'c'" in found


def test_assignment_to_undeclared_name():
    text = NL_TEMPLATE.format(body="x = a\nPostProc:\n    z = 3")
    assert any("cannot assign 'z'" in m for m in messages(parse_text(text)))


def test_default_must_be_last_case():
    body = "switch:\n    default -> x = a\n    case x > 0 -> x = 1\n    end"
    assert "'default' must be the last case of a switch" in messages(nl_model(body))


def test_reserved_word_as_name():
    text = NL_TEMPLATE.format(body="x = a").replace("    a=2\n", "    a=2; end=1\n")
    assert "reserved word 'end' cannot name a parameter" in messages(parse_text(text, "t.mod"))
