"""Tokenizer, parser, validator and pretty-printer for model files."""

from language.model_parser import parse_file, parse_model, parse_text
from language.printer import format_document, format_expression
from language.tokenizer import tokenize
from language.validator import ensure_valid, validate_document

__all__ = [
    "tokenize",
    "parse_model",
    "parse_text",
    "parse_file",
    "format_document",
    "format_expression",
    "validate_document",
    "ensure_valid",
]
