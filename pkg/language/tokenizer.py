"""
Tokenizer
Turns model-file text into a flat token list.

Both `;` and newline produce SEP tokens. A newline is dropped while
parentheses or brackets are open and after a token that cannot end an
expression, which gives implicit line continuation.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass
from typing import List, Optional

from data.defaults import GROUP_KEYWORDS, STATEMENT_KEYWORDS
from utils.errors import LexicalError

#####################################
# Token Kinds
#####################################

IDENT = "IDENT"
NUMBER = "NUMBER"
IMAG = "IMAG"
STRING = "STRING"
OP = "OP"
PUNCT = "PUNCT"
KEYWORD = "KEYWORD"
SEP = "SEP"
EOF = "EOF"

KEYWORDS = frozenset(GROUP_KEYWORDS + STATEMENT_KEYWORDS)

# longest first
OPERATORS = ("+=", "-=", "*=", "/=", "^=", "<=", ">=", "->", "+", "-", "*", "/", "^", "=", "<", ">")
PUNCTUATION = "()[],:@."

# a newline after one of these continues the logical line
CONTINUES_LINE = frozenset(OPERATORS) | {",", "("}


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int
    column: int
    value: object = None

    def is_op(self, *lexemes: str) -> bool:
        return self.kind == OP and self.lexeme in lexemes

    def is_punct(self, *lexemes: str) -> bool:
        return self.kind == PUNCT and self.lexeme in lexemes

    def is_keyword(self, *words: str) -> bool:
        return self.kind == KEYWORD and (not words or self.lexeme in words)

    def is_group_keyword(self) -> bool:
        return self.kind == KEYWORD and self.lexeme in GROUP_KEYWORDS

    def __str__(self) -> str:
        if self.kind == SEP:
            return "end of statement"
        if self.kind == EOF:
            return "end of file"
        return f"'{self.lexeme}'"


#####################################
# Scanner
#####################################


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


class _Scanner:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.pos = 0
        self.line = 1
        self.column = 1
        self.depth = 0
        self.tokens: List[Token] = []

    def peek(self, offset: int = 0) -> str:
        index = self.pos + offset
        return self.text[index] if index < len(self.text) else ""

    def advance(self, count: int = 1) -> str:
        chunk = self.text[self.pos : self.pos + count]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
        self.pos += count
        return chunk

    def error(self, message: str, line: int, column: int) -> LexicalError:
        return LexicalError(message, line, column, self.source)

    def last(self) -> Optional[Token]:
        return self.tokens[-1] if self.tokens else None

    def emit(self, kind: str, lexeme: str, line: int, column: int, value=None) -> None:
        self.tokens.append(Token(kind, lexeme, line, column, value))

    def newline(self, line: int, column: int) -> None:
        previous = self.last()
        if previous is None or self.depth > 0:
            return
        if previous.kind == SEP:
            return
        if previous.kind in (OP, PUNCT) and previous.lexeme in CONTINUES_LINE:
            return
        self.emit(SEP, "\n", line, column)

    def run(self) -> List[Token]:
        while self.pos < len(self.text):
            ch = self.peek()
            line, column = self.line, self.column
            if ch == "\n":
                self.advance()
                self.newline(line, column)
            elif ch in " \t\r\f\v﻿":
                self.advance()
            elif ch == "/" and self.peek(1) == "/":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            elif ch == ";":
                self.advance()
                self.emit(SEP, ";", line, column)
            elif ch == '"':
                self.string(line, column)
            elif ch.isdigit() or (ch == "." and self.peek(1).isdigit()):
                self.number(line, column)
            elif _is_ident_start(ch):
                self.word(line, column)
            else:
                self.symbol(ch, line, column)
        return self.tokens

    def string(self, line: int, column: int) -> None:
        start = self.pos
        self.advance()
        while self.peek() != '"':
            if self.pos >= len(self.text):
                raise self.error("unterminated string", line, column)
            self.advance()
        self.advance()
        lexeme = self.text[start : self.pos]
        self.emit(STRING, lexeme, line, column, lexeme[1:-1])

    def number(self, line: int, column: int) -> None:
        start = self.pos
        is_float = False
        while self.peek().isdigit():
            self.advance()
        if self.peek() == "." and self.peek(1).isdigit():
            is_float = True
            self.advance()
            while self.peek().isdigit():
                self.advance()
        elif self.peek() == "." and not _is_ident_start(self.peek(1)):
            # "1." is a float; "v.real" style selectors never follow digits
            is_float = True
            self.advance()
        if self.peek() in ("e", "E"):
            sign = 1 if self.peek(1) in ("+", "-") else 0
            if self.peek(1 + sign).isdigit():
                is_float = True
                self.advance(1 + sign)
                while self.peek().isdigit():
                    self.advance()
        lexeme = self.text[start : self.pos]
        value = float(lexeme) if is_float else int(lexeme)
        if self.peek() == "i" and not _is_ident_char(self.peek(1)):
            self.advance()
            self.emit(IMAG, lexeme + "i", line, column, complex(0.0, float(value)))
            return
        if _is_ident_start(self.peek()):
            raise self.error(f"malformed number '{lexeme}{self.peek()}'", line, column)
        self.emit(NUMBER, lexeme, line, column, value)

    def word(self, line: int, column: int) -> None:
        start = self.pos
        while _is_ident_char(self.peek()):
            self.advance()
        lexeme = self.text[start : self.pos]
        kind = KEYWORD if lexeme in KEYWORDS else IDENT
        self.emit(kind, lexeme, line, column, lexeme)

    def symbol(self, ch: str, line: int, column: int) -> None:
        for op in OPERATORS:
            if self.text.startswith(op, self.pos):
                self.advance(len(op))
                self.emit(OP, op, line, column)
                return
        if ch in PUNCTUATION:
            self.advance()
            if ch in "([":
                self.depth += 1
            elif ch in ")]":
                self.depth = max(0, self.depth - 1)
            self.emit(PUNCT, ch, line, column)
            return
        raise self.error(f"illegal character {ch!r}", line, column)


#####################################
# Public Functions
#####################################


def tokenize(source: str, source_name: str = "<model>") -> List[Token]:
    """Split source text into tokens; comments produce nothing."""
    return _Scanner(source, source_name).run()
