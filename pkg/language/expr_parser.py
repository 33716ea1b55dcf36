"""
Expression Parser
Recursive descent over the token list produced by the tokenizer.

Precedence, loosest first:
    comparison      a < b
    additive        a + b, a - b
    unary minus     -a*b is -(a*b)
    multiplicative  a * b, a / b, a * -b
    power           a ^ b (right associative), -v^2 is -(v^2)
    postfix         calls and parentheses
"""

#####################################
# Import Modules
#####################################

from typing import List, Sequence

from data.defaults import BUILTIN_CONSTANTS, FUNCTION_ARITY
from language.tokenizer import EOF, IDENT, IMAG, KEYWORD, NUMBER, OP, PUNCT, SEP, Token
from symbolic.expr import COMPARE_OPERATORS, Binary, Call, Compare, Conj, Const, Expr, Ident, Neg
from utils.errors import ParseError

#####################################
# Token Cursor
#####################################


class TokenCursor:
    """Shared position bookkeeping for the expression and model parsers."""

    def __init__(self, tokens: Sequence[Token], source: str = "<model>"):
        self.tokens: List[Token] = list(tokens)
        last = self.tokens[-1] if self.tokens else None
        line = last.line if last else 1
        self.tokens.append(Token(EOF, "", line, (last.column + len(last.lexeme)) if last else 1))
        self.index = 0
        self.source = source

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        index = min(self.index + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        if token.kind != EOF:
            self.index += 1
        return token

    def at_end(self) -> bool:
        return self.current.kind == EOF

    def error(self, message: str, token: Token = None) -> ParseError:
        token = token or self.current
        return ParseError(message, token.line, token.column, self.source)

    def expect_punct(self, lexeme: str) -> Token:
        if not self.current.is_punct(lexeme):
            raise self.error(f"expected '{lexeme}', found {self.current}")
        return self.advance()

    def expect_op(self, lexeme: str) -> Token:
        if not self.current.is_op(lexeme):
            raise self.error(f"expected '{lexeme}', found {self.current}")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if not self.current.is_keyword(word):
            raise self.error(f"expected '{word}', found {self.current}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.current.kind != IDENT:
            raise self.error(f"expected {what}, found {self.current}")
        return self.advance()

    def skip_separators(self) -> None:
        while self.current.kind == SEP:
            self.advance()


#####################################
# Expression Grammar
#####################################


class ExpressionParser(TokenCursor):
    def parse_expression(self) -> Expr:
        left = self.parse_additive()
        if self.current.kind == OP and self.current.lexeme in COMPARE_OPERATORS:
            op = self.advance().lexeme
            right = self.parse_additive()
            if self.current.kind == OP and self.current.lexeme in COMPARE_OPERATORS:
                raise self.error("comparisons cannot be chained")
            return Compare(op, left, right)
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_signed_term()
        while self.current.is_op("+", "-"):
            op = self.advance().lexeme
            left = Binary(op, left, self.parse_signed_term())
        return left

    def parse_signed_term(self) -> Expr:
        if self.current.is_op("-"):
            self.advance()
            return Neg(self.parse_signed_term())
        return self.parse_term()

    def parse_term(self) -> Expr:
        left = self.parse_power()
        while self.current.is_op("*", "/"):
            op = self.advance().lexeme
            left = Binary(op, left, self.parse_signed_factor())
        return left

    def parse_signed_factor(self) -> Expr:
        if self.current.is_op("-"):
            self.advance()
            return Neg(self.parse_signed_factor())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_postfix()
        if self.current.is_op("^"):
            self.advance()
            return Binary("^", base, self.parse_signed_power())
        return base

    def parse_signed_power(self) -> Expr:
        if self.current.is_op("-"):
            self.advance()
            return Neg(self.parse_signed_power())
        return self.parse_power()

    def parse_postfix(self) -> Expr:
        token = self.current
        if token.kind == NUMBER:
            self.advance()
            return Const(token.value)
        if token.kind == IMAG:
            self.advance()
            return Const(token.value)
        if token.is_punct("("):
            self.advance()
            inner = self.parse_expression()
            if not self.current.is_punct(")"):
                raise self.error(f"unbalanced parentheses: expected ')', found {self.current}")
            self.advance()
            return inner
        if token.kind == IDENT:
            self.advance()
            if self.current.is_punct("("):
                return self.parse_call(token)
            if token.lexeme in BUILTIN_CONSTANTS:
                return Const(BUILTIN_CONSTANTS[token.lexeme], token.lexeme)
            return Ident(token.lexeme, token.line, token.column)
        if token.kind == KEYWORD:
            raise self.error(f"keyword '{token.lexeme}' cannot appear in an expression")
        if token.is_punct(")"):
            raise self.error("unbalanced parentheses: unexpected ')'")
        raise self.error(f"expected an expression, found {token}")

    def parse_call(self, name: Token) -> Expr:
        func = name.lexeme
        if func not in FUNCTION_ARITY:
            raise self.error(f"unknown function '{func}'", name)
        self.expect_punct("(")
        args = []
        if not self.current.is_punct(")"):
            args.append(self.parse_expression())
            while self.current.is_punct(","):
                self.advance()
                args.append(self.parse_expression())
        if not self.current.is_punct(")"):
            raise self.error(f"unbalanced parentheses: expected ')', found {self.current}")
        self.advance()
        if len(args) != FUNCTION_ARITY[func]:
            raise self.error(
                f"{func}() takes {FUNCTION_ARITY[func]} argument(s), got {len(args)}", name
            )
        if func == "conj":
            return Conj(args[0])
        return Call(func, tuple(args), name.line, name.column)


#####################################
# Public Functions
#####################################


def parse_expression(tokens: Sequence[Token], source: str = "<model>") -> Expr:
    """Parse a complete token sequence as one expression."""
    parser = ExpressionParser(tokens, source)
    parser.skip_separators()
    expr = parser.parse_expression()
    parser.skip_separators()
    if not parser.at_end():
        if parser.current.is_punct(")"):
            raise parser.error("unbalanced parentheses: unexpected ')'")
        raise parser.error(f"unexpected {parser.current} after expression")
    return expr
