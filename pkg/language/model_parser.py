"""
Model Parser
Builds a ModelDocument from the token list of one model file.

Top-level groups end at the next group keyword or at the model's `end`.
if/switch blocks, Header, Model and SubModel end with an explicit `end`.
A LimitGroup ends with `end` or at the next group keyword. The last
`end` of the file always closes the main model.
"""

#####################################
# Import Modules
#####################################

import pathlib
from typing import List, Sequence

from data.defaults import ASSIGN_OPERATORS
from language.document import (
    AssignStmt,
    AssignTarget,
    Attribute,
    DistDecl,
    EquationStmt,
    Group,
    IfStmt,
    ModelDocument,
    ParamDecl,
    RepeatMarker,
    Statement,
    SwitchCase,
    SwitchStmt,
    VarDecl,
    attribute_text,
)
from language.expr_parser import ExpressionParser
from language.tokenizer import EOF, IDENT, KEYWORD, NUMBER, OP, SEP, STRING, Token, tokenize
from symbolic.expr import Ident
from utils.utils_logger import logger

#####################################
# Group Classification
#####################################

DECLARATION_GROUPS = ("Vars", "Params")
EQUATION_GROUPS = ("NLEs", "WLSEs", "ECs")
ASSIGNMENT_GROUPS = ("ReInit", "PreProc", "PostProc", "IterPostP", "BasePostP", "Repeats")
NESTED_ONLY = ("Header", "Model")
WLS_ONLY = ("WLSEs", "ECs")

#####################################
# Parser
#####################################


class ModelParser(ExpressionParser):
    # ---- attributes -------------------------------------------------

    def parse_attributes(self) -> List[Attribute]:
        """`[name=value name=value ...]`, or nothing when no `[` follows."""
        attributes: List[Attribute] = []
        if not self.current.is_punct("["):
            return attributes
        self.advance()
        while not self.current.is_punct("]"):
            if self.at_end():
                raise self.error("unterminated attribute list, expected ']'")
            if self.current.is_punct(","):
                self.advance()
                continue
            name = self.current
            if name.kind not in (IDENT, KEYWORD):
                raise self.error(f"expected attribute name, found {name}")
            self.advance()
            self.expect_op("=")
            attributes.append(Attribute(name.lexeme, self.parse_literal(), name.line, name.column))
        self.advance()
        return attributes

    def parse_literal(self):
        token = self.current
        negative = False
        if token.is_op("-"):
            negative = True
            self.advance()
            token = self.current
        if token.kind == NUMBER:
            self.advance()
            return -token.value if negative else token.value
        if negative:
            raise self.error(f"expected a number after '-', found {token}")
        if token.kind == STRING:
            self.advance()
            return token.value
        if token.kind == IDENT:
            self.advance()
            if token.lexeme == "true":
                return True
            if token.lexeme == "false":
                return False
            return Ident(token.lexeme, token.line, token.column)
        raise self.error(f"expected an attribute value, found {token}")

    def ends_file(self, offset: int) -> bool:
        """Only separators remain from `offset` tokens ahead."""
        while self.peek(offset).kind == SEP:
            offset += 1
        return self.peek(offset).kind == EOF

    def expect_colon(self, what: str) -> None:
        if not self.current.is_punct(":"):
            raise self.error(f"expected ':' after {what}, found {self.current}")
        self.advance()

    # ---- document ---------------------------------------------------

    def parse_document(self) -> ModelDocument:
        self.skip_separators()
        if not self.current.is_keyword("Header"):
            raise self.error("missing Header: every model file starts with 'Header:'")
        header = self.parse_header()
        self.skip_separators()
        if not self.current.is_keyword("Model"):
            raise self.error(f"expected 'Model', found {self.current}")
        start = self.advance()
        model = Group("Model", self.parse_attributes(), line=start.line, column=start.column)
        self.expect_colon("Model")
        document = ModelDocument(header, model, source=self.source)
        self.parse_groups(document, nested=False)
        self.skip_separators()
        if not self.at_end():
            raise self.error(f"unexpected {self.current} after the model's 'end'")
        return document

    def parse_header(self) -> Group:
        start = self.expect_keyword("Header")
        header = Group("Header", self.parse_attributes(), line=start.line, column=start.column)
        self.expect_colon("Header")
        while True:
            self.skip_separators()
            token = self.current
            if token.is_keyword("end"):
                self.advance()
                return header
            if self.at_end() or token.is_group_keyword():
                raise self.error("missing 'end' after Header")
            name = self.expect_ident("header attribute")
            self.expect_op("=")
            header.attributes.append(
                Attribute(name.lexeme, self.parse_literal(), name.line, name.column)
            )

    def parse_groups(self, document: ModelDocument, nested: bool) -> None:
        owner = "SubModel" if nested else "Model"
        while True:
            self.skip_separators()
            token = self.current
            if self.at_end():
                raise self.error(f"missing 'end' for {owner}")
            if token.is_keyword("end"):
                self.advance()
                self.skip_separators()
                # a redundant group-closing `end` only at main model level
                if not nested and self.current.is_group_keyword():
                    continue
                return
            if not token.is_group_keyword():
                raise self.error(f"expected a group keyword, found {token}")
            document.groups.append(self.parse_group(document))

    def parse_group(self, document: ModelDocument) -> Group:
        token = self.advance()
        kind = token.lexeme
        if kind in NESTED_ONLY:
            raise self.error(f"'{kind}' is not allowed inside a model", token)
        model_type = attribute_text(document.model.attributes, "type", "NL")
        if kind in WLS_ONLY and model_type != "WLS":
            raise self.error(f"'{kind}' belongs in a WLS model, not a {model_type} model", token)
        if kind == "NLEs" and model_type == "WLS":
            raise self.error("'NLEs' belongs in an NL model, not a WLS model", token)
        group = Group(kind, self.parse_attributes(), line=token.line, column=token.column)
        self.expect_colon(kind)
        if kind == "SubModel":
            group.body = self.parse_submodel(group)
        elif kind in DECLARATION_GROUPS:
            group.statements = self.parse_declarations(kind)
        elif kind == "Distributions":
            group.statements = self.parse_distributions()
        elif kind in EQUATION_GROUPS:
            group.statements = self.parse_block("equation")
        elif kind == "Limits":
            group.statements = self.parse_limit_groups(nested=document.header is None)
        else:
            group.statements = self.parse_block("assignment")
        return group

    def parse_submodel(self, group: Group) -> ModelDocument:
        # own header group without a body, so the tree has no cycle
        model = Group(group.kind, list(group.attributes), line=group.line, column=group.column)
        submodel = ModelDocument(None, model, source=self.source)
        self.parse_groups(submodel, nested=True)
        return submodel

    # ---- declarations ----------------------------------------------

    def parse_declarations(self, kind: str) -> List[Statement]:
        declarations: List[Statement] = []
        cls = VarDecl if kind == "Vars" else ParamDecl
        while True:
            self.skip_separators()
            token = self.current
            # `end = 1` declares a reserved name; the validator reports it
            reserved_decl = token.kind == KEYWORD and self.peek().is_op("=")
            if token.kind != IDENT and not reserved_decl:
                return declarations
            self.advance()
            init = None
            if self.current.is_op("="):
                self.advance()
                init = self.parse_expression()
            attributes = self.parse_attributes()
            declarations.append(
                cls(token.lexeme, init, attributes, line=token.line, column=token.column)
            )
            self.end_statement()

    def parse_distributions(self) -> List[Statement]:
        declarations: List[Statement] = []
        while True:
            self.skip_separators()
            token = self.current
            if token.kind != IDENT:
                return declarations
            self.advance()
            attributes = self.parse_attributes()
            declarations.append(
                DistDecl(token.lexeme, attributes, line=token.line, column=token.column)
            )
            self.end_statement()

    def end_statement(self) -> None:
        token = self.current
        if token.kind == SEP:
            self.advance()
            return
        if self.at_end() or token.is_keyword():
            return
        raise self.error(f"expected end of statement, found {token}")

    # ---- statement blocks ------------------------------------------

    def parse_block(self, mode: str) -> List[Statement]:
        """
        Statements until a block terminator. Blocks inside if/switch stop
        at `end`/`else`; group bodies stop at a group keyword or `end`.
        """
        statements: List[Statement] = []
        while True:
            self.skip_separators()
            token = self.current
            if self.at_end() or token.is_group_keyword():
                return statements
            if token.is_keyword("end", "else", "case", "default", "group"):
                return statements
            statements.append(self.parse_statement(mode))
            self.end_statement()

    def parse_statement(self, mode: str) -> Statement:
        token = self.current
        if token.is_keyword("if"):
            return self.parse_if(mode)
        if token.is_keyword("switch"):
            return self.parse_switch(mode)
        if token.is_keyword("repeat"):
            self.advance()
            return RepeatMarker(line=token.line, column=token.column)
        if mode == "equation":
            return self.parse_equation()
        return self.parse_assignment()

    def parse_equation(self) -> EquationStmt:
        token = self.current
        attributes = self.parse_attributes()
        lhs = self.parse_expression()
        rhs = None
        if self.current.is_op("="):
            self.advance()
            rhs = self.parse_expression()
        if self.current.is_op("="):
            raise self.error("an equation contains at most one '='")
        attributes.extend(self.parse_attributes())
        return EquationStmt(lhs, rhs, attributes, line=token.line, column=token.column)

    def parse_assignment(self) -> AssignStmt:
        token = self.current
        target = self.parse_target()
        op = self.current
        if not (op.kind == OP and op.lexeme in ASSIGN_OPERATORS):
            raise self.error(f"expected an assignment operator, found {op}")
        self.advance()
        expr = self.parse_expression()
        return AssignStmt(target, op.lexeme, expr, line=token.line, column=token.column)

    def parse_target(self) -> AssignTarget:
        main = False
        if self.current.is_punct("@"):
            self.advance()
            scope = self.expect_ident("'main' after '@'")
            if scope.lexeme != "main":
                raise self.error(f"unknown scope '@{scope.lexeme}', only '@main' exists", scope)
            self.expect_punct(".")
            main = True
        name = self.current
        if name.kind != IDENT and not (name.kind == KEYWORD and self.peek().is_op(*ASSIGN_OPERATORS)):
            raise self.error(f"expected an assignment target, found {name}")
        self.advance()
        component = None
        if self.current.is_punct("."):
            self.advance()
            selector = self.expect_ident("'real' or 'imag'")
            if selector.lexeme not in ("real", "imag"):
                raise self.error(f"unknown component '.{selector.lexeme}'", selector)
            component = selector.lexeme
        return AssignTarget(name.lexeme, main, component)

    def parse_if(self, mode: str) -> IfStmt:
        start = self.expect_keyword("if")
        guard = self.parse_expression()
        attributes = self.parse_attributes()
        self.expect_colon("if condition")
        statement = IfStmt(guard, attributes, line=start.line, column=start.column)
        statement.then = self.parse_block(mode)
        if self.current.is_keyword("else"):
            self.advance()
            self.expect_colon("else")
            statement.otherwise = self.parse_block(mode)
        if not self.current.is_keyword("end"):
            raise self.error(f"missing 'end' for if statement opened at line {start.line}")
        self.advance()
        return statement

    def parse_switch(self, mode: str) -> SwitchStmt:
        start = self.expect_keyword("switch")
        self.expect_colon("switch")
        statement = SwitchStmt(line=start.line, column=start.column)
        while True:
            self.skip_separators()
            token = self.current
            if token.is_keyword("end"):
                self.advance()
                break
            if not token.is_keyword("case", "default"):
                raise self.error(f"missing 'end' for switch opened at line {start.line}")
            self.advance()
            guard = None if token.lexeme == "default" else self.parse_expression()
            attributes = self.parse_attributes()
            self.expect_op("->")
            body = [self.parse_statement(mode)]
            while self.current.kind == SEP and self.current.lexeme == ";":
                self.advance()
                if self.current.kind == SEP or self.current.is_keyword("end", "case", "default"):
                    break
                body.append(self.parse_statement(mode))
            statement.cases.append(
                SwitchCase(guard, attributes, body, line=token.line, column=token.column)
            )
        if not statement.cases:
            raise self.error("switch without cases", start)
        return statement

    # ---- limits -----------------------------------------------------

    def parse_limit_groups(self, nested: bool = False) -> List[Group]:
        groups: List[Group] = []
        while True:
            self.skip_separators()
            token = self.current
            if not token.is_keyword("group"):
                if self.at_end() or token.is_group_keyword() or token.is_keyword("end"):
                    return groups
                raise self.error(f"expected 'group' inside Limits, found {token}")
            self.advance()
            group = Group("LimitGroup", self.parse_attributes(), line=token.line, column=token.column)
            self.expect_colon("group")
            group.statements = self.parse_block("assignment")
            if self.current.is_keyword("end"):
                # the last `end` of the file belongs to the main model
                if nested or not self.ends_file(1):
                    self.advance()
            elif self.current.is_keyword("else", "case", "default"):
                raise self.error(f"unexpected {self.current} in limit group")
            groups.append(group)


#####################################
# Public Functions
#####################################


def parse_model(tokens: Sequence[Token], source: str = "<model>") -> ModelDocument:
    """Parse the full token list of one model file."""
    return ModelParser(tokens, source).parse_document()


def parse_text(text: str, source_name: str = "<model>") -> ModelDocument:
    document = parse_model(tokenize(text, source_name), source_name)
    logger.debug(f"Parsed {source_name}: {len(document.groups)} group(s)")
    return document


def parse_file(path) -> ModelDocument:
    """Read a UTF-8 model file and parse it."""
    path = pathlib.Path(path)
    text = path.read_text(encoding="utf-8")
    logger.info(f"Parsing model file {path.name}")
    return parse_text(text, str(path))
