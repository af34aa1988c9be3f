"""Lexer and recursive-descent parser for the automation DSL."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import ParseError, UnsupportedConstructError
from . import ast

KEYWORDS = {
    "device", "def", "post", "invariant", "iteration", "if", "elif", "else",
    "and", "or", "not", "true", "false", "bool", "int", "real", "str", "none",
    "app_state",
}
LOOP_KEYWORDS = {"while", "for", "loop", "repeat"}
TYPE_NAMES = {"bool", "int", "real", "str"}

_TWO_CHAR = {"==", "!=", "<=", ">=", "+=", "-=", "->", "//"}
_ONE_CHAR = set("{}(),;:.=<>+-*")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'keyword' | 'int' | 'real' | 'string' | punctuation | 'eof'
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in LOOP_KEYWORDS:
                raise UnsupportedConstructError(
                    f"loops are not part of this language ({word!r})", line, col)
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(Token("real", text[i:j], start_line, start_col))
            else:
                tokens.append(Token("int", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            chunks = []
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string literal", start_line, start_col)
                if text[j] == "\\" and j + 1 < n:
                    escapes = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
                    if text[j + 1] not in escapes:
                        raise ParseError(f"unknown escape \\{text[j + 1]}", line, col)
                    chunks.append(escapes[text[j + 1]])
                    j += 2
                    continue
                chunks.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", start_line, start_col)
            tokens.append(Token("string", "".join(chunks), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(two, two, start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(Token(ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.current
        self.pos += 1
        return token

    def fail(self, message: str) -> ParseError:
        tok = self.current
        found = tok.value or tok.kind
        return ParseError(f"{message}, found {found!r}", tok.line, tok.col)

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.current
        if tok.kind != kind or (value is not None and tok.value != value):
            raise self.fail(f"expected {value or kind!r}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.current.kind == "keyword" and self.current.value == word

    def eat_keyword(self, word: str) -> bool:
        if self.at_keyword(word):
            self.advance()
            return True
        return False

    # -- program structure ------------------------------------------------

    def parse_program(self) -> ast.Program:
        devices: list[ast.DeviceDecl] = []
        unchecked: list[ast.UncheckedDecl] = []
        while True:
            if self.at_keyword("device"):
                devices.append(self.device_decl())
            elif self.at_keyword("def"):
                unchecked.append(self.unchecked_decl())
            else:
                break
        self.expect("keyword", "invariant")
        self.expect(":")
        invariant = self.expression()
        self.expect("keyword", "iteration")
        self.expect(":")
        iteration = self.block()
        self.expect("eof")
        return ast.Program(devices, unchecked, invariant, iteration)

    def device_decl(self) -> ast.DeviceDecl:
        tok = self.expect("keyword", "device")
        instance = self.expect("ident").value
        self.expect(":")
        kind = self.advance()
        if kind.kind not in ("ident", "keyword"):
            raise self.fail("expected a device kind")
        return ast.DeviceDecl(instance, kind.value, pos=(tok.line, tok.col))

    def unchecked_decl(self) -> ast.UncheckedDecl:
        tok = self.expect("keyword", "def")
        name = self.expect("ident").value
        self.expect("(")
        params: list[ast.Param] = []
        if self.current.kind != ")":
            while True:
                pname = self.expect("ident")
                self.expect(":")
                ptype = self.type_name()
                params.append(ast.Param(pname.value, ptype, pos=(pname.line, pname.col)))
                if self.current.kind != ",":
                    break
                self.advance()
        self.expect(")")
        self.expect("->")
        if self.eat_keyword("none"):
            return_type = "none"
        else:
            return_type = self.type_name()
        self.expect("{")
        postconditions: list[ast.Expr] = []
        while self.at_keyword("post"):
            self.advance()
            self.expect(":")
            postconditions.append(self.expression())
        self.expect("}")
        return ast.UncheckedDecl(name, params, return_type, postconditions,
                                 pos=(tok.line, tok.col))

    def type_name(self) -> str:
        tok = self.current
        if tok.kind == "keyword" and tok.value in TYPE_NAMES:
            self.advance()
            return tok.value
        raise self.fail("expected a type (bool, int, real, str)")

    # -- statements --------------------------------------------------------

    def block(self) -> list[ast.Stmt]:
        self.expect("{")
        body: list[ast.Stmt] = []
        while self.current.kind != "}":
            body.append(self.statement())
        self.expect("}")
        return body

    def statement(self) -> ast.Stmt:
        if self.at_keyword("if"):
            return self.if_statement()
        if self.at_keyword("app_state"):
            return self.assignment()
        tok = self.current
        expr = self.postfix()
        if not isinstance(expr, (ast.DeviceCall, ast.UncheckedCall)):
            raise ParseError("only calls can stand alone as statements", tok.line, tok.col)
        self.expect(";")
        return ast.ExprStmt(expr, pos=(tok.line, tok.col))

    def if_statement(self) -> ast.If:
        tok = self.expect("keyword", "if")
        branches = [(self.expression(), self.block())]
        orelse: list[ast.Stmt] = []
        while self.at_keyword("elif"):
            self.advance()
            branches.append((self.expression(), self.block()))
        if self.eat_keyword("else"):
            orelse = self.block()
        return ast.If(branches, orelse, pos=(tok.line, tok.col))

    def assignment(self) -> ast.Assign:
        tok = self.expect("keyword", "app_state")
        self.expect(".")
        register = self.expect("ident").value
        op_tok = self.current
        if op_tok.kind not in ("=", "+=", "-="):
            raise self.fail("expected '=', '+=' or '-='")
        self.advance()
        value = self.expression()
        if self.current.kind == ";":
            self.advance()
        return ast.Assign(register, op_tok.kind, value, pos=(tok.line, tok.col))

    # -- expressions (precedence climbing) ----------------------------------

    def expression(self) -> ast.Expr:
        return self.or_expr()

    def or_expr(self) -> ast.Expr:
        left = self.and_expr()
        while self.at_keyword("or"):
            tok = self.advance()
            left = ast.BinOp("or", left, self.and_expr(), pos=(tok.line, tok.col))
        return left

    def and_expr(self) -> ast.Expr:
        left = self.not_expr()
        while self.at_keyword("and"):
            tok = self.advance()
            left = ast.BinOp("and", left, self.not_expr(), pos=(tok.line, tok.col))
        return left

    def not_expr(self) -> ast.Expr:
        if self.at_keyword("not"):
            tok = self.advance()
            return ast.UnaryOp("not", self.not_expr(), pos=(tok.line, tok.col))
        return self.comparison()

    def comparison(self) -> ast.Expr:
        left = self.additive()
        if self.current.kind in ("==", "!=", "<", "<=", ">", ">="):
            tok = self.advance()
            right = self.additive()
            if self.current.kind in ("==", "!=", "<", "<=", ">", ">="):
                raise self.fail("comparisons do not chain; parenthesize")
            return ast.Compare(tok.kind, left, right, pos=(tok.line, tok.col))
        return left

    def additive(self) -> ast.Expr:
        left = self.multiplicative()
        while self.current.kind in ("+", "-"):
            tok = self.advance()
            left = ast.BinOp(tok.kind, left, self.multiplicative(), pos=(tok.line, tok.col))
        return left

    def multiplicative(self) -> ast.Expr:
        left = self.unary()
        while self.current.kind == "*":
            tok = self.advance()
            left = ast.BinOp("*", left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self) -> ast.Expr:
        if self.current.kind == "-":
            tok = self.advance()
            return ast.UnaryOp("-", self.unary(), pos=(tok.line, tok.col))
        return self.postfix()

    def postfix(self) -> ast.Expr:
        tok = self.current
        if tok.kind == "ident":
            self.advance()
            if self.current.kind == "(":
                if tok.value == "__return__":
                    raise ParseError("__return__ is not callable", tok.line, tok.col)
                return ast.UncheckedCall(tok.value, self.call_args(), pos=(tok.line, tok.col))
            if self.current.kind == ".":
                self.advance()
                method = self.expect("ident").value
                args = self.call_args()
                return ast.DeviceCall(tok.value, method, args, pos=(tok.line, tok.col))
            if tok.value == "__return__":
                return ast.ReturnRef(pos=(tok.line, tok.col))
            raise ParseError(
                f"bare identifier {tok.value!r}: expected a call or member access",
                tok.line, tok.col)
        return self.primary()

    def call_args(self) -> list[ast.Expr]:
        self.expect("(")
        args: list[ast.Expr] = []
        if self.current.kind != ")":
            while True:
                args.append(self.expression())
                if self.current.kind != ",":
                    break
                self.advance()
        self.expect(")")
        return args

    def primary(self) -> ast.Expr:
        tok = self.current
        if tok.kind == "int":
            self.advance()
            return ast.IntLit(int(tok.value), pos=(tok.line, tok.col))
        if tok.kind == "real":
            self.advance()
            return ast.RealLit(Fraction(tok.value), pos=(tok.line, tok.col))
        if tok.kind == "string":
            self.advance()
            return ast.StrLit(tok.value, pos=(tok.line, tok.col))
        if tok.kind == "keyword" and tok.value in ("true", "false"):
            self.advance()
            return ast.BoolLit(tok.value == "true", pos=(tok.line, tok.col))
        if self.at_keyword("app_state"):
            self.advance()
            self.expect(".")
            register = self.expect("ident").value
            return ast.RegisterRef(register, pos=(tok.line, tok.col))
        if tok.kind == "(":
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        raise self.fail("expected an expression")


def parse_program(text: str) -> ast.Program:
    """Parse DSL source text into a Program AST.

    Syntax errors carry line and column; loop keywords raise
    UnsupportedConstructError.
    """
    return _Parser(tokenize(text)).parse_program()
