"""Recursive-descent parser producing a Program tree.

Grammar (clauses may repeat and appear in any order; duplicates of device or
scheduling are a semantic error, not a syntax error):

    program     : (declaration | assignment | directive)*
    declaration : type IDENT ('[' INT ']')? ';'
                | 'stream' '<' type '>' IDENT ';'
    assignment  : IDENT '=' expr ';'
    directive   : PRAGMA clause* block        -- clauses on the pragma line
    clause      : ('in'|'out'|'inout') '(' varref (',' varref)* ')'
                | 'device' '(' ('*' | INT (',' INT)*) ')'
                | 'scheduling' '(' 'AUTO' | INT | INT ':' INT (',' INT ':' INT)* ')'
    varref      : IDENT (':' type)?
    block       : '{' (local_decl | assignment)+ '}'   -- on lines after the pragma
    expr        : term (('+'|'-') term)*
    term        : factor (('*'|'/') factor)*
    factor      : INT | FLOAT | IDENT | '(' expr ')' | '-' factor
"""

from __future__ import annotations

from typing import Optional

from hstream import errors
from hstream.errors import CompileError
from hstream.frontend.ast import (
    Assignment,
    BodyItem,
    Clause,
    Declaration,
    DeviceClause,
    DirectiveNode,
    InClause,
    InOutClause,
    OutClause,
    Program,
    SchedulingClause,
    TopItem,
    VarRef,
)
from hstream.frontend.lexer import Token, TokenKind, lex
from hstream.ir import (
    ALL_DEVICES,
    AutoSchedule,
    BinOp,
    DeviceIds,
    ElementType,
    Expr,
    Neg,
    Num,
    PerDeviceSchedule,
    UniformSchedule,
    Var,
    VarKind,
)

_CLAUSE_NAMES = {"in", "out", "inout", "device", "scheduling"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers --------------------------------------------------------

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.col + len(last.lexeme) if last else 1
            raise CompileError.single(line, col, errors.SYNTAX, "unexpected end of input")
        self.pos += 1
        return tok

    def error(self, tok: Optional[Token], message: str) -> CompileError:
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.col + len(last.lexeme) if last else 1
            return CompileError.single(line, col, errors.SYNTAX,
                                       f"{message} (got end of input)")
        return CompileError.single(tok.line, tok.col, errors.SYNTAX,
                                   f"{message} (got {tok.lexeme!r})")

    def expect_punct(self, ch: str, context: str) -> Token:
        tok = self.next()
        if tok.kind is not TokenKind.PUNCT or tok.lexeme != ch:
            raise self.error(tok, f"expected '{ch}' {context}")
        return tok

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.PUNCT and tok.lexeme == ch

    def expect_ident(self, context: str) -> Token:
        tok = self.next()
        if tok.kind is not TokenKind.IDENT:
            raise self.error(tok, f"expected identifier {context}")
        return tok

    def expect_int(self, context: str) -> int:
        tok = self.next()
        if tok.kind is not TokenKind.INT:
            raise self.error(tok, f"expected integer {context}")
        return int(tok.lexeme)

    # -- grammar --------------------------------------------------------------

    def program(self) -> Program:
        items: list[TopItem] = []
        while (tok := self.peek()) is not None:
            if tok.kind is TokenKind.KEYWORD:
                items.append(self.declaration())
            elif tok.kind is TokenKind.PRAGMA:
                items.append(self.directive())
            elif tok.kind is TokenKind.IDENT:
                items.append(self.assignment())
            else:
                raise self.error(tok, "expected declaration, assignment, or directive")
        return Program(tuple(items))

    def type_keyword(self) -> ElementType:
        tok = self.next()
        if tok.kind is not TokenKind.KEYWORD or tok.lexeme not in ("int", "double"):
            raise self.error(tok, "expected type 'int' or 'double'")
        return ElementType(tok.lexeme)

    def declaration(self, local: bool = False) -> Declaration:
        tok = self.next()
        if tok.lexeme == "stream":
            if local:
                raise self.error(tok, "streams cannot be declared inside a directive body")
            self.expect_punct("<", "after 'stream'")
            et = self.type_keyword()
            self.expect_punct(">", "after stream element type")
            name = self.expect_ident("in stream declaration")
            self.expect_punct(";", "after declaration")
            return Declaration(name.lexeme, et, VarKind.STREAM, None, tok.line, tok.col)
        et = ElementType(tok.lexeme)
        name = self.expect_ident("in declaration")
        if self.at_punct("["):
            if local:
                raise self.error(self.peek(), "arrays cannot be declared inside a directive body")
            self.next()
            size = self.expect_int("as array size")
            self.expect_punct("]", "after array size")
            self.expect_punct(";", "after declaration")
            return Declaration(name.lexeme, et, VarKind.ARRAY, size, tok.line, tok.col)
        self.expect_punct(";", "after declaration")
        return Declaration(name.lexeme, et, VarKind.SCALAR, None, tok.line, tok.col)

    def assignment(self) -> Assignment:
        name = self.expect_ident("as assignment target")
        self.expect_punct("=", "in assignment")
        expr = self.expr()
        self.expect_punct(";", "after assignment")
        return Assignment(name.lexeme, expr, name.line, name.col)

    def directive(self) -> DirectiveNode:
        pragma = self.next()
        clauses: list[Clause] = []
        while (tok := self.peek()) is not None and tok.line == pragma.line \
                and not self.at_punct("{"):
            clauses.append(self.clause())
        brace = self.peek()
        if brace is None or not self.at_punct("{"):
            raise self.error(brace, "expected '{' to open the directive body")
        if brace.line == pragma.line:
            raise self.error(brace, "directive body must start on a line after the pragma")
        self.next()
        body: list[BodyItem] = []
        while not self.at_punct("}"):
            tok = self.peek()
            if tok is None:
                raise self.error(None, "unclosed directive body")
            if tok.kind is TokenKind.KEYWORD:
                body.append(self.declaration(local=True))
            elif tok.kind is TokenKind.IDENT:
                body.append(self.assignment())
            else:
                raise self.error(tok, "expected assignment or declaration in directive body")
        close = self.next()
        if not any(isinstance(item, Assignment) for item in body):
            raise CompileError.single(close.line, close.col, errors.SYNTAX,
                                      "directive body must contain at least one assignment")
        return DirectiveNode(tuple(clauses), tuple(body), pragma.line, pragma.col)

    def clause(self) -> Clause:
        tok = self.next()
        if tok.kind is not TokenKind.IDENT or tok.lexeme not in _CLAUSE_NAMES:
            raise self.error(tok, "expected clause (in/out/inout/device/scheduling)")
        self.expect_punct("(", f"after '{tok.lexeme}'")
        if tok.lexeme in ("in", "out", "inout"):
            refs = [self.varref()]
            while self.at_punct(","):
                self.next()
                refs.append(self.varref())
            self.expect_punct(")", "to close the clause")
            cls = {"in": InClause, "out": OutClause, "inout": InOutClause}[tok.lexeme]
            return cls(tuple(refs), tok.line, tok.col)
        if tok.lexeme == "device":
            if self.at_punct("*"):
                self.next()
                self.expect_punct(")", "to close device(*)")
                return DeviceClause(ALL_DEVICES, tok.line, tok.col)
            ids = [self.expect_int("as device id")]
            while self.at_punct(","):
                self.next()
                ids.append(self.expect_int("as device id"))
            self.expect_punct(")", "to close the device clause")
            return DeviceClause(DeviceIds(tuple(ids)), tok.line, tok.col)
        # scheduling
        nxt = self.peek()
        if nxt is not None and nxt.kind is TokenKind.IDENT and nxt.lexeme.lower() == "auto":
            self.next()
            self.expect_punct(")", "to close scheduling(AUTO)")
            return SchedulingClause(AutoSchedule(), tok.line, tok.col)
        first = self.expect_int("as chunk size or device id")
        if self.at_punct(":"):
            self.next()
            entries = [(first, self._chunk_size(tok))]
            while self.at_punct(","):
                self.next()
                dev = self.expect_int("as device id")
                self.expect_punct(":", "between device id and chunk size")
                entries.append((dev, self._chunk_size(tok)))
            self.expect_punct(")", "to close the scheduling clause")
            return SchedulingClause(PerDeviceSchedule(tuple(entries)), tok.line, tok.col)
        if first < 1:
            raise CompileError.single(tok.line, tok.col, errors.SYNTAX,
                                      "chunk size must be a positive integer")
        self.expect_punct(")", "to close the scheduling clause")
        return SchedulingClause(UniformSchedule(first), tok.line, tok.col)

    def _chunk_size(self, clause_tok: Token) -> int:
        size = self.expect_int("as chunk size")
        if size < 1:
            raise CompileError.single(clause_tok.line, clause_tok.col, errors.SYNTAX,
                                      "chunk size must be a positive integer")
        return size

    def varref(self) -> VarRef:
        name = self.expect_ident("in clause")
        stream_type = None
        if self.at_punct(":"):
            self.next()
            stream_type = self.type_keyword()
        return VarRef(name.lexeme, stream_type, name.line, name.col)

    # -- expressions -----------------------------------------------------------

    def expr(self) -> Expr:
        left = self.term()
        while (tok := self.peek()) is not None and tok.kind is TokenKind.PUNCT \
                and tok.lexeme in "+-":
            op = self.next()
            right = self.term()
            left = BinOp(op.lexeme, left, right, op.line, op.col)
        return left

    def term(self) -> Expr:
        left = self.factor()
        while (tok := self.peek()) is not None and tok.kind is TokenKind.PUNCT \
                and tok.lexeme in "*/":
            op = self.next()
            right = self.factor()
            left = BinOp(op.lexeme, left, right, op.line, op.col)
        return left

    def factor(self) -> Expr:
        tok = self.next()
        if tok.kind is TokenKind.INT:
            return Num(int(tok.lexeme), ElementType.INT, tok.line, tok.col)
        if tok.kind is TokenKind.FLOAT:
            return Num(float(tok.lexeme), ElementType.DOUBLE, tok.line, tok.col)
        if tok.kind is TokenKind.IDENT:
            return Var(tok.lexeme, tok.line, tok.col)
        if tok.kind is TokenKind.PUNCT and tok.lexeme == "(":
            inner = self.expr()
            self.expect_punct(")", "to close the expression")
            return inner
        if tok.kind is TokenKind.PUNCT and tok.lexeme == "-":
            return Neg(self.factor(), tok.line, tok.col)
        raise self.error(tok, "expected expression")


def parse(tokens: list[Token]) -> Program:
    """Parse a token stream into a Program; raises CompileError on the first
    syntax error, carrying its position."""
    return _Parser(tokens).program()


def parse_source(source: str) -> Program:
    return parse(lex(source))
