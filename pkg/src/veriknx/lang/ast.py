"""AST node definitions for the automation DSL.

Nodes compare by identity (eq=False) so typecheckers and executors can key
side tables by node. Real literals hold exact Fractions parsed from the
decimal text, which keeps interpretation and counterexample replay exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(eq=False)
class Node:
    pass


@dataclass(eq=False)
class Expr(Node):
    pass


@dataclass(eq=False)
class BoolLit(Expr):
    value: bool
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class IntLit(Expr):
    value: int
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class RealLit(Expr):
    value: Fraction
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class StrLit(Expr):
    value: str
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class RegisterRef(Expr):
    """app_state.<register>"""

    register: str
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class ReturnRef(Expr):
    """__return__ inside an unchecked postcondition."""

    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class DeviceCall(Expr):
    """INSTANCE.method(); reads (is_on, read) are expressions, writes (on, off) statements."""

    instance: str
    method: str
    args: list[Expr] = field(default_factory=list)
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class UncheckedCall(Expr):
    name: str
    args: list[Expr] = field(default_factory=list)
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class UnaryOp(Expr):
    op: str  # '-' | 'not'
    operand: Expr
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class BinOp(Expr):
    op: str  # '+' | '-' | '*' | 'and' | 'or'
    left: Expr
    right: Expr
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class Compare(Expr):
    op: str  # '==' | '!=' | '<' | '<=' | '>' | '>='
    left: Expr
    right: Expr
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class Stmt(Node):
    pass


@dataclass(eq=False)
class Assign(Stmt):
    register: str
    op: str  # '=' | '+=' | '-='
    value: Expr
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class If(Stmt):
    branches: list[tuple[Expr, list[Stmt]]]  # if + elifs, in order
    orelse: list[Stmt] = field(default_factory=list)
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class ExprStmt(Stmt):
    """A bare device write or unchecked call."""

    call: Expr
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class Param(Node):
    name: str
    type: str  # 'bool' | 'int' | 'real' | 'str'
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class UncheckedDecl(Node):
    """An external call: opaque to verification except for its postconditions."""

    name: str
    params: list[Param]
    return_type: str  # 'bool' | 'int' | 'real' | 'str' | 'none'
    postconditions: list[Expr]
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class DeviceDecl(Node):
    instance: str
    kind: str
    pos: tuple[int, int] = (0, 0)


@dataclass(eq=False)
class Program(Node):
    devices: list[DeviceDecl]
    unchecked: list[UncheckedDecl]
    invariant: Expr
    iteration: list[Stmt]
