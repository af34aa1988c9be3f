"""Concrete execution of typed programs over state copies.

Boolean operators evaluate both operands (no short-circuit), so the order of
unchecked calls is a pure function of the branch structure and matches the
symbolic executor's fresh-symbol order exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from ..apps import AppState, ValueType
from ..errors import ConfigurationError, UncheckedReturnError
from . import ast
from .typecheck import READ_METHODS, TypedProgram


@dataclass(frozen=True)
class CallRecord:
    """One unchecked invocation: function name, evaluated args, returned value."""

    name: str
    args: tuple
    result: object


class _Run:
    def __init__(self, tp: TypedProgram, app_state: AppState, phys, impls: Mapping[str, Callable]):
        self.tp = tp
        self.app_state = app_state
        self.phys = phys
        self.impls = impls
        self.log: list[CallRecord] = []

    # -- statements ---------------------------------------------------------

    def run_block(self, body: list[ast.Stmt]) -> None:
        for stmt in body:
            self.run_stmt(stmt)

    def run_stmt(self, stmt: ast.Stmt) -> None:
        if isinstance(stmt, ast.Assign):
            value = self.eval(stmt.value)
            if stmt.op == "+=":
                value = getattr(self.app_state, stmt.register) + value
            elif stmt.op == "-=":
                value = getattr(self.app_state, stmt.register) - value
            setattr(self.app_state, stmt.register, value)
            return
        if isinstance(stmt, ast.If):
            for cond, body in stmt.branches:
                if self.eval(cond):
                    self.run_block(body)
                    return
            self.run_block(stmt.orelse)
            return
        if isinstance(stmt, ast.ExprStmt):
            call = stmt.call
            if isinstance(call, ast.DeviceCall):
                address = self.tp.address_of(call.instance,
                                             self.tp.devices[call.instance].primary_channel.name)
                self.phys[address] = call.method == "on"
                return
            self.call_unchecked(call)
            return
        raise AssertionError(f"unexpected statement {stmt!r}")

    # -- expressions ----------------------------------------------------------

    def eval(self, node: ast.Expr):
        if isinstance(node, (ast.BoolLit, ast.IntLit, ast.StrLit)):
            return node.value
        if isinstance(node, ast.RealLit):
            return node.value  # exact Fraction
        if isinstance(node, ast.RegisterRef):
            return getattr(self.app_state, node.register)
        if isinstance(node, ast.DeviceCall):
            assert node.method in READ_METHODS
            channel = self.tp.devices[node.instance].primary_channel.name
            return self.phys[self.tp.address_of(node.instance, channel)]
        if isinstance(node, ast.UncheckedCall):
            return self.call_unchecked(node)
        if isinstance(node, ast.UnaryOp):
            value = self.eval(node.operand)
            return (not value) if node.op == "not" else -value
        if isinstance(node, ast.BinOp):
            left = self.eval(node.left)
            right = self.eval(node.right)
            if node.op == "and":
                return left and right
            if node.op == "or":
                return left or right
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            return left * right
        if isinstance(node, ast.Compare):
            left = self.eval(node.left)
            right = self.eval(node.right)
            if node.op == "==":
                return left == right
            if node.op == "!=":
                return left != right
            if node.op == "<":
                return left < right
            if node.op == "<=":
                return left <= right
            if node.op == ">":
                return left > right
            return left >= right
        raise AssertionError(f"unexpected expression {node!r}")

    def call_unchecked(self, call: ast.UncheckedCall):
        decl = self.tp.unchecked[call.name]
        impl = self.impls.get(call.name)
        if impl is None:
            raise ConfigurationError(
                f"{self.tp.app_name}: no implementation registered for {call.name}")
        args = tuple(self.eval(arg) for arg in call.args)
        result = impl(*args)
        self.check_return(decl, result)
        self.log.append(CallRecord(call.name, args, result))
        return result

    @staticmethod
    def check_return(decl: ast.UncheckedDecl, result) -> None:
        expected = decl.return_type
        ok = {
            "none": lambda v: True,
            "bool": lambda v: isinstance(v, bool),
            "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
            "real": lambda v: isinstance(v, (int, float, Fraction)) and not isinstance(v, bool),
            "str": lambda v: isinstance(v, str),
        }[expected](result)
        if not ok:
            raise UncheckedReturnError(
                f"{decl.name} declared -> {expected} but returned {result!r}")


def interpret_iteration(tp: TypedProgram, app_state: AppState, phys,
                        unchecked_impls: Mapping[str, Callable]):
    """Run the iteration handler on fresh copies of both states.

    Returns (new app state, new physical store, call log). The inputs are
    never mutated; device writes land only in the returned copy. Missing
    implementations raise ConfigurationError, ill-typed returns raise
    UncheckedReturnError.
    """
    run = _Run(tp, app_state.copy(), phys.copy(), unchecked_impls)
    run.run_block(tp.program.iteration)
    return run.app_state, run.phys, tuple(run.log)


def evaluate_invariant(tp: TypedProgram, app_state: AppState, phys) -> bool:
    """Evaluate the invariant; total and side-effect free by construction."""
    run = _Run(tp, app_state, phys, {})
    return bool(run.eval(tp.program.invariant))
