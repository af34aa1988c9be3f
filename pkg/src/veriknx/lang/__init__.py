"""The loop-free automation DSL: parser, typechecker, concrete interpreter.

A program declares its device instances and unchecked externals, then gives
one invariant expression and one iteration block:

    device BINARY_SENSOR: binary
    device SWITCH: switch

    def unchecked_send_email(to: str) -> none {
    }

    invariant: ((BINARY_SENSOR.is_on() or app_state.INT_0 == 42) and SWITCH.is_on())
        or (not BINARY_SENSOR.is_on() and not SWITCH.is_on())

    iteration: {
        if BINARY_SENSOR.is_on() or app_state.INT_0 == 42 {
            SWITCH.on();
        } else {
            SWITCH.off();
        }
    }

There are no loops and no recursion, arithmetic is linear, and boolean
operators evaluate both operands.
"""

from .ast import (
    Assign,
    BinOp,
    BoolLit,
    Compare,
    DeviceCall,
    DeviceDecl,
    ExprStmt,
    If,
    IntLit,
    Param,
    Program,
    RealLit,
    RegisterRef,
    ReturnRef,
    StrLit,
    UnaryOp,
    UncheckedCall,
    UncheckedDecl,
)
from .parser import parse_program
from .typecheck import TypedProgram, typecheck
from .interpreter import CallRecord, evaluate_invariant, interpret_iteration

__all__ = [
    "parse_program",
    "typecheck",
    "TypedProgram",
    "interpret_iteration",
    "evaluate_invariant",
    "CallRecord",
    "Program",
    "DeviceDecl",
    "UncheckedDecl",
    "Param",
    "Assign",
    "If",
    "ExprStmt",
    "BoolLit",
    "IntLit",
    "RealLit",
    "StrLit",
    "RegisterRef",
    "ReturnRef",
    "DeviceCall",
    "UncheckedCall",
    "UnaryOp",
    "BinOp",
    "Compare",
]
