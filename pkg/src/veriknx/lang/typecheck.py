"""Typechecker: resolves device references, enforces purity and linearity."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..apps import SUPPORTED_KINDS, AppPrototype, DeviceKind, ValueType, register_type
from ..errors import (
    LinearityError,
    PurityError,
    ResolutionError,
    SideEffectError,
    TypecheckError,
)
from ..wire import GroupAddress
from . import ast

READ_METHODS = {"is_on": ValueType.BOOL, "read": ValueType.REAL}
WRITE_METHODS = {"on", "off"}

_TYPE_BY_NAME = {"bool": ValueType.BOOL, "int": ValueType.INT,
                 "real": ValueType.REAL, "str": ValueType.STR}


@dataclass
class TypedProgram:
    """A checked program plus everything later stages need to run it.

    ``addresses`` maps (INSTANCE, channel) to the group address the channel
    was compiled to; it is attached after compilation via `with_addresses`.
    """

    program: ast.Program
    prototype: AppPrototype
    app_name: str
    devices: dict[str, DeviceKind]
    unchecked: dict[str, ast.UncheckedDecl]
    expr_types: dict[int, ValueType]
    addresses: dict[tuple[str, str], GroupAddress] | None = None

    def type_of(self, node: ast.Expr) -> ValueType:
        return self.expr_types[id(node)]

    def channel_items(self) -> list[tuple[str, str]]:
        """All (INSTANCE, channel) pairs this app declares, in prototype order."""
        pairs = []
        for instance, kind in self.devices.items():
            for channel in kind.channels:
                pairs.append((instance, channel.name))
        return pairs

    def with_addresses(self, mapping: dict[tuple[str, str], GroupAddress]) -> "TypedProgram":
        for pair in self.channel_items():
            if pair not in mapping:
                raise ResolutionError(
                    f"{self.app_name}: no group address bound for {pair[0]}.{pair[1]}")
        return replace(self, addresses=dict(mapping))

    def address_of(self, instance: str, channel: str) -> GroupAddress:
        if self.addresses is None:
            raise ResolutionError(
                f"{self.app_name}: program is not bound to group addresses yet")
        return self.addresses[(instance, channel)]


def _at(node) -> str:
    line, col = getattr(node, "pos", (0, 0))
    return f"{line}:{col}: " if line else ""


class _Checker:
    def __init__(self, program: ast.Program, prototype: AppPrototype):
        self.program = program
        self.prototype = prototype
        self.types: dict[int, ValueType] = {}
        self.devices: dict[str, DeviceKind] = {}
        self.unchecked: dict[str, ast.UncheckedDecl] = {}

    def check(self) -> TypedProgram:
        self.check_device_decls()
        self.check_unchecked_decls()
        self.check_invariant()
        for stmt in self.program.iteration:
            self.check_stmt(stmt)
        return TypedProgram(
            program=self.program,
            prototype=self.prototype,
            app_name=self.prototype.name,
            devices=self.devices,
            unchecked=self.unchecked,
            expr_types=self.types,
        )

    def check_device_decls(self) -> None:
        declared: dict[str, str] = {}
        for decl in self.program.devices:
            if decl.kind not in SUPPORTED_KINDS:
                raise ResolutionError(f"{_at(decl)}unknown device kind {decl.kind!r}")
            if decl.instance in declared:
                raise ResolutionError(f"{_at(decl)}duplicate device instance {decl.instance!r}")
            declared[decl.instance] = decl.kind
        expected = {name.upper(): kind for name, kind in self.prototype.devices}
        if declared != expected:
            raise ResolutionError(
                f"device declarations {sorted(declared)} do not match the "
                f"prototype's devices {sorted(expected)}")
        self.devices = {instance: SUPPORTED_KINDS[kind] for instance, kind in declared.items()}

    def check_unchecked_decls(self) -> None:
        for decl in self.program.unchecked:
            if not decl.name.startswith("unchecked"):
                raise TypecheckError(
                    f"{_at(decl)}external function names must start with "
                    f"'unchecked', got {decl.name!r}")
            if decl.name in self.unchecked:
                raise TypecheckError(f"{_at(decl)}duplicate unchecked function {decl.name!r}")
            self.unchecked[decl.name] = decl
            if decl.return_type == "none" and decl.postconditions:
                raise TypecheckError(
                    f"{_at(decl)}{decl.name} returns none and cannot carry postconditions")
            for post in decl.postconditions:
                t = self.type_expr(post, ctx="post", return_type=decl.return_type)
                if t is not ValueType.BOOL:
                    raise TypecheckError(f"{_at(post)}postconditions must be boolean")

    def check_invariant(self) -> None:
        t = self.type_expr(self.program.invariant, ctx="invariant")
        if t is not ValueType.BOOL:
            raise TypecheckError("invariant must be a boolean expression")

    # -- statements ---------------------------------------------------------

    def check_stmt(self, stmt: ast.Stmt) -> None:
        if isinstance(stmt, ast.Assign):
            try:
                target = register_type(stmt.register)
            except KeyError:
                raise ResolutionError(
                    f"{_at(stmt)}unknown app-state register {stmt.register!r}") from None
            value_type = self.type_expr(stmt.value, ctx="iteration")
            if stmt.op in ("+=", "-="):
                if target not in (ValueType.INT, ValueType.REAL):
                    raise TypecheckError(
                        f"{_at(stmt)}{stmt.op} applies to numeric registers only")
            if not self.assignable(target, value_type):
                raise TypecheckError(
                    f"{_at(stmt)}cannot assign {value_type.value} to "
                    f"{target.value} register {stmt.register}")
            return
        if isinstance(stmt, ast.If):
            for cond, body in stmt.branches:
                if self.type_expr(cond, ctx="iteration") is not ValueType.BOOL:
                    raise TypecheckError(f"{_at(cond)}if condition must be boolean")
                for inner in body:
                    self.check_stmt(inner)
            for inner in stmt.orelse:
                self.check_stmt(inner)
            return
        if isinstance(stmt, ast.ExprStmt):
            call = stmt.call
            if isinstance(call, ast.DeviceCall):
                self.check_device_write(call)
                return
            if isinstance(call, ast.UncheckedCall):
                self.type_unchecked_call(call, ctx="iteration", statement=True)
                return
        raise TypecheckError(f"{_at(stmt)}unsupported statement")

    @staticmethod
    def assignable(target: ValueType, value: ValueType) -> bool:
        if target is value:
            return True
        return target is ValueType.REAL and value is ValueType.INT

    def check_device_write(self, call: ast.DeviceCall) -> None:
        kind = self.resolve_instance(call)
        if call.method in READ_METHODS:
            raise TypecheckError(
                f"{_at(call)}a bare read of {call.instance}.{call.method}() has no effect")
        if call.method not in WRITE_METHODS:
            raise ResolutionError(
                f"{_at(call)}unknown device method {call.method!r} on {call.instance}")
        if not kind.writable:
            raise TypecheckError(
                f"{_at(call)}{call.instance} is a {kind.kind} sensor and cannot be written")
        if call.args:
            raise TypecheckError(f"{_at(call)}{call.method}() takes no arguments")

    # -- expressions ----------------------------------------------------------

    def resolve_instance(self, call: ast.DeviceCall) -> DeviceKind:
        if call.instance not in self.devices:
            raise ResolutionError(f"{_at(call)}unknown device instance {call.instance!r}")
        return self.devices[call.instance]

    def type_expr(self, node: ast.Expr, ctx: str, return_type: str | None = None) -> ValueType:
        t = self._type_expr(node, ctx, return_type)
        self.types[id(node)] = t
        return t

    def _type_expr(self, node: ast.Expr, ctx: str, return_type: str | None) -> ValueType:
        if isinstance(node, ast.BoolLit):
            return ValueType.BOOL
        if isinstance(node, ast.IntLit):
            return ValueType.INT
        if isinstance(node, ast.RealLit):
            return ValueType.REAL
        if isinstance(node, ast.StrLit):
            return ValueType.STR
        if isinstance(node, ast.RegisterRef):
            if ctx == "post":
                raise TypecheckError(
                    f"{_at(node)}postconditions may reference only __return__ and constants")
            try:
                return register_type(node.register)
            except KeyError:
                raise ResolutionError(
                    f"{_at(node)}unknown app-state register {node.register!r}") from None
        if isinstance(node, ast.ReturnRef):
            if ctx != "post" or return_type is None:
                raise TypecheckError(f"{_at(node)}__return__ is only valid in postconditions")
            return _TYPE_BY_NAME[return_type]
        if isinstance(node, ast.DeviceCall):
            if ctx == "post":
                raise TypecheckError(
                    f"{_at(node)}postconditions may reference only __return__ and constants")
            kind = self.resolve_instance(node)
            if node.method in WRITE_METHODS:
                raise SideEffectError(
                    f"{_at(node)}{node.instance}.{node.method}() writes a device and is "
                    f"not allowed in {'the invariant' if ctx == 'invariant' else 'expressions'}")
            if node.method not in READ_METHODS:
                raise ResolutionError(
                    f"{_at(node)}unknown device method {node.method!r} on {node.instance}")
            expected = READ_METHODS[node.method]
            channel = kind.primary_channel
            if channel.value_type is not expected:
                raise TypecheckError(
                    f"{_at(node)}{node.instance} is a {kind.kind} device; use "
                    f"{'read()' if channel.value_type is ValueType.REAL else 'is_on()'}")
            if node.args:
                raise TypecheckError(f"{_at(node)}{node.method}() takes no arguments")
            return expected
        if isinstance(node, ast.UncheckedCall):
            if ctx == "invariant":
                raise PurityError(
                    f"{_at(node)}the invariant cannot call unchecked functions "
                    f"({node.name})")
            if ctx == "post":
                raise TypecheckError(
                    f"{_at(node)}postconditions may reference only __return__ and constants")
            return self.type_unchecked_call(node, ctx, statement=False)
        if isinstance(node, ast.UnaryOp):
            inner = self.type_expr(node.operand, ctx, return_type)
            if node.op == "not":
                if inner is not ValueType.BOOL:
                    raise TypecheckError(f"{_at(node)}'not' needs a boolean operand")
                return ValueType.BOOL
            if inner not in (ValueType.INT, ValueType.REAL):
                raise TypecheckError(f"{_at(node)}unary '-' needs a numeric operand")
            return inner
        if isinstance(node, ast.BinOp):
            left = self.type_expr(node.left, ctx, return_type)
            right = self.type_expr(node.right, ctx, return_type)
            if node.op in ("and", "or"):
                if left is not ValueType.BOOL or right is not ValueType.BOOL:
                    raise TypecheckError(f"{_at(node)}'{node.op}' needs boolean operands")
                return ValueType.BOOL
            numeric = (ValueType.INT, ValueType.REAL)
            if left not in numeric or right not in numeric:
                raise TypecheckError(f"{_at(node)}'{node.op}' needs numeric operands")
            if node.op == "*" and not (_is_constant(node.left) or _is_constant(node.right)):
                raise LinearityError(
                    f"{_at(node)}nonlinear arithmetic: one side of '*' must be constant")
            if left is ValueType.INT and right is ValueType.INT:
                return ValueType.INT
            return ValueType.REAL
        if isinstance(node, ast.Compare):
            left = self.type_expr(node.left, ctx, return_type)
            right = self.type_expr(node.right, ctx, return_type)
            numeric = (ValueType.INT, ValueType.REAL)
            if left in numeric and right in numeric:
                return ValueType.BOOL
            if left is ValueType.STR and right is ValueType.STR:
                if node.op not in ("==", "!="):
                    raise TypecheckError(f"{_at(node)}strings compare only with == and !=")
                if not isinstance(node.left, ast.StrLit) and not isinstance(node.right, ast.StrLit):
                    raise TypecheckError(
                        f"{_at(node)}string comparisons need a literal on one side")
                return ValueType.BOOL
            if left is ValueType.BOOL and right is ValueType.BOOL:
                if node.op not in ("==", "!="):
                    raise TypecheckError(f"{_at(node)}booleans compare only with == and !=")
                return ValueType.BOOL
            raise TypecheckError(
                f"{_at(node)}cannot compare {left.value} with {right.value}")
        raise TypecheckError(f"{_at(node)}unsupported expression")

    def type_unchecked_call(self, call: ast.UncheckedCall, ctx: str,
                            statement: bool) -> ValueType:
        if call.name not in self.unchecked:
            raise ResolutionError(f"{_at(call)}unknown function {call.name!r}")
        decl = self.unchecked[call.name]
        if len(call.args) != len(decl.params):
            raise TypecheckError(
                f"{_at(call)}{call.name} takes {len(decl.params)} argument(s), "
                f"got {len(call.args)}")
        for arg, param in zip(call.args, decl.params):
            arg_type = self.type_expr(arg, ctx)
            expected = _TYPE_BY_NAME[param.type]
            if not self.assignable(expected, arg_type):
                raise TypecheckError(
                    f"{_at(arg)}argument {param.name} of {call.name} needs "
                    f"{param.type}, got {arg_type.value}")
        if decl.return_type == "none":
            if not statement:
                raise TypecheckError(
                    f"{_at(call)}{call.name} returns none and cannot be used as a value")
            self.types[id(call)] = ValueType.BOOL  # placeholder, value never used
            return ValueType.BOOL
        return _TYPE_BY_NAME[decl.return_type]


def _is_constant(node: ast.Expr) -> bool:
    """Literal-only expressions; everything a symbol could hide behind is excluded."""
    if isinstance(node, (ast.BoolLit, ast.IntLit, ast.RealLit, ast.StrLit)):
        return True
    if isinstance(node, ast.UnaryOp):
        return _is_constant(node.operand)
    if isinstance(node, ast.BinOp):
        return _is_constant(node.left) and _is_constant(node.right)
    return False


def typecheck(program: ast.Program, prototype: AppPrototype) -> TypedProgram:
    """Check a parsed program against its prototype.

    Raises PurityError when the invariant calls an unchecked function,
    SideEffectError when a device write appears in expression position,
    ResolutionError for unknown instances/channels/registers, and
    LinearityError for variable-times-variable arithmetic.
    """
    return _Checker(program, prototype).check()
