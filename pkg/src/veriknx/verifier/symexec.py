"""Exhaustive symbolic execution of loop-free iteration handlers.

State fields (every group address of the compiled table plus every app-state
register of every app under verification) hold symbolic values: LinTerm for
numerics, Formula for booleans, StrExpr for strings. Execution forks once per
branch, so a handler with n reachable leaves yields exactly n paths, each with
a path condition built from the branch guards.

Each unchecked call yields a fresh symbol constrained by the declared
postconditions; none-returning calls are erased. The fresh-symbol order
matches the concrete interpreter's call order by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..apps import REGISTER_NAMES, ValueType, register_type
from ..lang import ast
from ..lang.typecheck import READ_METHODS, TypedProgram
from ..wire import GroupAddress
from .terms import (
    FALSE,
    FCmp,
    FStrEq,
    FSym,
    Formula,
    LinTerm,
    StrExpr,
    TRUE,
    f_and,
    f_cmp,
    f_iff,
    f_not,
    f_or,
    render_formula,
)

FieldKey = tuple[str, object]


def ga_field(address: GroupAddress) -> FieldKey:
    return ("ga", address.raw)


def reg_field(app_name: str, register: str) -> FieldKey:
    return ("reg", f"{app_name}.{register}")


def ga_symbol(address: GroupAddress) -> str:
    return "GA_" + str(address).replace("/", "_")


@dataclass
class SymbolicState:
    """field -> symbolic value (LinTerm | Formula | StrExpr)."""

    values: dict[FieldKey, object]

    def copy(self) -> "SymbolicState":
        return SymbolicState(dict(self.values))

    def __getitem__(self, key: FieldKey):
        return self.values[key]

    def __setitem__(self, key: FieldKey, value) -> None:
        if key not in self.values:
            raise KeyError(f"field {key} is not housed in this symbolic state")
        self.values[key] = value


def address_value_types(apps) -> dict[GroupAddress, ValueType]:
    """Group address -> value type, merged over all bound apps."""
    result: dict[GroupAddress, ValueType] = {}
    for tp in apps:
        for instance, kind in tp.devices.items():
            channel = kind.primary_channel
            address = tp.address_of(instance, channel.name)
            previous = result.get(address)
            if previous is not None and previous is not channel.value_type:
                raise ValueError(
                    f"address {address} bound with conflicting value types "
                    f"({previous.value} vs {channel.value_type.value})")
            result[address] = channel.value_type
    return result


_KIND_OF = {ValueType.BOOL: "bool", ValueType.INT: "int",
            ValueType.REAL: "real", ValueType.STR: "str"}


def initial_state(apps) -> tuple[SymbolicState, dict[str, str]]:
    """Fresh symbol per housed field; returns (state, symbol kinds)."""
    values: dict[FieldKey, object] = {}
    kinds: dict[str, str] = {}
    value_types = address_value_types(apps)
    for address in sorted(value_types):
        value_type = value_types[address]
        name = ga_symbol(address)
        kinds[name] = _KIND_OF[value_type]
        if value_type is ValueType.BOOL:
            values[ga_field(address)] = FSym(name)
        else:
            values[ga_field(address)] = LinTerm.symbol(name)
    for tp in sorted(apps, key=lambda a: a.app_name):
        for register in REGISTER_NAMES:
            name = f"{tp.app_name}.{register}"
            kinds[name] = _KIND_OF[register_type(register)]
            key = reg_field(tp.app_name, register)
            if kinds[name] == "bool":
                values[key] = FSym(name)
            elif kinds[name] == "str":
                values[key] = StrExpr.sym(name)
            else:
                values[key] = LinTerm.symbol(name)
    return SymbolicState(values), kinds


@dataclass
class SymPath:
    """One execution path: branch conditions, final state, unchecked facts."""

    condition: tuple[Formula, ...]
    state: SymbolicState
    constraints: tuple[Formula, ...] = ()  # instantiated unchecked postconditions
    calls: tuple[tuple[str, str], ...] = ()  # (fresh symbol, function name) in call order
    call_kinds: dict[str, str] = field(default_factory=dict)

    def render_trace(self) -> tuple[str, ...]:
        return tuple(render_formula(f) for f in self.condition)


class _SymExec:
    def __init__(self, tp: TypedProgram, init: SymbolicState):
        self.tp = tp
        self.paths: list[SymPath] = []
        self.init = init

    def run(self) -> list[SymPath]:
        self._block(self.tp.program.iteration, 0, self.init.copy(), (), (), (), {}, 0)
        return self.paths

    # Statements are executed in continuation style: `rest` carries the
    # stack of blocks still to run after the current one.

    def _block(self, body, index, state, pc, constraints, calls, kinds, counter,
               rest=()):
        while index >= len(body):
            if not rest:
                self.paths.append(SymPath(pc, state, constraints, calls, dict(kinds)))
                return
            body, index = rest[0]
            rest = rest[1:]
        stmt = body[index]
        if isinstance(stmt, ast.Assign):
            value, constraints, calls, kinds, counter = self._expr(
                stmt.value, state, constraints, calls, kinds, counter)
            key = reg_field(self.tp.app_name, stmt.register)
            if stmt.op == "+=":
                value = state[key].add(value)
            elif stmt.op == "-=":
                value = state[key].sub(value)
            state[key] = value
            self._block(body, index + 1, state, pc, constraints, calls, kinds, counter, rest)
            return
        if isinstance(stmt, ast.ExprStmt):
            call = stmt.call
            if isinstance(call, ast.DeviceCall):
                channel = self.tp.devices[call.instance].primary_channel.name
                address = self.tp.address_of(call.instance, channel)
                state[ga_field(address)] = TRUE if call.method == "on" else FALSE
                self._block(body, index + 1, state, pc, constraints, calls, kinds, counter, rest)
                return
            _, constraints, calls, kinds, counter = self._unchecked(
                call, state, constraints, calls, kinds, counter, as_value=False)
            self._block(body, index + 1, state, pc, constraints, calls, kinds, counter, rest)
            return
        if isinstance(stmt, ast.If):
            self._branch(stmt, 0, body, index, state, pc, constraints, calls, kinds,
                         counter, rest)
            return
        raise AssertionError(f"unexpected statement {stmt!r}")

    def _branch(self, stmt, branch_index, body, index, state, pc, constraints, calls,
                kinds, counter, rest):
        continuation = ((body, index + 1),) + rest
        if branch_index >= len(stmt.branches):
            self._block(stmt.orelse, 0, state, pc, constraints, calls, kinds, counter,
                        continuation)
            return
        cond, branch_body = stmt.branches[branch_index]
        guard, constraints, calls, kinds, counter = self._expr(
            cond, state, constraints, calls, kinds, counter)
        self._block(branch_body, 0, state.copy(), pc + (guard,), constraints, calls,
                    kinds, counter, continuation)
        self._branch(stmt, branch_index + 1, body, index, state.copy(),
                     pc + (f_not(guard),), constraints, calls, kinds, counter, rest)

    # -- expressions --------------------------------------------------------

    def _expr(self, node, state, constraints, calls, kinds, counter):
        """Returns (symbolic value, constraints, calls, kinds, counter)."""
        if isinstance(node, ast.BoolLit):
            return (TRUE if node.value else FALSE), constraints, calls, kinds, counter
        if isinstance(node, ast.IntLit):
            return LinTerm.constant(node.value), constraints, calls, kinds, counter
        if isinstance(node, ast.RealLit):
            return LinTerm.constant(node.value), constraints, calls, kinds, counter
        if isinstance(node, ast.StrLit):
            return StrExpr.lit(node.value), constraints, calls, kinds, counter
        if isinstance(node, ast.RegisterRef):
            return state[reg_field(self.tp.app_name, node.register)], \
                constraints, calls, kinds, counter
        if isinstance(node, ast.DeviceCall):
            assert node.method in READ_METHODS
            channel = self.tp.devices[node.instance].primary_channel.name
            address = self.tp.address_of(node.instance, channel)
            return state[ga_field(address)], constraints, calls, kinds, counter
        if isinstance(node, ast.UncheckedCall):
            return self._unchecked(node, state, constraints, calls, kinds, counter,
                                   as_value=True)
        if isinstance(node, ast.UnaryOp):
            value, constraints, calls, kinds, counter = self._expr(
                node.operand, state, constraints, calls, kinds, counter)
            if node.op == "not":
                return f_not(value), constraints, calls, kinds, counter
            return value.neg(), constraints, calls, kinds, counter
        if isinstance(node, ast.BinOp):
            left, constraints, calls, kinds, counter = self._expr(
                node.left, state, constraints, calls, kinds, counter)
            right, constraints, calls, kinds, counter = self._expr(
                node.right, state, constraints, calls, kinds, counter)
            if node.op == "and":
                return f_and([left, right]), constraints, calls, kinds, counter
            if node.op == "or":
                return f_or([left, right]), constraints, calls, kinds, counter
            if node.op == "+":
                return left.add(right), constraints, calls, kinds, counter
            if node.op == "-":
                return left.sub(right), constraints, calls, kinds, counter
            if left.is_constant:
                return right.scale(left.const), constraints, calls, kinds, counter
            return left.scale(right.const), constraints, calls, kinds, counter
        if isinstance(node, ast.Compare):
            left, constraints, calls, kinds, counter = self._expr(
                node.left, state, constraints, calls, kinds, counter)
            right, constraints, calls, kinds, counter = self._expr(
                node.right, state, constraints, calls, kinds, counter)
            value = compare_symbolic(node.op, left, right)
            return value, constraints, calls, kinds, counter
        raise AssertionError(f"unexpected expression {node!r}")

    def _unchecked(self, call, state, constraints, calls, kinds, counter, as_value):
        decl = self.tp.unchecked[call.name]
        # argument expressions may themselves contain calls; evaluate in order
        for arg in call.args:
            _, constraints, calls, kinds, counter = self._expr(
                arg, state, constraints, calls, kinds, counter)
        if decl.return_type == "none":
            return None, constraints, calls, kinds, counter
        counter += 1
        name = f"{self.tp.app_name}.{call.name}#{counter}"
        kinds = dict(kinds)
        kinds[name] = decl.return_type
        calls = calls + ((name, call.name),)
        if decl.return_type == "bool":
            value: object = FSym(name)
        elif decl.return_type == "str":
            value = StrExpr.sym(name)
        else:
            value = LinTerm.symbol(name)
        for post in decl.postconditions:
            constraints = constraints + (
                _post_formula(post, value),)
        return value, constraints, calls, kinds, counter


def compare_symbolic(op: str, left, right) -> Formula:
    """Comparison over symbolic values of any one sort."""
    if isinstance(left, LinTerm) and isinstance(right, LinTerm):
        return f_cmp(op, left, right)
    if isinstance(left, Formula) and isinstance(right, Formula):
        result = f_iff(left, right)
        return result if op == "==" else f_not(result)
    if isinstance(left, StrExpr) and isinstance(right, StrExpr):
        if left.kind == "lit" and right.kind == "lit":
            same = left.value == right.value
            holds = same if op == "==" else not same
            return TRUE if holds else FALSE
        if left.kind == "sym" and right.kind == "lit":
            atom = FStrEq(left.value, right.value)
        elif left.kind == "lit" and right.kind == "sym":
            atom = FStrEq(right.value, left.value)
        else:
            raise AssertionError("string comparisons need a literal side")
        return atom if op == "==" else f_not(atom)
    raise AssertionError(f"cannot compare {left!r} with {right!r}")


def _post_formula(post: ast.Expr, return_value) -> Formula:
    """Instantiate a postcondition expression with __return__ bound to a symbol."""

    def walk(node):
        if isinstance(node, ast.BoolLit):
            return TRUE if node.value else FALSE
        if isinstance(node, ast.IntLit):
            return LinTerm.constant(node.value)
        if isinstance(node, ast.RealLit):
            return LinTerm.constant(node.value)
        if isinstance(node, ast.StrLit):
            return StrExpr.lit(node.value)
        if isinstance(node, ast.ReturnRef):
            return return_value
        if isinstance(node, ast.UnaryOp):
            inner = walk(node.operand)
            return f_not(inner) if node.op == "not" else inner.neg()
        if isinstance(node, ast.BinOp):
            left, right = walk(node.left), walk(node.right)
            if node.op == "and":
                return f_and([left, right])
            if node.op == "or":
                return f_or([left, right])
            if node.op == "+":
                return left.add(right)
            if node.op == "-":
                return left.sub(right)
            return right.scale(left.const) if left.is_constant else left.scale(right.const)
        if isinstance(node, ast.Compare):
            return compare_symbolic(node.op, walk(node.left), walk(node.right))
        raise AssertionError(f"unexpected postcondition node {node!r}")

    return walk(post)


def symexec_iteration(tp: TypedProgram, init: SymbolicState) -> list[SymPath]:
    """All execution paths of the handler, in deterministic depth-first order.

    The conditions of the returned paths partition the input space: pairwise
    disjoint, union equivalent to true.
    """
    return _SymExec(tp, init).run()


def build_invariant_formula(tp: TypedProgram, state: SymbolicState) -> Formula:
    """The app's invariant evaluated over a symbolic state."""
    executor = _SymExec(tp, state)
    value, constraints, calls, _, _ = executor._expr(
        tp.program.invariant, state, (), (), {}, 0)
    assert not constraints and not calls, "invariants are pure"
    return value
