"""Shared test helpers: canned programs, binding shortcuts, tiny oracles."""

from fractions import Fraction
from itertools import product

from veriknx.apps import AppState, ValueType, prototype_from_dict, register_type
from veriknx.lang import evaluate_invariant, interpret_iteration, parse_program, typecheck
from veriknx.wire import GroupAddress

SENSOR_SWITCH_APP = """
device BINARY_SENSOR: binary
device SWITCH: switch

invariant: ((BINARY_SENSOR.is_on() or app_state.INT_0 == 42) and SWITCH.is_on())
    or (not BINARY_SENSOR.is_on() and not SWITCH.is_on())

iteration: {
    if BINARY_SENSOR.is_on() or app_state.INT_0 == 42 {
        SWITCH.on();
    } else {
        SWITCH.off();
    }
}
"""

SENSOR_SWITCH_PROTO = {
    "permissionLevel": "notPrivileged",
    "timer": 0,
    "files": [],
    "devices": [
        {"name": "binary_sensor", "deviceType": "binary"},
        {"name": "switch", "deviceType": "switch"},
    ],
}

DOOR_LOCK_APP = """
device PRESENCE_DETECTOR: binary
device DOOR_LOCK_SENSOR: binary

def unchecked_send_message(text: str) -> none {
}

invariant: true

iteration: {
    if not PRESENCE_DETECTOR.is_on() and not DOOR_LOCK_SENSOR.is_on() {
        if app_state.INT_0 > 5 {
            unchecked_send_message("door open, nobody there");
        } else {
            app_state.INT_0 += 1
        }
    } else {
        app_state.INT_0 = 0
    }
}
"""

DOOR_LOCK_PROTO = {
    "permissionLevel": "notPrivileged",
    "timer": 0,
    "files": [],
    "devices": [
        {"name": "presence_detector", "deviceType": "binary"},
        {"name": "door_lock_sensor", "deviceType": "binary"},
    ],
}


def build_app(name, source, proto_dict, address_map=None):
    """Parse + typecheck + optionally bind channel addresses."""
    proto = prototype_from_dict(name, proto_dict)
    tp = typecheck(parse_program(source), proto)
    if address_map is not None:
        tp = tp.with_addresses({
            key: (addr if isinstance(addr, GroupAddress) else GroupAddress.parse(addr))
            for key, addr in address_map.items()})
    return tp


def sensor_switch_app(name="app_one"):
    return build_app(name, SENSOR_SWITCH_APP, SENSOR_SWITCH_PROTO, {
        ("BINARY_SENSOR", "state"): "0/0/1",
        ("SWITCH", "state"): "0/0/2",
    })


def door_lock_app(name="door_lock"):
    return build_app(name, DOOR_LOCK_APP, DOOR_LOCK_PROTO, {
        ("PRESENCE_DETECTOR", "state"): "0/0/3",
        ("DOOR_LOCK_SENSOR", "state"): "0/0/4",
    })


def app_state(**fields):
    state = AppState()
    for key, value in fields.items():
        setattr(state, key, value)
    return state


# ---------------------------------------------------------------------------
# Brute-force verification oracle (independent of the symbolic path)
# ---------------------------------------------------------------------------

BOOL_DOMAIN = (False, True)
INT_DOMAIN = tuple(range(-8, 9))
REAL_DOMAIN = tuple(Fraction(x) for x in ("-2", "-1", "-0.5", "0", "0.5", "1", "2"))


def _count_call_sites(tp):
    """Static count of unchecked call sites per name (loop-free: each runs at most once)."""
    from veriknx.lang import ast as A

    sites = []

    def walk_expr(node):
        if isinstance(node, A.UncheckedCall):
            for arg in node.args:
                walk_expr(arg)
            sites.append(node.name)
        elif isinstance(node, A.UnaryOp):
            walk_expr(node.operand)
        elif isinstance(node, (A.BinOp, A.Compare)):
            walk_expr(node.left)
            walk_expr(node.right)
        elif isinstance(node, A.DeviceCall):
            for arg in node.args:
                walk_expr(arg)

    def walk_block(body):
        for stmt in body:
            if isinstance(stmt, A.Assign):
                walk_expr(stmt.value)
            elif isinstance(stmt, A.If):
                for cond, inner in stmt.branches:
                    walk_expr(cond)
                    walk_block(inner)
                walk_block(stmt.orelse)
            elif isinstance(stmt, A.ExprStmt):
                walk_expr(stmt.call)

    walk_block(tp.program.iteration)
    return sites


def _domain_for(value_type):
    return {
        ValueType.BOOL: BOOL_DOMAIN,
        ValueType.INT: INT_DOMAIN,
        ValueType.REAL: REAL_DOMAIN,
        ValueType.STR: ("",),
    }[value_type]


def brute_force_check(apps, target, registers_used=None):
    """Exhaustively enumerate all states; return a violating dict or None.

    apps: list of bound TypedPrograms whose invariants all apply.
    target: the TypedProgram whose iteration runs.
    registers_used: optional {app_name: [register, ...]} narrowing; registers
    not listed stay at their defaults.
    """
    address_types = {}
    for tp in apps:
        for instance, kind in tp.devices.items():
            channel = kind.primary_channel
            address_types[tp.address_of(instance, channel.name)] = channel.value_type
    addresses = sorted(address_types)

    reg_dims = []
    for tp in apps:
        for reg in (registers_used or {}).get(tp.app_name, ()):
            reg_dims.append((tp.app_name, reg, _domain_for(register_type(reg))))

    call_sites = _count_call_sites(target)
    call_dims = []
    for i, name in enumerate(call_sites):
        decl = target.unchecked[name]
        if decl.return_type == "none":
            continue
        domain = {"bool": BOOL_DOMAIN, "int": INT_DOMAIN,
                  "real": REAL_DOMAIN, "str": ("",)}[decl.return_type]
        call_dims.append((i, name, domain))

    def post_holds(decl, value):
        fake = typed_post_env(target, decl, value)
        return all(fake(post) for post in decl.postconditions)

    for addr_values in product(*(_domain_for(address_types[a]) for a in addresses)):
        phys = dict(zip(addresses, addr_values))
        for reg_values in product(*(d for _, _, d in reg_dims)):
            states = {tp.app_name: AppState() for tp in apps}
            for (app_name, reg, _), value in zip(reg_dims, reg_values):
                setattr(states[app_name], reg, value)
            if not all(evaluate_invariant(tp, states[tp.app_name], phys) for tp in apps):
                continue
            for call_values in product(*(d for _, _, d in call_dims)):
                by_site = dict(zip((i for i, _, _ in call_dims), call_values))
                if not all(post_holds(target.unchecked[name], by_site[i])
                           for i, name, _ in call_dims):
                    continue
                queues = {}
                for i, name in enumerate(call_sites):
                    queues.setdefault(name, []).append(by_site.get(i))
                impls = {name: _popper(values) for name, values in queues.items()}
                new_state, new_phys, _ = interpret_iteration(
                    target, states[target.app_name], phys, impls)
                final_states = dict(states)
                final_states[target.app_name] = new_state
                if not all(evaluate_invariant(tp, final_states[tp.app_name], new_phys)
                           for tp in apps):
                    return {
                        "phys": phys,
                        "registers": {(a, r): v for (a, r, _), v in zip(reg_dims, reg_values)},
                        "calls": call_values,
                    }
    return None


def _popper(values):
    queue = list(values)

    def impl(*_args):
        return queue.pop(0)

    return impl


def typed_post_env(tp, decl, value):
    """Evaluate a postcondition expression with __return__ bound to value."""
    from veriknx.lang import ast as A

    def ev(node):
        if isinstance(node, (A.BoolLit, A.IntLit, A.StrLit)):
            return node.value
        if isinstance(node, A.RealLit):
            return node.value
        if isinstance(node, A.ReturnRef):
            return value
        if isinstance(node, A.UnaryOp):
            return (not ev(node.operand)) if node.op == "not" else -ev(node.operand)
        if isinstance(node, A.BinOp):
            left, right = ev(node.left), ev(node.right)
            return {"and": left and right, "or": left or right, "+": left + right,
                    "-": left - right, "*": left * right}[node.op]
        if isinstance(node, A.Compare):
            left, right = ev(node.left), ev(node.right)
            return {"==": left == right, "!=": left != right, "<": left < right,
                    "<=": left <= right, ">": left > right, ">=": left >= right}[node.op]
        raise AssertionError(node)

    return ev
