"""Random loop-free program generator for verifier-vs-oracle comparison.

Programs are generated over bounded domains: boolean device fields, integer
registers confined to [-8, 8], reals confined to a 7-point grid. The domain
constraints are conjoined into the generated invariant, which makes
exhaustive enumeration over those domains a complete oracle for the
unbounded-domain symbolic verdict.
"""

import random
from fractions import Fraction

from veriknx.wire import GroupAddress

from helpers import build_app

GRID = ("-2.0", "-1.0", "-0.5", "0.0", "0.5", "1.0", "2.0")
INT_CONSTS = list(range(-8, 9))


class ProgramShape:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.n_binary = rng.randint(1, 2)
        self.has_switch = rng.random() < 0.8
        self.has_real_device = rng.random() < 0.3
        self.int_registers = ["INT_0", "INT_1"][: rng.randint(0, 2)]
        self.real_registers = ["FLOAT_0"][: rng.randint(0, 1)]
        self.bool_registers = ["BOOL_0"][: rng.randint(0, 1)]
        self.unchecked_int = rng.random() < 0.3
        self.unchecked_bool = rng.random() < 0.2
        if not self.has_switch and not self.int_registers and not self.bool_registers:
            self.has_switch = True  # something must be writable

    def enumeration_size(self) -> int:
        size = 2 ** (self.n_binary + int(self.has_switch) + len(self.bool_registers))
        size *= 17 ** len(self.int_registers)
        size *= 7 ** (int(self.has_real_device) + len(self.real_registers))
        if self.unchecked_int:
            size *= 17
        if self.unchecked_bool:
            size *= 2
        return size


class ProgramGen:
    def __init__(self, rng: random.Random, shape: ProgramShape):
        self.rng = rng
        self.shape = shape
        self.binaries = [f"B{i}" for i in range(shape.n_binary)]

    # -- expression generators ------------------------------------------------

    def int_expr(self, depth=0):
        rng = self.rng
        choices = ["const"]
        if self.shape.int_registers:
            choices += ["reg", "reg"]
        if depth < 1 and self.shape.int_registers:
            choices += ["sum", "scaled"]
        kind = rng.choice(choices)
        if kind == "const":
            return str(rng.choice(INT_CONSTS))
        if kind == "reg":
            return f"app_state.{rng.choice(self.shape.int_registers)}"
        if kind == "scaled":
            return f"{rng.choice([2, 3, -2])} * app_state.{rng.choice(self.shape.int_registers)}"
        return f"({self.int_expr(depth + 1)} + {self.int_expr(depth + 1)})"

    def real_atom(self):
        rng = self.rng
        options = [f"{rng.choice(GRID)}"]
        if self.shape.real_registers:
            options.append(f"app_state.{rng.choice(self.shape.real_registers)}")
        if self.shape.has_real_device:
            options.append("R.read()")
        return rng.choice(options)

    def bool_atom(self, allow_unchecked):
        rng = self.rng
        options = []
        for b in self.binaries:
            options.append(f"{b}.is_on()")
        if self.shape.has_switch:
            options.append("SW.is_on()")
        for reg in self.shape.bool_registers:
            options.append(f"app_state.{reg}")
        if self.shape.int_registers:
            op = rng.choice(["==", "!=", "<", "<=", ">", ">="])
            options.append(f"{self.int_expr()} {op} {self.int_expr()}")
        if self.shape.real_registers or self.shape.has_real_device:
            op = rng.choice(["==", "!=", "<", "<=", ">", ">="])
            options.append(f"{self.real_atom()} {op} {self.real_atom()}")
        if allow_unchecked and self.shape.unchecked_int:
            op = rng.choice(["<", ">", "=="])
            options.append(f"unchecked_geti() {op} {rng.choice(INT_CONSTS)}")
        if allow_unchecked and self.shape.unchecked_bool:
            options.append("unchecked_getb()")
        return rng.choice(options)

    def bool_expr(self, depth=0, allow_unchecked=False):
        rng = self.rng
        if depth >= 2 or rng.random() < 0.45:
            return self.bool_atom(allow_unchecked)
        op = rng.choice(["and", "or", "not"])
        if op == "not":
            return f"not ({self.bool_expr(depth + 1, allow_unchecked)})"
        return (f"({self.bool_expr(depth + 1, allow_unchecked)} {op} "
                f"{self.bool_expr(depth + 1, allow_unchecked)})")

    # -- statements -----------------------------------------------------------

    def statement(self, depth=0):
        rng = self.rng
        choices = []
        if self.shape.int_registers:
            choices += ["int_assign", "int_bump"]
        if self.shape.bool_registers:
            choices.append("bool_assign")
        if self.shape.real_registers:
            choices.append("real_assign")
        if self.shape.has_switch:
            choices += ["switch", "switch"]
        if depth < 2:
            choices += ["if", "if"]
        kind = rng.choice(choices)
        if kind == "int_assign":
            reg = rng.choice(self.shape.int_registers)
            if self.shape.unchecked_int and rng.random() < 0.4:
                return [f"app_state.{reg} = unchecked_geti()"]
            return [f"app_state.{reg} = {self.int_expr()}"]
        if kind == "int_bump":
            reg = rng.choice(self.shape.int_registers)
            return [f"app_state.{reg} {rng.choice(['+=', '-='])} {rng.randint(1, 3)}"]
        if kind == "bool_assign":
            return [f"app_state.BOOL_0 = {self.bool_expr(1, True)}"]
        if kind == "real_assign":
            return [f"app_state.FLOAT_0 = {self.real_atom()}"]
        if kind == "switch":
            return [f"SW.{rng.choice(['on', 'off'])}();"]
        guard = self.bool_expr(0, allow_unchecked=True)
        body = self.body(depth + 1)
        if rng.random() < 0.6:
            orelse = self.body(depth + 1)
            return ([f"if {guard} {{"] + [f"    {s}" for s in body]
                    + ["} else {"] + [f"    {s}" for s in orelse] + ["}"])
        return [f"if {guard} {{"] + [f"    {s}" for s in body] + ["}"]

    def body(self, depth):
        lines = []
        for _ in range(self.rng.randint(1, 2)):
            lines += self.statement(depth)
        return lines

    # -- whole program ----------------------------------------------------------

    def domain_constraints(self):
        parts = []
        for reg in self.shape.int_registers:
            parts.append(f"app_state.{reg} >= -8 and app_state.{reg} <= 8")
        grid_terms = []
        for reg in self.shape.real_registers:
            grid_terms.append(f"app_state.{reg}")
        if self.shape.has_real_device:
            grid_terms.append("R.read()")
        for expr in grid_terms:
            alts = " or ".join(f"{expr} == {v}" for v in GRID)
            parts.append(f"({alts})")
        return parts

    def generate(self):
        rng = self.rng
        lines = []
        devices = []
        for b in self.binaries:
            lines.append(f"device {b}: binary")
            devices.append({"name": b.lower(), "deviceType": "binary"})
        if self.shape.has_switch:
            lines.append("device SW: switch")
            devices.append({"name": "sw", "deviceType": "switch"})
        if self.shape.has_real_device:
            lines.append("device R: co2")
            devices.append({"name": "r", "deviceType": "co2"})
        lines.append("")
        if self.shape.unchecked_int:
            lines += ["def unchecked_geti() -> int {",
                      "    post: __return__ >= -8",
                      "    post: __return__ <= 8",
                      "}", ""]
        if self.shape.unchecked_bool:
            lines += ["def unchecked_getb() -> bool {", "}", ""]
        invariant_parts = [f"({self.bool_expr(0)})"] + self.domain_constraints()
        lines.append("invariant: " + " and ".join(invariant_parts))
        lines.append("")
        lines.append("iteration: {")
        for _ in range(rng.randint(1, 3)):
            lines += [f"    {s}" for s in self.statement(0)]
        lines.append("}")
        source = "\n".join(lines) + "\n"

        proto = {"permissionLevel": "notPrivileged", "timer": 0,
                 "files": [], "devices": devices}
        addresses = {}
        next_raw = 1
        for b in self.binaries:
            addresses[(b, "state")] = GroupAddress.free(next_raw)
            next_raw += 1
        if self.shape.has_switch:
            addresses[("SW", "state")] = GroupAddress.free(next_raw)
            next_raw += 1
        if self.shape.has_real_device:
            addresses[("R", "read")] = GroupAddress.free(next_raw)
            next_raw += 1
        return source, proto, addresses

    def registers_used(self):
        return (self.shape.int_registers + self.shape.real_registers
                + self.shape.bool_registers)


def random_program(seed: int, max_enumeration=40000):
    """One random bound app plus the register list its oracle must enumerate."""
    rng = random.Random(seed)
    while True:
        shape = ProgramShape(rng)
        if shape.enumeration_size() <= max_enumeration:
            break
    gen = ProgramGen(rng, shape)
    source, proto, addresses = gen.generate()
    tp = build_app(f"rand_{seed}", source, proto, addresses)
    return tp, gen.registers_used(), source
