"""Complete decision procedure for the DSL's constraint fragment.

Pipeline: negation normal form -> depth-first case splitting over boolean
structure -> theory check per case. The theory check handles boolean symbol
literals, string (dis)equality classes against literals, and linear
arithmetic over exact rationals via Fourier-Motzkin elimination with model
extraction by back-substitution; integer symbols get branch-and-bound on
non-integral rational solutions.

Single-variable atoms additionally feed an interval propagator (bounds,
fixed value, excluded points per symbol) that kills contradictory branches
long before elimination runs; disequalities over a variable that is already
fixed resolve inline instead of branching.

Everything is deterministic: symbols are processed in sorted order and
disjuncts left to right, so equal inputs produce equal models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import SolverLimitError
from .terms import (
    FAnd,
    FCmp,
    FFalse,
    FNot,
    FOr,
    FStrEq,
    FSym,
    FTrue,
    Formula,
    LinTerm,
    PathCondition,
)

MAX_SPLITS_PER_SYMBOL = 64


def _nnf(f: Formula, positive: bool = True) -> Formula:
    """Push negations down to atoms; comparisons flip instead of nesting."""
    if isinstance(f, FTrue):
        return f if positive else FFalse()
    if isinstance(f, FFalse):
        return f if positive else FTrue()
    if isinstance(f, FNot):
        return _nnf(f.inner, not positive)
    if isinstance(f, FAnd):
        parts = tuple(_nnf(p, positive) for p in f.parts)
        return FAnd(parts) if positive else FOr(parts)
    if isinstance(f, FOr):
        parts = tuple(_nnf(p, positive) for p in f.parts)
        return FOr(parts) if positive else FAnd(parts)
    if isinstance(f, (FSym, FStrEq)):
        return f if positive else FNot(f)
    if isinstance(f, FCmp):
        if positive:
            return f
        if f.op == "<":
            return FCmp("<=", f.term.neg())
        if f.op == "<=":
            return FCmp("<", f.term.neg())
        if f.op == "==":
            return FCmp("!=", f.term)
        return FCmp("==", f.term)
    raise TypeError(f"not a formula: {f!r}")


class _Ival:
    """Known bounds, fixed value, and excluded points for one numeric symbol."""

    __slots__ = ("lo", "lo_strict", "hi", "hi_strict", "ne", "is_int")

    def __init__(self, is_int: bool):
        self.lo: Fraction | None = None
        self.hi: Fraction | None = None
        self.lo_strict = False
        self.hi_strict = False
        self.ne: set[Fraction] = set()
        self.is_int = is_int

    def copy(self) -> "_Ival":
        clone = _Ival(self.is_int)
        clone.lo, clone.lo_strict = self.lo, self.lo_strict
        clone.hi, clone.hi_strict = self.hi, self.hi_strict
        clone.ne = set(self.ne)
        return clone

    @property
    def fixed(self) -> Fraction | None:
        if (self.lo is not None and self.lo == self.hi
                and not self.lo_strict and not self.hi_strict):
            return self.lo
        return None

    def _normalize(self) -> None:
        if not self.is_int:
            return
        if self.lo is not None:
            self.lo = Fraction(math.floor(self.lo) + 1 if self.lo_strict
                               else math.ceil(self.lo))
            self.lo_strict = False
        if self.hi is not None:
            self.hi = Fraction(math.ceil(self.hi) - 1 if self.hi_strict
                               else math.floor(self.hi))
            self.hi_strict = False

    def constrain(self, op: str, value: Fraction) -> bool:
        """Apply 'sym op value'; False means definitely unsatisfiable."""
        if op == "==":
            ok = self.constrain("<=", value) and self.constrain(">=", value)
            return ok
        if op == "!=":
            self.ne.add(value)
        elif op in ("<", "<="):
            strict = op == "<"
            if self.hi is None or value < self.hi or (value == self.hi and strict):
                self.hi, self.hi_strict = value, strict
        else:  # '>' or '>='
            strict = op == ">"
            if self.lo is None or value > self.lo or (value == self.lo and strict):
                self.lo, self.lo_strict = value, strict
        self._normalize()
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi:
                return False
            if self.lo == self.hi and (self.lo_strict or self.hi_strict):
                return False
        point = self.fixed
        if point is not None and point in self.ne:
            return False
        if point is not None and self.is_int and point.denominator != 1:
            return False
        return True


@dataclass
class _State:
    kinds: dict[str, str]
    bools: dict[str, bool] = field(default_factory=dict)
    str_eq: dict[str, str] = field(default_factory=dict)
    str_ne: dict[str, set[str]] = field(default_factory=dict)
    nums: list[tuple[LinTerm, bool]] = field(default_factory=list)  # term <= 0 (strict flag)
    diseqs: list[LinTerm] = field(default_factory=list)  # term != 0
    ivals: dict[str, _Ival] = field(default_factory=dict)

    def copy(self) -> "_State":
        return _State(
            self.kinds,
            dict(self.bools),
            dict(self.str_eq),
            {k: set(v) for k, v in self.str_ne.items()},
            list(self.nums),
            list(self.diseqs),
            {k: v.copy() for k, v in self.ivals.items()},
        )

    def ival(self, sym: str) -> _Ival:
        if sym not in self.ivals:
            self.ivals[sym] = _Ival(self.kinds.get(sym) == "int")
        return self.ivals[sym]

    def fixed_value(self, sym: str) -> Fraction | None:
        ival = self.ivals.get(sym)
        return ival.fixed if ival is not None else None

    def substitute_fixed(self, term: LinTerm) -> LinTerm:
        remaining: dict[str, Fraction] = {}
        const = term.const
        for sym, coeff in term.coeffs:
            value = self.fixed_value(sym)
            if value is None:
                remaining[sym] = coeff
            else:
                const += coeff * value
        return LinTerm.of(remaining, const)


def _single_var(term: LinTerm) -> tuple[str, Fraction, Fraction] | None:
    """term = c*sym + d with exactly one symbol, as (sym, c, d)."""
    if len(term.coeffs) != 1:
        return None
    sym, coeff = term.coeffs[0]
    return sym, coeff, term.const


_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


def _add_cmp(state: _State, op: str, term: LinTerm) -> bool:
    """Record a comparison atom; returns False on a detected conflict."""
    if term.is_constant:
        value = term.const
        return {"<": value < 0, "<=": value <= 0,
                "==": value == 0, "!=": value != 0}[op]
    single = _single_var(term)
    if single is not None:
        sym, coeff, const = single
        bound = -const / coeff
        effective = op if coeff > 0 else _FLIP[op]
        if not state.ival(sym).constrain(effective, bound):
            return False
    if op == "!=":
        state.diseqs.append(term)
    elif op == "==":
        state.nums.append((term, False))
        state.nums.append((term.neg(), False))
    else:
        state.nums.append((term, op == "<"))
    return True


def _add_literal(state: _State, f: Formula) -> bool:
    if isinstance(f, FSym):
        if state.bools.get(f.name) is False:
            return False
        state.bools[f.name] = True
        return True
    if isinstance(f, FNot) and isinstance(f.inner, FSym):
        if state.bools.get(f.inner.name) is True:
            return False
        state.bools[f.inner.name] = False
        return True
    if isinstance(f, FStrEq):
        if f.sym in state.str_eq and state.str_eq[f.sym] != f.lit:
            return False
        if f.lit in state.str_ne.get(f.sym, ()):
            return False
        state.str_eq[f.sym] = f.lit
        return True
    if isinstance(f, FNot) and isinstance(f.inner, FStrEq):
        atom = f.inner
        if state.str_eq.get(atom.sym) == atom.lit:
            return False
        state.str_ne.setdefault(atom.sym, set()).add(atom.lit)
        return True
    if isinstance(f, FCmp):
        return _add_cmp(state, f.op, f.term)
    raise TypeError(f"not a literal: {f!r}")


def solve(pc: PathCondition) -> dict[str, object] | None:
    """Decide a path condition; return a full concrete model or None (unsat).

    Model values: bool for boolean symbols, int for integer symbols,
    Fraction for real symbols, str for string symbols. Every symbol listed
    in ``pc.symbols`` receives a value (defaults when unconstrained).
    """
    kinds = dict(pc.symbols)
    known_literals: set[str] = set()

    def collect_strings(f: Formula) -> None:
        if isinstance(f, FStrEq):
            known_literals.add(f.lit)
        elif isinstance(f, FNot):
            collect_strings(f.inner)
        elif isinstance(f, (FAnd, FOr)):
            for part in f.parts:
                collect_strings(part)

    normalized = [_nnf(f) for f in pc.conjuncts]
    for f in normalized:
        collect_strings(f)

    result = _search(normalized, _State(kinds))
    if result is None:
        return None
    state, numeric = result
    return _complete_model(state, numeric, kinds, known_literals)


def _search(pending: list[Formula], state: _State):
    """Consume conjuncts and literals eagerly; branch on the smallest Or."""
    ors: list[FOr] = []
    stack = list(reversed(pending))
    while stack:
        f = stack.pop()
        if isinstance(f, FTrue):
            continue
        if isinstance(f, FFalse):
            return None
        if isinstance(f, FAnd):
            stack.extend(reversed(f.parts))
            continue
        if isinstance(f, FOr):
            ors.append(f)
            continue
        if not _add_literal(state, f):
            return None
    if not ors:
        return _theory(state)
    ors.sort(key=lambda f: len(f.parts))  # stable: cheapest split first
    chosen, rest = ors[0], ors[1:]
    for part in chosen.parts:
        attempt = _search(rest + [part], state.copy())
        if attempt is not None:
            return attempt
    return None


def _theory(state: _State):
    """Resolve remaining disequalities, then run elimination + branch-and-bound."""
    pending: list[LinTerm] = []
    for term in state.diseqs:
        reduced = state.substitute_fixed(term)
        if reduced.is_constant:
            if reduced.const == 0:
                return None
            continue
        pending.append(reduced)
    if pending:
        term, rest = pending[0], pending[1:]
        for side in (term, term.neg()):
            branched = state.copy()
            branched.diseqs = rest
            if _add_cmp(branched, "<", side):
                attempt = _theory(branched)
                if attempt is not None:
                    return attempt
        return None

    constraints = list(state.nums)
    int_vars = sorted({s for term, _ in constraints for s in term.symbols()
                       if state.kinds.get(s) == "int"})
    numeric = _branch_and_bound(constraints, int_vars, state.kinds,
                                {v: 0 for v in int_vars})
    if numeric is None:
        return None
    return state, numeric


def _branch_and_bound(constraints, int_vars, kinds, depth) -> dict[str, Fraction] | None:
    model = _fm_solve(constraints, kinds)
    if model is None:
        return None
    for var in int_vars:
        value = model.get(var, Fraction(0))
        if value.denominator == 1:
            continue
        if depth[var] >= MAX_SPLITS_PER_SYMBOL:
            raise SolverLimitError(
                f"branch-and-bound exceeded {MAX_SPLITS_PER_SYMBOL} splits on {var}")
        floor_value = Fraction(math.floor(value))
        deeper = dict(depth)
        deeper[var] = depth[var] + 1
        below = constraints + [(LinTerm.symbol(var).sub(LinTerm.constant(floor_value)), False)]
        attempt = _branch_and_bound(below, int_vars, kinds, deeper)
        if attempt is not None:
            return attempt
        above = constraints + [(LinTerm.constant(floor_value + 1).sub(LinTerm.symbol(var)), False)]
        return _branch_and_bound(above, int_vars, kinds, deeper)
    return model


def _fm_solve(constraints, kinds) -> dict[str, Fraction] | None:
    """Fourier-Motzkin elimination; returns a rational model or None."""
    variables = sorted({s for term, _ in constraints for s in term.symbols()})
    bounds: list[tuple[str, list, list]] = []
    current = list(constraints)
    for var in variables:
        lowers: list[tuple[LinTerm, bool]] = []
        uppers: list[tuple[LinTerm, bool]] = []
        rest: list[tuple[LinTerm, bool]] = []
        for term, strict in current:
            coeff = term.as_dict().get(var, Fraction(0))
            if coeff == 0:
                rest.append((term, strict))
                continue
            remainder = LinTerm.of(
                {s: c for s, c in term.coeffs if s != var}, term.const)
            bound = remainder.scale(Fraction(-1) / coeff)
            if coeff > 0:
                uppers.append((bound, strict))  # var <= bound
            else:
                lowers.append((bound, strict))  # var >= bound
        for low, s1 in lowers:
            for up, s2 in uppers:
                combined = low.sub(up)
                if combined.is_constant:
                    value = combined.const
                    if (s1 or s2) and value >= 0:
                        return None
                    if not (s1 or s2) and value > 0:
                        return None
                else:
                    rest.append((combined, s1 or s2))
        bounds.append((var, lowers, uppers))
        current = rest
    for term, strict in current:
        value = term.const
        if (strict and value >= 0) or (not strict and value > 0):
            return None
    model: dict[str, Fraction] = {}
    for var, lowers, uppers in reversed(bounds):
        model[var] = _pick_value(
            [(t.evaluate(model), s) for t, s in lowers],
            [(t.evaluate(model), s) for t, s in uppers],
            kinds.get(var) == "int",
        )
    return model


def _pick_value(lowers, uppers, is_int: bool) -> Fraction:
    low = high = None
    low_strict = high_strict = False
    if lowers:
        low = max(v for v, _ in lowers)
        low_strict = any(s for v, s in lowers if v == low)
    if uppers:
        high = min(v for v, _ in uppers)
        high_strict = any(s for v, s in uppers if v == high)
    if low is None and high is None:
        return Fraction(0)
    if high is None:
        if is_int:
            return Fraction(math.floor(low) + 1 if low_strict else math.ceil(low))
        return low + 1 if low_strict else low
    if low is None:
        if is_int:
            return Fraction(math.ceil(high) - 1 if high_strict else math.floor(high))
        return high - 1 if high_strict else high
    if is_int:
        low_int = math.floor(low) + 1 if low_strict else math.ceil(low)
        high_int = math.ceil(high) - 1 if high_strict else math.floor(high)
        if low_int <= high_int:
            return Fraction(low_int)
    if low == high:
        return low  # elimination guarantees neither side is strict here
    if not low_strict and not high_strict and low.denominator == 1:
        return low
    return (low + high) / 2


def _complete_model(state: _State, numeric: dict[str, Fraction], kinds,
                    known_literals: set[str]) -> dict[str, object]:
    model: dict[str, object] = {}
    for name in sorted(kinds):
        kind = kinds[name]
        if kind == "bool":
            model[name] = state.bools.get(name, False)
        elif kind == "str":
            if name in state.str_eq:
                model[name] = state.str_eq[name]
            else:
                forbidden = known_literals | state.str_ne.get(name, set())
                model[name] = _fresh_string(forbidden)
        else:
            value = numeric.get(name)
            if value is None:
                fixed = state.fixed_value(name)
                value = fixed if fixed is not None else Fraction(0)
            model[name] = int(value) if kind == "int" else value
    return model


def _fresh_string(forbidden: set[str]) -> str:
    if "" not in forbidden:
        return ""
    i = 0
    while f"fresh_{i}" in forbidden:
        i += 1
    return f"fresh_{i}"
