"""Linear terms, boolean formulas, and path conditions over typed symbols.

Symbols are plain strings; their kinds ('bool' | 'int' | 'real' | 'str')
live in a side table carried by PathCondition. Numeric atoms are normalized
to ``term < 0``, ``term <= 0``, ``term == 0`` or ``term != 0`` with exact
Fraction coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

Kind = str  # 'bool' | 'int' | 'real' | 'str'


@dataclass(frozen=True)
class LinTerm:
    """sum(coeffs[s] * s) + const, coefficients exact rationals."""

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @classmethod
    def constant(cls, value) -> "LinTerm":
        return cls((), Fraction(value))

    @classmethod
    def symbol(cls, name: str) -> "LinTerm":
        return cls(((name, Fraction(1)),), Fraction(0))

    @classmethod
    def of(cls, mapping: Mapping[str, Fraction], const) -> "LinTerm":
        items = tuple(sorted((s, Fraction(c)) for s, c in mapping.items() if c != 0))
        return cls(items, Fraction(const))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def add(self, other: "LinTerm") -> "LinTerm":
        merged = self.as_dict()
        for sym, coeff in other.coeffs:
            merged[sym] = merged.get(sym, Fraction(0)) + coeff
        return LinTerm.of(merged, self.const + other.const)

    def sub(self, other: "LinTerm") -> "LinTerm":
        return self.add(other.scale(-1))

    def scale(self, factor) -> "LinTerm":
        factor = Fraction(factor)
        return LinTerm.of({s: c * factor for s, c in self.coeffs}, self.const * factor)

    def neg(self) -> "LinTerm":
        return self.scale(-1)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def symbols(self) -> set[str]:
        return {s for s, _ in self.coeffs}

    def evaluate(self, model: Mapping[str, object]) -> Fraction:
        total = self.const
        for sym, coeff in self.coeffs:
            total += coeff * Fraction(model[sym])  # type: ignore[arg-type]
        return total

    def render(self) -> str:
        parts = []
        for sym, coeff in self.coeffs:
            if coeff == 1:
                parts.append(sym)
            elif coeff == -1:
                parts.append(f"-{sym}")
            else:
                parts.append(f"{coeff}*{sym}")
        if self.const != 0 or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class StrExpr:
    """A string-sorted value: either a literal or a symbol."""

    kind: str  # 'lit' | 'sym'
    value: str

    @classmethod
    def lit(cls, value: str) -> "StrExpr":
        return cls("lit", value)

    @classmethod
    def sym(cls, name: str) -> "StrExpr":
        return cls("sym", name)


class Formula:
    """Base class; subclasses are the only node shapes the solver accepts."""

    __slots__ = ()


@dataclass(frozen=True)
class FTrue(Formula):
    pass


@dataclass(frozen=True)
class FFalse(Formula):
    pass


TRUE = FTrue()
FALSE = FFalse()


@dataclass(frozen=True)
class FSym(Formula):
    name: str


@dataclass(frozen=True)
class FNot(Formula):
    inner: Formula


@dataclass(frozen=True)
class FAnd(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class FOr(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class FCmp(Formula):
    """term <op> 0 with op in {'<', '<=', '==', '!='}."""

    op: str
    term: LinTerm


@dataclass(frozen=True)
class FStrEq(Formula):
    """symbol == literal (negate with FNot for disequality)."""

    sym: str
    lit: str


def f_not(f: Formula) -> Formula:
    if isinstance(f, FTrue):
        return FALSE
    if isinstance(f, FFalse):
        return TRUE
    if isinstance(f, FNot):
        return f.inner
    return FNot(f)


def f_and(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for part in parts:
        if isinstance(part, FTrue):
            continue
        if isinstance(part, FFalse):
            return FALSE
        if isinstance(part, FAnd):
            flat.extend(part.parts)
        else:
            flat.append(part)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return FAnd(tuple(flat))


def f_or(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for part in parts:
        if isinstance(part, FFalse):
            continue
        if isinstance(part, FTrue):
            return TRUE
        if isinstance(part, FOr):
            flat.extend(part.parts)
        else:
            flat.append(part)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


def f_iff(a: Formula, b: Formula) -> Formula:
    return f_or([f_and([a, b]), f_and([f_not(a), f_not(b)])])


def f_cmp(op: str, left: LinTerm, right: LinTerm) -> Formula:
    """Build a comparison atom; >= and > flip into <= and < with a negated term."""
    term = left.sub(right)
    if op == ">":
        op, term = "<", term.neg()
    elif op == ">=":
        op, term = "<=", term.neg()
    if term.is_constant:
        value = term.const
        holds = {"<": value < 0, "<=": value <= 0, "==": value == 0, "!=": value != 0}[op]
        return TRUE if holds else FALSE
    return FCmp(op, term)


_CMP_RENDER = {"<": "< 0", "<=": "<= 0", "==": "== 0", "!=": "!= 0"}


def render_formula(f: Formula) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, FFalse):
        return "false"
    if isinstance(f, FSym):
        return f.name
    if isinstance(f, FNot):
        return f"not ({render_formula(f.inner)})"
    if isinstance(f, FAnd):
        return "(" + " and ".join(render_formula(p) for p in f.parts) + ")"
    if isinstance(f, FOr):
        return "(" + " or ".join(render_formula(p) for p in f.parts) + ")"
    if isinstance(f, FCmp):
        return f"{f.term.render()} {_CMP_RENDER[f.op]}"
    if isinstance(f, FStrEq):
        return f'{f.sym} == "{f.lit}"'
    raise TypeError(f"not a formula: {f!r}")


def eval_formula(f: Formula, model: Mapping[str, object]) -> bool:
    """Evaluate a formula under a concrete assignment (used by tests and replay)."""
    if isinstance(f, FTrue):
        return True
    if isinstance(f, FFalse):
        return False
    if isinstance(f, FSym):
        return bool(model[f.name])
    if isinstance(f, FNot):
        return not eval_formula(f.inner, model)
    if isinstance(f, FAnd):
        return all(eval_formula(p, model) for p in f.parts)
    if isinstance(f, FOr):
        return any(eval_formula(p, model) for p in f.parts)
    if isinstance(f, FCmp):
        value = f.term.evaluate(model)
        return {"<": value < 0, "<=": value <= 0, "==": value == 0, "!=": value != 0}[f.op]
    if isinstance(f, FStrEq):
        return model[f.sym] == f.lit
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class PathCondition:
    """A conjunction of formulas plus the kinds of every symbol in scope."""

    conjuncts: tuple[Formula, ...]
    symbols: Mapping[str, Kind] = field(default_factory=dict)

    def formulas(self) -> tuple[Formula, ...]:
        return self.conjuncts

    def and_also(self, *more: Formula) -> "PathCondition":
        return PathCondition(self.conjuncts + tuple(more), self.symbols)

    def render(self) -> str:
        return " and ".join(render_formula(f) for f in self.conjuncts) or "true"
