"""Per-app verification against the global invariant conjunction.

For every app, every symbolic path of its handler is checked: the query

    all invariants (initial state) AND unchecked postconditions
    AND path condition AND NOT (all invariants (final state))

must be unsatisfiable. A satisfying model is a candidate counterexample; it
is replayed through the concrete interpreter (feeding the model's unchecked
return values in call order) and reported only if the replayed final state
really falsifies an invariant. A replay that fails to violate aborts with
SoundnessError instead of reporting garbage.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..apps import AppPrototype, AppState, REGISTER_NAMES
from ..errors import SoundnessError
from ..lang import evaluate_invariant, interpret_iteration
from ..lang.typecheck import TypedProgram
from .solver import solve
from .symexec import (
    SymbolicState,
    build_invariant_formula,
    ga_field,
    ga_symbol,
    address_value_types,
    initial_state,
    reg_field,
    symexec_iteration,
)
from .terms import Formula, LinTerm, PathCondition, StrExpr, f_and, f_not


@dataclass(frozen=True)
class CompiledApp:
    """An app ready for verification: prototype plus bound typed program."""

    name: str
    prototype: AppPrototype
    program: TypedProgram  # bound to group addresses

    @property
    def privileged(self) -> bool:
        return self.prototype.privileged

    @property
    def timer(self) -> int:
        return self.prototype.timer


@dataclass(frozen=True)
class VerificationTask:
    """One target app checked under the invariants of every app in both sets."""

    installed: tuple[CompiledApp, ...]
    installing: tuple[CompiledApp, ...]
    target: CompiledApp

    def all_apps(self) -> tuple[CompiledApp, ...]:
        return tuple(sorted(self.installed + self.installing, key=lambda a: a.name))


@dataclass(frozen=True)
class Counterexample:
    """A concrete assignment that drives the target's handler into violation."""

    target: str
    assignment: dict[str, object]
    violated_apps: tuple[str, ...]
    path_trace: tuple[str, ...]

    def render(self) -> str:
        lines = [f"counterexample for {self.target} "
                 f"(violates: {', '.join(self.violated_apps)})"]
        for symbol in sorted(self.assignment):
            lines.append(f"  {symbol} = {_show(self.assignment[symbol])}")
        if self.path_trace:
            lines.append("  path:")
            lines.extend(f"    {step}" for step in self.path_trace)
        return "\n".join(lines)


def _show(value) -> str:
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    return str(value)


@dataclass(frozen=True)
class CheckOutcome:
    valid: bool
    counterexample: Counterexample | None = None
    warnings: tuple[str, ...] = ()


def _postcondition_warnings(app: CompiledApp) -> list[str]:
    """An unsatisfiable postcondition set makes verification vacuous; warn."""
    from .symexec import _post_formula  # shared instantiation logic

    warnings = []
    for decl in app.program.unchecked.values():
        if not decl.postconditions or decl.return_type == "none":
            continue
        symbol = f"__post__.{decl.name}"
        if decl.return_type == "bool":
            from .terms import FSym
            value: object = FSym(symbol)
        elif decl.return_type == "str":
            value = StrExpr.sym(symbol)
        else:
            value = LinTerm.symbol(symbol)
        formulas = tuple(_post_formula(post, value) for post in decl.postconditions)
        model = solve(PathCondition(formulas, {symbol: decl.return_type}))
        if model is None:
            warnings.append(
                f"{app.name}.{decl.name}: postconditions are unsatisfiable; they are "
                f"assumed during verification, so every use is vacuously valid")
    return warnings


def check_app(task: VerificationTask) -> CheckOutcome:
    """Valid iff no path of the target can break any app's invariant."""
    apps = task.all_apps()
    programs = [app.program for app in apps]
    init, kinds = initial_state(programs)
    invariants_init = [build_invariant_formula(app.program, init) for app in apps]

    warnings = tuple(w for app in apps for w in _postcondition_warnings(app))

    paths = symexec_iteration(task.target.program, init)
    for path in paths:
        invariants_final = [build_invariant_formula(app.program, path.state)
                            for app in apps]
        query_kinds = dict(kinds)
        query_kinds.update(path.call_kinds)
        condition = PathCondition(
            tuple(invariants_init)
            + path.constraints
            + path.condition
            + (f_not(f_and(invariants_final)),),
            query_kinds,
        )
        model = solve(condition)
        if model is None:
            continue
        violated = _replay(task, path, model)
        if not violated:
            raise SoundnessError(
                f"{task.target.name}: model did not replay to a violation on path "
                f"[{'; '.join(path.render_trace())}]")
        return CheckOutcome(
            valid=False,
            counterexample=Counterexample(
                target=task.target.name,
                assignment=model,
                violated_apps=tuple(violated),
                path_trace=path.render_trace(),
            ),
            warnings=warnings,
        )
    return CheckOutcome(valid=True, warnings=warnings)


def _replay(task: VerificationTask, path, model) -> list[str]:
    """Run the counterexample through the interpreter; return violated app names."""
    apps = task.all_apps()
    programs = [app.program for app in apps]
    phys = {address: _concrete(model[ga_symbol(address)])
            for address in address_value_types(programs)}
    states = {}
    for app in apps:
        state = AppState()
        for register in REGISTER_NAMES:
            setattr(state, register, _concrete(model[f"{app.name}.{register}"]))
        states[app.name] = state

    queues: dict[str, list[object]] = {}
    for symbol, fname in path.calls:
        queues.setdefault(fname, []).append(_concrete(model[symbol]))
    impls = {fname: _queue_impl(values) for fname, values in queues.items()}
    for decl_name, decl in task.target.program.unchecked.items():
        if decl_name not in impls:
            impls[decl_name] = _default_impl(decl.return_type)

    new_state, new_phys, _ = interpret_iteration(
        task.target.program, states[task.target.name], phys, impls)
    final_states = dict(states)
    final_states[task.target.name] = new_state
    return [app.name for app in apps
            if not evaluate_invariant(app.program, final_states[app.name], new_phys)]


def _concrete(value):
    return value  # models already hold bool | int | Fraction | str


def _queue_impl(values):
    queue = list(values)

    def impl(*_args):
        return queue.pop(0)

    return impl


def _default_impl(return_type: str):
    default = {"none": None, "bool": False, "int": 0,
               "real": Fraction(0), "str": ""}[return_type]

    def impl(*_args):
        return default

    return impl


@dataclass(frozen=True)
class InstallReport:
    accepted: bool
    verdicts: tuple[tuple[str, CheckOutcome], ...]  # app name -> outcome, name order
    warnings: tuple[str, ...]

    def counterexamples(self) -> tuple[Counterexample, ...]:
        return tuple(outcome.counterexample for _, outcome in self.verdicts
                     if outcome.counterexample is not None)

    def render(self) -> str:
        lines = []
        for name, outcome in self.verdicts:
            lines.append(f"{name}: {'VALID' if outcome.valid else 'REJECTED'}")
            if outcome.counterexample is not None:
                lines.append(outcome.counterexample.render())
        for warning in self.warnings:
            lines.append(f"warning: {warning}")
        lines.append("installation ACCEPTED" if self.accepted else "installation REJECTED")
        return "\n".join(lines)


def verify_installation(installed: list[CompiledApp],
                        installing: list[CompiledApp]) -> InstallReport:
    """Check every app of both sets; one counterexample rejects the whole set."""
    installed = tuple(installed)
    installing = tuple(installing)
    verdicts = []
    warnings: list[str] = []
    seen = set()
    for app in sorted(installed + installing, key=lambda a: a.name):
        task = VerificationTask(installed, installing, app)
        outcome = check_app(task)
        verdicts.append((app.name, outcome))
        for warning in outcome.warnings:
            if warning not in seen:
                seen.add(warning)
                warnings.append(warning)
    accepted = all(outcome.valid for _, outcome in verdicts)
    return InstallReport(accepted, tuple(verdicts), tuple(warnings))
