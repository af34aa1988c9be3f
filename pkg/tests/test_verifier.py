"""Symbolic execution and whole-app verification tests."""

from fractions import Fraction

import pytest

from veriknx.errors import SoundnessError
from veriknx.apps import AppState, REGISTER_NAMES
from veriknx.lang import evaluate_invariant, interpret_iteration
from veriknx.verifier import (
    CompiledApp,
    PathCondition,
    VerificationTask,
    check_app,
    initial_state,
    symexec_iteration,
    verify_installation,
)
from veriknx.verifier.symexec import ga_symbol
from veriknx.verifier.terms import eval_formula

from helpers import (
    DOOR_LOCK_PROTO,
    SENSOR_SWITCH_PROTO,
    app_state,
    brute_force_check,
    build_app,
    door_lock_app,
    sensor_switch_app,
)


def compiled(tp):
    return CompiledApp(tp.app_name, tp.prototype, tp)


def solo_task(tp):
    app = compiled(tp)
    return VerificationTask((), (app,), app)


class TestSymexec:
    def test_paper_example_two_paths(self):
        tp = sensor_switch_app()
        init, _ = initial_state([tp])
        paths = symexec_iteration(tp, init)
        assert len(paths) == 2
        # first path takes the branch, second takes its negation
        assert paths[0].condition and paths[1].condition
        assert "not" in paths[1].render_trace()[0]

    def test_empty_iteration_one_path(self):
        tp = build_app("idle", "invariant: true iteration: {}", {
            "permissionLevel": "notPrivileged", "timer": 0, "files": [], "devices": []},
            {})
        init, _ = initial_state([tp])
        paths = symexec_iteration(tp, init)
        assert len(paths) == 1
        assert paths[0].condition == ()
        assert paths[0].state.values == init.values

    def test_door_lock_three_paths(self):
        tp = door_lock_app()
        init, _ = initial_state([tp])
        paths = symexec_iteration(tp, init)
        assert len(paths) == 3

    def test_none_calls_are_erased(self):
        tp = door_lock_app()
        init, _ = initial_state([tp])
        paths = symexec_iteration(tp, init)
        assert all(p.calls == () for p in paths)

    def test_unchecked_calls_fresh_symbols(self):
        tp = build_app("counter", """
            def unchecked_get() -> int {
                post: __return__ > 0
            }
            invariant: true
            iteration: {
                app_state.INT_0 = unchecked_get()
                app_state.INT_1 = unchecked_get()
            }
        """, {"permissionLevel": "notPrivileged", "timer": 0, "files": [],
              "devices": []}, {})
        init, _ = initial_state([tp])
        paths = symexec_iteration(tp, init)
        assert len(paths) == 1
        path = paths[0]
        assert [fname for _, fname in path.calls] == ["unchecked_get", "unchecked_get"]
        first, second = (symbol for symbol, _ in path.calls)
        assert first != second
        assert len(path.constraints) == 2
        assert path.call_kinds == {first: "int", second: "int"}

    def test_paths_partition_inputs(self):
        # sum of path-condition indicators is exactly 1 on sampled inputs
        tp = door_lock_app()
        init, kinds = initial_state([tp])
        paths = symexec_iteration(tp, init)
        import itertools
        bool_syms = sorted(name for name, kind in kinds.items() if kind == "bool")
        int_sym = "door_lock.INT_0"
        for bools in itertools.product([False, True], repeat=len(bool_syms)):
            for i in (-1, 0, 5, 6, 7):
                model = {name: value for name, value in zip(bool_syms, bools)}
                model.update({name: Fraction(0) for name, kind in kinds.items()
                              if kind in ("int", "real")})
                model.update({name: "" for name, kind in kinds.items() if kind == "str"})
                model[int_sym] = Fraction(i)
                hits = sum(
                    all(eval_formula(f, model) for f in path.condition)
                    for path in paths)
                assert hits == 1

    def test_final_state_matches_interpreter(self):
        tp = sensor_switch_app()
        init, kinds = initial_state([tp])
        paths = symexec_iteration(tp, init)
        sensor = tp.address_of("BINARY_SENSOR", "state")
        switch = tp.address_of("SWITCH", "state")
        for sensor_value in (False, True):
            model = {name: False for name, kind in kinds.items() if kind == "bool"}
            model.update({name: Fraction(0) for name, kind in kinds.items()
                          if kind in ("int", "real")})
            model.update({name: "" for name, kind in kinds.items() if kind == "str"})
            model[ga_symbol(sensor)] = sensor_value
            state, phys, _ = interpret_iteration(
                tp, app_state(), {sensor: sensor_value, switch: False}, {})
            taken = [p for p in paths
                     if all(eval_formula(f, model) for f in p.condition)]
            assert len(taken) == 1
            from veriknx.verifier.symexec import ga_field
            symbolic_final = taken[0].state[ga_field(switch)]
            assert eval_formula(symbolic_final, model) == phys[switch]


class TestCheckApp:
    def test_paper_example_valid(self):
        outcome = check_app(solo_task(sensor_switch_app()))
        assert outcome.valid

    def test_always_on_mutant_counterexample(self):
        mutant = build_app("app_one", """
            device BINARY_SENSOR: binary
            device SWITCH: switch

            invariant: ((BINARY_SENSOR.is_on() or app_state.INT_0 == 42) and SWITCH.is_on())
                or (not BINARY_SENSOR.is_on() and not SWITCH.is_on())

            iteration: {
                SWITCH.on();
            }
        """, SENSOR_SWITCH_PROTO, {
            ("BINARY_SENSOR", "state"): "0/0/1",
            ("SWITCH", "state"): "0/0/2",
        })
        outcome = check_app(solo_task(mutant))
        assert not outcome.valid
        cex = outcome.counterexample
        assert cex is not None
        assert cex.assignment["GA_0_0_1"] is False
        assert cex.assignment["app_one.INT_0"] != 42
        # exhaustive oracle over booleans x {0, 1, 42} confirms a violation exists
        oracle = brute_force_check([mutant], mutant, {"app_one": ["INT_0"]})
        assert oracle is not None

    def test_counterexample_replays_to_violation(self):
        mutant = build_app("app_one", """
            device BINARY_SENSOR: binary
            device SWITCH: switch
            invariant: not SWITCH.is_on()
            iteration: { SWITCH.on(); }
        """, SENSOR_SWITCH_PROTO, {
            ("BINARY_SENSOR", "state"): "0/0/1",
            ("SWITCH", "state"): "0/0/2",
        })
        outcome = check_app(solo_task(mutant))
        cex = outcome.counterexample
        assert cex is not None and cex.violated_apps == ("app_one",)
        # manual replay
        phys = {mutant.address_of("BINARY_SENSOR", "state"): cex.assignment["GA_0_0_1"],
                mutant.address_of("SWITCH", "state"): cex.assignment["GA_0_0_2"]}
        state = AppState()
        _, final_phys, _ = interpret_iteration(mutant, state, phys, {})
        assert not evaluate_invariant(mutant, state, final_phys)

    def test_trivial_invariant_always_valid(self):
        outcome = check_app(solo_task(door_lock_app()))
        assert outcome.valid

    def test_postconditions_assumed(self):
        # the unchecked result is constrained to be false, so the switch never turns on
        tp = build_app("trusting", """
            device SWITCH: switch
            def unchecked_lie() -> bool {
                post: __return__ == false
            }
            invariant: not SWITCH.is_on()
            iteration: {
                if unchecked_lie() {
                    SWITCH.on();
                }
            }
        """, {
            "permissionLevel": "notPrivileged", "timer": 0, "files": [],
            "devices": [{"name": "switch", "deviceType": "switch"}],
        }, {("SWITCH", "state"): "0/0/9"})
        outcome = check_app(solo_task(tp))
        assert outcome.valid

    def test_unsat_postconditions_warn(self):
        tp = build_app("vacuous", """
            device SWITCH: switch
            def unchecked_n() -> int {
                post: __return__ > 0
                post: __return__ < 0
            }
            invariant: not SWITCH.is_on()
            iteration: {
                if unchecked_n() == 1 {
                    SWITCH.on();
                }
            }
        """, {
            "permissionLevel": "notPrivileged", "timer": 0, "files": [],
            "devices": [{"name": "switch", "deviceType": "switch"}],
        }, {("SWITCH", "state"): "0/0/9"})
        outcome = check_app(solo_task(tp))
        assert outcome.valid
        assert any("unsatisfiable" in w for w in outcome.warnings)

    def test_unconstrained_unchecked_explored(self):
        # without postconditions, both return values are explored and one breaks
        tp = build_app("trusting", """
            device SWITCH: switch
            def unchecked_lie() -> bool {
            }
            invariant: not SWITCH.is_on()
            iteration: {
                if unchecked_lie() {
                    SWITCH.on();
                }
            }
        """, {
            "permissionLevel": "notPrivileged", "timer": 0, "files": [],
            "devices": [{"name": "switch", "deviceType": "switch"}],
        }, {("SWITCH", "state"): "0/0/9"})
        outcome = check_app(solo_task(tp))
        assert not outcome.valid
        assert any("unchecked_lie" in symbol for symbol in outcome.counterexample.assignment)


class TestVerifyInstallation:
    def test_empty_installing_set_accepts(self):
        report = verify_installation([], [])
        assert report.accepted

    def test_consistent_pair_accepts(self):
        report = verify_installation(
            [compiled(sensor_switch_app())], [compiled(door_lock_app())])
        assert report.accepted
        assert [name for name, _ in report.verdicts] == ["app_one", "door_lock"]

    def test_one_violator_rejects_with_counterexamples(self):
        good = compiled(sensor_switch_app())
        bad = compiled(build_app("saboteur", """
            device SWITCH: switch
            invariant: true
            iteration: { SWITCH.off(); }
        """, {
            "permissionLevel": "notPrivileged", "timer": 0, "files": [],
            "devices": [{"name": "switch", "deviceType": "switch"}],
        }, {("SWITCH", "state"): "0/0/2"}))
        # saboteur forces the shared switch off even when app_one's invariant
        # demands it stay on
        report = verify_installation([good], [bad])
        assert not report.accepted
        assert report.counterexamples()
        assert "REJECTED" in report.render()

    def test_cross_invariant_protection(self):
        # the installed app's invariant constrains the newcomer's writes
        guard = compiled(build_app("guard", """
            device ALARM: switch
            invariant: ALARM.is_on()
            iteration: {}
        """, {
            "permissionLevel": "notPrivileged", "timer": 0, "files": [],
            "devices": [{"name": "alarm", "deviceType": "switch"}],
        }, {("ALARM", "state"): "0/0/7"}))
        off_switcher = compiled(build_app("offswitcher", """
            device ALARM: switch
            invariant: true
            iteration: { ALARM.off(); }
        """, {
            "permissionLevel": "notPrivileged", "timer": 0, "files": [],
            "devices": [{"name": "alarm", "deviceType": "switch"}],
        }, {("ALARM", "state"): "0/0/7"}))
        report = verify_installation([guard], [off_switcher])
        assert not report.accepted
        # and the violated app is the guard
        cex = report.counterexamples()[0]
        assert "guard" in cex.violated_apps
