"""Event-driven execution with runtime invariant enforcement.

One logical event loop: bus telegrams and timer expiries enqueue events, and
all state changes happen inside `process_event`, one event at a time (a lock
serializes enqueue/drain across bus and timer threads).

Per event: the local store is updated first (for telegrams), pre-validity v0
is computed once, every triggered app runs on fresh copies of the snapshot
and of its own registers, then the accepted copies are merged last-writer-
wins and committed only if the merged state satisfies every alive app's
invariant. An app that turns a valid state invalid is killed and its copies
discarded; an invalid merged state restores the last valid physical state
and kills everything. Bus writes are coalesced: only addresses whose
committed value differs from the pre-event bus-visible value are written.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .apps import AppState, ValueType
from .compiler import GroupAddressTable
from .errors import StartupError
from .lang import evaluate_invariant, interpret_iteration
from .lang.typecheck import TypedProgram
from .wire import (
    GroupAddress,
    IndividualAddress,
    Telegram,
    decode_value,
    encode_value,
)

DEFAULT_SOURCE = IndividualAddress(15, 15, 255)

_DEFAULTS = {ValueType.BOOL: False, ValueType.REAL: 0.0,
             ValueType.INT: 0, ValueType.STR: ""}


class PhysicalStateStore:
    """Local mirror of every compiled group address, typed per the table."""

    def __init__(self, types: dict[GroupAddress, ValueType],
                 values: dict[GroupAddress, object] | None = None):
        self.types = types
        self.values = dict(values) if values is not None else {
            address: _DEFAULTS[value_type] for address, value_type in types.items()}

    @classmethod
    def from_table(cls, table: GroupAddressTable) -> "PhysicalStateStore":
        return cls({entry.address: entry.value_type for entry in table})

    def __contains__(self, address: GroupAddress) -> bool:
        return address in self.values

    def __getitem__(self, address: GroupAddress):
        return self.values[address]

    def __setitem__(self, address: GroupAddress, value) -> None:
        if address not in self.types:
            raise KeyError(f"address {address} is not part of the compiled table")
        self.values[address] = value

    def __eq__(self, other) -> bool:
        if isinstance(other, PhysicalStateStore):
            return self.values == other.values
        if isinstance(other, dict):
            return self.values == other
        return NotImplemented

    def copy(self) -> "PhysicalStateStore":
        return PhysicalStateStore(self.types, self.values)

    def addresses(self) -> list[GroupAddress]:
        return sorted(self.values)


@dataclass
class AppRuntimeRecord:
    """One installed app at runtime; dead records never execute again."""

    name: str
    privileged: bool
    timer: int
    program: TypedProgram  # bound to group addresses
    unchecked_impls: Mapping[str, Callable]
    app_state: AppState = field(default_factory=AppState)
    alive: bool = True
    timer_handle: object = None

    def listens_to(self) -> set[GroupAddress]:
        assert self.program.addresses is not None
        return set(self.program.addresses.values())


@dataclass(frozen=True)
class TelegramReceived:
    address: GroupAddress
    value: object


@dataclass(frozen=True)
class TimerFired:
    app_name: str


@dataclass(frozen=True)
class ShutdownRequested:
    pass


RuntimeEvent = TelegramReceived | TimerFired | ShutdownRequested


@dataclass(frozen=True)
class EventRecord:
    """What one processed event did; the runtime's execution log entry."""

    event: RuntimeEvent
    executed: tuple[str, ...]
    killed: tuple[str, ...]
    verdict: str  # 'committed' | 'restored' | 'idle'
    writes: tuple[tuple[GroupAddress, object], ...]


class Runtime:
    """The event loop plus all installed app records."""

    def __init__(self, records: list[AppRuntimeRecord], table: GroupAddressTable,
                 bus, clock, log_path=None, source_address=DEFAULT_SOURCE):
        self.records = {record.name: record for record in records}
        self.table = table
        self.bus = bus
        self.clock = clock
        self.source_address = source_address
        self.store: PhysicalStateStore | None = None
        self.last_valid: PhysicalStateStore | None = None
        self.exec_log: list[EventRecord] = []
        self._entries = table.by_address()
        self._queue: list[RuntimeEvent] = []
        self._lock = threading.RLock()
        self._draining = False
        self._running = True
        self._log_path = log_path
        self._log_lines: list[str] = []

    # -- initialization -------------------------------------------------------

    def initialize(self) -> None:
        """Read every table address once, arm timers, subscribe to the bus."""
        store = PhysicalStateStore.from_table(self.table)
        for address in store.addresses():
            entry = self._entries[address]
            try:
                payload = self.bus.read_value(address)
            except Exception as exc:
                raise StartupError(f"reading {address} failed: {exc}") from exc
            if payload is not None:
                store.values[address] = decode_value(entry.dpt, payload)
        self.store = store
        self.last_valid = store.copy()
        for record in self.records.values():
            record.app_state = AppState()
            if record.timer > 0:
                record.timer_handle = self.clock.schedule_every(
                    record.timer, self._make_timer_callback(record.name))
        self.bus.subscribe(self._on_telegram)
        self._log(f"initialized: {len(self.records)} apps, "
                  f"{len(store.values)} addresses read")

    def _make_timer_callback(self, name: str):
        def fire():
            self.submit(TimerFired(name))
        return fire

    # -- event intake -----------------------------------------------------------

    def _on_telegram(self, telegram: Telegram) -> None:
        if not telegram.is_group_addressed or not telegram.payload:
            return
        entry = self._entries.get(telegram.destination)
        if entry is None:
            return
        try:
            value = decode_value(entry.dpt, telegram.payload)
        except Exception:
            self._log(f"dropped undecodable payload for {telegram.destination}")
            return
        self.submit(TelegramReceived(entry.address, value))

    def submit(self, event: RuntimeEvent) -> None:
        """Enqueue and drain unless a drain is already running higher up the stack."""
        with self._lock:
            self._queue.append(event)
            if self._draining:
                return
            self._draining = True
            try:
                while self._queue:
                    self.process_event(self._queue.pop(0))
            finally:
                self._draining = False

    # -- the core transition ----------------------------------------------------

    def trigger_set(self, event: RuntimeEvent) -> list[AppRuntimeRecord]:
        """Alive apps the event triggers: non-privileged alphabetical, then privileged."""
        if isinstance(event, TimerFired):
            record = self.records.get(event.app_name)
            triggered = [record] if record is not None and record.alive else []
        elif isinstance(event, TelegramReceived):
            triggered = [record for record in self.records.values()
                         if record.alive and event.address in record.listens_to()]
        else:
            return []
        return sorted(triggered, key=lambda r: (r.privileged, r.name))

    def check_conditions(self, app_states: Mapping[str, AppState] | None = None,
                         phys: PhysicalStateStore | None = None) -> bool:
        """Conjunction of every alive app's invariant; dead apps are excluded."""
        phys = phys if phys is not None else self.store
        for record in sorted(self.records.values(), key=lambda r: r.name):
            if not record.alive:
                continue
            state = (app_states or {}).get(record.name, record.app_state)
            if not evaluate_invariant(record.program, state, phys):
                return False
        return True

    def process_event(self, event: RuntimeEvent) -> EventRecord:
        assert self.store is not None, "initialize() first"
        if isinstance(event, ShutdownRequested):
            self._running = False
            record = EventRecord(event, (), (), "idle", ())
            self.exec_log.append(record)
            self._log("shutdown requested")
            return record

        if isinstance(event, TelegramReceived):
            self.store[event.address] = event.value

        snapshot = self.store.copy()
        pre_valid = self.check_conditions(phys=snapshot)
        triggered = self.trigger_set(event)

        executed: list[str] = []
        killed: list[str] = []
        accepted: list[tuple[AppRuntimeRecord, AppState, PhysicalStateStore]] = []
        for record in triggered:
            executed.append(record.name)
            try:
                new_state, new_phys, _log = interpret_iteration(
                    record.program, record.app_state, snapshot, record.unchecked_impls)
            except Exception as exc:
                record.alive = False
                self._cancel_timer(record)
                killed.append(record.name)
                self._log(f"{record.name} raised during iteration ({exc}); killed")
                continue
            if pre_valid:
                overlay = {record.name: new_state}
                if not self.check_conditions(overlay, new_phys):
                    record.alive = False
                    self._cancel_timer(record)
                    killed.append(record.name)
                    self._log(f"{record.name} turned a valid state invalid; killed")
                    continue
            accepted.append((record, new_state, new_phys))

        merged = snapshot.copy()
        candidate_states: dict[str, AppState] = {}
        for record, new_state, new_phys in accepted:
            candidate_states[record.name] = new_state
            for address in merged.addresses():
                if new_phys[address] != snapshot[address]:
                    merged[address] = new_phys[address]

        if self.check_conditions(candidate_states, merged):
            writes = self._commit(merged, candidate_states, accepted, snapshot)
            verdict = "committed"
        else:
            writes = self._restore(snapshot)
            killed.extend(sorted(record.name for record in self.records.values()
                                 if record.alive))
            for record in self.records.values():
                record.alive = False
                self._cancel_timer(record)
            verdict = "restored"

        record = EventRecord(event, tuple(executed), tuple(killed), verdict, writes)
        self.exec_log.append(record)
        self._log(f"{self._describe(event)}: ran [{', '.join(executed)}] "
                  f"verdict={verdict} writes={len(writes)} "
                  f"killed=[{', '.join(killed)}]")
        return record

    def _commit(self, merged, candidate_states, accepted, snapshot):
        writes = []
        for record, new_state, _ in accepted:
            record.app_state = new_state
        self.store = merged
        self.last_valid = merged.copy()
        for address in merged.addresses():
            if merged[address] != snapshot[address]:
                writes.append((address, merged[address]))
        self._publish_writes(writes)
        return tuple(writes)

    def _restore(self, snapshot):
        assert self.last_valid is not None
        restored = self.last_valid.copy()
        writes = [(address, restored[address])
                  for address in restored.addresses()
                  if restored[address] != snapshot[address]]
        self.store = restored
        self._publish_writes(writes)
        self._log("merged state invalid: restored last valid physical state, "
                  "stopping all apps")
        return tuple(writes)

    def _publish_writes(self, writes) -> None:
        for address, value in writes:
            entry = self._entries[address]
            telegram = Telegram(
                source=self.source_address,
                destination=entry.address,
                payload=encode_value(entry.dpt, value),
            )
            self.bus.publish(telegram)

    def _cancel_timer(self, record: AppRuntimeRecord) -> None:
        handle = record.timer_handle
        if handle is not None:
            handle.cancel()
            record.timer_handle = None

    # -- lifecycle and logging -----------------------------------------------

    @property
    def running(self) -> bool:
        return self._running

    def shutdown(self) -> None:
        self.submit(ShutdownRequested())
        for record in self.records.values():
            self._cancel_timer(record)
        self._log("runtime stopped")
        self.flush_log()

    @staticmethod
    def _describe(event: RuntimeEvent) -> str:
        if isinstance(event, TelegramReceived):
            return f"telegram {event.address}={event.value!r}"
        if isinstance(event, TimerFired):
            return f"timer {event.app_name}"
        return "shutdown"

    def _log(self, message: str) -> None:
        line = f"[t={self.clock.now():.3f}] {message}"
        self._log_lines.append(line)
        if self._log_path is not None:
            with open(self._log_path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")

    def flush_log(self) -> None:
        pass  # lines are appended eagerly; hook kept for symmetry

    @property
    def log_lines(self) -> list[str]:
        return list(self._log_lines)
