"""Bindings, compatibility checks, group-address assignment, artifacts.

Installation works in two phases. First `generate_bindings` writes
``apps_bindings.json`` with one integer slot per prototype channel; the
developer fills each slot with a physical comm-object id (-1 = unfilled).
Second, `verify_bindings` checks the four compatibility rules and
`assign_group_addresses` allocates one fresh 3-level address per mapped
physical comm object, deterministically in id order starting at 0/0/1
(0/0/0 stays reserved).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .apps import AppPrototype, ChannelSpec, SUPPORTED_KINDS, ValueType
from .errors import CapacityError, IncompleteBindingsError, ResolutionError, ValidationError
from .physical import IoType, PhysicalStructure, structures_equal, structure_to_dict
from .wire import DptId, GroupAddress

UNBOUND = -1
MAX_GROUP_ADDRESSES = 65536  # includes the reserved 0/0/0


# ---------------------------------------------------------------------------
# Bindings
# ---------------------------------------------------------------------------


@dataclass
class InstanceBinding:
    device_type: str
    channels: dict[str, int]  # channel name -> physical comm object id


@dataclass
class AppBinding:
    instances: dict[str, InstanceBinding]


@dataclass
class BindingSet:
    """Per app, per instance, per channel: the physical comm-object id."""

    apps: dict[str, AppBinding] = field(default_factory=dict)

    def entries(self):
        """Deterministic traversal: (app, instance, channel, id), sorted by name."""
        for app_name in sorted(self.apps):
            binding = self.apps[app_name]
            for instance in sorted(binding.instances):
                inst = binding.instances[instance]
                for channel in sorted(inst.channels):
                    yield app_name, instance, channel, inst.channels[channel]

    def bound_ids(self) -> set[int]:
        return {obj_id for _, _, _, obj_id in self.entries() if obj_id != UNBOUND}

    def set_channel(self, app: str, instance: str, channel: str, obj_id: int) -> None:
        self.apps[app].instances[instance].channels[channel] = obj_id

    def to_dict(self) -> dict:
        return {
            app_name: {
                "instances": {
                    instance: {
                        "deviceType": inst.device_type,
                        "channels": dict(sorted(inst.channels.items())),
                    }
                    for instance, inst in sorted(binding.instances.items())
                }
            }
            for app_name, binding in sorted(self.apps.items())
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BindingSet":
        apps = {}
        for app_name, app_data in data.items():
            instances = {}
            for instance, inst_data in app_data.get("instances", {}).items():
                instances[instance] = InstanceBinding(
                    device_type=inst_data["deviceType"],
                    channels={k: int(v) for k, v in inst_data["channels"].items()},
                )
            apps[app_name] = AppBinding(instances)
        return cls(apps)


def _fresh_binding(proto: AppPrototype) -> AppBinding:
    instances = {}
    for name, kind_name in proto.devices:
        kind = SUPPORTED_KINDS[kind_name]
        instances[name.upper()] = InstanceBinding(
            device_type=kind_name,
            channels={channel.name: UNBOUND for channel in kind.channels},
        )
    return AppBinding(instances)


@dataclass
class LibraryState:
    """What the installed library remembers for binding preservation."""

    structure: PhysicalStructure | None = None
    bindings: BindingSet = field(default_factory=BindingSet)
    prototypes: tuple[AppPrototype, ...] = ()


def generate_bindings(installing: list[AppPrototype], library: LibraryState | None,
                      phys: PhysicalStructure, out_dir: str | Path | None = None) -> BindingSet:
    """Produce the bindings file content for installed + installing apps.

    If the physical structure is unchanged since the library was compiled,
    installed apps keep their filled ids and only new apps start at -1.
    A changed structure resets every id to -1.
    """
    result = BindingSet()
    preserved = (library is not None and library.structure is not None
                 and structures_equal(library.structure, phys))
    if library is not None:
        for proto in library.prototypes:
            if preserved and proto.name in library.bindings.apps:
                old = library.bindings.apps[proto.name]
                result.apps[proto.name] = AppBinding({
                    instance: InstanceBinding(inst.device_type, dict(inst.channels))
                    for instance, inst in old.instances.items()
                })
            else:
                result.apps[proto.name] = _fresh_binding(proto)
    for proto in installing:
        if proto.name in result.apps:
            raise ValidationError(f"app {proto.name!r} is already installed")
        result.apps[proto.name] = _fresh_binding(proto)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "apps_bindings.json").write_text(
            json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8")
        (out_dir / "physical_structure.json").write_text(
            json.dumps(structure_to_dict(phys), indent=2, sort_keys=True) + "\n", "utf-8")
    return result


# ---------------------------------------------------------------------------
# Compatibility
# ---------------------------------------------------------------------------


class Compat(Enum):
    YES = "yes"
    NO = "no"
    WARNING = "warning"


def io_compat(physical: IoType, prototype: IoType) -> Compat:
    """The 12-cell physical/prototypical direction compatibility table.

    A prototype may read a write-only physical object because the runtime
    mirrors every value locally, so physical Out is compatible with every
    prototype direction; physical In only feeds prototype In; unknown
    physical direction always warns.
    """
    if physical is IoType.UNKNOWN:
        return Compat.WARNING
    if physical is IoType.IN:
        return Compat.YES if prototype is IoType.IN else Compat.NO
    return Compat.YES  # physical Out and In/Out accept everything


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


class Rule(Enum):
    IO_TYPE = "IoType"
    VALUE_TYPE = "ValueType"
    DATATYPE = "Datatype"
    MUTUAL_DATATYPE = "MutualDatatype"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    rule: Rule
    locus: str
    message: str


@dataclass
class CompatReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not any(f.severity is Severity.ERROR for f in self.findings)

    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.ERROR)

    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.WARNING)

    def render(self) -> str:
        if not self.findings:
            return "bindings verified: no findings"
        return "\n".join(
            f"{f.severity.value.upper()} [{f.rule.value}] {f.locus}: {f.message}"
            for f in self.findings)


def _channel_spec(device_type: str, channel: str) -> ChannelSpec:
    return SUPPORTED_KINDS[device_type].channel(channel)


def verify_bindings(bindings: BindingSet, apps: list[AppPrototype],
                    phys: PhysicalStructure) -> CompatReport:
    """Apply the four compatibility rules to fully filled bindings.

    Raises IncompleteBindingsError on any -1 and ResolutionError for ids
    that do not exist in the installation.
    """
    known = {proto.name for proto in apps}
    missing = set(bindings.apps) - known
    if missing:
        raise ValidationError(f"bindings mention unknown apps: {sorted(missing)}")
    findings: list[Finding] = []
    by_object: dict[int, list[tuple[str, ChannelSpec]]] = {}
    for app_name, instance, channel, obj_id in bindings.entries():
        locus = f"{app_name}.{instance}.{channel}"
        if obj_id == UNBOUND:
            raise IncompleteBindingsError(f"{locus} is unfilled (-1)")
        try:
            physical = phys.comm_object(obj_id)
        except KeyError:
            raise ResolutionError(
                f"{locus}: physical comm object {obj_id} does not exist") from None
        spec = _channel_spec(bindings.apps[app_name].instances[instance].device_type, channel)
        by_object.setdefault(obj_id, []).append((locus, spec))

        verdict = io_compat(physical.io, spec.io)
        if verdict is Compat.NO:
            findings.append(Finding(
                Severity.ERROR, Rule.IO_TYPE, locus,
                f"physical io {physical.io.value} does not accept prototype "
                f"io {spec.io.value}"))
        elif verdict is Compat.WARNING:
            findings.append(Finding(
                Severity.WARNING, Rule.IO_TYPE, locus,
                "physical io direction unknown; confirm the connection manually"))

        if physical.datatype is None:
            findings.append(Finding(
                Severity.WARNING, Rule.DATATYPE, locus,
                "physical datatype unknown; confirm the connection manually"))
        elif not physical.datatype.same_family(spec.dpt):
            findings.append(Finding(
                Severity.ERROR, Rule.DATATYPE, locus,
                f"datatypes must be equal: physical {physical.datatype}, "
                f"prototype {spec.dpt}"))

    for obj_id in sorted(by_object):
        members = by_object[obj_id]
        value_types = {spec.value_type for _, spec in members}
        if len(value_types) > 1:
            loci = ", ".join(locus for locus, _ in members)
            findings.append(Finding(
                Severity.ERROR, Rule.VALUE_TYPE, loci,
                f"channels sharing comm object {obj_id} (hence one group address) "
                f"carry different value types: "
                f"{sorted(t.value for t in value_types)}"))
        dpt_mains = {spec.dpt.main for _, spec in members}
        if len(dpt_mains) > 1:
            loci = ", ".join(locus for locus, _ in members)
            findings.append(Finding(
                Severity.ERROR, Rule.MUTUAL_DATATYPE, loci,
                f"channels sharing comm object {obj_id} disagree on the "
                f"datatype family: {sorted(dpt_mains)}"))
    return CompatReport(tuple(findings))


# ---------------------------------------------------------------------------
# Group address assignment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TableEntry:
    address: GroupAddress
    value_type: ValueType
    dpt: DptId
    comm_object_ids: tuple[int, ...]


@dataclass
class GroupAddressTable:
    entries: tuple[TableEntry, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def by_address(self) -> dict[GroupAddress, TableEntry]:
        return {entry.address: entry for entry in self.entries}

    def by_comm_object(self) -> dict[int, TableEntry]:
        return {obj_id: entry for entry in self.entries for obj_id in entry.comm_object_ids}

    def to_dict(self) -> dict:
        return {
            "entries": [
                {
                    "address": str(entry.address),
                    "valueType": entry.value_type.value,
                    "dpt": str(entry.dpt),
                    "commObjectIds": list(entry.comm_object_ids),
                }
                for entry in self.entries
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroupAddressTable":
        entries = tuple(
            TableEntry(
                address=GroupAddress.parse(e["address"]),
                value_type=ValueType(e["valueType"]),
                dpt=DptId.parse(e["dpt"]),
                comm_object_ids=tuple(e["commObjectIds"]),
            )
            for e in data["entries"]
        )
        return cls(entries)


def _nth_address(n: int) -> GroupAddress:
    """Allocation order: 0/0/1, 0/0/2, ... sub rolls into middle, middle into main."""
    if n >= MAX_GROUP_ADDRESSES:
        raise CapacityError(
            f"group address space exhausted: allocation {n + 1} of a maximum "
            f"of {MAX_GROUP_ADDRESSES - 1} (0/0/0 is reserved)")
    return GroupAddress.three_level(n >> 11, (n >> 8) & 0x7, n & 0xFF)


def assign_group_addresses(bindings: BindingSet, apps: list[AppPrototype],
                           phys: PhysicalStructure) -> GroupAddressTable:
    """One fresh 3-level address per distinct mapped physical comm object.

    Comm objects no app maps receive no address. Deterministic: allocation
    follows ascending comm-object id.
    """
    specs_by_object: dict[int, list[ChannelSpec]] = {}
    for app_name, instance, channel, obj_id in bindings.entries():
        if obj_id == UNBOUND:
            raise IncompleteBindingsError(f"{app_name}.{instance}.{channel} is unfilled (-1)")
        spec = _channel_spec(bindings.apps[app_name].instances[instance].device_type, channel)
        specs_by_object.setdefault(obj_id, []).append(spec)
    known_ids = phys.comm_object_ids()
    entries = []
    for n, obj_id in enumerate(sorted(specs_by_object), start=1):
        if obj_id not in known_ids:
            raise ResolutionError(f"physical comm object {obj_id} does not exist")
        specs = specs_by_object[obj_id]
        entries.append(TableEntry(
            address=_nth_address(n),
            value_type=specs[0].value_type,
            dpt=specs[0].dpt,
            comm_object_ids=(obj_id,),
        ))
    return GroupAddressTable(tuple(entries))


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------

ASSIGNMENT_CSV = "assignment.csv"
ASSIGNMENT_TXT = "assignment.txt"
ADDRESSES_FILENAME = "addresses.json"


def channel_address_map(app_name: str, bindings: BindingSet,
                        table: GroupAddressTable) -> dict[tuple[str, str], GroupAddress]:
    """(INSTANCE, channel) -> allocated group address, for one app."""
    by_object = table.by_comm_object()
    mapping = {}
    binding = bindings.apps[app_name]
    for instance, inst in binding.instances.items():
        for channel, obj_id in inst.channels.items():
            mapping[(instance, channel)] = by_object[obj_id].address
    return mapping


def addresses_json_content(app_name: str, bindings: BindingSet,
                           table: GroupAddressTable) -> dict:
    by_object = table.by_comm_object()
    content = {}
    binding = bindings.apps[app_name]
    for instance in sorted(binding.instances):
        inst = binding.instances[instance]
        for channel in sorted(inst.channels):
            entry = by_object[inst.channels[channel]]
            content[f"{instance}.{channel}"] = {
                "address": str(entry.address),
                "valueType": entry.value_type.value,
                "dpt": str(entry.dpt),
            }
    return content


def _address_names(bindings: BindingSet, table: GroupAddressTable) -> dict[GroupAddress, str]:
    by_object = table.by_comm_object()
    names: dict[GroupAddress, list[str]] = {}
    for app_name, instance, channel, obj_id in bindings.entries():
        address = by_object[obj_id].address
        names.setdefault(address, []).append(f"{app_name}_{instance.lower()}_{channel}")
    return {address: "__".join(sorted(parts)) for address, parts in names.items()}


def emit_artifacts(table: GroupAddressTable, apps: list[AppPrototype], bindings: BindingSet,
                   assignments_dir: str | Path,
                   app_dirs: dict[str, str | Path] | None = None) -> None:
    """Write assignment.csv, assignment.txt, and per-app addresses.json.

    The csv rows are ``address;name`` in ascending address order; names are
    derived from the app/instance/channel triples bound to the address so a
    human can tell what to wire in ETS.
    """
    assignments_dir = Path(assignments_dir)
    assignments_dir.mkdir(parents=True, exist_ok=True)
    names = _address_names(bindings, table)
    ordered = sorted(table.entries, key=lambda e: e.address)

    csv_lines = ["address;name"]
    csv_lines += [f"{entry.address};{names[entry.address]}" for entry in ordered]
    (assignments_dir / ASSIGNMENT_CSV).write_text("\n".join(csv_lines) + "\n", "utf-8")

    txt_lines = []
    for entry in ordered:
        txt_lines.append(
            f"comm object {entry.comm_object_ids[0]} -> {entry.address} "
            f"({entry.dpt}, {entry.value_type.value}) used by {names[entry.address]}")
    (assignments_dir / ASSIGNMENT_TXT).write_text(
        ("\n".join(txt_lines) + "\n") if txt_lines else "", "utf-8")

    if app_dirs:
        for proto in apps:
            if proto.name not in app_dirs:
                continue
            content = addresses_json_content(proto.name, bindings, table)
            Path(app_dirs[proto.name]).mkdir(parents=True, exist_ok=True)
            (Path(app_dirs[proto.name]) / ADDRESSES_FILENAME).write_text(
                json.dumps(content, indent=2, sort_keys=True) + "\n", "utf-8")
