"""The physical installation: devices, addresses, and communication objects.

This is the stand-in for an ETS project export. The on-disk form is
``physical_structure.json``:

    {"devices": [{"name": ..., "address": "A.L.D",
                  "commObjects": [{"id": ..., "name": ...,
                                   "dpt": "DPT-9" | "unknown",
                                   "io": "in" | "out" | "in/out" | "unknown"}]}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import CapacityError, RangeError, ValidationError
from .wire import DptId, IndividualAddress

MAX_DEVICES_PER_LINE = 64


class IoType(Enum):
    """Direction of a communication object as seen from the bus."""

    IN = "in"
    OUT = "out"
    IN_OUT = "in/out"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: str) -> "IoType":
        for member in cls:
            if member.value == text:
                return member
        raise ValidationError(f"unknown io type {text!r}")


@dataclass(frozen=True)
class PhysicalCommObject:
    """One IO port a physical device exposes; ids are unique installation-wide."""

    id: int
    name: str
    datatype: DptId | None  # None = unknown
    io: IoType

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValidationError(f"comm object id must be non-negative, got {self.id}")


@dataclass(frozen=True)
class PhysicalDevice:
    name: str
    address: IndividualAddress
    comm_objects: tuple[PhysicalCommObject, ...]


@dataclass(frozen=True)
class PhysicalStructure:
    """A validated installation; immutable after parse, safe to share."""

    devices: tuple[PhysicalDevice, ...]

    def comm_object(self, obj_id: int) -> PhysicalCommObject:
        for device in self.devices:
            for obj in device.comm_objects:
                if obj.id == obj_id:
                    return obj
        raise KeyError(obj_id)

    def comm_object_ids(self) -> set[int]:
        return {obj.id for dev in self.devices for obj in dev.comm_objects}

    def validate(self) -> "PhysicalStructure":
        seen_ids: dict[int, str] = {}
        seen_addresses: set[IndividualAddress] = set()
        per_line: dict[tuple[int, int], int] = {}
        for device in self.devices:
            if device.address in seen_addresses:
                raise ValidationError(f"duplicate individual address {device.address}")
            seen_addresses.add(device.address)
            key = (device.address.area, device.address.line)
            per_line[key] = per_line.get(key, 0) + 1
            if per_line[key] > MAX_DEVICES_PER_LINE:
                raise CapacityError(
                    f"line {key[0]}.{key[1]} holds more than {MAX_DEVICES_PER_LINE} devices")
            for obj in device.comm_objects:
                if obj.id in seen_ids:
                    raise ValidationError(
                        f"comm object id {obj.id} used by both "
                        f"{seen_ids[obj.id]!r} and {device.name!r}")
                seen_ids[obj.id] = device.name
        return self


def _comm_object_from_dict(data: dict) -> PhysicalCommObject:
    dpt_text = data.get("dpt", "unknown")
    datatype = None if dpt_text == "unknown" else DptId.parse(dpt_text)
    return PhysicalCommObject(
        id=int(data["id"]),
        name=str(data.get("name", "")),
        datatype=datatype,
        io=IoType.parse(data.get("io", "unknown")),
    )


def structure_from_dict(data: dict) -> PhysicalStructure:
    if not isinstance(data, dict) or "devices" not in data:
        raise ValidationError("physical structure must be an object with a 'devices' list")
    devices = []
    for entry in data["devices"]:
        devices.append(PhysicalDevice(
            name=str(entry["name"]),
            address=IndividualAddress.parse(entry["address"]),
            comm_objects=tuple(_comm_object_from_dict(c) for c in entry.get("commObjects", [])),
        ))
    return PhysicalStructure(tuple(devices)).validate()


def structure_to_dict(structure: PhysicalStructure) -> dict:
    return {
        "devices": [
            {
                "name": device.name,
                "address": str(device.address),
                "commObjects": [
                    {
                        "id": obj.id,
                        "name": obj.name,
                        "dpt": "unknown" if obj.datatype is None else str(obj.datatype),
                        "io": obj.io.value,
                    }
                    for obj in device.comm_objects
                ],
            }
            for device in structure.devices
        ]
    }


def parse_physical_structure(path: str | Path) -> PhysicalStructure:
    """Load and validate an installation file.

    Raises ValidationError for duplicate ids/addresses, RangeError for bad
    addresses, CapacityError past 64 devices on one line.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such installation file: {path}")
    try:
        data = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return structure_from_dict(data)


def serialize_physical_structure(structure: PhysicalStructure, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(structure_to_dict(structure), indent=2, sort_keys=True) + "\n", "utf-8")


def _canonical(structure: PhysicalStructure):
    devices = []
    for device in sorted(structure.devices, key=lambda d: (d.address, d.name)):
        objs = tuple(sorted(
            ((o.id, o.datatype.main if o.datatype else None, o.io) for o in device.comm_objects)))
        devices.append((device.name, device.address, objs))
    return tuple(devices)


def structures_equal(a: PhysicalStructure, b: PhysicalStructure) -> bool:
    """Content equality, insensitive to ordering.

    Compares device names and addresses, comm-object ids, datatype families,
    and io types. Comm-object display names are cosmetic and ignored.
    """
    return _canonical(a) == _canonical(b)
