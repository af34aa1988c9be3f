"""App prototypes, supported device kinds, app-state registers, skeletons.

A prototype file (``app_prototypical_structure.json``) looks like:

    {"permissionLevel": "notPrivileged", "timer": 60,
     "files": ["model.bin"],
     "devices": [{"name": "humidity_sensor", "deviceType": "humidity"}]}

Device instance names are lowercase identifiers in the prototype and appear
uppercased in the app program (``humidity_sensor`` -> ``HUMIDITY_SENSOR``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

from .errors import ConflictError, NamingError, RangeError, UnsupportedDeviceError, ValidationError
from .physical import IoType
from .wire import DPT_BOOL, DPT_FLOAT16, DptId


class ValueType(Enum):
    """The abstract value a channel or register carries."""

    BOOL = "bool"
    INT = "int"
    REAL = "real"
    STR = "str"


class PermissionLevel(Enum):
    PRIVILEGED = "privileged"
    NOT_PRIVILEGED = "notPrivileged"


@dataclass(frozen=True)
class ChannelSpec:
    """One channel of a device kind: name, direction, value type, datatype."""

    name: str
    io: IoType
    value_type: ValueType
    dpt: DptId


@dataclass(frozen=True)
class DeviceKind:
    """A supported prototypical device kind with its fixed channel schema."""

    kind: str
    channels: tuple[ChannelSpec, ...]
    readable: bool = True
    writable: bool = False

    def channel(self, name: str) -> ChannelSpec:
        for channel in self.channels:
            if channel.name == name:
                return channel
        raise KeyError(name)

    @property
    def primary_channel(self) -> ChannelSpec:
        return self.channels[0]


SUPPORTED_KINDS: dict[str, DeviceKind] = {
    "binary": DeviceKind("binary", (ChannelSpec("state", IoType.IN, ValueType.BOOL, DPT_BOOL),)),
    "temperature": DeviceKind(
        "temperature", (ChannelSpec("read", IoType.IN, ValueType.REAL, DPT_FLOAT16),)),
    "humidity": DeviceKind(
        "humidity", (ChannelSpec("read", IoType.IN, ValueType.REAL, DPT_FLOAT16),)),
    "co2": DeviceKind("co2", (ChannelSpec("read", IoType.IN, ValueType.REAL, DPT_FLOAT16),)),
    "switch": DeviceKind(
        "switch", (ChannelSpec("state", IoType.IN_OUT, ValueType.BOOL, DPT_BOOL),),
        writable=True),
}

_APP_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_INSTANCE_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class AppPrototype:
    """What an app declares before it is written: devices, permission, timer."""

    name: str
    permission: PermissionLevel
    timer: int
    files: tuple[str, ...]
    devices: tuple[tuple[str, str], ...]  # (instance name, device kind)

    @property
    def privileged(self) -> bool:
        return self.permission is PermissionLevel.PRIVILEGED

    def instance_names(self) -> tuple[str, ...]:
        """Uppercased instance names as they appear in the app program."""
        return tuple(name.upper() for name, _ in self.devices)

    def kind_of(self, instance: str) -> DeviceKind:
        for name, kind in self.devices:
            if name.upper() == instance:
                return SUPPORTED_KINDS[kind]
        raise KeyError(instance)


def validate_app_name(name: str) -> str:
    if not _APP_NAME_RE.match(name):
        raise NamingError(
            f"app name must be a short all-lowercase identifier "
            f"(underscores allowed), got {name!r}")
    return name


def prototype_from_dict(name: str, data: dict) -> AppPrototype:
    validate_app_name(name)
    try:
        permission = PermissionLevel(data["permissionLevel"])
    except (KeyError, ValueError):
        raise ValidationError(
            f"permissionLevel must be 'privileged' or 'notPrivileged', "
            f"got {data.get('permissionLevel')!r}") from None
    timer = data.get("timer", 0)
    if not isinstance(timer, int) or isinstance(timer, bool) or timer < 0:
        raise RangeError(f"timer must be a non-negative integer, got {timer!r}")
    devices = []
    seen: set[str] = set()
    for entry in data.get("devices", []):
        instance = str(entry["name"])
        kind = str(entry["deviceType"])
        if kind not in SUPPORTED_KINDS:
            raise UnsupportedDeviceError(
                f"unsupported deviceType {kind!r} "
                f"(supported: {', '.join(sorted(SUPPORTED_KINDS))})")
        if not _INSTANCE_NAME_RE.match(instance):
            raise ValidationError(
                f"device name {instance!r} is not a valid identifier")
        if instance.upper() in seen:
            raise ValidationError(f"duplicate device name {instance!r}")
        seen.add(instance.upper())
        devices.append((instance, kind))
    return AppPrototype(
        name=name,
        permission=permission,
        timer=timer,
        files=tuple(str(f) for f in data.get("files", [])),
        devices=tuple(devices),
    )


def prototype_to_dict(proto: AppPrototype) -> dict:
    return {
        "permissionLevel": proto.permission.value,
        "timer": proto.timer,
        "files": list(proto.files),
        "devices": [{"name": name, "deviceType": kind} for name, kind in proto.devices],
    }


def parse_app_prototype(path: str | Path, name: str | None = None) -> AppPrototype:
    """Load a prototype file; the app name defaults to the parent directory name."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such prototype file: {path}")
    try:
        data = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return prototype_from_dict(name or path.parent.name, data)


# ---------------------------------------------------------------------------
# App state registers
# ---------------------------------------------------------------------------


@dataclass
class AppState:
    """An app's only persistent storage: four fixed registers per type."""

    INT_0: int = 0
    INT_1: int = 0
    INT_2: int = 0
    INT_3: int = 0
    FLOAT_0: float = 0.0
    FLOAT_1: float = 0.0
    FLOAT_2: float = 0.0
    FLOAT_3: float = 0.0
    BOOL_0: bool = False
    BOOL_1: bool = False
    BOOL_2: bool = False
    BOOL_3: bool = False
    STR_0: str = ""
    STR_1: str = ""
    STR_2: str = ""
    STR_3: str = ""

    def copy(self) -> "AppState":
        return replace(self)


REGISTER_NAMES: tuple[str, ...] = tuple(f.name for f in fields(AppState))

_REGISTER_TYPES = {"INT": ValueType.INT, "FLOAT": ValueType.REAL,
                   "BOOL": ValueType.BOOL, "STR": ValueType.STR}


def register_type(register: str) -> ValueType:
    """Value type of an app-state register name; KeyError for unknown names."""
    if register in REGISTER_NAMES:
        return _REGISTER_TYPES[register.rsplit("_", 1)[0]]
    raise KeyError(register)


# ---------------------------------------------------------------------------
# Skeleton generation
# ---------------------------------------------------------------------------

PROTOTYPE_FILENAME = "app_prototypical_structure.json"
PROGRAM_FILENAME = "main.app"


def render_skeleton(proto: AppPrototype) -> str:
    """The stub program: declared devices, invariant true, empty iteration."""
    lines = [f"device {name.upper()}: {kind}" for name, kind in proto.devices]
    if lines:
        lines.append("")
    lines += ["invariant: true", "", "iteration: {", "}", ""]
    return "\n".join(lines)


def generate_app_skeleton(proto: AppPrototype, dest_dir: str | Path) -> Path:
    """Create ``<dest_dir>/<name>/`` with main.app and the prototype file.

    Deterministic: the same prototype always produces byte-identical files.
    Raises ConflictError if the project directory already exists.
    """
    validate_app_name(proto.name)
    project = Path(dest_dir) / proto.name
    if project.exists():
        raise ConflictError(f"{project} already exists; remove it before regenerating")
    project.mkdir(parents=True)
    (project / PROGRAM_FILENAME).write_text(render_skeleton(proto), "utf-8")
    (project / PROTOTYPE_FILENAME).write_text(
        json.dumps(prototype_to_dict(proto), indent=2) + "\n", "utf-8")
    return project
