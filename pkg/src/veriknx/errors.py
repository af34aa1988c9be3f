"""Exception hierarchy shared by all veriknx modules."""


class VeriknxError(Exception):
    """Base class for every error raised by this package."""


class RangeError(VeriknxError, ValueError):
    """A numeric field or component is outside its permitted range."""


class ValidationError(VeriknxError, ValueError):
    """Structured input violates an invariant (duplicate ids, bad names, ...)."""


class CapacityError(VeriknxError):
    """A hard capacity limit was hit (devices per line, address space)."""


class UnsupportedDeviceError(ValidationError):
    """An app prototype names a device kind this platform does not support."""


class NamingError(ValidationError):
    """An app or instance name violates the naming rules."""


class ConflictError(VeriknxError):
    """The destination of a generation step already exists."""


class WireError(VeriknxError):
    """Base class for wire-level encode/decode failures."""


class EncodeError(WireError):
    """A value cannot be represented in the target wire format."""


class DecodeError(WireError):
    """A byte sequence cannot be decoded."""


class FramingError(DecodeError):
    """Truncated or trailing bytes: the frame structure itself is broken."""


class IntegrityError(DecodeError):
    """The frame parses but its checksum does not match."""


class ParseError(VeriknxError):
    """Syntax error in a DSL program; carries source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


class UnsupportedConstructError(ParseError):
    """The program uses a construct the DSL deliberately excludes (loops)."""


class TypecheckError(VeriknxError):
    """A parsed program fails type checking."""


class PurityError(TypecheckError):
    """The invariant calls an unchecked function."""


class SideEffectError(TypecheckError):
    """The invariant performs a write or a write appears in expression position."""


class ResolutionError(TypecheckError):
    """Reference to an unknown device, channel, register, or function."""


class LinearityError(TypecheckError):
    """Arithmetic is not linear (variable times variable)."""


class ConfigurationError(VeriknxError):
    """A required runtime hook (unchecked implementation) is missing."""


class UncheckedReturnError(VeriknxError):
    """An unchecked implementation returned a value of the wrong type."""


class IncompleteBindingsError(VeriknxError):
    """A channel binding is still -1 (unfilled)."""


class StartupError(VeriknxError):
    """The runtime could not start (bus unreachable, read timeout)."""


class SoundnessError(VeriknxError):
    """Internal check failed: a counterexample did not replay to a violation."""


class SolverLimitError(VeriknxError):
    """The integer branch-and-bound exceeded its split cap (documented safety valve)."""


class NotFoundError(VeriknxError):
    """A named app does not exist in the library."""


class NothingToBindError(VeriknxError):
    """generateBindings was invoked with no apps in generated/."""


class NothingToRunError(VeriknxError):
    """run was invoked with an empty library."""
