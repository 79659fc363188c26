"""Bit-exact codec for the 4-byte bridge command and the 1-byte read response.

Every transaction crossing the bridge is a fixed 4-byte frame:

    byte 0   opcode: 0xFF = write, 0x00 = read
    byte 1   7-bit I2C address of the target device (unshifted)
    byte 2   register address inside the target device
    byte 3   value to write (transmitted as 0x00 for reads)

A read is answered by exactly one byte carrying the register value; there
is no status or echo byte.  Fixed-length frames keep the byte stream
self-delimiting over any transport.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import FramingError, InvalidOpcodeError

WRITE_OPCODE = 0xFF
READ_OPCODE = 0x00
COMMAND_LENGTH = 4
RESPONSE_LENGTH = 1


class Action(Enum):
    WRITE = "write"
    READ = "read"


@dataclass(frozen=True)
class BridgeCommand:
    """One register read or write crossing the bridge.

    ``payload`` carries the write value; for reads it is normalized to 0x00
    (the wire transmits the byte but the device ignores it).
    """

    action: Action
    i2c_address: int
    register: int
    payload: int = 0x00

    def __post_init__(self):
        if not 0 <= self.i2c_address <= 0x7F:
            raise ValueError(
                f"i2c address 0x{self.i2c_address:02X} outside 7-bit range"
            )
        if not 0 <= self.register <= 0xFF:
            raise ValueError(f"register address {self.register} outside 0..255")
        if not 0 <= self.payload <= 0xFF:
            raise ValueError(f"payload {self.payload} outside 0..255")
        if self.action is Action.READ and self.payload != 0x00:
            object.__setattr__(self, "payload", 0x00)

    @classmethod
    def write(cls, i2c_address: int, register: int, value: int) -> "BridgeCommand":
        return cls(Action.WRITE, i2c_address, register, value)

    @classmethod
    def read(cls, i2c_address: int, register: int) -> "BridgeCommand":
        return cls(Action.READ, i2c_address, register)


def encode_command(cmd: BridgeCommand) -> bytes:
    """Serialize a command to its 4-byte frame."""
    opcode = WRITE_OPCODE if cmd.action is Action.WRITE else READ_OPCODE
    return bytes((opcode, cmd.i2c_address, cmd.register, cmd.payload))


def decode_command(data: bytes) -> BridgeCommand:
    """Parse a 4-byte frame.  Inverse of :func:`encode_command` on its range.

    Total over 4-byte inputs: anything that is not a valid frame raises a
    typed error, never crashes.  A read's payload byte is ignored and
    normalized to 0x00.
    """
    if len(data) != COMMAND_LENGTH:
        raise FramingError(f"command frame must be {COMMAND_LENGTH} bytes, got {len(data)}")
    opcode, address, register, payload = data
    if opcode == WRITE_OPCODE:
        action = Action.WRITE
    elif opcode == READ_OPCODE:
        action = Action.READ
        payload = 0x00
    else:
        raise InvalidOpcodeError(f"unknown opcode 0x{opcode:02X}")
    if address > 0x7F:
        raise FramingError(f"i2c address 0x{address:02X} outside 7-bit range")
    return BridgeCommand(action, address, register, payload)


def encode_read_response(value: int) -> bytes:
    """Serialize the 1-byte answer to a read command."""
    if not 0 <= value <= 0xFF:
        raise ValueError(f"response value {value} outside 0..255")
    return bytes((value,))


def decode_read_response(data: bytes) -> int:
    if len(data) != RESPONSE_LENGTH:
        raise FramingError(f"read response must be {RESPONSE_LENGTH} byte, got {len(data)}")
    return data[0]
