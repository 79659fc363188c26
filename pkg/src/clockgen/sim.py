"""Behavioral simulator of the evaluation board.

Models the MCU firmware as an explicit state machine: a receive interrupt
accumulates command bytes and raises a flag variable; the main loop polls
the flags, performs the register access on the addressed device, and for
reads queues the one-byte response.  Time is counted in discrete ``step``
calls (one main-loop iteration each); a raised flag is always consumed
within five steps.

The board also exposes oracle views (:meth:`BoardState.query_outputs`,
:meth:`BoardState.query_rails`) that decode the stored register state into
achieved frequencies, phase offsets, and rail voltages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .config import StackConfig, default_config, load_pot_map, load_synth_map
from .errors import ProtocolError
from .power import plan_voltage
from .protocol import (
    Action,
    BridgeCommand,
    COMMAND_LENGTH,
    decode_command,
    encode_read_response,
)
from .readout import ChannelStatus, decode_outputs, decode_rails
from .registers import RegisterFile, RegisterMap

ABSENT_DEVICE_VALUE = 0xFF
DISPATCH_STEP_BOUND = 5


class Phase(Enum):
    STARTUP = "startup"
    POWER_INIT = "power-init"
    MAIN_LOOP = "main-loop"


@dataclass
class DispatchRecord:
    """One executed command, with the ticks its flag was raised and served."""

    command: BridgeCommand
    flag_set_tick: int
    dispatch_tick: int


@dataclass
class FirmwareState:
    """Flags, buffers, and queues of the simulated MCU."""

    phase: Phase = Phase.STARTUP
    flag_write: bool = False
    flag_read: bool = False
    pending: BridgeCommand | None = None
    rx_buffer: bytearray = field(default_factory=bytearray)
    tx_queue: bytearray = field(default_factory=bytearray)
    step_counter: int = 0
    flag_set_tick: int = 0

    @property
    def flag_raised(self) -> bool:
        return self.flag_write or self.flag_read

    def clear_queues(self) -> None:
        self.flag_write = self.flag_read = False
        self.pending = None
        self.rx_buffer.clear()
        self.tx_queue.clear()


class BoardState:
    """The whole evaluation board: register files per I2C device plus the
    firmware state machine bridging the byte stream onto them."""

    def __init__(
        self,
        synth_map: RegisterMap | None = None,
        config: StackConfig | None = None,
        pot_map: RegisterMap | None = None,
    ):
        self.config = config or default_config()
        self.synth_map = synth_map if synth_map is not None else load_synth_map()
        self.pot_map = pot_map if pot_map is not None else load_pot_map()
        self.f_in: Fraction = self.config.constraints.f_in
        self.firmware = FirmwareState()
        self.dispatch_log: list[DispatchRecord] = []
        self.devices: dict[int, RegisterFile] = {
            self.config.synth_address: RegisterFile.from_map(self.synth_map)
        }
        for rail in self.config.rails:
            if rail.pot_address == self.config.synth_address:
                raise ValueError("pot shares the synthesizer's i2c address")
            self.devices.setdefault(rail.pot_address, RegisterFile.from_map(self.pot_map))

    # -- firmware lifecycle -------------------------------------------------

    def boot(self) -> None:
        """Run startup and power-init, then enter the main loop.

        Register files return to reset values and the default rail codes are
        programmed.  Bytes already received stay buffered: commands ingested
        before the main loop are executed first thing once it runs.
        """
        fw = self.firmware
        # startup: reset register state, drop half-processed work
        for device in self.devices.values():
            device.reset()
        pending_rx = bytes(fw.rx_buffer)
        fw.clear_queues()
        fw.rx_buffer.extend(pending_rx)
        fw.step_counter = 0
        self.dispatch_log.clear()
        # power-init: program every rail to its configured default
        fw.phase = Phase.POWER_INIT
        for rail in self.config.rails:
            setting = plan_voltage(rail, rail.v_default)
            register = self.pot_map.field(f"wiper{rail.pot_channel}").address
            self.devices[rail.pot_address].write(register, setting.code)
        fw.phase = Phase.MAIN_LOOP

    def ingest_byte(self, byte: int) -> None:
        """Receive-interrupt analogue: buffer one byte; once four are
        pending and no flag is raised, decode them and raise the flag."""
        if not 0 <= byte <= 0xFF:
            raise ValueError(f"byte {byte} outside 0..255")
        self.firmware.rx_buffer.append(byte)
        self._frame()

    def ingest(self, data: bytes) -> None:
        for byte in data:
            self.ingest_byte(byte)

    def _frame(self) -> None:
        """Frame complete commands while no flag is raised.

        Undecodable frames (bad opcode, out-of-range address) discard their
        four bytes silently: the wire protocol has no error channel, exactly
        like an I2C master seeing a NACK.
        """
        fw = self.firmware
        if fw.phase is not Phase.MAIN_LOOP:
            return
        while not fw.flag_raised and len(fw.rx_buffer) >= COMMAND_LENGTH:
            frame = bytes(fw.rx_buffer[:COMMAND_LENGTH])
            del fw.rx_buffer[:COMMAND_LENGTH]
            try:
                command = decode_command(frame)
            except ProtocolError:
                continue
            fw.pending = command
            fw.flag_set_tick = fw.step_counter
            if command.action is Action.WRITE:
                fw.flag_write = True
            else:
                fw.flag_read = True

    def step(self) -> None:
        """One main-loop iteration: serve a raised flag, if any."""
        fw = self.firmware
        if fw.phase is not Phase.MAIN_LOOP:
            raise RuntimeError("step() requires the firmware main loop (boot first)")
        fw.step_counter += 1
        if not fw.flag_raised:
            self._frame()
        if not fw.flag_raised:
            return
        command = fw.pending
        device = self.devices.get(command.i2c_address)
        if fw.flag_write:
            if device is not None:
                device.write(command.register, command.payload)
            fw.flag_write = False
        else:
            value = device.read(command.register) if device is not None \
                else ABSENT_DEVICE_VALUE
            fw.tx_queue.extend(encode_read_response(value))
            fw.flag_read = False
        fw.pending = None
        self.dispatch_log.append(
            DispatchRecord(command, fw.flag_set_tick, fw.step_counter)
        )

    def run_until_idle(self, limit: int = 100_000) -> None:
        """Step until no flag is raised and no complete command is buffered."""
        fw = self.firmware
        for _ in range(limit):
            if not fw.flag_raised and len(fw.rx_buffer) < COMMAND_LENGTH:
                return
            self.step()
        raise RuntimeError("simulator failed to go idle")

    def take_output(self) -> bytes:
        """Drain queued read responses, oldest first."""
        out = bytes(self.firmware.tx_queue)
        self.firmware.tx_queue.clear()
        return out

    # -- oracle views --------------------------------------------------------

    def query_outputs(self) -> list[ChannelStatus]:
        """Decode divider/phase/enable registers into per-channel status."""
        synth = self.devices[self.config.synth_address]
        return decode_outputs(synth.read, self.synth_map, self.config.constraints)

    def query_rails(self) -> dict[int, Fraction]:
        """Predicted volts per rail from the stored wiper codes."""
        return decode_rails(
            lambda address, register: self.devices[address].read(register),
            self.config.rails,
            self.pot_map,
        )
