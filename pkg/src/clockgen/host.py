"""Layered host stack above the transport.

The bridge layer packs register reads and writes into wire commands, one
command per call, and is the only path to the transport.  The device layer
on top exposes the operator-facing operations: frequency, phase, output
enables, and rail voltages.  All device operations are synchronous and
idempotent; repeating one leaves identical register state.
"""

from __future__ import annotations

from fractions import Fraction

from .config import StackConfig, load_config, load_pot_map, load_synth_map
from .errors import InconsistentEncodingError, NoPlanError
from .planner import (
    FrequencyLike,
    FrequencyPlan,
    PhasePlan,
    apply_plan,
    decode_divider,
    phase_step_byte,
    plan_frequency,
    plan_phase,
    write_fields,
)
from .power import SupplySetting, apply_supply, plan_voltage
from .protocol import RESPONSE_LENGTH, BridgeCommand, encode_command
from .readout import ChannelStatus, decode_outputs, decode_rails
from .registers import RegisterMap
from .transport import SessionConfig, SimulatorHost, open_session


class BridgeClient:
    """Register access over an open session: read, write, and close.

    Each call maps one-to-one onto a wire command; reads block until the
    single response byte arrives or the session times out.
    """

    def __init__(self, session):
        self._session = session

    def write_register(self, device: int, register: int, value: int) -> None:
        self._session.write_bytes(
            encode_command(BridgeCommand.write(device, register, value))
        )

    def read_register(self, device: int, register: int) -> int:
        self._session.write_bytes(
            encode_command(BridgeCommand.read(device, register))
        )
        return self._session.read_bytes(RESPONSE_LENGTH)[0]

    def close(self) -> None:
        self._session.close()


class DeviceHandle:
    """Device-layer client for one board.

    Holds the open bridge, the register maps, and the planning
    configuration.  Never touches the transport except through the bridge.
    """

    def __init__(self, bridge: BridgeClient, synth_map: RegisterMap,
                 config: StackConfig, pot_map: RegisterMap):
        self.bridge = bridge
        self.synth_map = synth_map
        self.config = config
        self.pot_map = pot_map
        self._plans: dict[int, FrequencyPlan] = {}

    @property
    def constraints(self):
        return self.config.constraints

    @property
    def synth_address(self) -> int:
        return self.config.synth_address

    def close(self) -> None:
        self.bridge.close()

    # -- clock outputs -------------------------------------------------------

    def set_frequency(self, channel: int, f_target: FrequencyLike) -> FrequencyPlan:
        """Plan and program ``channel`` to ``f_target`` Hz; returns the plan.

        Re-plans and rewrites the feedback registers even when unchanged;
        the phase step returns to zero because a retune changes the step
        quantum.
        """
        plan = plan_frequency(self.constraints.f_in, f_target, channel,
                              self.constraints)
        apply_plan(self.bridge, self.synth_map, plan, None, channel,
                   self.synth_address)
        self._plans[channel] = plan
        return plan

    def set_phase(
        self,
        channel: int,
        seconds: FrequencyLike | None = None,
        degrees: FrequencyLike | None = None,
    ) -> PhasePlan:
        """Quantize and program a phase offset on a previously planned channel."""
        phase = plan_phase(self._current_plan(channel), seconds=seconds,
                           degrees=degrees,
                           step_limit=self.constraints.phase_step_limit)
        write_fields(
            self.bridge,
            self.synth_address,
            self.synth_map.pack(f"ms{channel}_phstep", phase_step_byte(phase.steps)),
        )
        return phase

    def _current_plan(self, channel: int) -> FrequencyPlan:
        """The channel's plan; recovered from device registers when this
        handle never programmed it (the registers are the state of record
        across invocations)."""
        plan = self._plans.get(channel)
        if plan is not None:
            return plan
        cons = self.constraints
        synth = self.synth_address

        def read(register: int) -> int:
            return self.bridge.read_register(synth, register)

        try:
            feedback = decode_divider(
                self.synth_map.unpack("fb_p1", read),
                self.synth_map.unpack("fb_p2", read),
                self.synth_map.unpack("fb_p3", read),
                int_range=(cons.fb_int_min, cons.fb_int_max),
            )
            output = decode_divider(
                self.synth_map.unpack(f"ms{channel}_p1", read),
                self.synth_map.unpack(f"ms{channel}_p2", read),
                self.synth_map.unpack(f"ms{channel}_p3", read),
                int_range=(cons.ms_int_min, cons.ms_int_max),
            )
        except InconsistentEncodingError:
            raise NoPlanError(
                f"channel {channel} has no frequency plan yet"
            ) from None
        f_vco = cons.f_in * feedback.value
        if not cons.vco_min <= f_vco <= cons.vco_max:
            raise NoPlanError(f"channel {channel} registers hold no usable plan")
        f_achieved = f_vco / output.value
        plan = FrequencyPlan(
            f_in=cons.f_in,
            f_target=f_achieved,
            feedback=feedback,
            output=output,
            f_vco=f_vco,
            f_achieved=f_achieved,
            rel_error=Fraction(0),
            channel=channel,
        )
        self._plans[channel] = plan
        return plan

    def enable_output(self, channel: int, on: bool) -> None:
        """Toggle one channel's enable bit, leaving every other bit alone."""
        write_fields(
            self.bridge,
            self.synth_address,
            self.synth_map.pack(f"clk{channel}_en", 1 if on else 0),
        )

    # -- power rails -----------------------------------------------------------

    def set_rail_voltage(self, rail_id: int, v_target) -> SupplySetting:
        """Plan the nearest wiper code for ``v_target`` and store it."""
        rail = self.config.rail(rail_id)
        setting = plan_voltage(rail, v_target)
        apply_supply(self.bridge, rail, setting, self.pot_map)
        return setting

    # -- readback ----------------------------------------------------------------

    def read_outputs(self) -> list[ChannelStatus]:
        """Per-channel status decoded from registers read over the bridge."""
        synth = self.synth_address
        return decode_outputs(
            lambda register: self.bridge.read_register(synth, register),
            self.synth_map,
            self.constraints,
        )

    def read_rails(self) -> dict[int, Fraction]:
        """Per-rail predicted volts from wiper codes read over the bridge."""
        return decode_rails(self.bridge.read_register, self.config.rails,
                            self.pot_map)


def bridge_init(
    session_config: SessionConfig,
    map_path=None,
    config_path=None,
    simulator: SimulatorHost | None = None,
) -> DeviceHandle:
    """Open a session, load the register maps and configuration, and return
    a ready device handle."""
    config = load_config(config_path)
    synth_map = load_synth_map(map_path)
    pot_map = load_pot_map()
    session = open_session(session_config, simulator)
    return DeviceHandle(BridgeClient(session), synth_map, config, pot_map)
