"""Decode register state into output and rail status.

Shared by the simulator's query operations (reading its own register files)
and the host's readback (reading over the wire); both views therefore agree
by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import InconsistentEncodingError
from .planner import (
    CHANNEL_COUNT,
    PlannerConstraints,
    decode_divider,
    phase_steps_from_byte,
)
from .power import RailModel
from .registers import RegisterMap


@dataclass(frozen=True)
class ChannelStatus:
    """Observable state of one output channel.

    ``f_out`` and ``phase_offset`` are exact rationals, present only when
    the channel is enabled and its register configuration is decodable;
    ``problem`` names the misconfiguration otherwise.
    """

    channel: int
    enabled: bool
    f_out: Fraction | None
    phase_offset: Fraction | None
    problem: str | None


def decode_outputs(
    read: Callable[[int], int],
    regmap: RegisterMap,
    constraints: PlannerConstraints,
) -> list[ChannelStatus]:
    """Compute per-channel status from synthesizer registers via ``read``."""
    cons = constraints
    feedback_problem = None
    f_vco = None
    try:
        fb = decode_divider(
            regmap.unpack("fb_p1", read),
            regmap.unpack("fb_p2", read),
            regmap.unpack("fb_p3", read),
            int_range=(cons.fb_int_min, cons.fb_int_max),
        )
    except InconsistentEncodingError:
        feedback_problem = "invalid feedback divider"
    else:
        f_vco = cons.f_in * fb.value
        if not cons.vco_min <= f_vco <= cons.vco_max:
            feedback_problem = "vco frequency outside window"
            f_vco = None

    channels = []
    for k in range(CHANNEL_COUNT):
        enabled = (
            regmap.unpack(f"clk{k}_en", read) == 1
            and regmap.unpack(f"clk{k}_pdn", read) == 0
        )
        problem = feedback_problem
        f_out = phase_offset = None
        if problem is None:
            try:
                divider = decode_divider(
                    regmap.unpack(f"ms{k}_p1", read),
                    regmap.unpack(f"ms{k}_p2", read),
                    regmap.unpack(f"ms{k}_p3", read),
                    int_range=(cons.ms_int_min, cons.ms_int_max),
                )
            except InconsistentEncodingError:
                problem = "invalid output divider"
            else:
                if enabled:
                    steps = phase_steps_from_byte(regmap.unpack(f"ms{k}_phstep", read))
                    f_out = f_vco / divider.value
                    phase_offset = steps * (1 / f_vco)
        channels.append(ChannelStatus(k, enabled, f_out, phase_offset, problem))
    return channels


def decode_rails(
    read: Callable[[int, int], int],
    rails: Sequence[RailModel],
    pot_map: RegisterMap,
) -> dict[int, Fraction]:
    """Predicted volts per rail from stored wiper codes.

    ``read(i2c_address, register)`` fetches one pot register.
    """
    volts = {}
    for rail in rails:
        register = pot_map.field(f"wiper{rail.pot_channel}").address
        code = read(rail.pot_address, register)
        volts[rail.rail_id] = rail.predict(code)
    return volts
