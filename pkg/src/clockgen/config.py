"""Key = value configuration files and access to the packaged defaults.

One file carries both the planner constraint parameters and the supply-rail
models.  Lines look like::

    f_in_hz = 25000000
    rail0_pot_address = 0x2C
    rail0_v_default = 3.3

``#`` starts a comment.  Unknown keys are rejected (they are almost always
typos).  Omitted keys fall back to the compiled-in defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .planner import PlannerConstraints
from .power import RailModel
from .registers import RegisterMap, parse_register_map

DEFAULT_SYNTH_ADDRESS = 0x70
DEFAULT_TCP_PORT = 53380

# constraint keys: config name -> (dataclass field, parser)
_FRACTION = "fraction"
_INT = "int"
_CONSTRAINT_KEYS = {
    "f_in_hz": ("f_in", _FRACTION),
    "vco_min_hz": ("vco_min", _FRACTION),
    "vco_max_hz": ("vco_max", _FRACTION),
    "fb_int_min": ("fb_int_min", _INT),
    "fb_int_max": ("fb_int_max", _INT),
    "ms_int_min": ("ms_int_min", _INT),
    "ms_int_max": ("ms_int_max", _INT),
    "max_denominator": ("max_denominator", _INT),
    "phase_step_limit": ("phase_step_limit", _INT),
    "f_out_min_hz": ("f_out_min", _FRACTION),
    "f_out_max_hz": ("f_out_max", _FRACTION),
}

_RAIL_KEYS = {
    "pot_address": _INT,
    "pot_channel": _INT,
    "v_ref": _FRACTION,
    "r_fixed": _FRACTION,
    "r_ab": _FRACTION,
    "r_wiper": _FRACTION,
    "v_default": _FRACTION,
}

_DEFAULT_RAIL_PLAN = (
    # rail_id, pot_address, pot_channel, v_default
    (0, 0x2C, 0, "3.3"),
    (1, 0x2C, 1, "3.3"),
    (2, 0x2C, 2, "2.5"),
    (3, 0x2C, 3, "2.5"),
    (4, 0x2D, 0, "1.8"),
)


@dataclass(frozen=True)
class StackConfig:
    """Everything the host stack and the simulator share."""

    constraints: PlannerConstraints
    rails: tuple[RailModel, ...]
    synth_address: int = DEFAULT_SYNTH_ADDRESS

    def rail(self, rail_id: int) -> RailModel:
        for rail in self.rails:
            if rail.rail_id == rail_id:
                return rail
        raise ConfigError(f"rail {rail_id} is not configured")


def default_rails() -> tuple[RailModel, ...]:
    return tuple(
        RailModel(rail_id=rid, pot_address=addr, pot_channel=ch,
                  v_default=Fraction(vd))
        for rid, addr, ch, vd in _DEFAULT_RAIL_PLAN
    )


def default_config() -> StackConfig:
    return StackConfig(constraints=PlannerConstraints(), rails=default_rails())


def _parse_int(text: str, lineno: int) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", line=lineno) from None


def _parse_fraction(text: str, lineno: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"expected a number, got {text!r}", line=lineno) from None


def parse_config(text: str) -> StackConfig:
    """Parse configuration text into a :class:`StackConfig`."""
    constraint_values: dict[str, object] = {}
    rail_values: dict[int, dict[str, object]] = {}
    synth_address = DEFAULT_SYNTH_ADDRESS

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not value:
            raise ConfigError(f"missing value for {key}", line=lineno)
        if key == "synth_address":
            synth_address = _parse_int(value, lineno)
            continue
        if key in _CONSTRAINT_KEYS:
            field, kind = _CONSTRAINT_KEYS[key]
            parser = _parse_int if kind == _INT else _parse_fraction
            constraint_values[field] = parser(value, lineno)
            continue
        if key.startswith("rail"):
            head, _, param = key.partition("_")
            if param in _RAIL_KEYS and head[4:].isdigit():
                rail_id = int(head[4:])
                parser = _parse_int if _RAIL_KEYS[param] == _INT else _parse_fraction
                rail_values.setdefault(rail_id, {})[param] = parser(value, lineno)
                continue
        raise ConfigError(f"unknown key {key!r}", line=lineno)

    try:
        constraints = PlannerConstraints(**constraint_values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if rail_values:
        rails = []
        for rail_id in sorted(rail_values):
            try:
                rails.append(RailModel(rail_id=rail_id, **rail_values[rail_id]))
            except ValueError as exc:
                raise ConfigError(f"rail {rail_id}: {exc}") from exc
        rails = tuple(rails)
    else:
        rails = default_rails()

    seen = set()
    for rail in rails:
        slot = (rail.pot_address, rail.pot_channel)
        if slot in seen:
            raise ConfigError(
                f"two rails share pot 0x{slot[0]:02X} channel {slot[1]}"
            )
        seen.add(slot)

    if not 0 <= synth_address <= 0x7F:
        raise ConfigError(f"synth_address 0x{synth_address:X} outside 7-bit range")

    return StackConfig(constraints=constraints, rails=rails,
                       synth_address=synth_address)


def _packaged(name: str) -> str:
    return resources.files(__package__).joinpath("data", name).read_text("utf-8")


def load_config(path: str | Path | None = None) -> StackConfig:
    """Load a config file, or the packaged default when ``path`` is None."""
    text = Path(path).read_text("utf-8") if path else _packaged("default.conf")
    return parse_config(text)


def load_synth_map(path: str | Path | None = None) -> RegisterMap:
    """Load a synthesizer register map, defaulting to the shipped one."""
    text = Path(path).read_text("utf-8") if path else _packaged("synth.map")
    return parse_register_map(text)


def load_pot_map(path: str | Path | None = None) -> RegisterMap:
    """Load the pot register map, defaulting to the shipped one."""
    text = Path(path).read_text("utf-8") if path else _packaged("pot.map")
    return parse_register_map(text)
