import random
from fractions import Fraction

import pytest

from clockgen import (
    ConfigError,
    InfeasibleVoltageError,
    NoPlanError,
    PhaseRangeError,
    RegisterMapError,
    SessionConfig,
    UnsatisfiableFrequencyError,
    bridge_init,
)

import oracles

MHZ = 10**6


def synth_snapshot(device_handle, host):
    return host.board.devices[device_handle.synth_address].snapshot()


def field_addresses(regmap, prefixes):
    return {
        field.address
        for field in regmap.fields.values()
        if any(field.name.startswith(p) for p in prefixes)
    }


# -- bridge layer -----------------------------------------------------------------

def test_bridge_init_reads_reset_register(host):
    handle = bridge_init(SessionConfig(endpoint="sim"), simulator=host)
    assert handle.bridge.read_register(0x70, 0x00) == \
        handle.synth_map.reset_value(0x00)
    handle.close()


def test_bridge_init_unreachable_tcp():
    from clockgen import ConnectError
    config = SessionConfig(endpoint="tcp", host="127.0.0.1", port=1,
                           read_timeout=0.2)
    with pytest.raises(ConnectError):
        bridge_init(config)


def test_bridge_init_malformed_map(tmp_path, host):
    bad = tmp_path / "bad.map"
    bad.write_text("0x10, 0x00\n")
    with pytest.raises(RegisterMapError) as info:
        bridge_init(SessionConfig(endpoint="sim"), map_path=bad, simulator=host)
    assert info.value.line == 1


def test_bridge_write_then_read_echo(device):
    device.bridge.write_register(0x70, 0x06, 0x5A)
    assert device.bridge.read_register(0x70, 0x06) == 0x5A


def test_bridge_read_absent_device(device):
    assert device.bridge.read_register(0x5A, 0x06) == 0xFF


def test_bridge_write_read_only_register(device):
    device.bridge.write_register(0x70, 0x00, 0x99)
    assert device.bridge.read_register(0x70, 0x00) == 0x38


def test_bridge_ops_map_one_to_one_onto_wire_commands(counting_device):
    device, counting = counting_device
    counting.writes = counting.reads = 0
    device.bridge.write_register(0x70, 0x06, 0x5A)
    assert (counting.writes, counting.reads) == (1, 0)
    device.bridge.read_register(0x70, 0x06)
    assert (counting.writes, counting.reads) == (2, 1)
    assert len(counting.written) % 4 == 0


# -- device layer: frequency ---------------------------------------------------------

def test_set_frequency_end_to_end(device, host):
    plan = device.set_frequency(0, 100 * MHZ)
    assert plan.rel_error == 0
    status = host.board.query_outputs()[0]
    assert status.enabled
    assert status.f_out == plan.f_achieved


def test_set_frequency_below_band(device):
    with pytest.raises(UnsatisfiableFrequencyError):
        device.set_frequency(0, 4 * MHZ)


def test_set_frequency_channel_isolation(device, host):
    device.set_frequency(0, 80 * MHZ)
    device.set_frequency(1, 120 * MHZ)
    device.set_frequency(3, 40 * MHZ)
    before = host.board.query_outputs()
    device.set_frequency(2, 66 * MHZ)
    after = host.board.query_outputs()
    for k in (0, 1, 3):
        assert after[k] == before[k]


def test_set_frequency_register_diff_confined(device, host):
    regmap = device.synth_map
    device.set_frequency(0, 10 * MHZ)
    before = synth_snapshot(device, host)
    device.set_frequency(1, 150 * MHZ)
    after = synth_snapshot(device, host)
    allowed = field_addresses(regmap, ("fb_", "ms1_", "clk1_"))
    changed = {a for a in range(256) if before[a] != after[a]}
    assert changed <= allowed


def test_set_frequency_idempotent(device, host):
    device.set_frequency(0, 123456789)
    once = synth_snapshot(device, host)
    device.set_frequency(0, 123456789)
    assert synth_snapshot(device, host) == once


# -- device layer: phase ------------------------------------------------------------

def test_set_phase_zero(device, host):
    device.set_frequency(0, 100 * MHZ)
    phase = device.set_phase(0, seconds=0)
    assert phase.steps == 0
    assert host.board.query_outputs()[0].phase_offset == 0


def test_set_phase_quantized(device, host):
    plan = device.set_frequency(0, 100 * MHZ)
    request = Fraction("1.25e-9")
    phase = device.set_phase(0, seconds=request)
    assert phase.steps == oracles.phase_steps(request, 1 / plan.f_vco)
    status = host.board.query_outputs()[0]
    assert status.phase_offset == phase.steps * (1 / plan.f_vco)
    assert abs(request - status.phase_offset) <= (1 / plan.f_vco) / 2


def test_set_phase_without_plan(device):
    with pytest.raises(NoPlanError):
        device.set_phase(1, seconds=0)


def test_set_phase_out_of_range(device):
    device.set_frequency(0, 100 * MHZ)
    with pytest.raises(PhaseRangeError):
        device.set_phase(0, seconds=Fraction("1e-6"))


def test_set_phase_negative_steps_roundtrip(device, host):
    plan = device.set_frequency(0, 100 * MHZ)
    phase = device.set_phase(0, seconds=-5 / plan.f_vco)
    assert phase.steps == -5
    assert host.board.query_outputs()[0].phase_offset == Fraction(-5) / plan.f_vco


def test_set_phase_recovers_plan_from_registers(device, host):
    from clockgen import BridgeClient, DeviceHandle
    plan = device.set_frequency(0, 100 * MHZ)
    device.close()
    # a brand-new handle (fresh session, no cached plan) can still set phase
    session = host.open()
    fresh = DeviceHandle(BridgeClient(session), host.board.synth_map,
                         host.board.config, host.board.pot_map)
    phase = fresh.set_phase(0, degrees=45)
    assert phase.quantum == 1 / plan.f_vco
    assert host.board.query_outputs()[0].phase_offset == \
        phase.steps * (1 / plan.f_vco)
    fresh.close()


def test_set_phase_idempotent(device, host):
    device.set_frequency(0, 100 * MHZ)
    device.set_phase(0, degrees=45)
    once = synth_snapshot(device, host)
    device.set_phase(0, degrees=45)
    assert synth_snapshot(device, host) == once


def test_apply_plan_on_closed_session(device):
    from clockgen import SessionClosedError, apply_plan, plan_frequency
    plan = plan_frequency(device.constraints.f_in, 100 * MHZ)
    device.close()
    with pytest.raises(SessionClosedError):
        apply_plan(device.bridge, device.synth_map, plan, None, 0,
                   device.synth_address)


# -- device layer: enables ------------------------------------------------------------

def test_enable_disable_roundtrip(device, host):
    device.set_frequency(0, 100 * MHZ)
    device.enable_output(0, False)
    status = host.board.query_outputs()[0]
    assert not status.enabled
    assert status.f_out is None
    device.enable_output(0, True)
    status = host.board.query_outputs()[0]
    assert status.enabled
    assert status.f_out == Fraction(100 * MHZ)


def test_enable_idempotent(device, host):
    device.set_frequency(3, 42 * MHZ)
    device.enable_output(3, True)
    once = synth_snapshot(device, host)
    device.enable_output(3, True)
    assert synth_snapshot(device, host) == once


def test_enable_leaves_other_channels_alone(device, host):
    device.set_frequency(0, 100 * MHZ)
    device.set_frequency(2, 50 * MHZ)
    before = synth_snapshot(device, host)
    device.enable_output(1, True)
    after = synth_snapshot(device, host)
    changed = {a for a in range(256) if before[a] != after[a]}
    enable_register = device.synth_map.field("clk1_en").address
    assert changed <= {enable_register}
    # other channels' bits within the shared register are untouched
    mask = device.synth_map.field("clk1_en").mask
    assert before[enable_register] & ~mask == after[enable_register] & ~mask


# -- device layer: rails -----------------------------------------------------------------

def test_set_rail_voltage_matches_oracle(device, host):
    setting = device.set_rail_voltage(0, Fraction("2.5"))
    rail = device.config.rail(0)
    assert setting.code == oracles.supply_code(rail, Fraction("2.5"))
    assert host.board.query_rails()[0] == setting.v_predicted
    assert abs(host.board.query_rails()[0] - Fraction("2.5")) == setting.v_error


def test_infeasible_rail_target_writes_nothing(counting_device):
    device, counting = counting_device
    counting.writes = 0
    with pytest.raises(InfeasibleVoltageError):
        device.set_rail_voltage(0, Fraction("0.5"))
    assert counting.writes == 0


def test_unknown_rail(device):
    with pytest.raises(ConfigError):
        device.set_rail_voltage(9, Fraction("2.5"))


def test_rails_independent(device, host):
    device.set_rail_voltage(0, Fraction("1.5"))
    before = host.board.devices[device.config.rail(1).pot_address].snapshot()
    device.set_rail_voltage(2, Fraction("3.0"))
    rail1 = device.config.rail(1)
    register = device.pot_map.field(f"wiper{rail1.pot_channel}").address
    assert host.board.devices[rail1.pot_address].snapshot()[register] == \
        before[register]


def test_set_rail_idempotent(device, host):
    device.set_rail_voltage(4, Fraction("1.9"))
    once = host.board.devices[device.config.rail(4).pot_address].snapshot()
    device.set_rail_voltage(4, Fraction("1.9"))
    assert host.board.devices[device.config.rail(4).pot_address].snapshot() == once


# -- layer purity ----------------------------------------------------------------------

def test_device_layer_only_talks_in_whole_commands(counting_device):
    device, counting = counting_device
    device.set_frequency(0, 150 * MHZ)
    device.set_phase(0, degrees=90)
    device.enable_output(0, True)
    device.set_rail_voltage(0, Fraction("2.5"))
    assert len(counting.written) % 4 == 0
    # each write call carried exactly one command frame
    assert counting.writes == len(counting.written) // 4


def test_readback_matches_simulator_view(device, host):
    device.set_frequency(0, 75 * MHZ)
    device.set_phase(0, degrees=45)
    device.set_rail_voltage(3, Fraction("2.2"))
    assert device.read_outputs() == host.board.query_outputs()
    assert device.read_rails() == host.board.query_rails()


def test_repeated_operations_random_idempotence(device, host):
    rng = random.Random(41)
    for _ in range(10):
        channel = rng.randrange(4)
        target = rng.randint(5 * MHZ, 200 * MHZ)
        device.set_frequency(channel, target)
        once = synth_snapshot(device, host)
        device.set_frequency(channel, target)
        assert synth_snapshot(device, host) == once
