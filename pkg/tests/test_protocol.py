import random

import pytest

from clockgen import (
    Action,
    BridgeCommand,
    FramingError,
    InvalidOpcodeError,
    ProtocolError,
    decode_command,
    decode_read_response,
    encode_command,
    encode_read_response,
)


def test_encode_write():
    cmd = BridgeCommand.write(0x70, 0x1D, 0x90)
    assert encode_command(cmd) == bytes([0xFF, 0x70, 0x1D, 0x90])


def test_encode_read_forces_zero_payload():
    cmd = BridgeCommand.read(0x70, 0x06)
    assert encode_command(cmd) == bytes([0x00, 0x70, 0x06, 0x00])


def test_encode_all_zero_write():
    cmd = BridgeCommand.write(0x00, 0x00, 0x00)
    assert encode_command(cmd) == bytes([0xFF, 0x00, 0x00, 0x00])


def test_decode_write():
    cmd = decode_command(bytes([0xFF, 0x70, 0x1D, 0x90]))
    assert cmd == BridgeCommand.write(0x70, 0x1D, 0x90)


def test_decode_read_normalizes_payload():
    cmd = decode_command(bytes([0x00, 0x70, 0x06, 0xAB]))
    assert cmd == BridgeCommand.read(0x70, 0x06)
    assert cmd.payload == 0x00
    # re-encoding fixes the payload byte, everything else round-trips
    assert encode_command(cmd) == bytes([0x00, 0x70, 0x06, 0x00])


def test_decode_invalid_opcode():
    with pytest.raises(InvalidOpcodeError):
        decode_command(bytes([0x01, 0x70, 0x06, 0x00]))


@pytest.mark.parametrize("length", [0, 1, 3, 5, 8])
def test_decode_wrong_length(length):
    with pytest.raises(FramingError):
        decode_command(bytes(length))


def test_decode_address_out_of_range():
    with pytest.raises(FramingError):
        decode_command(bytes([0xFF, 0x80, 0x00, 0x00]))


def test_command_rejects_bad_fields():
    with pytest.raises(ValueError):
        BridgeCommand.write(0x80, 0x00, 0x00)
    with pytest.raises(ValueError):
        BridgeCommand.write(0x70, 0x100, 0x00)
    with pytest.raises(ValueError):
        BridgeCommand.write(0x70, 0x00, 0x100)


def test_roundtrip_random_commands():
    rng = random.Random(101)
    for _ in range(2000):
        if rng.random() < 0.5:
            cmd = BridgeCommand.write(rng.randint(0, 0x7F), rng.randint(0, 0xFF),
                                      rng.randint(0, 0xFF))
        else:
            cmd = BridgeCommand.read(rng.randint(0, 0x7F), rng.randint(0, 0xFF))
        data = encode_command(cmd)
        assert len(data) == 4
        assert data[0] in (0x00, 0xFF)
        assert decode_command(data) == cmd


def test_encode_of_decode_fixes_only_read_payload():
    rng = random.Random(102)
    for _ in range(2000):
        frame = bytes([rng.choice([0x00, 0xFF]), rng.randint(0, 0x7F),
                       rng.randint(0, 0xFF), rng.randint(0, 0xFF)])
        out = encode_command(decode_command(frame))
        if frame[0] == 0xFF:
            assert out == frame
        else:
            assert out == frame[:3] + b"\x00"


def test_decode_is_total_over_four_byte_inputs():
    rng = random.Random(103)
    for _ in range(2000):
        frame = bytes(rng.randint(0, 0xFF) for _ in range(4))
        try:
            cmd = decode_command(frame)
        except ProtocolError:
            continue
        assert isinstance(cmd, BridgeCommand)
        assert cmd.action in (Action.READ, Action.WRITE)


def test_read_response_codec():
    assert encode_read_response(0xAB) == b"\xab"
    assert decode_read_response(b"\xab") == 0xAB
    with pytest.raises(ValueError):
        encode_read_response(0x100)
    with pytest.raises(FramingError):
        decode_read_response(b"\xab\xcd")
