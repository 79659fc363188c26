import pytest

from clockgen import (
    BoardState,
    BridgeClient,
    DeviceHandle,
    SimulatorHost,
    SimulatorServer,
)


@pytest.fixture
def board():
    return BoardState()


@pytest.fixture
def host(board):
    return SimulatorHost(board)


@pytest.fixture
def session(host):
    s = host.open()
    yield s
    s.close()


@pytest.fixture
def device(host):
    s = host.open()
    handle = DeviceHandle(BridgeClient(s), host.board.synth_map,
                          host.board.config, host.board.pot_map)
    yield handle
    handle.close()


@pytest.fixture
def tcp_server():
    server = SimulatorServer(BoardState(), port=0)
    server.start()
    yield server
    server.stop()


class CountingSession:
    """Transport stub wrapper counting wire traffic."""

    def __init__(self, inner):
        self.inner = inner
        self.writes = 0
        self.reads = 0
        self.written = bytearray()

    def write_bytes(self, data):
        self.writes += 1
        self.written.extend(data)
        self.inner.write_bytes(data)

    def read_bytes(self, n, timeout=None):
        self.reads += 1
        return self.inner.read_bytes(n, timeout)

    def close(self):
        self.inner.close()


@pytest.fixture
def counting_device(host):
    s = CountingSession(host.open())
    handle = DeviceHandle(BridgeClient(s), host.board.synth_map,
                          host.board.config, host.board.pot_map)
    yield handle, s
    handle.close()
