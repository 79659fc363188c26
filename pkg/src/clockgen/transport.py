"""Session layer: open/read/write/close over interchangeable byte channels.

Two endpoints are provided: an in-process channel straight into a simulated
board (the test double) and a TCP client carrying the same raw bytes.  The
stream has no extra framing; fixed-length commands and responses keep it
self-delimiting.  A session belongs to one logical owner; the device side
allows exactly one session at a time, mirroring exclusive access to a USB
device.
"""

from __future__ import annotations

import socket
import time
from dataclasses import dataclass

from .config import DEFAULT_TCP_PORT
from .errors import (
    AlreadyOpenError,
    ConnectError,
    ReadTimeoutError,
    SessionBusyError,
    SessionClosedError,
)
from .sim import BoardState, Phase


@dataclass(frozen=True)
class SessionConfig:
    """Where to connect and how long reads may wait."""

    endpoint: str = "sim"  # "sim" or "tcp"
    host: str = "127.0.0.1"
    port: int = DEFAULT_TCP_PORT
    read_timeout: float = 1.0

    def __post_init__(self):
        if self.endpoint not in ("sim", "tcp"):
            raise ValueError(f"unknown endpoint {self.endpoint!r}")
        if self.read_timeout <= 0:
            raise ValueError("read_timeout must be positive")

    @classmethod
    def parse(cls, text: str, read_timeout: float = 1.0) -> "SessionConfig":
        """Parse an endpoint string: ``sim`` or ``tcp:HOST:PORT``."""
        if text == "sim":
            return cls(endpoint="sim", read_timeout=read_timeout)
        if text.startswith("tcp:"):
            rest = text[4:]
            host, sep, port_s = rest.rpartition(":")
            if not sep or not host or not port_s.isdigit():
                raise ValueError(f"bad tcp endpoint {text!r}, want tcp:HOST:PORT")
            return cls(endpoint="tcp", host=host, port=int(port_s),
                       read_timeout=read_timeout)
        raise ValueError(f"unknown transport {text!r}, want sim or tcp:HOST:PORT")


class SimulatorHost:
    """In-process endpoint wrapping a board.

    Owns the board's event pump: bytes written to a session are ingested and
    the firmware is stepped until idle, so responses are ready immediately.
    At most one session may be open at a time.
    """

    def __init__(self, board: BoardState):
        self.board = board
        self._active: InProcessSession | None = None

    def open(self, read_timeout: float = 1.0) -> "InProcessSession":
        if self._active is not None:
            raise AlreadyOpenError("simulator already has an open session")
        if self.board.firmware.phase is not Phase.MAIN_LOOP:
            self.board.boot()
        session = InProcessSession(self, read_timeout)
        self._active = session
        return session

    def ingest(self, data: bytes) -> None:
        self.board.ingest(data)
        self.board.run_until_idle()

    def release(self, session: "InProcessSession") -> None:
        if self._active is session:
            # register state persists; command/response queues start clean
            self.board.firmware.clear_queues()
            self._active = None


class InProcessSession:
    """Session straight into a :class:`SimulatorHost`."""

    def __init__(self, host: SimulatorHost, read_timeout: float):
        self._host = host
        self._timeout = read_timeout
        self._open = True
        self._rx = bytearray()

    def write_bytes(self, data: bytes) -> None:
        self._require_open()
        self._host.ingest(bytes(data))

    def read_bytes(self, n: int, timeout: float | None = None) -> bytes:
        self._require_open()
        self._rx.extend(self._host.board.take_output())
        if len(self._rx) < n:
            # nothing can arrive asynchronously in-process, so waiting out
            # the timeout would change nothing; fail fast
            raise ReadTimeoutError(
                f"wanted {n} byte(s), {len(self._rx)} available"
            )
        out = bytes(self._rx[:n])
        del self._rx[:n]
        return out

    def close(self) -> None:
        if self._open:
            self._open = False
            self._host.release(self)

    def _require_open(self) -> None:
        if not self._open:
            raise SessionClosedError("session is closed")


class TcpSession:
    """Client session carrying raw protocol bytes over TCP."""

    def __init__(self, sock: socket.socket, read_timeout: float):
        self._sock = sock
        self._timeout = read_timeout
        self._open = True
        self._busy = False
        self._rx = bytearray()

    @classmethod
    def connect(cls, host: str, port: int, read_timeout: float = 1.0) -> "TcpSession":
        try:
            sock = socket.create_connection((host, port), timeout=read_timeout)
        except OSError as exc:
            raise ConnectError(f"cannot connect to {host}:{port}: {exc}") from exc
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        return cls(sock, read_timeout)

    def write_bytes(self, data: bytes) -> None:
        self._require_open()
        with self._guard():
            try:
                self._sock.sendall(data)
            except OSError as exc:
                raise SessionClosedError(f"send failed: {exc}") from exc

    def read_bytes(self, n: int, timeout: float | None = None) -> bytes:
        """Exactly ``n`` bytes or a timeout error; never partial success.
        Bytes received before a timeout stay buffered for the next read."""
        self._require_open()
        deadline = time.monotonic() + (timeout if timeout is not None else self._timeout)
        with self._guard():
            while len(self._rx) < n:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise ReadTimeoutError(
                        f"wanted {n} byte(s), {len(self._rx)} arrived in time"
                    )
                self._sock.settimeout(remaining)
                try:
                    chunk = self._sock.recv(4096)
                except socket.timeout:
                    continue
                except OSError as exc:
                    raise SessionClosedError(f"receive failed: {exc}") from exc
                if not chunk:
                    raise SessionClosedError("connection closed by the device side")
                self._rx.extend(chunk)
            out = bytes(self._rx[:n])
            del self._rx[:n]
            return out

    def close(self) -> None:
        if self._open:
            self._open = False
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()

    def _require_open(self) -> None:
        if not self._open:
            raise SessionClosedError("session is closed")

    def _guard(self):
        return _BusyGuard(self)


class _BusyGuard:
    """Cheap detection of concurrent calls on one session."""

    def __init__(self, session: TcpSession):
        self._session = session

    def __enter__(self):
        if self._session._busy:
            raise SessionBusyError("concurrent use of one session")
        self._session._busy = True

    def __exit__(self, *exc):
        self._session._busy = False
        return False


def open_session(config: SessionConfig, simulator: SimulatorHost | None = None):
    """Open a session per ``config``.

    The in-process endpoint needs the target :class:`SimulatorHost`; TCP
    needs only the address.
    """
    if config.endpoint == "sim":
        if simulator is None:
            raise ValueError("in-process endpoint requires a SimulatorHost")
        return simulator.open(config.read_timeout)
    return TcpSession.connect(config.host, config.port, config.read_timeout)
