"""Line-framed TCP transport for running the nodes as real processes.

The server reads one envelope per line from each connection, applies it
to Central under the shared lock, and writes the response envelopes back.
Registered connections also receive model-update broadcasts. Clients run
one reader thread (acks, errors, pushed updates) next to the sending
thread, mirroring the one-reader/one-writer connection model.
"""

from __future__ import annotations

import socket
import socketserver
import threading
from typing import Callable, Iterable

from ..kdd.records import ConnectionRecord
from ..protocol import (
    MSG_ACK,
    MSG_ERROR,
    MSG_MODEL_UPDATE,
    PROTOCOL_VERSION,
    ModelUpdate,
    Envelope,
    ack_envelope,
    alarm_envelope,
    decode_message,
    encode_message,
    error_envelope,
    model_update_envelope,
    register_envelope,
)
from ..exceptions import ProtocolError, UnknownMessage
from .central import Central
from .monitors import HoneypotMonitor, NetLanMonitor


class CentralServer:
    """Threaded TCP front end over one Central instance."""

    def __init__(self, central: Central, host: str = "127.0.0.1", port: int = 0,
                 lock: threading.RLock | None = None):
        self.central = central
        self.lock = lock if lock is not None else threading.RLock()
        self._connections: dict[str, socket.socket] = {}
        self._connections_lock = threading.Lock()
        outer = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self) -> None:
                registered_as: str | None = None
                for raw in self.rfile:
                    line = raw.decode("utf-8").rstrip("\r\n")
                    if not line:
                        continue
                    try:
                        envelope = decode_message(line)
                    except (ProtocolError, UnknownMessage) as exc:
                        code = "unknown_message" if isinstance(exc, UnknownMessage) else "protocol_error"
                        self._send(error_envelope(outer.central.node_id, code, str(exc)))
                        continue
                    if envelope.msg_type == "Register":
                        registered_as = envelope.payload.get("node_id")
                        if registered_as:
                            with outer._connections_lock:
                                outer._connections[registered_as] = self.connection
                    with outer.lock:
                        responses = outer.central.handle_envelope(envelope)
                    for response in responses:
                        self._send(response)
                    # A scheduled retrain runs inline on the server loop.
                    with outer.lock:
                        try:
                            update = outer.central.maybe_retrain()
                        except Exception:
                            update = None
                    if update is not None:
                        outer.broadcast(update)
                if registered_as:
                    with outer._connections_lock:
                        outer._connections.pop(registered_as, None)

            def _send(self, envelope: Envelope) -> None:
                try:
                    self.wfile.write((encode_message(envelope) + "\n").encode("utf-8"))
                    self.wfile.flush()
                except OSError:
                    pass

        class Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = Server((host, port), Handler)
        self.address: tuple[str, int] = self._server.server_address[:2]
        self._thread: threading.Thread | None = None

    def broadcast(self, update: ModelUpdate) -> None:
        envelope = model_update_envelope(update, self.central.node_id)
        line = (encode_message(envelope) + "\n").encode("utf-8")
        with self._connections_lock:
            connections = list(self._connections.values())
        for conn in connections:
            try:
                conn.sendall(line)
            except OSError:
                pass

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="central-tcp", daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()


class NodeClient:
    """Shared connection plumbing for monitor and honeypot runners."""

    def __init__(self, central_address: tuple[str, int], node_id: str, source: str):
        self.node_id = node_id
        self.source = source
        self._sock = socket.create_connection(central_address, timeout=30)
        self._rfile = self._sock.makefile("r", encoding="utf-8")
        self._send_lock = threading.Lock()
        self._stop = threading.Event()
        self._idle = threading.Event()
        self._idle.set()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.send(register_envelope(node_id, source))

    def send(self, envelope: Envelope) -> None:
        with self._send_lock:
            self._sock.sendall((encode_message(envelope) + "\n").encode("utf-8"))

    def _read_loop(self) -> None:
        try:
            for line in self._rfile:
                line = line.rstrip("\r\n")
                if not line:
                    continue
                self._idle.clear()
                try:
                    envelope = decode_message(line)
                    if envelope.protocol_version != PROTOCOL_VERSION:
                        self.send(
                            error_envelope(
                                self.node_id,
                                code="bad_protocol_version",
                                detail=f"expected {PROTOCOL_VERSION}, "
                                f"got {envelope.protocol_version}",
                            )
                        )
                        continue
                    self.handle(envelope)
                finally:
                    self._idle.set()
                if self._stop.is_set():
                    break
        except (OSError, ValueError):
            pass

    def handle(self, envelope: Envelope) -> None:
        raise NotImplementedError

    def close(self) -> None:
        self._stop.set()
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class MonitorClient(NodeClient):
    """Runs a NetLanMonitor against a remote Central."""

    def __init__(self, central_address: tuple[str, int], node_id: str,
                 buffer_cap: int = 1000):
        self.monitor = NetLanMonitor(node_id, buffer_cap=buffer_cap)
        self._monitor_lock = threading.Lock()
        super().__init__(central_address, node_id, "netlan")

    def handle(self, envelope: Envelope) -> None:
        if envelope.msg_type == MSG_MODEL_UPDATE:
            update = ModelUpdate.from_payload(envelope.payload)
            with self._monitor_lock:
                applied, drained = self.monitor.apply_update(update)
            if applied:
                self.send(ack_envelope(self.node_id, ref=f"model:{update.version}"))
                for alarm in drained:
                    self.send(alarm_envelope(alarm, self.node_id))
        # Acks and errors need no client action.

    def process_records(self, records: Iterable[ConnectionRecord],
                        clock: Callable[[], float] | None = None) -> int:
        """Classify records, forwarding alarms; returns alarms sent."""
        import time as _time

        clock = clock if clock is not None else _time.time
        sent = 0
        for record in records:
            with self._monitor_lock:
                alarm = self.monitor.process(record, now=clock())
            if alarm is not None:
                self.send(alarm_envelope(alarm, self.node_id))
                sent += 1
        return sent

    def wait_for_version(self, version: int, timeout: float = 30.0) -> bool:
        import time as _time

        deadline = _time.monotonic() + timeout
        while _time.monotonic() < deadline:
            with self._monitor_lock:
                if self.monitor.applied_version >= version:
                    return True
            _time.sleep(0.02)
        return False


class HoneypotClient(NodeClient):
    """Runs a HoneypotMonitor against a remote Central."""

    def __init__(self, central_address: tuple[str, int], node_id: str,
                 p_detect: float, seed: int = 0):
        self.monitor = HoneypotMonitor(node_id, p_detect, seed=seed)
        super().__init__(central_address, node_id, "honeypot")

    def handle(self, envelope: Envelope) -> None:
        # The honeypot carries no classifier; updates and acks are ignored.
        if envelope.msg_type in (MSG_ACK, MSG_ERROR, MSG_MODEL_UPDATE):
            return

    def process_records(self, records: Iterable[ConnectionRecord],
                        clock: Callable[[], float] | None = None) -> int:
        import time as _time

        clock = clock if clock is not None else _time.time
        sent = 0
        for record in records:
            alarm = self.monitor.process(record, now=clock())
            if alarm is not None:
                self.send(alarm_envelope(alarm, self.node_id))
                sent += 1
        return sent
