"""TCP transport: one protocol session per accepted connection."""

from __future__ import annotations

import socket
from pathlib import Path

from .. import wire
from ..wire import DEFAULT_TIMEOUT, ErrorCode, ProtocolError, SocketChannel
from .protocol import Prover, ProtocolParams, Transcript, Verdict, Verifier


class VerifierServer:
    """Binds on construction so callers can read ``address`` before serving (port 0 is fine)."""

    def __init__(self, params: ProtocolParams, host: str = "127.0.0.1", port: int = 0,
                 timeout: float = DEFAULT_TIMEOUT, log_path=None):
        self.params = params
        self.timeout = timeout
        self.log_path = log_path
        self.sock = socket.create_server((host, port))

    @property
    def address(self) -> tuple[str, int]:
        return self.sock.getsockname()[:2]

    def serve_one(self) -> tuple[Verdict, Transcript]:
        self.sock.settimeout(self.timeout)
        verifier = Verifier(self.params)
        try:
            conn, _ = self.sock.accept()
        except socket.timeout:
            verifier.fail(ErrorCode.TIMEOUT, "no prover connected")
            return self._done(verifier)
        ch = SocketChannel(conn, self.timeout)
        try:
            while not verifier.done:
                try:
                    frame = ch.recv()
                except ProtocolError as exc:
                    out = verifier.fail(exc.code, exc.message)
                else:
                    out = verifier.handle(frame)
                for f in out:
                    try:
                        ch.send(f)
                    except ProtocolError:
                        break
        finally:
            ch.close()
        return self._done(verifier)

    def _done(self, verifier: Verifier):
        if self.log_path is not None:
            Path(self.log_path).write_text(verifier.transcript.to_json() + "\n")
        return verifier.verdict, verifier.transcript

    def close(self):
        self.sock.close()


def serve_verifier(params: ProtocolParams, host: str = "127.0.0.1", port: int = 0,
                   timeout: float = DEFAULT_TIMEOUT, log_path=None) -> tuple[Verdict, Transcript]:
    server = VerifierServer(params, host, port, timeout, log_path)
    try:
        return server.serve_one()
    finally:
        server.close()


def connect_prover(prover: Prover, host: str, port: int,
                   timeout: float = DEFAULT_TIMEOUT) -> Verdict | None:
    """Play the prover side; returns the verdict the verifier announced (None on error)."""
    sock = socket.create_connection((host, port), timeout=timeout)
    ch = SocketChannel(sock, timeout)
    try:
        for f in prover.start():
            ch.send(f)
        while not prover.done:
            for f in prover.handle(ch.recv()):
                ch.send(f)
    except ProtocolError:
        pass
    finally:
        ch.close()
    return prover.verdict
