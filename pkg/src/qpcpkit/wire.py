"""Length-prefixed binary frames for the verifier/prover session.

Frame layout: 4-byte big-endian payload length, 1-byte type, payload.
Fixed-point values travel as 16-byte big-endian two's-complement integers
carrying P fractional bits (P is announced in PARAMS).
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass
from enum import IntEnum

HEADER = struct.Struct(">IB")
MAX_PAYLOAD = 1 << 24
FIXED_BYTES = 16
DEFAULT_TIMEOUT = 30.0


class FrameType(IntEnum):
    HELLO = 1
    PARAMS = 2
    CHALLENGE = 3
    RESPONSE = 4
    FINAL = 5
    VERDICT = 6
    ERROR = 7


class ErrorCode(IntEnum):
    MALFORMED = 1
    UNKNOWN_TYPE = 2
    UNEXPECTED = 3
    TIMEOUT = 4
    DISCONNECT = 5
    BAD_PARAMS = 6
    INTERNAL = 7


class ProtocolError(Exception):
    def __init__(self, code: ErrorCode, message: str):
        super().__init__(f"{code.name}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class Frame:
    type: int
    payload: bytes = b""

    def encode(self) -> bytes:
        if len(self.payload) > MAX_PAYLOAD:
            raise ProtocolError(ErrorCode.MALFORMED, "payload too large")
        return HEADER.pack(len(self.payload), int(self.type)) + self.payload


def decode_frames(buf: bytes) -> tuple[list[Frame], bytes]:
    """Split a byte buffer into complete frames; returns (frames, leftover)."""
    frames = []
    while len(buf) >= HEADER.size:
        length, ftype = HEADER.unpack_from(buf)
        if length > MAX_PAYLOAD:
            raise ProtocolError(ErrorCode.MALFORMED, f"declared length {length} too large")
        if ftype not in FrameType._value2member_map_:
            raise ProtocolError(ErrorCode.UNKNOWN_TYPE, f"unknown frame type {ftype}")
        end = HEADER.size + length
        if len(buf) < end:
            break
        frames.append(Frame(ftype, bytes(buf[HEADER.size:end])))
        buf = buf[end:]
    return frames, buf


def decode_frame(data: bytes) -> Frame:
    frames, rest = decode_frames(data)
    if len(frames) != 1 or rest:
        raise ProtocolError(ErrorCode.MALFORMED, "expected exactly one complete frame")
    return frames[0]


# --- payload helpers ----------------------------------------------------------------

def pack_fixed(*values: int) -> bytes:
    try:
        return b"".join(int(v).to_bytes(FIXED_BYTES, "big", signed=True) for v in values)
    except OverflowError:
        raise ProtocolError(ErrorCode.INTERNAL, "fixed-point value exceeds 128 bits") from None


def unpack_fixed(data: bytes, count: int) -> tuple[int, ...]:
    if len(data) != count * FIXED_BYTES:
        raise ProtocolError(ErrorCode.MALFORMED,
                            f"expected {count} fixed-point fields, got {len(data)} bytes")
    return tuple(int.from_bytes(data[i:i + FIXED_BYTES], "big", signed=True)
                 for i in range(0, len(data), FIXED_BYTES))


def _need(payload: bytes, size: int, what: str):
    if len(payload) < size:
        raise ProtocolError(ErrorCode.MALFORMED, f"{what} payload too short")


def _text(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        raise ProtocolError(ErrorCode.MALFORMED, "invalid UTF-8 text") from None


def hello(name: str = "prover", version: int = 1) -> Frame:
    return Frame(FrameType.HELLO, bytes([version]) + name.encode())


def parse_hello(f: Frame) -> tuple[int, str]:
    _need(f.payload, 1, "HELLO")
    return f.payload[0], _text(f.payload[1:])


PARAMS_HEAD = struct.Struct(">HHBB")


def params(n: int, ell: int, P: int, mode: int, claim: tuple[int, int], ham_json: str) -> Frame:
    body = ham_json.encode()
    return Frame(FrameType.PARAMS, PARAMS_HEAD.pack(n, ell, P, mode) + pack_fixed(*claim)
                 + struct.pack(">I", len(body)) + body)


def parse_params(f: Frame) -> dict:
    head = PARAMS_HEAD.size + 2 * FIXED_BYTES + 4
    _need(f.payload, head, "PARAMS")
    n, ell, P, mode = PARAMS_HEAD.unpack_from(f.payload)
    claim = unpack_fixed(f.payload[PARAMS_HEAD.size:PARAMS_HEAD.size + 2 * FIXED_BYTES], 2)
    (length,) = struct.unpack_from(">I", f.payload, head - 4)
    if len(f.payload) != head + length:
        raise ProtocolError(ErrorCode.MALFORMED, "PARAMS body length mismatch")
    return {"n": n, "ell": ell, "P": P, "mode": mode, "claim": claim,
            "hamiltonian": _text(f.payload[head:])}


STAGE_ROUND = struct.Struct(">HH")


def challenge(stage: int, rnd: int, state: tuple[int, int, int, int] | None) -> Frame:
    body = STAGE_ROUND.pack(stage, rnd)
    body += b"\x00" if state is None else b"\x01" + pack_fixed(*state)
    return Frame(FrameType.CHALLENGE, body)


def parse_challenge(f: Frame):
    _need(f.payload, STAGE_ROUND.size + 1, "CHALLENGE")
    stage, rnd = STAGE_ROUND.unpack_from(f.payload)
    flag = f.payload[STAGE_ROUND.size]
    rest = f.payload[STAGE_ROUND.size + 1:]
    if flag == 0:
        if rest:
            raise ProtocolError(ErrorCode.MALFORMED, "CHALLENGE has trailing bytes")
        return stage, rnd, None
    if flag != 1:
        raise ProtocolError(ErrorCode.MALFORMED, "CHALLENGE state flag must be 0 or 1")
    return stage, rnd, unpack_fixed(rest, 4)


def response(stage: int, rnd: int, matrix: tuple) -> Frame:
    flat = [v for entry in matrix for v in entry]
    return Frame(FrameType.RESPONSE, STAGE_ROUND.pack(stage, rnd) + pack_fixed(*flat))


def parse_response(f: Frame):
    _need(f.payload, STAGE_ROUND.size, "RESPONSE")
    stage, rnd = STAGE_ROUND.unpack_from(f.payload)
    flat = unpack_fixed(f.payload[STAGE_ROUND.size:], 8)
    return stage, rnd, tuple((flat[2 * k], flat[2 * k + 1]) for k in range(4))


def final(stage: int, state: tuple[int, int, int, int]) -> Frame:
    return Frame(FrameType.FINAL, struct.pack(">H", stage) + pack_fixed(*state))


def parse_final(f: Frame):
    _need(f.payload, 2, "FINAL")
    (stage,) = struct.unpack_from(">H", f.payload)
    return stage, unpack_fixed(f.payload[2:], 4)


VERDICT_CODES = {"accept": 0, "reject": 1, "protocol_error": 2}
VERDICT_HEAD = struct.Struct(">BHH")


def verdict(status: str, stage: int, rnd: int, reason: str) -> Frame:
    return Frame(FrameType.VERDICT,
                 VERDICT_HEAD.pack(VERDICT_CODES[status], stage, rnd) + reason.encode())


def parse_verdict(f: Frame):
    _need(f.payload, VERDICT_HEAD.size, "VERDICT")
    code, stage, rnd = VERDICT_HEAD.unpack_from(f.payload)
    names = {v: k for k, v in VERDICT_CODES.items()}
    if code not in names:
        raise ProtocolError(ErrorCode.MALFORMED, f"unknown verdict code {code}")
    return names[code], stage, rnd, _text(f.payload[VERDICT_HEAD.size:])


def error(code: ErrorCode, message: str) -> Frame:
    return Frame(FrameType.ERROR, struct.pack(">H", int(code)) + message.encode())


def parse_error(f: Frame):
    _need(f.payload, 2, "ERROR")
    (code,) = struct.unpack_from(">H", f.payload)
    return code, f.payload[2:].decode("utf-8", errors="replace")


# --- socket transport -------------------------------------------------------------------

class SocketChannel:
    """Blocking frame I/O over a connected TCP socket with a per-read timeout."""

    def __init__(self, sock: socket.socket, timeout: float = DEFAULT_TIMEOUT):
        self.sock = sock
        self.sock.settimeout(timeout)
        self._buf = b""
        self._pending: list[Frame] = []

    def send(self, frame: Frame) -> None:
        try:
            self.sock.sendall(frame.encode())
        except OSError as exc:
            raise ProtocolError(ErrorCode.DISCONNECT, f"send failed: {exc}") from None

    def recv(self) -> Frame:
        while not self._pending:
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                raise ProtocolError(ErrorCode.TIMEOUT, "peer did not answer in time") from None
            except OSError as exc:
                raise ProtocolError(ErrorCode.DISCONNECT, f"receive failed: {exc}") from None
            if not chunk:
                raise ProtocolError(ErrorCode.DISCONNECT, "peer closed the connection")
            self._buf += chunk
            frames, self._buf = decode_frames(self._buf)
            self._pending.extend(frames)
        return self._pending.pop(0)

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass
