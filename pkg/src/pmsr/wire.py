"""Framed binary protocol between coordinator and storage nodes.

Every message is one frame: a 4-byte big-endian payload length, then the
payload.  A payload is a 1-byte message kind followed by kind-specific
fields.  Scalars travel as 4-byte big-endian unsigned integers, field
symbols as little-endian unsigned values of the cluster's symbol width,
and matrices row-major behind a rows/cols header.  Payloads are capped
at 16 MiB; a peer that oversteps the cap gets the connection closed,
while an unknown kind only earns an ERROR reply.
"""

from __future__ import annotations

import socket
import struct
from enum import IntEnum

MAX_PAYLOAD = 16 * 1024 * 1024
DEFAULT_TIMEOUT = 5.0
TRANSPORT_RETRIES = 2


class Kind(IntEnum):
    STORE = 1
    QUERY = 2
    ANSWER = 3
    REPAIR_HELP = 4
    REPAIR_SYMBOL = 5
    GET_SHARE = 6
    SHARE = 7
    HEALTH = 8
    OK = 9
    ERROR = 10


class WireError(Exception):
    """Malformed or oversized traffic; the connection is unusable."""


class RemoteError(Exception):
    """The peer answered with an ERROR payload; never retried."""


def symbol_width_for(q: int) -> int:
    """Smallest byte width that holds every residue of GF(q)."""
    width = 1
    while (q - 1) >> (8 * width):
        width += 1
    return width


def default_symbol_width(q: int) -> int:
    """Wire default: 2 bytes up to GF(65536), 4 beyond (q fits 32 bits)."""
    return 2 if q <= 0xFFFF else 4


def encode_symbols(values, width: int) -> bytes:
    out = bytearray()
    for v in values:
        out += int(v).to_bytes(width, "little")
    return bytes(out)


def decode_symbols(buf: bytes, width: int) -> list[int]:
    if len(buf) % width:
        raise WireError(f"symbol buffer length {len(buf)} not a multiple of {width}")
    return [int.from_bytes(buf[i:i + width], "little")
            for i in range(0, len(buf), width)]


def encode_matrix(rows: list[list[int]], width: int) -> bytes:
    r = len(rows)
    c = len(rows[0]) if rows else 0
    body = struct.pack(">II", r, c)
    for row in rows:
        if len(row) != c:
            raise WireError("ragged matrix")
        body += encode_symbols(row, width)
    return body


def decode_matrix(buf: bytes, width: int) -> tuple[int, int, list[list[int]]]:
    if len(buf) < 8:
        raise WireError("matrix header truncated")
    r, c = struct.unpack(">II", buf[:8])
    expected = 8 + r * c * width
    if len(buf) != expected:
        raise WireError(f"matrix body is {len(buf)} bytes, expected {expected}")
    flat = decode_symbols(buf[8:], width)
    return r, c, [flat[i * c:(i + 1) * c] for i in range(r)]


def pack_u32(*values: int) -> bytes:
    return struct.pack(f">{len(values)}I", *values)


def unpack_u32(buf: bytes, count: int) -> tuple[int, ...]:
    need = 4 * count
    if len(buf) < need:
        raise WireError(f"need {need} header bytes, got {len(buf)}")
    return struct.unpack(f">{count}I", buf[:need])


def build_message(kind: Kind, body: bytes = b"") -> bytes:
    return bytes([kind]) + body


def build_error(message: str) -> bytes:
    return build_message(Kind.ERROR, message.encode("utf-8"))


def parse_message(payload: bytes) -> tuple[Kind, bytes]:
    if not payload:
        raise WireError("empty payload")
    try:
        kind = Kind(payload[0])
    except ValueError:
        raise WireError(f"unknown kind {payload[0]}") from None
    return kind, payload[1:]


def send_frame(sock: socket.socket, payload: bytes) -> None:
    if len(payload) > MAX_PAYLOAD:
        raise WireError(f"payload of {len(payload)} bytes exceeds the 16 MiB cap")
    sock.sendall(struct.pack(">I", len(payload)) + payload)


def _recv_exact(sock: socket.socket, count: int) -> bytes:
    chunks = bytearray()
    while len(chunks) < count:
        piece = sock.recv(count - len(chunks))
        if not piece:
            raise WireError("connection closed mid-frame")
        chunks += piece
    return bytes(chunks)


def recv_frame(sock: socket.socket) -> bytes:
    header = _recv_exact(sock, 4)
    (length,) = struct.unpack(">I", header)
    if length > MAX_PAYLOAD:
        raise WireError(f"frame of {length} bytes exceeds the 16 MiB cap")
    return _recv_exact(sock, length)


def request(address: tuple[str, int], payload: bytes,
            timeout: float = DEFAULT_TIMEOUT,
            retries: int = TRANSPORT_RETRIES) -> tuple[Kind, bytes]:
    """One request/response round trip on a fresh connection.

    Transport failures are retried; an ERROR reply is final and raised
    as RemoteError.
    """
    last: Exception | None = None
    for _ in range(retries + 1):
        try:
            with socket.create_connection(address, timeout=timeout) as sock:
                sock.settimeout(timeout)
                send_frame(sock, payload)
                kind, body = parse_message(recv_frame(sock))
        except (OSError, WireError) as exc:
            last = exc
            continue
        if kind == Kind.ERROR:
            raise RemoteError(body.decode("utf-8", "replace"))
        return kind, body
    raise ConnectionError(f"node {address[0]}:{address[1]} unreachable: {last}")
