"""Storage node daemon.

Serves the framed wire protocol over TCP, one thread per connection:
STORE persists a share row, QUERY answers retrieval subqueries over the
node's full stored row for a stripe, REPAIR_HELP computes the single
repair symbol for a failed peer, GET_SHARE is a non-private read for
tests and admin, HEALTH confirms liveness.  Absent shares are zero for
QUERY (so traffic stays uniform across stripes) but "not found" for the
explicit share reads.

Run as ``python -m pmsr.node`` with PMSR_ROOT pointing at the share
store and PMSR_ADDR at the host:port to bind.
"""

from __future__ import annotations

import logging
import os
import signal
import socketserver
import sys
import threading

from pmsr import msr, pir, wire
from pmsr.field import Field
from pmsr.matrix import Matrix
from pmsr.msr import MsrParams
from pmsr.store import ShareStore, StoreError
from pmsr.wire import Kind, WireError

log = logging.getLogger("pmsr.node")


class NodeService:
    """Pure request -> response mapping; no sockets, no threads."""

    def __init__(self, store: ShareStore):
        self.store = store
        man = store.manifest
        self.field = Field(man.q)
        params = MsrParams.from_nk(man.n, man.k)
        self.enc = msr.build_encoding_matrix(params, self.field, man.points)

    def handle(self, payload: bytes) -> bytes:
        try:
            kind, body = wire.parse_message(payload)
        except WireError as exc:
            return wire.build_error(str(exc))
        try:
            if kind == Kind.HEALTH:
                return wire.build_message(Kind.OK)
            if kind == Kind.STORE:
                return self._store(body)
            if kind == Kind.QUERY:
                return self._query(body)
            if kind == Kind.REPAIR_HELP:
                return self._repair_help(body)
            if kind == Kind.GET_SHARE:
                return self._get_share(body)
            return wire.build_error(f"unexpected kind {kind.name}")
        except WireError as exc:
            return wire.build_error(f"bad frame: {exc}")
        except StoreError as exc:
            return wire.build_error(f"config mismatch: {exc}")

    def _store(self, body: bytes) -> bytes:
        man = self.store.manifest
        record, stripe = wire.unpack_u32(body, 2)
        symbols = wire.decode_symbols(body[8:], man.symbol_width)
        if len(symbols) != man.alpha:
            return wire.build_error(
                f"bad frame: {len(symbols)} symbols, expected {man.alpha}")
        if not 1 <= record <= man.m:
            return wire.build_error(
                f"config mismatch: record {record} out of range [1, {man.m}]")
        if any(v >= man.q for v in symbols):
            return wire.build_error(f"config mismatch: symbol not in GF({man.q})")
        self.store.write_share(record, stripe, symbols)
        return wire.build_message(Kind.OK)

    def _query(self, body: bytes) -> bytes:
        man = self.store.manifest
        (stripe,) = wire.unpack_u32(body, 1)
        rows, cols, data = wire.decode_matrix(body[4:], man.symbol_width)
        if rows != man.k or cols != man.m * man.alpha:
            return wire.build_error(
                f"config mismatch: query is {rows}x{cols}, "
                f"expected {man.k}x{man.m * man.alpha}")
        if any(v >= man.q for row in data for v in row):
            return wire.build_error(f"config mismatch: symbol not in GF({man.q})")
        stored: list[int] = []
        for record in range(1, man.m + 1):
            share = self.store.read_share(record, stripe)
            stored.extend(share if share is not None else [0] * man.alpha)
        query = Matrix.from_rows(self.field, data)
        answer = pir.node_answer(query, stored)
        return wire.build_message(
            Kind.ANSWER, wire.encode_symbols(answer, man.symbol_width))

    def _repair_help(self, body: bytes) -> bytes:
        man = self.store.manifest
        failed, record, stripe = wire.unpack_u32(body, 3)
        if not 1 <= failed <= man.n:
            return wire.build_error(
                f"config mismatch: failed index {failed} out of range [1, {man.n}]")
        if failed == man.node_id:
            return wire.build_error("config mismatch: this node is the failed one")
        share = self.store.read_share(record, stripe)
        if share is None:
            return wire.build_error(f"not found: r{record}_s{stripe}")
        symbol = msr.repair_helper_symbol(man.node_id, share, failed, self.enc)
        return wire.build_message(
            Kind.REPAIR_SYMBOL, wire.encode_symbols([symbol], man.symbol_width))

    def _get_share(self, body: bytes) -> bytes:
        man = self.store.manifest
        record, stripe = wire.unpack_u32(body, 2)
        share = self.store.read_share(record, stripe)
        if share is None:
            return wire.build_error(f"not found: r{record}_s{stripe}")
        return wire.build_message(
            Kind.SHARE, wire.encode_symbols(share, man.symbol_width))


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        service: NodeService = self.server.service  # type: ignore[attr-defined]
        while True:
            try:
                payload = wire.recv_frame(self.request)
            except (WireError, OSError):
                return  # EOF, truncation, or oversize: drop the connection
            try:
                reply = service.handle(payload)
            except Exception:
                log.exception("request handler failed")
                reply = wire.build_error("internal error")
            try:
                wire.send_frame(self.request, reply)
            except (WireError, OSError):
                return


class NodeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: NodeService):
        super().__init__(address, _Handler)
        self.service = service


def node_serve(store: ShareStore, address: tuple[str, int]) -> None:
    """Serve until SIGTERM/SIGINT; never returns otherwise."""
    server = NodeServer(address, NodeService(store))

    def stop(signum, frame):
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, stop)
    signal.signal(signal.SIGINT, stop)
    log.info("node %d serving on %s:%d, store %s",
             store.manifest.node_id, address[0], address[1], store.root)
    with server:
        server.serve_forever()
    log.info("node %d stopped", store.manifest.node_id)


def parse_address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"address must be host:port, got {text!r}")
    return host, int(port)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    root = os.environ.get("PMSR_ROOT")
    addr = os.environ.get("PMSR_ADDR")
    if not root or not addr:
        print("PMSR_ROOT and PMSR_ADDR must be set", file=sys.stderr)
        return 2
    try:
        store = ShareStore(root)
        address = parse_address(addr)
    except (StoreError, ValueError) as exc:
        print(f"cannot start node: {exc}", file=sys.stderr)
        return 1
    node_serve(store, address)
    return 0


if __name__ == "__main__":
    sys.exit(main())
