"""Coordinator: the user's trusted agent driving the storage cluster.

Holds the cluster config and a local catalog (record id -> stripe count
and byte length), and runs the three data operations over the wire
protocol: put (encode and distribute), private get (queries that leak
nothing about which record is wanted), and repair (rebuild one node's
shares from r helpers).

Records are byte payloads.  Each byte becomes one field symbol, so the
field must have q > 255 (the default cluster field is GF(257)); payloads
are split into stripes of B symbols, the last stripe zero-padded, and
every stripe is an independent code instance.  A private get fetches the
cluster-wide maximum stripe count no matter which record is wanted, so
traffic is independent of the target; the catalog's byte length strips
the padding afterwards.
"""

from __future__ import annotations

import json
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from pmsr import msr, pir, wire
from pmsr.field import Field
from pmsr.msr import EncodingMatrix, MsrParams
from pmsr.pir import PirConfig
from pmsr.store import parse_kv
from pmsr.wire import Kind, RemoteError, default_symbol_width, symbol_width_for

Address = tuple[str, int]


class CoordinatorError(Exception):
    pass


@dataclass(frozen=True)
class ClusterConfig:
    """Static cluster description, parsed from a key = value file."""

    q: int
    k: int
    m: int
    addresses: tuple[Address, ...]
    root: Path
    symbol_width: int = 0
    points: tuple[int, ...] = ()

    def __post_init__(self):
        params = self.params  # validates k, n relation via MsrParams
        if len(self.addresses) != params.n:
            raise ValueError(
                f"need {params.n} node addresses for k={self.k}, "
                f"got {len(self.addresses)}")
        if len(set(self.addresses)) != len(self.addresses):
            raise ValueError("node addresses must be distinct")
        if self.m < 1:
            raise ValueError(f"record capacity must be >= 1, got {self.m}")
        if self.symbol_width == 0:
            object.__setattr__(self, "symbol_width", default_symbol_width(self.q))
        elif self.symbol_width < symbol_width_for(self.q):
            raise ValueError(
                f"symbol width {self.symbol_width} cannot hold GF({self.q})")
        if not self.points:
            object.__setattr__(self, "points",
                               tuple(range(1, params.n + 1)))

    @property
    def n(self) -> int:
        return 3 * self.k - 3

    @property
    def params(self) -> MsrParams:
        return MsrParams.from_nk(3 * self.k - 3, self.k)

    @property
    def record_symbols(self) -> int:
        return self.params.B

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ClusterConfig":
        text = Path(path).read_text()
        pairs = parse_kv(text)
        missing = [key for key in ("q", "k", "m", "nodes", "root") if key not in pairs]
        if missing:
            raise ValueError(f"config missing keys: {', '.join(missing)}")
        addresses = []
        for token in pairs["nodes"].replace(",", " ").split():
            host, _, port = token.rpartition(":")
            if not host or not port.isdigit():
                raise ValueError(f"bad node address {token!r}")
            addresses.append((host, int(port)))
        points = ()
        if "points" in pairs:
            points = tuple(int(p) for p in pairs["points"].split(","))
        return cls(
            q=int(pairs["q"]),
            k=int(pairs["k"]),
            m=int(pairs["m"]),
            addresses=tuple(addresses),
            root=Path(pairs["root"]),
            symbol_width=int(pairs.get("symbol_width", "0")),
            points=points,
        )


@dataclass(frozen=True)
class PutReport:
    record: int
    stripes: int
    symbols_stored: int


@dataclass(frozen=True)
class GetReport:
    payload: bytes
    stripes_fetched: int
    downloaded_symbols: int
    per_stripe_download: int


@dataclass(frozen=True)
class RepairReport:
    failed: int
    helpers: tuple[int, ...]
    shares_restored: int
    symbols_downloaded: int
    verified: bool


def pack_payload(payload: bytes, record_symbols: int) -> list[list[int]]:
    """Bytes to stripes of B symbols; last stripe zero-padded, empty
    payload still occupies one all-zero stripe."""
    symbols = list(payload)
    stripes = []
    for start in range(0, len(symbols), record_symbols):
        chunk = symbols[start:start + record_symbols]
        chunk += [0] * (record_symbols - len(chunk))
        stripes.append(chunk)
    if not stripes:
        stripes.append([0] * record_symbols)
    return stripes


def unpack_payload(symbols: list[int], length: int) -> bytes:
    if length > len(symbols):
        raise CoordinatorError(
            f"decoded {len(symbols)} symbols, catalog claims {length} bytes")
    head = symbols[:length]
    if any(not 0 <= v <= 255 for v in head):
        raise CoordinatorError("decoded symbol does not fit a byte")
    return bytes(head)


class Catalog:
    """Record id -> (stripes, byte length), persisted as JSON."""

    def __init__(self, path: Path):
        self.path = path
        self.records: dict[int, dict[str, int]] = {}
        if path.is_file():
            raw = json.loads(path.read_text())
            self.records = {int(k): v for k, v in raw.get("records", {}).items()}

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(
            {"records": {str(k): v for k, v in sorted(self.records.items())}},
            indent=2))
        os.replace(tmp, self.path)

    def set(self, record: int, stripes: int, length: int) -> None:
        self.records[record] = {"stripes": stripes, "length": length}

    def get(self, record: int) -> dict[str, int] | None:
        return self.records.get(record)

    @property
    def max_stripes(self) -> int:
        return max((v["stripes"] for v in self.records.values()), default=0)


class Coordinator:
    def __init__(self, cfg: ClusterConfig):
        self.cfg = cfg
        self.field = Field(cfg.q)
        self.enc: EncodingMatrix = msr.build_encoding_matrix(
            cfg.params, self.field, cfg.points)
        self.catalog = Catalog(cfg.root / "catalog.json")

    # -- plumbing ---------------------------------------------------------

    def _fan_out(self, calls):
        """Run (address, payload) pairs concurrently; list of results or
        raised exceptions, in order."""
        def run(item):
            address, payload = item
            return wire.request(address, payload)

        with ThreadPoolExecutor(max_workers=max(1, len(calls))) as pool:
            futures = [pool.submit(run, item) for item in calls]
            results = []
            for future in futures:
                try:
                    results.append(future.result())
                except Exception as exc:
                    results.append(exc)
            return results

    def node_healthy(self, node: int) -> bool:
        try:
            kind, _ = wire.request(self.cfg.addresses[node - 1],
                                   wire.build_message(Kind.HEALTH))
        except (ConnectionError, RemoteError):
            return False
        return kind == Kind.OK

    def live_nodes(self) -> list[int]:
        with ThreadPoolExecutor(max_workers=self.cfg.n) as pool:
            alive = list(pool.map(self.node_healthy, range(1, self.cfg.n + 1)))
        return [i for i, ok in enumerate(alive, 1) if ok]

    def _store_share(self, node: int, record: int, stripe: int,
                     symbols: list[int]) -> bytes:
        body = wire.pack_u32(record, stripe) + wire.encode_symbols(
            symbols, self.cfg.symbol_width)
        return wire.build_message(Kind.STORE, body)

    def get_share(self, node: int, record: int, stripe: int) -> list[int]:
        """Non-private read of one share (tests and repair verification)."""
        kind, body = wire.request(
            self.cfg.addresses[node - 1],
            wire.build_message(Kind.GET_SHARE, wire.pack_u32(record, stripe)))
        if kind != Kind.SHARE:
            raise CoordinatorError(f"node {node} answered {kind.name} to GET_SHARE")
        return wire.decode_symbols(body, self.cfg.symbol_width)

    # -- put ---------------------------------------------------------------

    def put(self, record: int, payload: bytes) -> PutReport:
        cfg = self.cfg
        if not 1 <= record <= cfg.m:
            raise CoordinatorError(
                f"record id {record} out of range [1, {cfg.m}]")
        if cfg.q <= 255:
            raise CoordinatorError(
                f"field too small for byte payloads: q = {cfg.q} <= 255")
        live = self.live_nodes()
        if len(live) != cfg.n:
            down = sorted(set(range(1, cfg.n + 1)) - set(live))
            raise CoordinatorError(f"put aborted: nodes {down} unhealthy")

        stripes = pack_payload(payload, cfg.record_symbols)
        previous = self.catalog.get(record)
        old_stripes = previous["stripes"] if previous else 0

        stored: list[tuple[int, int]] = []  # (stripe, node) successfully stored
        for s, chunk in enumerate(stripes, 1):
            code = msr.encode(
                msr.message_matrix_from_record(chunk, cfg.params, self.field),
                self.enc)
            calls = [(cfg.addresses[i - 1],
                      self._store_share(i, record, s, code.node_share(i)))
                     for i in range(1, cfg.n + 1)]
            results = self._fan_out(calls)
            for node, result in enumerate(results, 1):
                if isinstance(result, Exception):
                    self._scrub(record, stored)
                    raise CoordinatorError(
                        f"put aborted: node {node} failed ({result}); "
                        f"partial stripes cleared") from result
                stored.append((s, node))

        # A shorter rewrite leaves stale trailing stripes; zero them out.
        for s in range(len(stripes) + 1, old_stripes + 1):
            zero = [0] * cfg.params.alpha
            calls = [(cfg.addresses[i - 1], self._store_share(i, record, s, zero))
                     for i in range(1, cfg.n + 1)]
            self._fan_out(calls)

        self.catalog.set(record, len(stripes), len(payload))
        self.catalog.save()
        return PutReport(record=record, stripes=len(stripes),
                         symbols_stored=len(stripes) * cfg.n * cfg.params.alpha)

    def _scrub(self, record: int, stored: list[tuple[int, int]]) -> None:
        """Best-effort: overwrite partially written shares with zeros so no
        node exposes a half-written record."""
        zero = [0] * self.cfg.params.alpha
        calls = [(self.cfg.addresses[node - 1],
                  self._store_share(node, record, stripe, zero))
                 for stripe, node in stored]
        if calls:
            self._fan_out(calls)

    # -- private retrieval ---------------------------------------------------

    def private_get(self, f: int, seed: int | None = None) -> GetReport:
        cfg = self.cfg
        entry = self.catalog.get(f)
        if entry is None:
            raise CoordinatorError(f"record {f} not in catalog")
        rounds = self.catalog.max_stripes  # identical traffic for every f
        rng = random.Random(seed)
        pir_cfg = PirConfig(params=cfg.params, m=cfg.m, f=f)
        patterns = pir.build_patterns(pir_cfg)

        downloaded = 0
        symbols: list[int] = []
        for stripe in range(1, rounds + 1):
            u, queries = pir.fresh_queries(pir_cfg, self.field, rng, patterns)
            calls = []
            for i in range(1, cfg.n + 1):
                body = wire.pack_u32(stripe) + wire.encode_matrix(
                    queries[i - 1].to_rows(), cfg.symbol_width)
                calls.append((cfg.addresses[i - 1],
                              wire.build_message(Kind.QUERY, body)))
            results = self._fan_out(calls)
            answers = []
            for node, result in enumerate(results, 1):
                if isinstance(result, Exception):
                    raise CoordinatorError(
                        f"retrieval unavailable: node {node} ({result})"
                    ) from result
                kind, body = result
                if kind != Kind.ANSWER:
                    raise CoordinatorError(
                        f"retrieval unavailable: node {node} answered {kind.name}")
                values = wire.decode_symbols(body, cfg.symbol_width)
                if len(values) != pir_cfg.d:
                    raise CoordinatorError(
                        f"retrieval unavailable: node {node} sent "
                        f"{len(values)} symbols, expected {pir_cfg.d}")
                answers.append(values)
                downloaded += len(values)
            if stripe <= entry["stripes"]:
                symbols.extend(pir.decode_record(answers, u, self.enc, pir_cfg))

        payload = unpack_payload(symbols, entry["length"])
        return GetReport(payload=payload, stripes_fetched=rounds,
                         downloaded_symbols=downloaded,
                         per_stripe_download=pir_cfg.d * cfg.n)

    # -- repair ----------------------------------------------------------------

    def repair(self, failed: int, verify: bool = False) -> RepairReport:
        cfg = self.cfg
        params = cfg.params
        if not 1 <= failed <= cfg.n:
            raise CoordinatorError(f"node {failed} out of range [1, {cfg.n}]")
        live = self.live_nodes()
        helpers = [i for i in live if i != failed][:params.r]
        if len(helpers) < params.r:
            raise CoordinatorError(
                f"insufficient helpers: {len(helpers)} live, need {params.r}")
        if failed not in live:
            raise CoordinatorError(
                f"replacement node {failed} is not reachable; restart it first")

        restored = 0
        downloaded = 0
        for record in sorted(self.catalog.records):
            stripes = self.catalog.records[record]["stripes"]
            for stripe in range(1, stripes + 1):
                calls = [(cfg.addresses[h - 1],
                          wire.build_message(
                              Kind.REPAIR_HELP,
                              wire.pack_u32(failed, record, stripe)))
                         for h in helpers]
                results = self._fan_out(calls)
                collected: dict[int, int] = {}
                for h, result in zip(helpers, results):
                    if isinstance(result, Exception):
                        raise CoordinatorError(
                            f"repair aborted: helper {h} failed ({result})"
                        ) from result
                    kind, body = result
                    if kind != Kind.REPAIR_SYMBOL:
                        raise CoordinatorError(
                            f"repair aborted: helper {h} answered {kind.name}")
                    (symbol,) = wire.decode_symbols(body, cfg.symbol_width)
                    collected[h] = symbol
                    downloaded += 1
                row = msr.repair_regenerate(failed, collected, self.enc)
                kind, _ = wire.request(
                    cfg.addresses[failed - 1],
                    self._store_share(failed, record, stripe, row))
                if kind != Kind.OK:
                    raise CoordinatorError(
                        f"repair aborted: node {failed} refused STORE")
                restored += 1
                if verify:
                    self._verify_repair(failed, record, stripe, row, helpers)

        return RepairReport(failed=failed, helpers=tuple(helpers),
                            shares_restored=restored,
                            symbols_downloaded=downloaded, verified=verify)

    def _verify_repair(self, failed: int, record: int, stripe: int,
                       row: list[int], helpers: list[int]) -> None:
        """Re-encode from k helpers' shares and compare the failed row."""
        params = self.cfg.params
        shares = {h: self.get_share(h, record, stripe)
                  for h in helpers[:params.k]}
        msg = msr.recover(shares, self.enc)
        expected = msr.encode(msg, self.enc).node_share(failed)
        if expected != row:
            raise CoordinatorError(
                f"repair verification failed for r{record}_s{stripe}")
        read_back = self.get_share(failed, record, stripe)
        if read_back != row:
            raise CoordinatorError(
                f"node {failed} stored a different row for r{record}_s{stripe}")


def coordinator_put(cfg: ClusterConfig, record: int, payload: bytes) -> int:
    """Stripe count after distributing one record."""
    return Coordinator(cfg).put(record, payload).stripes


def coordinator_private_get(cfg: ClusterConfig, f: int,
                            seed: int | None = None) -> bytes:
    return Coordinator(cfg).private_get(f, seed).payload


def coordinator_repair(cfg: ClusterConfig, failed: int,
                       verify: bool = False) -> RepairReport:
    return Coordinator(cfg).repair(failed, verify=verify)
