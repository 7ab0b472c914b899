"""Per-node persistent share storage.

Layout under the store root:

    <root>/manifest                  key = value text, cluster parameters
    <root>/shares/r<record>_s<stripe>.pmsr

A share file is self-describing so it survives manifest loss: magic
"PMSR", a version byte, then q, n, k, node-id, record-id, stripe-id as
4-byte big-endian integers, then the alpha symbols at the manifest's
symbol width, little-endian.  Reads validate the header against the
manifest; writes go through a temp file and rename so concurrent readers
never observe a torn share.
"""

from __future__ import annotations

import os
import re
import threading
from dataclasses import dataclass
from pathlib import Path

from pmsr.wire import decode_symbols, encode_symbols, symbol_width_for

MAGIC = b"PMSR"
VERSION = 1
_SHARE_RE = re.compile(r"^r(\d+)_s(\d+)\.pmsr$")


class StoreError(Exception):
    pass


@dataclass(frozen=True)
class Manifest:
    """Cluster parameters a node needs to serve requests."""

    q: int
    n: int
    k: int
    m: int
    node_id: int
    symbol_width: int
    points: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.node_id <= self.n:
            raise StoreError(f"node id {self.node_id} out of range [1, {self.n}]")
        if len(self.points) != self.n:
            raise StoreError(f"need {self.n} points, got {len(self.points)}")
        if self.symbol_width < symbol_width_for(self.q):
            raise StoreError(
                f"symbol width {self.symbol_width} cannot hold GF({self.q}) values")

    @property
    def alpha(self) -> int:
        return self.k - 1

    def format(self) -> str:
        lines = [
            f"q = {self.q}",
            f"n = {self.n}",
            f"k = {self.k}",
            f"m = {self.m}",
            f"node_id = {self.node_id}",
            f"symbol_width = {self.symbol_width}",
            f"points = {','.join(str(p) for p in self.points)}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Manifest":
        pairs = parse_kv(text)
        try:
            return cls(
                q=int(pairs["q"]),
                n=int(pairs["n"]),
                k=int(pairs["k"]),
                m=int(pairs["m"]),
                node_id=int(pairs["node_id"]),
                symbol_width=int(pairs["symbol_width"]),
                points=tuple(int(p) for p in pairs["points"].split(",")),
            )
        except KeyError as exc:
            raise StoreError(f"manifest missing key {exc.args[0]}") from None


def parse_kv(text: str) -> dict[str, str]:
    """key = value lines; blank lines and #-comments ignored."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise StoreError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


class ShareStore:
    """Share files for one node; concurrent reads, serialized writes."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.shares_dir = self.root / "shares"
        manifest_path = self.root / "manifest"
        if not manifest_path.is_file():
            raise StoreError(f"no manifest at {manifest_path}")
        self.manifest = Manifest.parse(manifest_path.read_text())
        self.shares_dir.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    @classmethod
    def create(cls, root: str | os.PathLike, manifest: Manifest) -> "ShareStore":
        rootp = Path(root)
        rootp.mkdir(parents=True, exist_ok=True)
        (rootp / "manifest").write_text(manifest.format())
        return cls(rootp)

    def share_path(self, record: int, stripe: int) -> Path:
        return self.shares_dir / f"r{record}_s{stripe}.pmsr"

    def write_share(self, record: int, stripe: int, symbols: list[int]) -> None:
        man = self.manifest
        if len(symbols) != man.alpha:
            raise StoreError(f"share must have {man.alpha} symbols, got {len(symbols)}")
        if any(not 0 <= v < man.q for v in symbols):
            raise StoreError(f"symbol out of range for GF({man.q})")
        header = MAGIC + bytes([VERSION])
        for value in (man.q, man.n, man.k, man.node_id, record, stripe):
            header += int(value).to_bytes(4, "big")
        blob = header + encode_symbols(symbols, man.symbol_width)
        path = self.share_path(record, stripe)
        tmp = path.with_suffix(".tmp")
        with self._write_lock:
            tmp.write_bytes(blob)
            os.replace(tmp, path)

    def read_share(self, record: int, stripe: int) -> list[int] | None:
        """The stored symbols, or None when this (record, stripe) is absent."""
        path = self.share_path(record, stripe)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            return None
        return self._decode_share(blob, record, stripe, path)

    def _decode_share(self, blob: bytes, record: int, stripe: int,
                      path: Path) -> list[int]:
        man = self.manifest
        header_len = len(MAGIC) + 1 + 6 * 4
        if len(blob) < header_len or blob[:4] != MAGIC:
            raise StoreError(f"{path}: not a share file")
        if blob[4] != VERSION:
            raise StoreError(f"{path}: unsupported version {blob[4]}")
        fields = [int.from_bytes(blob[5 + 4 * i:9 + 4 * i], "big") for i in range(6)]
        q, n, k, node_id, rec, str_ = fields
        if (q, n, k, node_id) != (man.q, man.n, man.k, man.node_id):
            raise StoreError(f"{path}: header disagrees with manifest")
        if (rec, str_) != (record, stripe):
            raise StoreError(f"{path}: header names r{rec}_s{str_}")
        symbols = decode_symbols(blob[header_len:], man.symbol_width)
        if len(symbols) != man.alpha:
            raise StoreError(f"{path}: {len(symbols)} symbols, expected {man.alpha}")
        if any(v >= man.q for v in symbols):
            raise StoreError(f"{path}: symbol out of range for GF({man.q})")
        return symbols

    def list_shares(self) -> list[tuple[int, int]]:
        found = []
        for entry in self.shares_dir.iterdir():
            match = _SHARE_RE.match(entry.name)
            if match:
                found.append((int(match.group(1)), int(match.group(2))))
        return sorted(found)

    def wipe(self) -> int:
        """Delete every share file; the count removed."""
        removed = 0
        with self._write_lock:
            for record, stripe in self.list_shares():
                self.share_path(record, stripe).unlink(missing_ok=True)
                removed += 1
        return removed
