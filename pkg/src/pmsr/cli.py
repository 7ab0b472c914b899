"""Operator command line.

Subcommands: ``cluster up|down``, ``put``, ``get``, ``fail``, ``repair``,
``metrics``, ``verify``, ``demo example1``.  All data commands read the
cluster description from a key = value config file (``--config``,
default ``pmsr.conf`` or $PMSR_CONFIG).  Exit codes: 0 success,
1 operational error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from fractions import Fraction

from pmsr import msr, pir
from pmsr.cluster import ClusterError, ClusterManager
from pmsr.coordinator import ClusterConfig, Coordinator, CoordinatorError
from pmsr.field import Field
from pmsr.matrix import Matrix
from pmsr.msr import MsrParams
from pmsr.pir import PirConfig
from pmsr.store import StoreError
from pmsr.wire import RemoteError


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmsr",
        description="Privately retrievable regenerating-code storage.")
    parser.add_argument(
        "-c", "--config",
        default=os.environ.get("PMSR_CONFIG", "pmsr.conf"),
        help="cluster config file (key = value lines)")
    sub = parser.add_subparsers(dest="command", required=True)

    cluster = sub.add_parser("cluster", help="start or stop the local daemons")
    cluster.add_argument("action", choices=["up", "down"])

    put = sub.add_parser("put", help="encode and distribute a record")
    put.add_argument("record", type=int, help="record id (1-based)")
    put.add_argument("file", help="payload file")

    get = sub.add_parser("get", help="retrieve a record privately")
    get.add_argument("--private", type=int, required=True, metavar="F",
                     help="record id to retrieve; nodes never learn it")
    get.add_argument("--seed", type=int, default=None,
                     help="seed for the query randomness")
    get.add_argument("--out", required=True, help="write the payload here")

    fail = sub.add_parser("fail", help="inject a node failure")
    fail.add_argument("node", type=int)
    fail.add_argument("--mode", choices=["kill", "wipe"], required=True)

    repair = sub.add_parser("repair", help="rebuild a failed node's shares")
    repair.add_argument("node", type=int)
    repair.add_argument("--verify", action="store_true",
                        help="cross-check every regenerated share")

    sub.add_parser("metrics", help="print exact storage and traffic metrics")
    sub.add_parser("verify", help="audit the retrieval pattern structure")

    demo = sub.add_parser("demo", help="run a built-in walkthrough")
    demo.add_argument("what", choices=["example1"])
    demo.add_argument("--seed", type=int, default=1)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except (CoordinatorError, ClusterError, StoreError, RemoteError,
            ConnectionError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "demo":
        return demo_example1(seed=args.seed)
    cfg = ClusterConfig.from_file(args.config)
    if args.command == "cluster":
        return _cluster(cfg, args.action)
    if args.command == "put":
        return _put(cfg, args.record, args.file)
    if args.command == "get":
        return _get(cfg, args.private, args.seed, args.out)
    if args.command == "fail":
        print(ClusterManager(cfg).inject_failure(args.node, args.mode))
        return 0
    if args.command == "repair":
        return _repair(cfg, args.node, args.verify)
    if args.command == "metrics":
        return _metrics(cfg)
    if args.command == "verify":
        return _verify(cfg)
    raise AssertionError(f"unhandled command {args.command}")


def _cluster(cfg: ClusterConfig, action: str) -> int:
    manager = ClusterManager(cfg)
    if action == "up":
        for node, already in manager.up():
            if already:
                print(f"warning: node {node} already running, skipped")
            else:
                print(f"node {node} up at "
                      f"{cfg.addresses[node - 1][0]}:{cfg.addresses[node - 1][1]}")
    else:
        stopped = manager.down()
        print(f"stopped {stopped} nodes")
    return 0


def _put(cfg: ClusterConfig, record: int, path: str) -> int:
    with open(path, "rb") as handle:
        payload = handle.read()
    report = Coordinator(cfg).put(record, payload)
    print(f"record {record}: {len(payload)} bytes in {report.stripes} stripes, "
          f"{report.symbols_stored} symbols stored")
    return 0


def _get(cfg: ClusterConfig, f: int, seed: int | None, out: str) -> int:
    report = Coordinator(cfg).private_get(f, seed)
    with open(out, "wb") as handle:
        handle.write(report.payload)
    b = cfg.record_symbols
    cpop = Fraction(report.per_stripe_download, b)
    print(f"record {f}: {len(report.payload)} bytes from "
          f"{report.stripes_fetched} stripes, "
          f"downloaded {report.downloaded_symbols} symbols "
          f"({report.per_stripe_download} per stripe), "
          f"cPoP = {format_rational(cpop)}")
    return 0


def _repair(cfg: ClusterConfig, node: int, verify: bool) -> int:
    coordinator = Coordinator(cfg)
    if not coordinator.node_healthy(node):
        print(f"node {node} is down, restarting its daemon")
        ClusterManager(cfg).start_node(node)
    report = coordinator.repair(node, verify=verify)
    print(f"node {node} repaired: restored {report.shares_restored} shares, "
          f"downloaded {report.symbols_downloaded} symbols from helpers "
          f"{list(report.helpers)}"
          + (", all shares verified" if report.verified else ""))
    return 0


def _pir_config(cfg: ClusterConfig) -> PirConfig:
    return PirConfig(params=cfg.params, m=cfg.m, f=1)


def _metrics(cfg: ClusterConfig) -> int:
    report = pir.metrics_report(_pir_config(cfg))
    print(f"SO={format_rational(report.so)}")
    print(f"cPoP={format_rational(report.cpop)}")
    print(f"RR={format_rational(report.rr)}")
    print(f"tradeoff={format_rational(report.tradeoff_product)}")
    print(f"slack={format_rational(report.slack)}")
    return 0


def _verify(cfg: ClusterConfig) -> int:
    pir_cfg = _pir_config(cfg)
    field = Field(cfg.q)
    enc = msr.build_encoding_matrix(cfg.params, field, cfg.points)
    patterns = pir.build_patterns(pir_cfg)
    report = pir.verify_scheme(pir_cfg, enc, patterns)
    print(f"interference solvable per subquery: "
          f"{'ok' if report.interference_ok else 'FAIL'}")
    print(f"desired-symbol coverage: {'ok' if report.coverage_ok else 'FAIL'}")
    print(f"counting bound k*alpha <= (n-r)*d: "
          f"{'ok' if report.counting_ok else 'FAIL'}")
    for failure in report.failures:
        print(f"  {failure}")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def _fmt_rows(rows: list[list[int]]) -> str:
    return "[" + ", ".join(str(row) for row in rows) + "]"


def demo_example1(seed: int = 1) -> int:
    """Walk the canonical 6-node, 3-record system end to end, printing
    every intermediate object, and fail loudly on any mismatch."""
    field = Field(13)
    params = MsrParams.from_nk(6, 3)
    enc = msr.build_encoding_matrix(params, field)
    records = [
        [1, 2, 3, 4, 5, 6],
        [7, 8, 9, 10, 11, 12],
        [3, 1, 4, 1, 5, 9],
    ]
    cfg = PirConfig(params=params, m=3, f=1)

    print("system: 6 nodes, recovery from any 3, repair from any 4,")
    print("        2 symbols per node per record, records of 6 symbols, GF(13)")
    print()
    print("encoding matrix psi (rows = nodes):")
    for i, row in enumerate(enc.psi.to_rows(), 1):
        print(f"  node {i}: {row}")
    print()

    messages = [msr.message_matrix_from_record(r, params, field) for r in records]
    codes = [msr.encode(m, enc) for m in messages]
    print("records:")
    for a, r in enumerate(records, 1):
        print(f"  X{a} = {r}")
    print("node contents (2 symbols per record, records left to right):")
    stored = []
    for i in range(1, 7):
        row = sum((codes[a].node_share(i) for a in range(3)), [])
        stored.append(row)
        print(f"  node {i}: {row}")
    print()

    patterns = pir.build_patterns(cfg)
    print("pattern matrices (binary, one per node):")
    for i, pattern in enumerate(patterns, 1):
        print(f"  V{i} = {_fmt_rows([list(r) for r in pattern.rows])}")
    print("pattern blocks aimed at record 1 (V^i E^1):")
    for i, pattern in enumerate(patterns, 1):
        block = pir.expand_pattern(pattern, 1, cfg, field)
        print(f"  V{i}E1 = {_fmt_rows(block.to_rows())}")
    print()

    rng = random.Random(seed)
    u, queries = pir.fresh_queries(cfg, field, rng, patterns)
    print(f"retrieving X1 privately, seed {seed}; query randomness U:")
    for row in u.to_rows():
        print(f"  {row}")
    answers = [pir.node_answer(queries[i], stored[i]) for i in range(6)]
    download = sum(len(a) for a in answers)
    print("answers (3 per node):")
    for i, answer in enumerate(answers, 1):
        print(f"  A{i} = {answer}")
    print()

    print("subquery 1 as seen by the decoder (I_h = hidden interference):")
    for i in range(1, 7):
        coeffs = enc.psi_row(i)
        terms = []
        s = patterns[i - 1].signal_column(1)
        if s is not None:
            terms.append(f"C1[{i},{s}]")
        for h, coeff in enumerate(coeffs, 1):
            terms.append(f"I{h}" if coeff == 1 else f"{coeff}*I{h}")
        print(f"  ({i})  {' + '.join(terms)} = {answers[i - 1][0]}")
    quiet = pir.interference_nodes(1, cfg)
    print(f"interference solved from equations {tuple(quiet)}:")
    psi_sub = enc.psi.submatrix_rows([i - 1 for i in quiet])
    i_vec = psi_sub.solve(
        Matrix.column(field, [answers[i - 1][0] for i in quiet])).col(0)
    print(f"  I = {i_vec}")
    stack = messages[0].m.hstack(messages[1].m).hstack(messages[2].m)
    truth = pir.interference_table(u, stack).i_vals[0]
    if tuple(i_vec) != truth:
        print(f"MISMATCH: solved interference {i_vec} != actual {list(truth)}")
        return 1
    print("  matches M_h . U_1^T computed from the plaintext database")
    print()

    decoded = pir.decode_record(answers, u, enc, cfg)
    print(f"decoded record: {decoded}")
    if decoded != records[0]:
        print(f"MISMATCH: decoded {decoded} != X1 {records[0]}")
        return 1
    if download != 18:
        print(f"MISMATCH: downloaded {download} symbols, expected 18")
        return 1
    print(f"downloaded {download} symbols for a 6-symbol record")
    report = pir.metrics_report(cfg)
    print(f"cPoP = {report.cpop}")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
