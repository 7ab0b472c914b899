"""Local cluster lifecycle: spawn, stop, and sabotage node daemons.

Each node runs as a ``python -m pmsr.node`` subprocess with its own
store directory under the cluster root (``<root>/node<i>``) and a
pidfile the manager uses for idempotent up/down across CLI invocations.
Failure injection supports two modes: ``kill`` stops the daemon process,
``wipe`` deletes the node's share files while the daemon keeps serving
(and starts answering "not found").
"""

from __future__ import annotations

import os
import signal
import subprocess
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from pmsr.coordinator import ClusterConfig, Coordinator
from pmsr.store import Manifest, ShareStore, StoreError

STARTUP_TIMEOUT = 10.0
SHUTDOWN_TIMEOUT = 5.0


class ClusterError(Exception):
    pass


@dataclass(frozen=True)
class NodeStatus:
    node: int
    pid: int | None
    running: bool
    healthy: bool


class ClusterManager:
    def __init__(self, cfg: ClusterConfig):
        self.cfg = cfg
        self.root = Path(cfg.root)

    def node_root(self, node: int) -> Path:
        return self.root / f"node{node}"

    def _pidfile(self, node: int) -> Path:
        return self.node_root(node) / "pid"

    def _read_pid(self, node: int) -> int | None:
        try:
            return int(self._pidfile(node).read_text().strip())
        except (FileNotFoundError, ValueError):
            return None

    @staticmethod
    def _process_running(pid: int | None) -> bool:
        if pid is None:
            return False
        try:
            # Reap first if it is our own exited child: a zombie would
            # otherwise still answer the signal-0 probe below.
            os.waitpid(pid, os.WNOHANG)
        except (ChildProcessError, OSError):
            pass
        try:
            os.kill(pid, 0)
        except (ProcessLookupError, PermissionError):
            return False
        return True

    def _ensure_store(self, node: int) -> None:
        root = self.node_root(node)
        if not (root / "manifest").is_file():
            manifest = Manifest(
                q=self.cfg.q, n=self.cfg.n, k=self.cfg.k, m=self.cfg.m,
                node_id=node, symbol_width=self.cfg.symbol_width,
                points=self.cfg.points)
            ShareStore.create(root, manifest)

    def start_node(self, node: int, wait: bool = True) -> int:
        """Spawn one daemon; its pid. No-op if it is already running."""
        pid = self._read_pid(node)
        if self._process_running(pid):
            return pid  # already up
        self._ensure_store(node)
        host, port = self.cfg.addresses[node - 1]
        log_path = self.node_root(node) / "node.log"
        env = dict(os.environ,
                   PMSR_ROOT=str(self.node_root(node)),
                   PMSR_ADDR=f"{host}:{port}")
        with open(log_path, "ab") as log_file:
            proc = subprocess.Popen(
                [sys.executable, "-m", "pmsr.node"],
                env=env, stdout=log_file, stderr=log_file,
                start_new_session=True)
        self._pidfile(node).write_text(f"{proc.pid}\n")
        if wait:
            self._wait_healthy(node, proc.pid)
        return proc.pid

    def _wait_healthy(self, node: int, pid: int) -> None:
        coord = Coordinator(self.cfg)
        deadline = time.monotonic() + STARTUP_TIMEOUT
        while time.monotonic() < deadline:
            if coord.node_healthy(node):
                return
            if not self._process_running(pid):
                raise ClusterError(
                    f"node {node} exited during startup; see "
                    f"{self.node_root(node) / 'node.log'}")
            time.sleep(0.05)
        raise ClusterError(f"node {node} did not become healthy in time")

    def up(self) -> list[tuple[int, bool]]:
        """Start every node; (node, was_already_running) per node."""
        out = []
        for node in range(1, self.cfg.n + 1):
            already = self._process_running(self._read_pid(node))
            self.start_node(node)
            out.append((node, already))
        return out

    def stop_node(self, node: int) -> bool:
        """SIGTERM the daemon; whether a process was stopped."""
        pid = self._read_pid(node)
        self._pidfile(node).unlink(missing_ok=True)
        if not self._process_running(pid):
            return False
        os.kill(pid, signal.SIGTERM)
        deadline = time.monotonic() + SHUTDOWN_TIMEOUT
        while time.monotonic() < deadline:
            if not self._process_running(pid):
                return True
            time.sleep(0.05)
        os.kill(pid, signal.SIGKILL)
        return True

    def down(self) -> int:
        """Stop all daemons; how many were actually running."""
        return sum(self.stop_node(node) for node in range(1, self.cfg.n + 1))

    def inject_failure(self, node: int, mode: str) -> str:
        """kill: stop the daemon. wipe: delete its share files, daemon
        stays up and starts answering "not found"."""
        if not 1 <= node <= self.cfg.n:
            raise ClusterError(f"unknown node {node}")
        if mode == "kill":
            stopped = self.stop_node(node)
            return f"node {node} killed" if stopped else f"node {node} was not running"
        if mode == "wipe":
            try:
                store = ShareStore(self.node_root(node))
            except StoreError as exc:
                raise ClusterError(f"node {node} has no store: {exc}") from exc
            removed = store.wipe()
            return f"node {node} wiped ({removed} share files removed)"
        raise ClusterError(f"unknown failure mode {mode!r}")

    def status(self) -> list[NodeStatus]:
        coord = Coordinator(self.cfg)
        out = []
        for node in range(1, self.cfg.n + 1):
            pid = self._read_pid(node)
            running = self._process_running(pid)
            out.append(NodeStatus(node=node, pid=pid, running=running,
                                  healthy=coord.node_healthy(node)))
        return out
