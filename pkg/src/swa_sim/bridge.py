"""Line-delimited JSON bridge to an external candidate-proposing agent.

The child process reads one JSON object per line on stdin and answers on
stdout. Messages (``type`` field):

    -> hello            {protocol_version, n, C, beta, x_max, k}
    <- hello            {protocol_version}
    -> propose_request  {request_id, t, agent_id, mu, last_X, last_reward}
    <- propose_response {candidates: [float, ...], request_id?}
    -> shutdown         {}

Unknown fields are ignored. A response carrying a ``request_id`` that does not
match the outstanding request is treated as stale and skipped.
"""
from __future__ import annotations

import json
import logging
import queue
import shlex
import subprocess
import threading
import time
from typing import List, Optional, Sequence, Union

from .game import GameConfig

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = "1"

# Returned by propose() when the reply is unusable; fails policy validation.
MALFORMED = object()


class BridgeError(RuntimeError):
    """The external agent could not be started or failed the handshake."""


def _reader(stream, q: "queue.Queue[Optional[str]]") -> None:
    try:
        for line in stream:
            q.put(line)
    finally:
        q.put(None)


class BridgeSession:
    def __init__(
        self,
        command: Union[str, Sequence[str]],
        cfg: GameConfig,
        k: int,
        timeout: float = 5.0,
        handshake_timeout: float = 10.0,
    ):
        self.argv: List[str] = shlex.split(command) if isinstance(command, str) else list(command)
        self.cfg = cfg
        self.k = k
        self.timeout = timeout
        self.handshake_timeout = handshake_timeout
        self.proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._next_id = 0
        self._eof = False

    def __enter__(self) -> "BridgeSession":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def start(self) -> None:
        try:
            self.proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"cannot start agent {self.argv!r}: {exc}") from exc
        threading.Thread(target=_reader, args=(self.proc.stdout, self._lines), daemon=True).start()
        cfg = self.cfg
        self._send(
            {
                "type": "hello",
                "protocol_version": PROTOCOL_VERSION,
                "n": cfg.n,
                "C": cfg.C,
                "beta": cfg.beta,
                "x_max": cfg.x_max,
                "k": self.k,
            }
        )
        msg = self._read_message(time.monotonic() + self.handshake_timeout)
        if not isinstance(msg, dict) or msg.get("type") != "hello":
            self.close()
            raise BridgeError(f"agent {self.argv!r} did not answer hello (got {msg!r})")
        if str(msg.get("protocol_version")) != PROTOCOL_VERSION:
            self.close()
            raise BridgeError(
                f"agent speaks protocol {msg.get('protocol_version')!r}, expected {PROTOCOL_VERSION!r}"
            )

    def _send(self, obj: dict) -> bool:
        try:
            self.proc.stdin.write(json.dumps(obj) + "\n")
            self.proc.stdin.flush()
            return True
        except (BrokenPipeError, OSError, ValueError):
            return False

    def _read_message(self, deadline: float):
        """Next decoded message, ``None`` on timeout/EOF, ``MALFORMED`` on bad JSON."""
        while not self._eof:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                return None
            if line is None:
                self._eof = True
                return None
            line = line.strip()
            if not line:
                continue
            try:
                return json.loads(line)
            except json.JSONDecodeError:
                return MALFORMED
        return None

    def propose(self, t: int, agent_id: int, mu: float, last_X: Optional[float], last_reward: Optional[float]):
        """Ask for candidates. Returns the raw ``candidates`` payload, ``None`` on timeout."""
        self._next_id += 1
        rid = self._next_id
        ok = self._send(
            {
                "type": "propose_request",
                "request_id": rid,
                "t": t,
                "agent_id": agent_id,
                "mu": mu,
                "last_X": last_X,
                "last_reward": last_reward,
            }
        )
        if not ok:
            return None
        deadline = time.monotonic() + self.timeout
        while True:
            msg = self._read_message(deadline)
            if msg is None or msg is MALFORMED:
                return msg
            if not isinstance(msg, dict) or msg.get("type") != "propose_response":
                return MALFORMED
            if "request_id" in msg and msg["request_id"] != rid:
                continue
            return msg.get("candidates", MALFORMED)

    def close(self) -> None:
        if self.proc is None:
            return
        if self.proc.poll() is None:
            self._send({"type": "shutdown"})
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=1.0)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
        self.proc = None
