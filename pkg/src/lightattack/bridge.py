"""Host side of the external-agent wire protocol (v1).

External processes can serve as the attacked agent by speaking
newline-delimited JSON over their standard streams (default) or a TCP
stream socket. The full message schema and example transcripts live in
docs/PROTOCOL.md. The host drives a strict request-response session: every
``observe``/``peek`` is answered by exactly one ``act_response``/
``peek_response`` carrying the same sequence number, and lookahead
isolation is realized with ``fork``/``restore`` messages (elided for
clients that declare themselves stateless at init time).
"""

from __future__ import annotations

import json
import select
import shlex
import socket
import subprocess
from typing import TYPE_CHECKING

from .agents import Agent, AgentFactory
from .errors import BridgeProtocolError, BridgeTimeoutError, BridgeVersionError
from .scene import Action, Scene
from .sensing import Observation

if TYPE_CHECKING:
    from .episode import EpisodeSpec

PROTOCOL_VERSION = "v1"
MESSAGE_KINDS = ("init", "observe", "act_response", "peek", "peek_response",
                 "fork", "restore", "end", "error")
DEFAULT_TIMEOUT = 10.0


def encode_message(kind: str, session_id: str, seq: int, payload: dict,
                   protocol_version: str = PROTOCOL_VERSION) -> str:
    if kind not in MESSAGE_KINDS:
        raise ValueError(f"unknown message kind {kind!r}")
    obj = {"kind": kind, "session_id": session_id, "seq": seq,
           "protocol_version": protocol_version, "payload": payload}
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def parse_message(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise BridgeProtocolError(f"malformed message line: {exc}") from exc
    if not isinstance(obj, dict):
        raise BridgeProtocolError("message must be a JSON object")
    missing = {"kind", "session_id", "seq", "protocol_version", "payload"} - set(obj)
    if missing:
        raise BridgeProtocolError(f"message missing fields: {sorted(missing)}")
    if obj["kind"] not in MESSAGE_KINDS:
        raise BridgeProtocolError(f"unknown message kind {obj['kind']!r}")
    if not isinstance(obj["seq"], int):
        raise BridgeProtocolError("seq must be an integer")
    return obj


def observation_payload(obs: Observation) -> dict:
    return {
        "luminance": obs.luminance,
        "goal_bearing": obs.goal_bearing,
        "goal_distance": obs.goal_distance,
        "obstacle_rays": list(obs.obstacle_rays),
        "timestep": obs.timestep,
    }


class _Transport:
    """Line transport over a subprocess or a TCP socket."""

    def __init__(self, endpoint: str, timeout: float) -> None:
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        if endpoint.startswith("tcp://"):
            host, _, port = endpoint[len("tcp://"):].partition(":")
            if not port:
                raise BridgeProtocolError(f"tcp endpoint needs host:port, got {endpoint!r}")
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")
            self._writer = self._sock.makefile("w", encoding="utf-8", newline="\n")
        else:
            argv = shlex.split(endpoint)
            if not argv:
                raise BridgeProtocolError("empty bridge endpoint")
            self._proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                          text=True, bufsize=1)
            self._reader = self._proc.stdout
            self._writer = self._proc.stdin

    def send_line(self, line: str) -> None:
        try:
            self._writer.write(line + "\n")
            self._writer.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeProtocolError(f"bridge write failed: {exc}") from exc

    def recv_line(self) -> str:
        if self._proc is not None:
            ready, _, _ = select.select([self._reader], [], [], self.timeout)
            if not ready:
                raise BridgeTimeoutError(f"no response within {self.timeout}s")
        line = self._reader.readline()
        if line == "":
            raise BridgeProtocolError("bridge closed the stream")
        return line.rstrip("\n")

    def close(self) -> None:
        for stream in (getattr(self, "_writer", None), getattr(self, "_reader", None)):
            try:
                if stream is not None:
                    stream.close()
            except OSError:
                pass
        if self._sock is not None:
            self._sock.close()
        if self._proc is not None:
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


class BridgedAgent(Agent):
    """AgentHandle backed by an external process speaking protocol v1."""

    def __init__(self, endpoint: str, scene: Scene, spec: "EpisodeSpec",
                 timeout: float = DEFAULT_TIMEOUT) -> None:
        super().__init__()
        self.session_id = f"{scene.id}#s{spec.seed}"
        self._seq = 0
        self._transport = _Transport(endpoint, timeout)
        init_payload = {
            "scene_id": scene.id,
            "instruction": spec.instruction,
            "max_steps": spec.max_steps,
            "seed": spec.seed,
            "goal_radius": scene.goal.radius,
        }
        reply = self._round_trip("init", init_payload, expect="init")
        self.stateless = bool(reply["payload"].get("stateless", False))

    # -- protocol plumbing -------------------------------------------------

    def _send(self, kind: str, payload: dict) -> int:
        self._seq += 1
        self._transport.send_line(encode_message(kind, self.session_id, self._seq, payload))
        return self._seq

    def _receive(self, expect: str, seq: int) -> dict:
        msg = parse_message(self._transport.recv_line())
        if msg["protocol_version"] != PROTOCOL_VERSION:
            raise BridgeVersionError(
                f"agent speaks {msg['protocol_version']!r}, host speaks {PROTOCOL_VERSION!r}")
        if msg["kind"] == "error":
            raise BridgeProtocolError(f"agent reported error: {msg['payload'].get('message')}")
        if msg["session_id"] != self.session_id:
            raise BridgeProtocolError(f"response for wrong session {msg['session_id']!r}")
        if msg["seq"] != seq:
            raise BridgeProtocolError(f"out-of-order response: expected seq {seq}, got {msg['seq']}")
        if msg["kind"] != expect:
            raise BridgeProtocolError(f"expected {expect!r}, got {msg['kind']!r}")
        return msg

    def _round_trip(self, kind: str, payload: dict, expect: str) -> dict:
        seq = self._send(kind, payload)
        return self._receive(expect, seq)

    def _parse_action(self, msg: dict) -> Action:
        payload = msg["payload"]
        try:
            action = payload["action"]
            kind = action["kind"]
            magnitude = action.get("magnitude", 0.0)
            return Action.decode(kind if kind == "stop" else f"{kind}:{magnitude!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise BridgeProtocolError(f"bad action payload {payload!r}: {exc}") from exc

    # -- AgentHandle surface ------------------------------------------------

    def _step(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        msg = self._round_trip("observe", observation_payload(obs), expect="act_response")
        return self._parse_action(msg)

    def peek(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        return self.fork().act(obs, spec)

    def fork(self) -> "Agent":
        return _BridgeFork(self)

    def finish(self) -> None:
        try:
            self._send("end", {})
        except BridgeProtocolError:
            pass
        finally:
            self._transport.close()


class _BridgeFork(Agent):
    """One-shot remote snapshot: a single act() runs as fork/peek/restore."""

    def __init__(self, parent: BridgedAgent) -> None:
        super().__init__()
        self._parent = parent
        self._consumed = False
        self._stopped = parent._stopped

    def _step(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        if self._consumed:
            raise BridgeProtocolError("a bridged fork supports exactly one act()")
        self._consumed = True
        parent = self._parent
        if parent.stateless:
            msg = parent._round_trip("peek", observation_payload(obs), expect="peek_response")
            return parent._parse_action(msg)
        parent._send("fork", {})
        msg = parent._round_trip("peek", observation_payload(obs), expect="peek_response")
        parent._send("restore", {})
        return parent._parse_action(msg)

    def fork(self) -> "Agent":
        raise BridgeProtocolError("bridged forks cannot be forked again")


def bridge_session(endpoint: str, scene: Scene, spec: "EpisodeSpec",
                   timeout: float = DEFAULT_TIMEOUT) -> BridgedAgent:
    """Open a protocol session and return the resulting agent handle."""
    return BridgedAgent(endpoint, scene, spec, timeout=timeout)


def bridge_factory(endpoint: str, timeout: float = DEFAULT_TIMEOUT) -> AgentFactory:
    def factory(scene: Scene, spec: "EpisodeSpec") -> Agent:
        return bridge_session(endpoint, scene, spec, timeout=timeout)

    return factory
