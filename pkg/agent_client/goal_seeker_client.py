#!/usr/bin/env python3
"""Reference external navigation agent speaking wire protocol v1.

A scripted goal seeker that mirrors the host framework's in-process
reference agent, demonstrating that any external policy can be driven (and
attacked) through the protocol boundary. Standard library only; run as

    python3 goal_seeker_client.py [--protocol-version v1]

reading requests from stdin and writing responses to stdout, one JSON
object per line. See the host's docs/PROTOCOL.md for the message schema.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

PROTOCOL_VERSION = "v1"
AGENT_NAME = "goal_seeker_client"

STEP_METERS = 0.25
TURN_RADIANS = math.pi / 6.0
ALIGN_TOLERANCE = math.pi / 12.0

KNOWN_KINDS = {"init", "observe", "peek", "fork", "restore", "end",
               "act_response", "peek_response", "error"}


class ClientState:
    """Committed history plus a stack of fork snapshots."""

    def __init__(self) -> None:
        self.session_id: str | None = None
        self.goal_radius: float = 0.0
        self.stopped = False
        self.history: list[int] = []  # committed observation timesteps
        self.fork_stack: list[tuple[bool, list[int]]] = []

    def snapshot(self) -> None:
        self.fork_stack.append((self.stopped, list(self.history)))

    def restore(self) -> bool:
        if not self.fork_stack:
            return False
        self.stopped, self.history = self.fork_stack.pop()
        return True

    def commit(self, obs: dict) -> None:
        self.history.append(obs["timestep"])


def decide(obs: dict, stop_radius: float) -> dict:
    """The goal-seeker rule, identical to the host's reference agent."""
    bearing = obs.get("goal_bearing")
    distance = obs.get("goal_distance")
    if bearing is None or distance is None:
        return {"kind": "rotate_left", "magnitude": TURN_RADIANS}
    if distance <= stop_radius:
        return {"kind": "stop"}
    if abs(bearing) <= ALIGN_TOLERANCE:
        return {"kind": "move_ahead", "magnitude": STEP_METERS}
    if bearing > 0.0:
        return {"kind": "rotate_right", "magnitude": TURN_RADIANS}
    return {"kind": "rotate_left", "magnitude": TURN_RADIANS}


def emit(out, kind: str, session_id: str, seq: int, payload: dict) -> None:
    message = {"kind": kind, "session_id": session_id, "seq": seq,
               "protocol_version": PROTOCOL_VERSION, "payload": payload}
    out.write(json.dumps(message, sort_keys=True, separators=(",", ":")) + "\n")
    out.flush()


def serve(inp, out, protocol_version: str = PROTOCOL_VERSION) -> int:
    """Answer one protocol session; returns the process exit status."""
    state = ClientState()
    last_seq = 0

    def fail(session_id: str, seq: int, message: str) -> int:
        emit(out, "error", session_id, seq, {"message": message})
        return 1

    for raw in inp:
        raw = raw.strip()
        if not raw:
            continue
        try:
            msg = json.loads(raw)
            kind = msg["kind"]
            session_id = msg["session_id"]
            seq = msg["seq"]
            version = msg["protocol_version"]
            payload = msg["payload"]
        except (json.JSONDecodeError, KeyError, TypeError):
            return fail(state.session_id or "?", last_seq + 1, f"malformed message: {raw[:200]}")

        if version != protocol_version:
            return fail(session_id, seq, f"unsupported protocol version {version!r}")
        if kind not in KNOWN_KINDS:
            return fail(session_id, seq, f"unknown message kind {kind!r}")
        if not isinstance(seq, int) or seq <= last_seq:
            return fail(session_id, seq if isinstance(seq, int) else last_seq + 1,
                        f"sequence number must increase, got {seq!r} after {last_seq}")
        last_seq = seq

        if kind == "init":
            state.session_id = session_id
            state.goal_radius = float(payload["goal_radius"])
            emit(out, "init", session_id, seq, {"agent": AGENT_NAME, "stateless": False})
        elif state.session_id != session_id:
            return fail(session_id, seq, "message for unknown session")
        elif kind == "observe":
            if state.stopped:
                return fail(session_id, seq, "agent already issued stop")
            action = decide(payload, state.goal_radius)
            state.commit(payload)
            if action["kind"] == "stop":
                state.stopped = True
            emit(out, "act_response", session_id, seq, {"action": action})
        elif kind == "peek":
            if state.stopped:
                return fail(session_id, seq, "agent already issued stop")
            action = decide(payload, state.goal_radius)
            emit(out, "peek_response", session_id, seq, {"action": action})
        elif kind == "fork":
            state.snapshot()
        elif kind == "restore":
            if not state.restore():
                return fail(session_id, seq, "restore without a pending fork")
        elif kind == "end":
            return 0
        else:  # act_response / peek_response / error arriving at the agent
            return fail(session_id, seq, f"unexpected message kind {kind!r} for an agent")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--protocol-version", default=PROTOCOL_VERSION,
                        help="protocol version to speak (only v1 exists)")
    args = parser.parse_args(argv)
    if args.protocol_version != PROTOCOL_VERSION:
        print(f"unsupported protocol version {args.protocol_version!r}", file=sys.stderr)
        return 2
    return serve(sys.stdin, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
