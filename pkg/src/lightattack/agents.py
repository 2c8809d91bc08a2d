"""Agent-policy abstraction with fork/peek support, plus reference toy agents.

Agents are deterministic given the episode seed. ``peek`` evaluates the
action an agent would take for an observation without touching committed
state; the default implementation forks a deep snapshot and steps the fork,
so a concrete agent only needs to implement :meth:`Agent._step`.
"""

from __future__ import annotations

import copy
import math
from typing import TYPE_CHECKING, Callable

from .errors import AgentProtocolError, ConfigError
from .scene import Action, ActionKind, DEFAULT_STEP_METERS, DEFAULT_TURN_RADIANS, Scene
from .sensing import Observation

if TYPE_CHECKING:
    from .episode import EpisodeSpec

# Heading-alignment band: half the default turn, so one turn always reaches it.
ALIGN_TOLERANCE = math.pi / 12.0


class Agent:
    """Base policy handle.

    Concrete agents override :meth:`_step`, which may read and mutate the
    agent's own state; isolation for lookahead is provided by :meth:`fork`.
    Acting after STOP is a protocol error.
    """

    def __init__(self) -> None:
        self._stopped = False
        self._steps_committed = 0

    def act(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        """Commit one decision for ``obs`` and return it."""
        if self._stopped:
            raise AgentProtocolError("agent already issued STOP")
        action = self._step(obs, spec)
        self._steps_committed += 1
        if action.kind is ActionKind.STOP:
            self._stopped = True
        return action

    def peek(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        """Return the action the agent would take, without committing anything."""
        return self.fork().act(obs, spec)

    def fork(self) -> "Agent":
        """Deep snapshot; stepping a fork never mutates the original."""
        return copy.deepcopy(self)

    def finish(self) -> None:
        """Episode-end hook; agents owning external resources release them here."""

    def _step(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        raise NotImplementedError


def navigate(obs: Observation, stop_radius: float,
             step: float = DEFAULT_STEP_METERS, turn: float = DEFAULT_TURN_RADIANS) -> Action:
    """Shared reactive navigation rule.

    Blacked-out goal fields trigger a deterministic left-turn exploration;
    otherwise stop once within ``stop_radius``, walk when roughly aligned
    with the perceived bearing, and turn toward it when not.
    """
    if obs.goal_bearing is None or obs.goal_distance is None:
        return Action.rotate_left(turn)
    if obs.goal_distance <= stop_radius:
        return Action.stop()
    if abs(obs.goal_bearing) <= ALIGN_TOLERANCE:
        return Action.move_ahead(step)
    if obs.goal_bearing > 0.0:
        return Action.rotate_right(turn)
    return Action.rotate_left(turn)


class GoalSeekerAgent(Agent):
    """Reactive goal pursuit driven purely by the perceived goal fields.

    Its failure behavior is an analyzable function of the degradation
    profile, which is exactly what the attack experiments need.
    """

    def __init__(self, stop_radius: float) -> None:
        super().__init__()
        if stop_radius <= 0.0:
            raise ValueError("stop radius must be > 0")
        self.stop_radius = stop_radius

    def _step(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        return navigate(obs, self.stop_radius)


class ThresholdAgent(Agent):
    """Navigates perfectly while the luminance stays inside a band.

    Outside [band_lo, band_hi] its perception collapses and it spins in
    place, so an episode fails exactly when the lighting leaves the band.
    ``dawdle_gain`` > 0 prepends ``2 * round(luminance * dawdle_gain)``
    wasted turns, making the trajectory loss strictly sensitive to the
    lighting level inside the band; convergence tests rely on this.
    """

    def __init__(self, band_lo: float, band_hi: float, stop_radius: float,
                 dawdle_gain: float = 0.0) -> None:
        super().__init__()
        if not band_lo < band_hi:
            raise ValueError("threshold band must satisfy lo < hi")
        self.band_lo = band_lo
        self.band_hi = band_hi
        self.stop_radius = stop_radius
        self.dawdle_gain = dawdle_gain
        self._dawdle_total: int | None = None
        self._dawdle_done = 0

    def _step(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        if not self.band_lo <= obs.luminance <= self.band_hi:
            return Action.rotate_left()
        if self._dawdle_total is None:
            self._dawdle_total = 2 * round(obs.luminance * self.dawdle_gain)
        if self._dawdle_done < self._dawdle_total:
            action = Action.rotate_left() if self._dawdle_done % 2 == 0 else Action.rotate_right()
            self._dawdle_done += 1
            return action
        return navigate(obs, self.stop_radius)


class ScriptedAgent(Agent):
    """Plays a fixed action sequence, then stops."""

    def __init__(self, script: list[Action]) -> None:
        super().__init__()
        self.script = list(script)
        self._index = 0

    @staticmethod
    def from_file(path: str) -> "ScriptedAgent":
        try:
            lines = [ln.strip() for ln in open(path) if ln.strip() and not ln.startswith("#")]
        except OSError as exc:
            raise ConfigError(f"cannot read action script {path}: {exc}") from exc
        return ScriptedAgent([Action.decode(ln) for ln in lines])

    def _step(self, obs: Observation, spec: "EpisodeSpec") -> Action:
        if self._index >= len(self.script):
            return Action.stop()
        action = self.script[self._index]
        self._index += 1
        return action


AgentFactory = Callable[[Scene, "EpisodeSpec"], Agent]


def make_factory(name: str) -> AgentFactory:
    """Resolve an agent name string to a factory.

    Recognized forms: ``goal_seeker``, ``threshold[:LO:HI[:GAIN]]``,
    ``scripted:<path>``, ``bridge:<endpoint>``.
    """
    head, _, rest = name.partition(":")
    if head == "goal_seeker":
        if rest:
            raise ConfigError("goal_seeker takes no parameters")
        return lambda scene, spec: GoalSeekerAgent(scene.goal.radius)
    if head == "threshold":
        parts = rest.split(":") if rest else []
        if len(parts) not in (0, 2, 3):
            raise ConfigError(f"threshold expects LO:HI[:GAIN], got {name!r}")
        try:
            lo = float(parts[0]) if parts else None
            hi = float(parts[1]) if parts else None
            gain = float(parts[2]) if len(parts) == 3 else 0.0
        except ValueError as exc:
            raise ConfigError(f"bad threshold parameters in {name!r}: {exc}") from exc

        def factory(scene: Scene, spec: "EpisodeSpec") -> Agent:
            band_lo = scene.l_min if lo is None else lo
            band_hi = scene.l_max if hi is None else hi
            return ThresholdAgent(band_lo, band_hi, scene.goal.radius, dawdle_gain=gain)

        return factory
    if head == "scripted":
        if not rest:
            raise ConfigError("scripted agent needs a script path: scripted:<path>")
        return lambda scene, spec: ScriptedAgent.from_file(rest)
    if head == "bridge":
        if not rest:
            raise ConfigError("bridge agent needs an endpoint: bridge:<endpoint>")
        from .bridge import bridge_factory

        return bridge_factory(rest)
    raise ConfigError(f"unknown agent name {name!r}")
