"""Scripted shooting behavior: a finite-state policy that finds the ball,
approaches it, rounds it until ball and goal are both in view, aligns,
asks an optional feedback hook whether to shoot, and kicks at the goal.

Rounding, aligning and shooting are driven by five-letter action macros;
each letter maps to one cycle's command:

    A  turn toward the ball
    C  dash toward the ball (power 60)
    G  gentle kick toward the goal (power 30)
    T  sidestep: low-power dash (power 30), the orbit/closing step

The policy records every letter it emits; the trailing letters form the
context window handed to the feedback hook before a shot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .simulator import (
    Command,
    FieldConfig,
    HOME,
    change_view,
    dash,
    kick,
    normalize_heading,
    turn,
)

FIND_BALL = "find_ball"
APPROACH = "approach"
ROUND = "round"
ALIGN = "align"
SHOOT = "shoot"

ROUND_CLOCKWISE = "AGGGT"       # goal to the right
ROUND_COUNTERCW = "AAACT"       # goal to the left
CAMERA_CLOCKWISE = "ACCCT"      # camera-toward-ball companion macros;
CAMERA_COUNTERCW = "TTTAC"      # issued as a single change_view stub
ALIGN_MACRO = "ATACT"
SHOOT_MACRO = "AATAA"

FOV_HALF_ANGLE = 45.0
STOP_PROXIMITY = 20.0           # proximity metric: 100 / distance_in_meters
SCAN_STEP = 45.0
FEEDBACK_WINDOW = 5


@dataclass
class _AgentMemory:
    state: str = FIND_BALL
    macro: list = field(default_factory=list)
    flip: bool = False           # set by a vetoed shot; reverses round side
    letters: list = field(default_factory=list)
    last_perception: object = None
    pending_camera: str = ""


class ShootingPolicy:
    """One policy instance drives any number of agents of one team."""

    def __init__(self, config: FieldConfig, team: str = HOME, feedback=None,
                 fov_half: float = FOV_HALF_ANGLE,
                 stop_proximity: float = STOP_PROXIMITY,
                 feedback_window: int = FEEDBACK_WINDOW):
        self.config = config
        self.team = team
        self.feedback = feedback
        self.fov_half = fov_half
        self.stop_proximity = stop_proximity
        self.feedback_window = feedback_window
        goal_x = config.length / 2 if team == HOME else -config.length / 2
        self.goal = (goal_x, 0.0)
        self._memory = {}

    def memory(self, agent_id) -> _AgentMemory:
        return self._memory.setdefault(agent_id, _AgentMemory())

    def letters_of(self, agent_id) -> str:
        return "".join(self.memory(agent_id).letters)

    # ----- geometry helpers -------------------------------------------------

    @staticmethod
    def _bearing(from_xy, to_xy):
        return math.degrees(math.atan2(to_xy[1] - from_xy[1],
                                       to_xy[0] - from_xy[0]))

    def _view(self, perception, agent_id):
        """Relative bearings (ball, goal) and ball distance for one agent."""
        x, y, heading, _team = perception.agents[agent_id]
        bx, by = perception.ball[0], perception.ball[1]
        rel_ball = normalize_heading(self._bearing((x, y), (bx, by)) - heading)
        rel_goal = normalize_heading(self._bearing((x, y), self.goal) - heading)
        return rel_ball, rel_goal, math.hypot(bx - x, by - y)

    # ----- letter execution ---------------------------------------------------

    def _letter_command(self, letter, rel_ball, rel_goal) -> Command:
        if letter == "A":
            return turn(rel_ball)
        if letter == "C":
            return dash(60)
        if letter == "G":
            return kick(30, rel_goal)
        if letter == "T":
            return dash(30)
        raise ValueError(f"unknown macro letter {letter!r}")

    def _emit(self, mem, letter, command):
        mem.letters.append(letter)
        del mem.letters[:-64]
        return command

    # ----- policy entry -------------------------------------------------------

    def act(self, agent_id, perceptions, cycle):
        mem = self.memory(agent_id)
        if perceptions:
            mem.last_perception = perceptions[-1]
        perception = mem.last_perception
        if perception is None:
            return None
        rel_ball, rel_goal, dist = self._view(perception, agent_id)
        sees_ball = abs(rel_ball) <= self.fov_half
        sees_goal = abs(rel_goal) <= self.fov_half
        proximity = 100.0 / max(dist, 1e-6)

        commands = []
        if mem.pending_camera:
            # camera macro realized as one instant view change
            commands.append(change_view("normal", "high"))
            mem.pending_camera = ""

        if mem.state == FIND_BALL:
            if not sees_ball:
                return commands + [self._emit(mem, "A", turn(SCAN_STEP))]
            mem.state = APPROACH

        if mem.state == APPROACH:
            if proximity <= self.stop_proximity:
                if abs(rel_ball) > 10.0:
                    return commands + [self._emit(mem, "A", turn(rel_ball))]
                return commands + [self._emit(mem, "C", dash(100))]
            self._enter_round(mem, rel_goal)

        if mem.state == ROUND:
            if not mem.macro:
                if sees_ball and sees_goal:
                    mem.state = ALIGN
                    mem.macro = list(ALIGN_MACRO)
                else:
                    self._enter_round(mem, rel_goal)
            if mem.state == ROUND:
                return commands + [self._step_macro(mem, rel_ball, rel_goal)]

        if mem.state == ALIGN:
            if mem.macro:
                return commands + [self._step_macro(mem, rel_ball, rel_goal)]
            if self._vetoed(agent_id, mem):
                mem.flip = not mem.flip
                self._enter_round(mem, rel_goal)
                return commands + [self._step_macro(mem, rel_ball, rel_goal)]
            mem.state = SHOOT
            mem.macro = list(SHOOT_MACRO)

        if mem.state == SHOOT:
            if mem.macro:
                return commands + [self._step_macro(mem, rel_ball, rel_goal)]
            mem.state = FIND_BALL
            return commands + [self._emit(mem, "G", kick(100, rel_goal))]

        return commands or None

    def _enter_round(self, mem, rel_goal):
        clockwise = rel_goal < 0.0
        if mem.flip:
            clockwise = not clockwise
        mem.state = ROUND
        mem.macro = list(ROUND_CLOCKWISE if clockwise else ROUND_COUNTERCW)
        mem.pending_camera = CAMERA_CLOCKWISE if clockwise else CAMERA_COUNTERCW

    def _step_macro(self, mem, rel_ball, rel_goal):
        letter = mem.macro.pop(0)
        return self._emit(mem, letter,
                          self._letter_command(letter, rel_ball, rel_goal))

    def _vetoed(self, agent_id, mem) -> bool:
        if self.feedback is None:
            return False
        window = self.letters_of(agent_id)[-self.feedback_window:]
        result = self.feedback(window)
        if isinstance(result, str):
            return result == "veto"
        proceed = getattr(result, "proceed", True)
        return not proceed


def run_shooting_behavior(agent_id, world, policy: ShootingPolicy) -> Command | None:
    """One cycle of the scripted behavior against live world state."""
    perceptions = world.deliver_perceptions()[agent_id]
    cmds = policy.act(agent_id, perceptions, world.cycle)
    if cmds is None:
        return None
    movement = [c for c in cmds] if isinstance(cmds, list) else [cmds]
    return movement[-1]
