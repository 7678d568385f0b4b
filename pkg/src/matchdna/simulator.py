"""Cycle-based 2-D soccer simulator.

The world advances in discrete cycles.  Agents queue commands during a
cycle; at cycle end exactly one queued movement command per agent
(turn/dash/kick/catch) executes, chosen by the match RNG when several
were queued.  Instant commands (say, sense_body, change_view) take
effect on submission subject to frequency limits and never produce
match events.

Conventions: x runs along the field length, y across the width, the
origin is the center spot.  The home team attacks +x.  Headings are
degrees in [-180, 180), 0 pointing at +x, measured counterclockwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

SCHEMA_VERSION = 1

# command argument ranges (min, max)
TURN_RANGE = (-180.0, 180.0)
DASH_RANGE = (-30.0, 100.0)
KICK_POWER_RANGE = (0.0, 100.0)
KICK_ANGLE_RANGE = (-180.0, 180.0)

MOVEMENT_KINDS = ("turn", "dash", "kick", "catch")
INSTANT_KINDS = ("say", "sense_body", "change_view")

SAY_COOLDOWN_CYCLES = 2      # teammates hear at most one say per this many cycles
SENSE_BODY_PER_CYCLE = 3
CHANGE_VIEW_PER_CYCLE = 1

HOME = "home"
AWAY = "away"


def normalize_heading(deg: float) -> float:
    """Fold an angle into [-180, 180)."""
    return (deg + 180.0) % 360.0 - 180.0


def clamp(value, lo, hi):
    return max(lo, min(hi, value))


@dataclass(frozen=True)
class FieldConfig:
    length: float = 105.0
    width: float = 68.0
    goal_width: float = 14.0
    kickable_distance: float = 1.0
    cycle_count: int = 6000
    rng_seed: int = 0
    players_per_team: int = 2
    dash_gain: float = 0.01   # meters per power unit per cycle
    kick_gain: float = 0.05   # ball impulse per power unit
    ball_decay: float = 0.94
    player_decay: float = 0.4
    perception_jitter: bool = True

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("field dimensions must be positive")
        if not 0 < self.goal_width < self.width:
            raise ValueError("goal_width must be in (0, width)")
        if self.kickable_distance <= 0:
            raise ValueError("kickable_distance must be positive")
        if self.cycle_count <= 0:
            raise ValueError("cycle_count must be positive")
        if self.players_per_team < 1:
            raise ValueError("players_per_team must be >= 1")


@dataclass
class AgentState:
    id: str
    team: str
    x: float
    y: float
    heading: float = 0.0
    speed: float = 0.0


@dataclass
class BallState:
    x: float = 0.0
    y: float = 0.0
    vx: float = 0.0
    vy: float = 0.0


@dataclass(frozen=True)
class Command:
    """One agent command; x/y are the numeric arguments of Table-style
    turn(x), dash(x), kick(x, y) forms."""
    kind: str
    x: float = 0.0
    y: float = 0.0
    text: str = ""
    issued_cycle: int = -1


def turn(angle, cycle=-1):
    return Command("turn", x=float(angle), issued_cycle=cycle)


def dash(power, cycle=-1):
    return Command("dash", x=float(power), issued_cycle=cycle)


def kick(power, angle, cycle=-1):
    return Command("kick", x=float(power), y=float(angle), issued_cycle=cycle)


def catch(cycle=-1):
    return Command("catch", issued_cycle=cycle)


def say(text, cycle=-1):
    return Command("say", text=text, issued_cycle=cycle)


def sense_body(cycle=-1):
    return Command("sense_body", issued_cycle=cycle)


def change_view(quality="normal", width="high", cycle=-1):
    return Command("change_view", text=f"{quality}/{width}", issued_cycle=cycle)


def clamp_command(cmd: Command) -> Command:
    """Pull numeric arguments back into their legal ranges."""
    if cmd.kind == "turn":
        return replace(cmd, x=clamp(cmd.x, *TURN_RANGE))
    if cmd.kind == "dash":
        return replace(cmd, x=clamp(cmd.x, *DASH_RANGE))
    if cmd.kind == "kick":
        return replace(cmd, x=clamp(cmd.x, *KICK_POWER_RANGE),
                       y=clamp(cmd.y, *KICK_ANGLE_RANGE))
    return cmd


@dataclass(frozen=True)
class Ack:
    """Submission receipt: whether the command was taken, the post-clamp
    form, and a short note (clamped / stale / budget exhausted / ...)."""
    accepted: bool
    command: Command
    note: str = ""
    payload: dict | None = None


@dataclass
class MatchEvent:
    cycle: int
    kind: str                 # goal | possession_change | pass_completed | kick | turn | move | idle
    agent: str | None = None
    agent2: str | None = None
    team: str | None = None
    effective: bool | None = None
    kick_cycle: int | None = None

    def to_dict(self):
        d = {"cycle": self.cycle, "kind": self.kind}
        for key in ("agent", "agent2", "team", "effective", "kick_cycle"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Perception:
    """Noiseless snapshot delivered to one agent."""
    cycle: int
    ball: tuple          # (x, y, vx, vy)
    agents: dict         # id -> (x, y, heading, team)


@dataclass
class MatchLog:
    config: FieldConfig
    events: list = field(default_factory=list)
    per_cycle_states: list = field(default_factory=list)  # (agent states, ball state)
    score: tuple = (0, 0)
    outcome: str = "draw"
    valid: bool = True

    def events_at(self, cycle):
        return [e for e in self.events if e.cycle == cycle]


def _nearest_holder(agents, ball, kickable):
    """Agent id in possession: nearest within kickable range, ties by id."""
    best = None
    best_key = None
    for a in sorted(agents, key=lambda s: s.id):
        d = math.hypot(a.x - ball.x, a.y - ball.y)
        if d <= kickable and (best_key is None or d < best_key):
            best, best_key = a.id, d
    return best


class World:
    """Mutable match state plus the command queue for the current cycle."""

    def __init__(self, config: FieldConfig, positions=None, ball=None):
        self.config = config
        self.cycle = 0
        self.score = {HOME: 0, AWAY: 0}
        self.agents = {}
        letters = "abcdefghijklmnopqrstuvwxyz"
        n = config.players_per_team
        if 2 * n > len(letters):
            raise ValueError("too many players for letter ids")
        for i in range(n):
            self.agents[letters[i]] = AgentState(letters[i], HOME,
                                                 -config.length / 4,
                                                 (i - (n - 1) / 2) * 8.0, 0.0)
        for i in range(n):
            aid = letters[n + i]
            self.agents[aid] = AgentState(aid, AWAY,
                                          config.length / 4,
                                          (i - (n - 1) / 2) * 8.0, -180.0)
        if positions:
            for aid, pos in positions.items():
                a = self.agents[aid]
                a.x, a.y = float(pos[0]), float(pos[1])
                if len(pos) > 2:
                    a.heading = normalize_heading(float(pos[2]))
        self.ball = BallState(*ball) if ball else BallState()
        seq = np.random.SeedSequence(config.rng_seed)
        self._rng_cmd, self._rng_perc = [np.random.default_rng(s) for s in seq.spawn(2)]
        self._queues = {aid: [] for aid in self.agents}
        self._holder = None
        self._pending_pass = None      # (kicker_id, kick_cycle)
        self._goal_pending = False
        self._say_heard_cycle = {HOME: None, AWAY: None}
        self._sense_counts = {}
        self._view_counts = {}

    # ----- command intake -------------------------------------------------

    def submit_command(self, agent_id, command: Command, cycle: int) -> Ack:
        if agent_id not in self.agents:
            raise ValueError(f"unknown agent id {agent_id!r}")
        if cycle != self.cycle:
            return Ack(False, command, "stale")
        clamped = clamp_command(replace(command, issued_cycle=cycle))
        note = "" if clamped == replace(command, issued_cycle=cycle) else "clamped"
        if clamped.kind in MOVEMENT_KINDS:
            self._queues[agent_id].append(clamped)
            return Ack(True, clamped, note)
        if clamped.kind == "say":
            team = self.agents[agent_id].team
            last = self._say_heard_cycle[team]
            if last is None or cycle - last >= SAY_COOLDOWN_CYCLES:
                self._say_heard_cycle[team] = cycle
                return Ack(True, clamped, note or "heard")
            return Ack(True, clamped, "muted")
        if clamped.kind == "sense_body":
            used = self._sense_counts.get(agent_id, 0)
            if used >= SENSE_BODY_PER_CYCLE:
                return Ack(False, clamped, "budget")
            self._sense_counts[agent_id] = used + 1
            a = self.agents[agent_id]
            return Ack(True, clamped, note,
                       payload={"x": a.x, "y": a.y, "heading": a.heading,
                                "speed": a.speed})
        if clamped.kind == "change_view":
            used = self._view_counts.get(agent_id, 0)
            if used >= CHANGE_VIEW_PER_CYCLE:
                return Ack(False, clamped, "budget")
            self._view_counts[agent_id] = used + 1
            return Ack(True, clamped, note)
        raise ValueError(f"unknown command kind {command.kind!r}")

    # ----- perception -----------------------------------------------------

    def deliver_perceptions(self):
        """Snapshot count per agent: {0,1,2} with probabilities
        {0.1, 0.8, 0.1} (long-run mean one per cycle), or exactly one
        when jitter is disabled."""
        snap_agents = {a.id: (a.x, a.y, a.heading, a.team)
                       for a in self.agents.values()}
        snap = Perception(self.cycle,
                          (self.ball.x, self.ball.y, self.ball.vx, self.ball.vy),
                          snap_agents)
        out = {}
        for aid in sorted(self.agents):
            if self.config.perception_jitter:
                k = int(self._rng_perc.choice(3, p=[0.1, 0.8, 0.1]))
            else:
                k = 1
            out[aid] = [snap] * k
        return out

    # ----- cycle stepping -------------------------------------------------

    def step(self):
        """Advance one cycle; returns the events it produced."""
        cfg = self.config
        events = []
        cycle = self.cycle

        if self._goal_pending:
            self.ball = BallState()
            self._goal_pending = False

        # pick one movement command per agent, seeded choice among duplicates
        executed = 0
        for aid in sorted(self.agents):
            queue = self._queues[aid]
            if not queue:
                continue
            cmd = queue[0] if len(queue) == 1 else \
                queue[int(self._rng_cmd.integers(len(queue)))]
            self._execute(aid, cmd, cycle, events)
            executed += 1
        if executed == 0:
            events.append(MatchEvent(cycle, "idle"))

        # agent motion with speed decay
        half_l, half_w = cfg.length / 2, cfg.width / 2
        for a in self.agents.values():
            if a.speed != 0.0:
                rad = math.radians(a.heading)
                a.x = clamp(a.x + a.speed * math.cos(rad), -half_l, half_l)
                a.y = clamp(a.y + a.speed * math.sin(rad), -half_w, half_w)
                a.speed *= cfg.player_decay
                if abs(a.speed) < 1e-9:
                    a.speed = 0.0

        # ball motion, goal-line test on the swept segment
        bx0, by0 = self.ball.x, self.ball.y
        bx1, by1 = bx0 + self.ball.vx, by0 + self.ball.vy
        goal_team = None
        for line_x, team in ((half_l, HOME), (-half_l, AWAY)):
            if (line_x > 0 and bx0 < line_x <= bx1) or \
               (line_x < 0 and bx1 <= line_x < bx0):
                t = (line_x - bx0) / (bx1 - bx0)
                y_cross = by0 + t * (by1 - by0)
                if abs(y_cross) <= cfg.goal_width / 2:
                    goal_team = team
                    bx1, by1 = line_x, y_cross
                break
        if goal_team:
            self.score[goal_team] += 1
            self.ball = BallState(bx1, by1, 0.0, 0.0)
            self._goal_pending = True
            self._holder = None
            self._pending_pass = None
            events.append(MatchEvent(cycle, "goal", team=goal_team))
        else:
            self.ball.x = clamp(bx1, -half_l, half_l)
            self.ball.y = clamp(by1, -half_w, half_w)
            self.ball.vx *= cfg.ball_decay
            self.ball.vy *= cfg.ball_decay
            self._update_possession(cycle, events)

        self._queues = {aid: [] for aid in self.agents}
        self._sense_counts = {}
        self._view_counts = {}
        self.cycle += 1
        return events

    def _execute(self, aid, cmd, cycle, events):
        a = self.agents[aid]
        if cmd.kind == "turn":
            a.heading = normalize_heading(a.heading + cmd.x)
            events.append(MatchEvent(cycle, "turn", agent=aid))
        elif cmd.kind == "dash":
            a.speed = cmd.x * self.config.dash_gain
            events.append(MatchEvent(cycle, "move", agent=aid))
        elif cmd.kind == "kick":
            dist = math.hypot(a.x - self.ball.x, a.y - self.ball.y)
            effective = dist <= self.config.kickable_distance
            if effective:
                rad = math.radians(normalize_heading(a.heading + cmd.y))
                impulse = cmd.x * self.config.kick_gain
                self.ball.vx += impulse * math.cos(rad)
                self.ball.vy += impulse * math.sin(rad)
                self._pending_pass = (aid, cycle)
            events.append(MatchEvent(cycle, "kick", agent=aid, effective=effective))
        # catch is accepted and consumes the movement slot but has no effect

    def _update_possession(self, cycle, events):
        holder = _nearest_holder(self.agents.values(), self.ball,
                                 self.config.kickable_distance)
        if holder is not None and holder != self._holder:
            events.append(MatchEvent(cycle, "possession_change", agent=holder))
            if self._pending_pass:
                kicker, kick_cycle = self._pending_pass
                if holder != kicker and \
                        self.agents[holder].team == self.agents[kicker].team:
                    events.append(MatchEvent(cycle, "pass_completed",
                                             agent=kicker, agent2=holder,
                                             kick_cycle=kick_cycle))
                self._pending_pass = None
        self._holder = holder

    def snapshot(self):
        agents = [replace(self.agents[aid]) for aid in sorted(self.agents)]
        ball = replace(self.ball)
        return agents, ball


def run_match(home_policy, away_policy, config: FieldConfig,
              positions=None, ball=None) -> MatchLog:
    """Run cycle_count cycles and collect the full log.

    Policies expose act(agent_id, perceptions, cycle) returning a Command,
    a list of Commands, or None; a policy of None idles its team.  If a
    policy raises, the partial log is returned flagged invalid.
    """
    world = World(config, positions=positions, ball=ball)
    log = MatchLog(config=config)
    try:
        for _ in range(config.cycle_count):
            cycle = world.cycle
            perceptions = world.deliver_perceptions()
            for aid in sorted(world.agents):
                team = world.agents[aid].team
                policy = home_policy if team == HOME else away_policy
                if policy is None:
                    continue
                cmds = policy.act(aid, perceptions[aid], cycle)
                if cmds is None:
                    continue
                if isinstance(cmds, Command):
                    cmds = [cmds]
                for cmd in cmds:
                    world.submit_command(aid, cmd, cycle)
            log.events.extend(world.step())
            log.per_cycle_states.append(world.snapshot())
    except Exception:
        log.valid = False
    log.score = (world.score[HOME], world.score[AWAY])
    if log.score[0] > log.score[1]:
        log.outcome = "home_win"
    elif log.score[0] < log.score[1]:
        log.outcome = "away_win"
    else:
        log.outcome = "draw"
    return log


# ----- serialization -------------------------------------------------------

def _r6(x):
    v = round(float(x), 6)
    return 0.0 if v == 0 else v  # avoid -0.0 in output


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def log_to_jsonl(log: MatchLog) -> str:
    """Serialize a MatchLog as JSON Lines: header, one line per cycle,
    trailing outcome line.  Floats carry 6 decimals so that identical
    matches serialize byte-for-byte identically."""
    cfg = log.config
    header = {"schema_version": SCHEMA_VERSION,
              "config": {k: getattr(cfg, k) for k in (
                  "length", "width", "goal_width", "kickable_distance",
                  "cycle_count", "rng_seed", "players_per_team", "dash_gain",
                  "kick_gain", "ball_decay", "player_decay",
                  "perception_jitter")}}
    lines = [_dumps(header)]
    events_by_cycle = {}
    for e in log.events:
        events_by_cycle.setdefault(e.cycle, []).append(e.to_dict())
    for cycle, (agents, ball) in enumerate(log.per_cycle_states):
        row = {"cycle": cycle,
               "agents": [{"id": a.id, "team": a.team, "x": _r6(a.x),
                           "y": _r6(a.y), "heading": _r6(a.heading),
                           "speed": _r6(a.speed)} for a in agents],
               "ball": {"x": _r6(ball.x), "y": _r6(ball.y),
                        "vx": _r6(ball.vx), "vy": _r6(ball.vy)},
               "events": events_by_cycle.get(cycle, [])}
        lines.append(_dumps(row))
    lines.append(_dumps({"outcome": log.outcome,
                         "score": list(log.score),
                         "valid": log.valid}))
    return "\n".join(lines) + "\n"


def save_match_log(log: MatchLog, path):
    with open(path, "w") as fh:
        fh.write(log_to_jsonl(log))


def load_match_log(path) -> MatchLog:
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"empty match log {path}")
    header = lines[0]
    if header.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version in {path}")
    config = FieldConfig(**header["config"])
    log = MatchLog(config=config)
    tail = lines[-1]
    log.outcome = tail["outcome"]
    log.score = tuple(tail["score"])
    log.valid = tail.get("valid", True)
    for row in lines[1:-1]:
        agents = [AgentState(d["id"], d["team"], d["x"], d["y"],
                             d["heading"], d.get("speed", 0.0))
                  for d in row["agents"]]
        ball = BallState(row["ball"]["x"], row["ball"]["y"],
                         row["ball"]["vx"], row["ball"]["vy"])
        log.per_cycle_states.append((agents, ball))
        for ed in row["events"]:
            log.events.append(MatchEvent.from_dict(ed))
    return log
