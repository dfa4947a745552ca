"""Authoritative grid-world simulator.

Holds the hidden absolute state, validates and applies one action per agent
per synchronous step, computes diamond-vision percepts in each agent's local
frame, injects clear events, and announces/expires tasks. All randomness
flows through caller-supplied `random.Random` instances, so a (seed, action
trace) pair fully determines every state.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace

from .grid import (
    DIRECTIONS,
    OFFSETS,
    VISION_CELLS,
    Pos,
    add,
    manhattan,
    rotate_ccw,
    rotate_cw,
    sub,
)

# Per-agent action outcomes.
SUCCESS = "success"
FAILED_PATH = "failed_path"
FAILED_OUT_OF_BOUNDS = "failed_out_of_bounds"
FAILED_RANDOM = "failed_random"
FAILED_TARGET = "failed_target"
FAILED_DISABLED = "failed_disabled"

OUTCOMES = (
    SUCCESS,
    FAILED_PATH,
    FAILED_OUT_OF_BOUNDS,
    FAILED_RANDOM,
    FAILED_TARGET,
    FAILED_DISABLED,
)


class WorldGenError(Exception):
    """Raised when a world config cannot be satisfied."""


@dataclass(frozen=True)
class WorldConfig:
    """Scenario parameters. The documented config-file keys map 1:1 here."""

    width: int = 40
    height: int = 40
    teams: tuple[str, ...] = ("L",)
    agents_per_team: int = 10
    block_types: tuple[str, ...] = ("b1", "b2")
    max_energy: int = 300
    clear_cost: int = 30
    vision: int = 5
    regen: int = 1
    disable_duration: int = 10
    # One environment clear event every `clear_event_rate` steps (0 = never).
    clear_event_rate: int = 50
    clear_event_radius: tuple[int, int] = (1, 3)
    # One new task every `task_rate` steps (0 = never).
    task_rate: int = 20
    task_deadline: int = 150
    task_max_size: int = 3
    reward_per_block: int = 10
    action_fail_chance: float = 0.01
    obstacle_density: float = 0.10
    goal_clusters: int = 1
    goal_cluster_span: int = 1
    dispensers_per_type: int = 2

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "teams": list(self.teams),
            "agents_per_team": self.agents_per_team,
            "block_types": list(self.block_types),
            "max_energy": self.max_energy,
            "clear_cost": self.clear_cost,
            "vision": self.vision,
            "regen": self.regen,
            "disable_duration": self.disable_duration,
            "clear_event_rate": self.clear_event_rate,
            "clear_event_radius": list(self.clear_event_radius),
            "task_rate": self.task_rate,
            "task_deadline": self.task_deadline,
            "task_max_size": self.task_max_size,
            "reward_per_block": self.reward_per_block,
            "action_fail_chance": self.action_fail_chance,
            "obstacle_density": self.obstacle_density,
            "goal_clusters": self.goal_clusters,
            "goal_cluster_span": self.goal_cluster_span,
            "dispensers_per_type": self.dispensers_per_type,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        kw = dict(d)
        for key in ("teams", "block_types"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "clear_event_radius" in kw:
            kw["clear_event_radius"] = tuple(kw["clear_event_radius"])
        return cls(**kw)


@dataclass(frozen=True)
class Action:
    """One agent action. Unused fields stay None for the given kind."""

    kind: str
    dir: str | None = None
    rot: str | None = None
    target: Pos | None = None
    partner: str | None = None
    offset: Pos | None = None
    task: str | None = None

    @staticmethod
    def move(direction: str) -> "Action":
        return Action("move", dir=direction)

    @staticmethod
    def rotate(rot: str) -> "Action":
        return Action("rotate", rot=rot)

    @staticmethod
    def request(direction: str) -> "Action":
        return Action("request", dir=direction)

    @staticmethod
    def attach(direction: str) -> "Action":
        return Action("attach", dir=direction)

    @staticmethod
    def detach(direction: str) -> "Action":
        return Action("detach", dir=direction)

    @staticmethod
    def connect(partner: str, offset: Pos) -> "Action":
        return Action("connect", partner=partner, offset=offset)

    @staticmethod
    def submit(task: str) -> "Action":
        return Action("submit", task=task)

    @staticmethod
    def clear(target: Pos) -> "Action":
        return Action("clear", target=target)

    @staticmethod
    def skip() -> "Action":
        return Action("skip")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.dir is not None:
            d["dir"] = self.dir
        if self.rot is not None:
            d["rot"] = self.rot
        if self.target is not None:
            d["target"] = list(self.target)
        if self.partner is not None:
            d["partner"] = self.partner
        if self.offset is not None:
            d["offset"] = list(self.offset)
        if self.task is not None:
            d["task"] = self.task
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Action":
        return cls(
            kind=d["kind"],
            dir=d.get("dir"),
            rot=d.get("rot"),
            target=tuple(d["target"]) if d.get("target") is not None else None,
            partner=d.get("partner"),
            offset=tuple(d["offset"]) if d.get("offset") is not None else None,
            task=d.get("task"),
        )


@dataclass(frozen=True)
class StepResult:
    outcome: str
    coerced: bool = False


@dataclass(frozen=True)
class TaskSpec:
    name: str
    announced_step: int
    deadline: int
    reward: int
    pattern: tuple[tuple[Pos, str], ...]  # ((offset, block type), ...) sorted

    def size(self) -> int:
        return len(self.pattern)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "announced_step": self.announced_step,
            "deadline": self.deadline,
            "reward": self.reward,
            "pattern": [[list(off), t] for off, t in self.pattern],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        return cls(
            name=d["name"],
            announced_step=d["announced_step"],
            deadline=d["deadline"],
            reward=d["reward"],
            pattern=tuple((tuple(off), t) for off, t in d["pattern"]),
        )


def pattern_is_valid(pattern: tuple[tuple[Pos, str], ...]) -> bool:
    """Offsets distinct, exclude (0,0), and 4-connected through the anchor."""
    offs = [off for off, _ in pattern]
    if not offs or (0, 0) in offs or len(set(offs)) != len(offs):
        return False
    frontier = [(0, 0)]
    remaining = set(offs)
    while frontier:
        cur = frontier.pop()
        for d in OFFSETS.values():
            nxt = add(cur, d)
            if nxt in remaining:
                remaining.discard(nxt)
                frontier.append(nxt)
    return not remaining


@dataclass
class Block:
    type: str
    attached_to: str | None = None  # carried by this agent, moves with it
    bonded_to: str | None = None  # immobile structure member of this agent


@dataclass
class AgentState:
    name: str
    team: str
    pos: Pos
    energy: int
    attached: Pos | None = None  # unit offset of the one carried block
    disabled_until: int = 0  # actions fail while step < disabled_until
    clear_charge: tuple[Pos, int] | None = None  # (absolute target, count)

    def disabled(self, step: int) -> bool:
        return step < self.disabled_until


@dataclass
class WorldState:
    config: WorldConfig
    step: int = 0
    obstacles: set[Pos] = field(default_factory=set)
    goals: frozenset[Pos] = frozenset()
    dispensers: dict[Pos, str] = field(default_factory=dict)
    blocks: dict[Pos, Block] = field(default_factory=dict)
    agents: dict[str, AgentState] = field(default_factory=dict)
    tasks: dict[str, TaskSpec] = field(default_factory=dict)
    scores: dict[str, int] = field(default_factory=dict)
    last_outcomes: dict[str, StepResult] = field(default_factory=dict)
    last_events: list[tuple[Pos, int]] = field(default_factory=list)
    task_seq: int = 0

    @property
    def width(self) -> int:
        return self.config.width

    @property
    def height(self) -> int:
        return self.config.height

    @property
    def roster(self) -> list[str]:
        return list(self.agents)

    def in_bounds(self, pos: Pos) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height

    def agent_at(self, pos: Pos) -> AgentState | None:
        for ag in self.agents.values():
            if ag.pos == pos:
                return ag
        return None

    def occupied(self, pos: Pos) -> bool:
        return pos in self.blocks or self.agent_at(pos) is not None

    def bonded_cells(self, name: str) -> list[Pos]:
        return [p for p, b in self.blocks.items() if b.bonded_to == name]

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "step": self.step,
            "obstacles": sorted(list(p) for p in self.obstacles),
            "goals": sorted(list(p) for p in self.goals),
            "dispensers": [[list(p), t] for p, t in sorted(self.dispensers.items())],
            "blocks": [
                [list(p), b.type, b.attached_to, b.bonded_to]
                for p, b in sorted(self.blocks.items())
            ],
            "agents": [
                {
                    "name": a.name,
                    "team": a.team,
                    "pos": list(a.pos),
                    "energy": a.energy,
                    "attached": list(a.attached) if a.attached else None,
                    "disabled_until": a.disabled_until,
                    "clear_charge": [list(a.clear_charge[0]), a.clear_charge[1]]
                    if a.clear_charge
                    else None,
                }
                for a in self.agents.values()
            ],
            "tasks": [self.tasks[k].to_dict() for k in sorted(self.tasks)],
            "scores": dict(sorted(self.scores.items())),
            "task_seq": self.task_seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldState":
        w = cls(config=WorldConfig.from_dict(d["config"]), step=d["step"])
        w.obstacles = {tuple(p) for p in d["obstacles"]}
        w.goals = frozenset(tuple(p) for p in d["goals"])
        w.dispensers = {tuple(p): t for p, t in d["dispensers"]}
        w.blocks = {
            tuple(p): Block(t, att, bon) for p, t, att, bon in d["blocks"]
        }
        for a in d["agents"]:
            w.agents[a["name"]] = AgentState(
                name=a["name"],
                team=a["team"],
                pos=tuple(a["pos"]),
                energy=a["energy"],
                attached=tuple(a["attached"]) if a["attached"] else None,
                disabled_until=a["disabled_until"],
                clear_charge=(tuple(a["clear_charge"][0]), a["clear_charge"][1])
                if a["clear_charge"]
                else None,
            )
        w.tasks = {t["name"]: TaskSpec.from_dict(t) for t in d["tasks"]}
        w.scores = dict(d["scores"])
        w.task_seq = d["task_seq"]
        return w

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def world_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()

    # -- invariants (used by tests) ---------------------------------------

    def check_invariants(self) -> None:
        seen: set[Pos] = set()
        for name, ag in self.agents.items():
            assert self.in_bounds(ag.pos), f"{name} out of bounds"
            assert ag.pos not in seen, f"two occupants share {ag.pos}"
            seen.add(ag.pos)
            assert 0 <= ag.energy <= self.config.max_energy, f"{name} energy {ag.energy}"
            if ag.attached is not None:
                bp = add(ag.pos, ag.attached)
                assert bp in self.blocks and self.blocks[bp].attached_to == name
        for pos, block in self.blocks.items():
            assert self.in_bounds(pos)
            assert pos not in seen, f"two occupants share {pos}"
            seen.add(pos)
            assert pos not in self.obstacles, f"block inside obstacle at {pos}"
            if block.attached_to:
                holder = self.agents[block.attached_to]
                assert sub(pos, holder.pos) == holder.attached
        for pos in self.obstacles:
            assert self.agent_at(pos) is None


# -- percepts --------------------------------------------------------------


@dataclass(frozen=True)
class Thing:
    x: int
    y: int
    kind: str  # entity | block | dispenser | obstacle | goal
    detail: str | None  # team for entities, block type for blocks/dispensers

    @property
    def pos(self) -> Pos:
        return (self.x, self.y)


@dataclass(frozen=True)
class Percept:
    """One agent's per-step snapshot in its local frame (agent at (0,0))."""

    agent: str
    team: str
    step: int
    energy: int
    disabled: bool
    attached: Pos | None
    attached_type: str | None
    last: StepResult | None
    entities: dict[Pos, str]
    blocks: dict[Pos, str]
    dispensers: dict[Pos, str]
    obstacles: frozenset[Pos]
    goals: frozenset[Pos]
    tasks: tuple[TaskSpec, ...]
    vision: int = 5

    def things(self) -> list[Thing]:
        out = [Thing(p[0], p[1], "entity", t) for p, t in self.entities.items()]
        out += [Thing(p[0], p[1], "block", t) for p, t in self.blocks.items()]
        out += [Thing(p[0], p[1], "dispenser", t) for p, t in self.dispensers.items()]
        out += [Thing(p[0], p[1], "obstacle", None) for p in self.obstacles]
        out += [Thing(p[0], p[1], "goal", None) for p in self.goals]
        out.sort(key=lambda t: (t.kind, t.x, t.y, t.detail or ""))
        return out

    def obstruction_at(self, rel: Pos) -> bool:
        """Exploration's obstruction notion: obstacle or block."""
        return rel in self.obstacles or rel in self.blocks

    def is_free(self, rel: Pos) -> bool:
        return (
            rel not in self.obstacles
            and rel not in self.blocks
            and rel not in self.entities
        )


def compute_percept(world: WorldState, name: str) -> Percept:
    ag = world.agents[name]
    by_pos = {a.pos: a for a in world.agents.values()}
    entities: dict[Pos, str] = {}
    blocks: dict[Pos, str] = {}
    dispensers: dict[Pos, str] = {}
    obstacles: set[Pos] = set()
    goals: set[Pos] = set()
    for off in VISION_CELLS:
        cell = add(ag.pos, off)
        if not world.in_bounds(cell):
            continue
        other = by_pos.get(cell)
        if other is not None and other.name != name:
            entities[off] = other.team
        b = world.blocks.get(cell)
        if b is not None:
            blocks[off] = b.type
        d = world.dispensers.get(cell)
        if d is not None:
            dispensers[off] = d
        if cell in world.obstacles:
            obstacles.add(off)
        if cell in world.goals:
            goals.add(off)
    att_type = None
    if ag.attached is not None:
        ab = world.blocks.get(add(ag.pos, ag.attached))
        att_type = ab.type if ab else None
    return Percept(
        agent=name,
        team=ag.team,
        step=world.step,
        energy=ag.energy,
        disabled=ag.disabled(world.step),
        attached=ag.attached,
        attached_type=att_type,
        last=world.last_outcomes.get(name),
        entities=entities,
        blocks=blocks,
        dispensers=dispensers,
        obstacles=frozenset(obstacles),
        goals=frozenset(goals),
        tasks=tuple(world.tasks[k] for k in sorted(world.tasks)),
        vision=world.config.vision,
    )


# -- step application --------------------------------------------------------


def _unit_cells(ag: AgentState) -> set[Pos]:
    cells = {ag.pos}
    if ag.attached is not None:
        cells.add(add(ag.pos, ag.attached))
    return cells


def _resolve_moves(world: WorldState, movers: dict[str, str]) -> dict[str, str]:
    """Simultaneous move resolution; conflicting destinations all fail."""
    outcomes: dict[str, str] = {}
    dests: dict[str, set[Pos]] = {}
    by_pos = {a.pos: a.name for a in world.agents.values()}
    for name, direction in movers.items():
        ag = world.agents[name]
        if world.bonded_cells(name):
            outcomes[name] = FAILED_PATH
            continue
        delta = OFFSETS[direction]
        own = _unit_cells(ag)
        target_cells = {add(c, delta) for c in own}
        if any(not world.in_bounds(c) for c in target_cells):
            outcomes[name] = FAILED_OUT_OF_BOUNDS
            continue
        blocked = False
        for c in target_cells - own:
            if c in world.obstacles or c in world.blocks or c in by_pos:
                blocked = True
                break
        if blocked:
            outcomes[name] = FAILED_PATH
            continue
        dests[name] = target_cells
    claims: dict[Pos, int] = {}
    for cells in dests.values():
        for c in cells:
            claims[c] = claims.get(c, 0) + 1
    for name, cells in dests.items():
        if any(claims[c] > 1 for c in cells):
            outcomes[name] = FAILED_PATH
    for name, cells in dests.items():
        if name in outcomes:
            continue
        ag = world.agents[name]
        delta = OFFSETS[movers[name]]
        if ag.attached is not None:
            old_bp = add(ag.pos, ag.attached)
            block = world.blocks.pop(old_bp)
            world.blocks[add(old_bp, delta)] = block
        ag.pos = add(ag.pos, delta)
        outcomes[name] = SUCCESS
    return outcomes


def _apply_clear_effect(world: WorldState, cell: Pos) -> None:
    cfg = world.config
    victim = world.agent_at(cell)
    if victim is not None:
        victim.disabled_until = world.step + cfg.disable_duration + 1
        victim.clear_charge = None
        if victim.attached is not None:
            bp = add(victim.pos, victim.attached)
            if bp in world.blocks:
                world.blocks[bp].attached_to = None
            victim.attached = None
        for p in world.bonded_cells(victim.name):
            world.blocks[p].bonded_to = None
        return
    block = world.blocks.pop(cell, None)
    if block is not None:
        if block.attached_to:
            world.agents[block.attached_to].attached = None
        return
    world.obstacles.discard(cell)


def apply_clear_event(world: WorldState, center: Pos, radius: int) -> None:
    """Environment clearance: destroys blocks, removes obstacles, disables agents."""
    cfg = world.config
    area = [p for p in world_area(world) if manhattan(p, center) <= radius]
    for cell in area:
        world.obstacles.discard(cell)
        block = world.blocks.pop(cell, None)
        if block is not None and block.attached_to:
            world.agents[block.attached_to].attached = None
    for ag in world.agents.values():
        if manhattan(ag.pos, center) <= radius:
            ag.disabled_until = world.step + cfg.disable_duration + 1
            ag.clear_charge = None
            if ag.attached is not None:
                bp = add(ag.pos, ag.attached)
                if bp in world.blocks:
                    world.blocks[bp].attached_to = None
                ag.attached = None
            for p in world.bonded_cells(ag.name):
                world.blocks[p].bonded_to = None
    world.last_events.append((center, radius))


def world_area(world: WorldState) -> list[Pos]:
    return [(x, y) for x in range(world.width) for y in range(world.height)]


def _apply_other(world: WorldState, name: str, act: Action) -> str:
    ag = world.agents[name]
    cfg = world.config
    if act.kind != "clear":
        ag.clear_charge = None
    if act.kind == "skip":
        return SUCCESS
    if act.kind == "rotate":
        if ag.attached is None or act.rot not in ("cw", "ccw"):
            return FAILED_TARGET
        if world.bonded_cells(name):
            return FAILED_TARGET
        new_off = rotate_cw(ag.attached) if act.rot == "cw" else rotate_ccw(ag.attached)
        target = add(ag.pos, new_off)
        if not world.in_bounds(target):
            return FAILED_TARGET
        if target in world.obstacles or target in world.blocks or world.agent_at(target):
            return FAILED_TARGET
        old = add(ag.pos, ag.attached)
        world.blocks[target] = world.blocks.pop(old)
        ag.attached = new_off
        return SUCCESS
    if act.kind == "request":
        if act.dir not in DIRECTIONS:
            return FAILED_TARGET
        target = add(ag.pos, OFFSETS[act.dir])
        if not world.in_bounds(target) or target not in world.dispensers:
            return FAILED_TARGET
        if target in world.blocks or world.agent_at(target):
            return FAILED_TARGET
        world.blocks[target] = Block(world.dispensers[target])
        return SUCCESS
    if act.kind == "attach":
        if act.dir not in DIRECTIONS or ag.attached is not None:
            return FAILED_TARGET
        off = OFFSETS[act.dir]
        target = add(ag.pos, off)
        block = world.blocks.get(target)
        if block is None or block.attached_to or block.bonded_to:
            return FAILED_TARGET
        block.attached_to = name
        ag.attached = off
        return SUCCESS
    if act.kind == "detach":
        if act.dir not in DIRECTIONS or ag.attached != OFFSETS[act.dir]:
            return FAILED_TARGET
        world.blocks[add(ag.pos, ag.attached)].attached_to = None
        ag.attached = None
        return SUCCESS
    if act.kind == "connect":
        if act.partner not in world.agents or act.offset is None:
            return FAILED_TARGET
        if world.agents[act.partner].team != ag.team:
            return FAILED_TARGET
        target = add(ag.pos, act.offset)
        block = world.blocks.get(target)
        if block is None or block.attached_to or block.bonded_to:
            return FAILED_TARGET
        block.bonded_to = name
        return SUCCESS
    if act.kind == "submit":
        task = world.tasks.get(act.task or "")
        if task is None or world.step > task.deadline:
            return FAILED_TARGET
        if ag.pos not in world.goals:
            return FAILED_TARGET
        used: list[Pos] = []
        for off, btype in task.pattern:
            cell = add(ag.pos, off)
            block = world.blocks.get(cell)
            if block is None or block.type != btype:
                return FAILED_TARGET
            if block.attached_to not in (None, name) or block.bonded_to not in (None, name):
                return FAILED_TARGET
            used.append(cell)
        for cell in used:
            block = world.blocks.pop(cell)
            if block.attached_to == name:
                ag.attached = None
        world.scores[ag.team] = world.scores.get(ag.team, 0) + task.reward
        del world.tasks[task.name]
        return SUCCESS
    if act.kind == "clear":
        if act.target is None:
            ag.clear_charge = None
            return FAILED_TARGET
        if ag.energy < cfg.clear_cost:
            ag.clear_charge = None
            return FAILED_TARGET
        if manhattan(act.target) > cfg.vision:
            ag.clear_charge = None
            return FAILED_TARGET
        cell = add(ag.pos, act.target)
        if not world.in_bounds(cell):
            ag.clear_charge = None
            return FAILED_TARGET
        if ag.clear_charge is not None and ag.clear_charge[0] == cell:
            count = ag.clear_charge[1] + 1
        else:
            count = 1
        if count < 3:
            ag.clear_charge = (cell, count)
            return SUCCESS
        ag.clear_charge = None
        _apply_clear_effect(world, cell)
        ag.energy -= cfg.clear_cost
        return SUCCESS
    return FAILED_TARGET


def advance_step(
    world: WorldState,
    actions: dict[str, Action | None],
    rng: random.Random,
    scripted_events: tuple[tuple[Pos, int], ...] = (),
) -> tuple[WorldState, dict[str, StepResult]]:
    """Apply one synchronous step; returns the world and per-agent outcomes.

    Missing actions are coerced to skip and flagged. Unknown agent ids are
    rejected without touching the world. Moves resolve simultaneously;
    everything else applies in roster order.
    """
    cfg = world.config
    world.last_events = []
    roster = world.roster
    prepared: dict[str, Action] = {}
    coerced: dict[str, bool] = {}
    for name in roster:
        act = actions.get(name)
        coerced[name] = act is None
        prepared[name] = act if act is not None else Action.skip()

    gate: dict[str, str | None] = {}
    for name in roster:
        ag = world.agents[name]
        act = prepared[name]
        if ag.disabled(world.step):
            gate[name] = FAILED_DISABLED
            ag.clear_charge = None
        elif (
            act.kind != "skip"
            and cfg.action_fail_chance > 0
            and rng.random() < cfg.action_fail_chance
        ):
            gate[name] = FAILED_RANDOM
            ag.clear_charge = None
        else:
            gate[name] = None

    movers = {
        name: prepared[name].dir
        for name in roster
        if gate[name] is None
        and prepared[name].kind == "move"
        and prepared[name].dir in DIRECTIONS
    }
    move_outcomes = _resolve_moves(world, movers)

    results: dict[str, StepResult] = {}
    for name in roster:
        act = prepared[name]
        if gate[name] is not None:
            out = gate[name]
        elif act.kind == "move":
            out = move_outcomes.get(name, FAILED_TARGET)
            if act.kind != "clear":
                world.agents[name].clear_charge = None
        else:
            out = _apply_other(world, name, act)
        results[name] = StepResult(out, coerced=coerced[name])

    for center, radius in scripted_events:
        apply_clear_event(world, center, radius)
    if cfg.clear_event_rate > 0 and (world.step + 1) % cfg.clear_event_rate == 0:
        center = (rng.randrange(world.width), rng.randrange(world.height))
        radius = rng.randint(cfg.clear_event_radius[0], cfg.clear_event_radius[1])
        apply_clear_event(world, center, radius)

    next_step = world.step + 1
    expired = [k for k, t in world.tasks.items() if t.deadline < next_step]
    for k in expired:
        del world.tasks[k]
    if cfg.task_rate > 0 and next_step % cfg.task_rate == 0:
        task = _generate_task(world, rng, next_step)
        world.tasks[task.name] = task

    for ag in world.agents.values():
        ag.energy = min(cfg.max_energy, ag.energy + cfg.regen)

    world.step = next_step
    world.last_outcomes = results
    return world, results


def _generate_task(world: WorldState, rng: random.Random, announced: int) -> TaskSpec:
    cfg = world.config
    size = rng.randint(1, cfg.task_max_size)
    cells: list[Pos] = [rng.choice([(0, 1), (0, -1), (1, 0), (-1, 0)])]
    while len(cells) < size:
        base = rng.choice(cells)
        candidates = [
            add(base, d)
            for d in OFFSETS.values()
            if add(base, d) != (0, 0) and add(base, d) not in cells
        ]
        if not candidates:
            break
        cells.append(rng.choice(candidates))
    pattern = tuple(
        sorted((c, rng.choice(list(cfg.block_types))) for c in cells)
    )
    world.task_seq += 1
    return TaskSpec(
        name=f"task{world.task_seq}",
        announced_step=announced,
        deadline=announced + cfg.task_deadline,
        reward=cfg.reward_per_block * len(pattern),
        pattern=pattern,
    )


# -- clear action as seen by one agent (spec-level helper) -------------------


def apply_clear(
    world: WorldState, name: str, target: Pos, rng: random.Random | None = None
) -> str:
    """Submit one clear re-submission for `name`; returns the outcome.

    Charging takes three consecutive submissions on the same target. This is
    the single-agent surface; advance_step routes clear actions through the
    same logic.
    """
    return _apply_other(world, name, Action.clear(target))


# -- world generation --------------------------------------------------------


def build_world(
    config: WorldConfig,
    *,
    agents: dict[str, tuple[str, Pos]],
    obstacles: set[Pos] | None = None,
    goals: set[Pos] | None = None,
    dispensers: dict[Pos, str] | None = None,
    blocks: dict[Pos, str] | None = None,
    tasks: tuple[TaskSpec, ...] = (),
) -> WorldState:
    """Hand-assembled world for tests and fixed scenarios."""
    w = WorldState(config=config)
    w.obstacles = set(obstacles or set())
    w.goals = frozenset(goals or set())
    w.dispensers = dict(dispensers or {})
    for pos, btype in (blocks or {}).items():
        w.blocks[pos] = Block(btype)
    for name, (team, pos) in agents.items():
        if not w.in_bounds(pos):
            raise WorldGenError(f"agent {name} out of bounds at {pos}")
        w.agents[name] = AgentState(name=name, team=team, pos=pos, energy=config.max_energy)
    for t in tasks:
        w.tasks[t.name] = t
    for team in config.teams:
        w.scores.setdefault(team, 0)
    for ag in w.agents.values():
        w.scores.setdefault(ag.team, 0)
    w.check_invariants()
    return w


def generate_world(config: WorldConfig, rng: random.Random) -> WorldState:
    """Seeded random world: obstacle patches, goal clusters, dispensers, agents."""
    wd, ht = config.width, config.height
    if wd < 20 or ht < 20:
        raise WorldGenError("width and height must be at least 20")
    if config.agents_per_team > (wd * ht) // 40:
        raise WorldGenError("too many agents for the grid area")

    world = WorldState(config=config)
    margin = config.vision + 4

    cluster_centers: list[Pos] = []
    goal_cells: set[Pos] = set()
    for _ in range(config.goal_clusters):
        placed = False
        for _attempt in range(500):
            c = (rng.randrange(margin, wd - margin), rng.randrange(margin, ht - margin))
            if all(manhattan(c, other) >= 14 for other in cluster_centers):
                cluster_centers.append(c)
                placed = True
                break
        if not placed:
            raise WorldGenError("cannot place goal clusters with required spacing")
        span = config.goal_cluster_span
        for dx in range(-span, span + 1):
            for dy in range(-span, span + 1):
                if abs(dx) + abs(dy) <= span:
                    goal_cells.add((c[0] + dx, c[1] + dy))
    world.goals = frozenset(goal_cells)

    protected: set[Pos] = set()
    for g in goal_cells:
        for dx in range(-6, 7):
            for dy in range(-6, 7):
                protected.add((g[0] + dx, g[1] + dy))

    for btype in config.block_types:
        placed_count = 0
        for _attempt in range(2000):
            if placed_count >= config.dispensers_per_type:
                break
            p = (rng.randrange(2, wd - 2), rng.randrange(2, ht - 2))
            if p in world.dispensers or p in goal_cells or p in protected:
                continue
            world.dispensers[p] = btype
            placed_count += 1
        if placed_count < 1:
            raise WorldGenError(f"cannot place a dispenser for {btype}")
    dispenser_zone: set[Pos] = set()
    for p in world.dispensers:
        dispenser_zone.add(p)
        for d in OFFSETS.values():
            dispenser_zone.add(add(p, d))

    target_obstacles = int(config.obstacle_density * wd * ht)
    placed_obstacles = 0
    attempts = 0
    while placed_obstacles < target_obstacles and attempts < 20 * target_obstacles + 100:
        attempts += 1
        cur = (rng.randrange(wd), rng.randrange(ht))
        for _ in range(rng.randint(3, 8)):
            if (
                cur not in protected
                and cur not in dispenser_zone
                and cur not in goal_cells
                and cur not in world.obstacles
                and world.in_bounds(cur)
            ):
                world.obstacles.add(cur)
                placed_obstacles += 1
            cur = add(cur, rng.choice(list(OFFSETS.values())))
            if not world.in_bounds(cur):
                break

    taken: set[Pos] = set()
    for team in config.teams:
        world.scores[team] = 0
        for i in range(1, config.agents_per_team + 1):
            name = f"{team}{i}"
            spot = None
            for _attempt in range(5000):
                p = (rng.randrange(wd), rng.randrange(ht))
                if (
                    p not in world.obstacles
                    and p not in goal_cells
                    and p not in world.dispensers
                    and p not in taken
                ):
                    spot = p
                    break
            if spot is None:
                raise WorldGenError("cannot place agents on distinct empty cells")
            taken.add(spot)
            world.agents[name] = AgentState(
                name=name, team=team, pos=spot, energy=config.max_energy
            )
    world.check_invariants()
    return world
