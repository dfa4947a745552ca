"""Per-agent exploration policy.

Random direction maintenance with an obstruction rule (no obstacle or block
within distance 2 along the movement ray), a two-stage relaxed special case
when the direction list empties, opportunistic clearing above an energy
threshold, and corner-case handling for walls, teammates, and opponents.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .grid import DIRECTIONS, OFFSETS, OPPOSITE, PERPENDICULAR, RIGHT_OF, Pos, step
from .world import (
    FAILED_OUT_OF_BOUNDS,
    FAILED_PATH,
    Action,
    Percept,
    StepResult,
)

CLEAR_ENERGY_THRESHOLD = 240

NORMAL = "normal"
SPECIAL_STAGE1 = "special_stage1"
SPECIAL_STAGE2 = "special_stage2"
BOXED_IN = "boxed_in"

# Our bound on each special-case stage so a stage cannot run unbounded.
STAGE_STEP_CAP = 10


@dataclass(frozen=True)
class ExplorationState:
    valid_dirs: frozenset[str] = frozenset(DIRECTIONS)
    current_dir: str | None = None
    mode: str = NORMAL
    last_dir: str | None = None
    stage_dir: str | None = None
    stage_steps: int = 0
    stage_banned: frozenset[str] = frozenset()
    pending_sidestep: str | None = None
    clearing_target: Pos | None = None
    boxed_skipped: bool = False
    last_move: str | None = None  # direction of the move we last emitted


def obstructed(percept: Percept, direction: str, distance: int, wide: bool = False) -> bool:
    """True if an obstacle or block lies along `direction` within `distance`.

    Default is the ray-only reading (cells straight ahead); `wide` adds the
    two diagonal cells flanking the first ray cell.
    """
    for d in range(1, distance + 1):
        if percept.obstruction_at(step((0, 0), direction, d)):
            return True
    if wide and distance >= 2:
        first = step((0, 0), direction, 1)
        dx, dy = OFFSETS[direction]
        for flank in ((dy, dx), (-dy, -dx)):
            if percept.obstruction_at((first[0] + flank[0], first[1] + flank[1])):
                return True
    return False


def _nearest_obstruction(percept: Percept, direction: str, distance: int) -> Pos | None:
    for d in range(1, distance + 1):
        cell = step((0, 0), direction, d)
        if percept.obstruction_at(cell):
            return cell
    return None


def _pick(rng: random.Random, candidates: list[str]) -> str:
    return rng.choice(sorted(candidates, key=DIRECTIONS.index))


def _all_adjacent_entities(percept: Percept) -> bool:
    return all(step((0, 0), d) in percept.entities for d in DIRECTIONS)


def _all_adjacent_obstructed(percept: Percept) -> bool:
    return all(percept.obstruction_at(step((0, 0), d)) for d in DIRECTIONS)


def choose_exploration_action(
    percept: Percept,
    state: ExplorationState,
    energy: int,
    rng: random.Random,
    wide_cone: bool = False,
) -> tuple[Action, ExplorationState]:
    """Normal-mode policy; dispatches to the special case when the list empties."""
    if state.mode in (SPECIAL_STAGE1, SPECIAL_STAGE2, BOXED_IN):
        return special_case_step(percept, state, energy, rng)

    if state.clearing_target is not None:
        if percept.obstruction_at(state.clearing_target):
            return Action.clear(state.clearing_target), replace(state, last_move=None)
        state = replace(state, clearing_target=None)

    if state.pending_sidestep is not None:
        side = state.pending_sidestep
        state = replace(state, pending_sidestep=None)
        if not obstructed(percept, side, 2, wide_cone) and step((0, 0), side) not in percept.entities:
            return Action.move(side), replace(state, last_dir=side, last_move=side)

    if _all_adjacent_entities(percept):
        d = _pick(rng, list(DIRECTIONS))
        return Action.move(d), replace(state, last_dir=d, last_move=d)

    valid = state.valid_dirs
    current = state.current_dir
    if current is not None:
        if not obstructed(percept, current, 2, wide_cone):
            return Action.move(current), replace(state, last_dir=current, last_move=current)
        if energy > CLEAR_ENERGY_THRESHOLD:
            target = _nearest_obstruction(percept, current, 2)
            if target is not None:
                return Action.clear(target), replace(
                    state, clearing_target=target, last_move=None
                )
        # Invalidation: the chosen direction and its opposite both leave the list.
        valid = valid - {current, OPPOSITE[current]}
        state = replace(state, valid_dirs=valid, current_dir=None)

    candidates = [d for d in sorted(valid, key=DIRECTIONS.index) if not obstructed(percept, d, 2, wide_cone)]
    if candidates:
        d = _pick(rng, candidates)
        return Action.move(d), replace(state, current_dir=d, last_dir=d, last_move=d)

    # Empty list: relax the obstruction condition and run the special case.
    state = replace(
        state,
        mode=SPECIAL_STAGE1,
        stage_dir=None,
        stage_steps=0,
        stage_banned=frozenset(),
        current_dir=None,
    )
    return special_case_step(percept, state, energy, rng)


def special_case_step(
    percept: Percept,
    state: ExplorationState,
    energy: int,
    rng: random.Random,
) -> tuple[Action, ExplorationState]:
    """Two relaxed stages (obstruction distance 1); boxed-in fallback after that."""
    if state.mode == BOXED_IN:
        return _boxed_step(percept, state, energy, rng)

    if state.mode == SPECIAL_STAGE1:
        if state.stage_dir is None:
            banned = set(state.stage_banned)
            if state.last_dir is not None:
                banned.add(OPPOSITE[state.last_dir])
            candidates = [
                d for d in DIRECTIONS if d not in banned and not obstructed(percept, d, 1)
            ]
            if not candidates:
                return _enter_boxed_or_reset(percept, state, energy, rng)
            d = _pick(rng, candidates)
            state = replace(state, stage_dir=d, stage_steps=0)
        if obstructed(percept, state.stage_dir, 1) or state.stage_steps >= STAGE_STEP_CAP:
            state = replace(
                state,
                mode=SPECIAL_STAGE2,
                last_dir=state.stage_dir,
                stage_dir=None,
                stage_steps=0,
                stage_banned=frozenset(),
            )
            return special_case_step(percept, state, energy, rng)
        return Action.move(state.stage_dir), replace(
            state, stage_steps=state.stage_steps + 1, last_move=state.stage_dir
        )

    # Stage 2: candidates restricted to the axis perpendicular to stage 1.
    if state.stage_dir is None:
        axis = PERPENDICULAR[state.last_dir] if state.last_dir else DIRECTIONS
        candidates = [
            d for d in axis if d not in state.stage_banned and not obstructed(percept, d, 1)
        ]
        if not candidates:
            return _enter_boxed_or_reset(percept, state, energy, rng)
        d = _pick(rng, candidates)
        state = replace(state, stage_dir=d, stage_steps=0)
    if obstructed(percept, state.stage_dir, 1) or state.stage_steps >= STAGE_STEP_CAP:
        done = _reset_normal(state, last_dir=state.stage_dir)
        return choose_exploration_action(percept, done, energy, rng)
    return Action.move(state.stage_dir), replace(
        state, stage_steps=state.stage_steps + 1, last_move=state.stage_dir
    )


def _reset_normal(state: ExplorationState, last_dir: str | None) -> ExplorationState:
    return ExplorationState(
        valid_dirs=frozenset(DIRECTIONS),
        current_dir=None,
        mode=NORMAL,
        last_dir=last_dir if last_dir is not None else state.last_dir,
    )


def _enter_boxed_or_reset(
    percept: Percept,
    state: ExplorationState,
    energy: int,
    rng: random.Random,
) -> tuple[Action, ExplorationState]:
    if _all_adjacent_obstructed(percept):
        boxed = replace(state, mode=BOXED_IN, boxed_skipped=False, stage_dir=None)
        return Action.skip(), replace(boxed, boxed_skipped=True, last_move=None)
    fresh = _reset_normal(state, last_dir=None)
    # Avoid immediate re-entry: if nothing passes even the relaxed check on a
    # full list, skip this step and reassess next percept.
    candidates = [d for d in DIRECTIONS if not obstructed(percept, d, 2)]
    if not candidates:
        return Action.skip(), replace(fresh, last_move=None)
    return choose_exploration_action(percept, fresh, energy, rng)


def _boxed_step(
    percept: Percept,
    state: ExplorationState,
    energy: int,
    rng: random.Random,
) -> tuple[Action, ExplorationState]:
    """Skip one step, then clear an adjacent obstruction, then rebuild the list."""
    if not _all_adjacent_obstructed(percept):
        fresh = _reset_normal(state, last_dir=None)
        return choose_exploration_action(percept, fresh, energy, rng)
    if not state.boxed_skipped:
        return Action.skip(), replace(state, boxed_skipped=True, last_move=None)
    if energy > CLEAR_ENERGY_THRESHOLD:
        for d in DIRECTIONS:
            cell = step((0, 0), d)
            if percept.obstruction_at(cell):
                return Action.clear(cell), replace(state, last_move=None)
    return Action.skip(), replace(state, last_move=None)


def handle_move_failure(
    outcome: StepResult,
    state: ExplorationState,
    percept: Percept,
) -> ExplorationState:
    """React to the previous step's failed move using the fresh percept."""
    direction = state.last_move
    if direction is None or outcome.outcome not in (FAILED_OUT_OF_BOUNDS, FAILED_PATH):
        return state
    if outcome.outcome == FAILED_OUT_OF_BOUNDS:
        if state.mode in (SPECIAL_STAGE1, SPECIAL_STAGE2):
            return replace(
                state,
                stage_dir=None,
                stage_banned=state.stage_banned | {direction},
            )
        # Only the failing direction leaves the list, not its opposite.
        return replace(
            state,
            valid_dirs=state.valid_dirs - {direction},
            current_dir=None if state.current_dir == direction else state.current_dir,
        )
    ahead = step((0, 0), direction)
    team = percept.entities.get(ahead)
    if team == percept.team:
        return replace(state, pending_sidestep=RIGHT_OF[direction])
    if team is not None:
        return state  # opponent ahead: keep trying the same move
    if percept.obstruction_at(ahead) and state.mode == NORMAL and state.current_dir == direction:
        return replace(
            state,
            valid_dirs=state.valid_dirs - {direction, OPPOSITE[direction]},
            current_dir=None,
        )
    return state
