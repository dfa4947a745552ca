"""Mutual identification of teammates from symmetric sightings.

When an unknown same-team entity enters vision the agent broadcasts a query;
every teammate replies with the things it currently sees. A reply survives
filtering iff it contains an own-team entity at the mirrored position and
every reported thing that falls inside the asker's vision matches the
asker's own percept. Identity is concluded only on a unique survivor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grid import Pos
from .world import Percept, Thing


@dataclass(frozen=True)
class Sighting:
    step: int
    pos: Pos  # relative position of the unknown entity


@dataclass(frozen=True)
class ThingReport:
    sender: str
    step: int
    team: str
    things: tuple[Thing, ...]


@dataclass
class IdentificationLedger:
    identified: dict[str, Sighting] = field(default_factory=dict)
    pending: set[Sighting] = field(default_factory=set)
    diagnostics: list[str] = field(default_factory=list)

    def count(self) -> int:
        return len(self.identified)


def build_report(percept: Percept) -> ThingReport:
    """Everything the sender currently sees, self excluded."""
    return ThingReport(
        sender=percept.agent,
        step=percept.step,
        team=percept.team,
        things=tuple(percept.things()),
    )


def unknown_teammate_sightings(
    percept: Percept,
    my_map_pos: Pos,
    member_positions: dict[str, Pos],
) -> list[Pos]:
    """Same-team entities whose map positions match no co-map member."""
    known_cells = {
        (pos[0] - my_map_pos[0], pos[1] - my_map_pos[1])
        for name, pos in member_positions.items()
        if name != percept.agent
    }
    out = []
    for rel, team in sorted(percept.entities.items()):
        if team == percept.team and rel not in known_cells:
            out.append(rel)
    return out


def filter_candidates(
    my_things: ThingReport,
    sighting: Pos,
    replies: list[ThingReport],
) -> list[str]:
    """Senders whose reply is consistent with the sighting at (X, Y)."""
    x, y = sighting
    mine = {(t.x, t.y): (t.kind, t.detail) for t in my_things.things}
    candidates: list[str] = []
    for reply in replies:
        if reply.step != my_things.step:
            continue  # stale reply
        mirrored = any(
            t.kind == "entity" and (t.x, t.y) == (-x, -y) and t.detail == my_things.team
            for t in reply.things
        )
        if not mirrored:
            continue
        possible = True
        for t in reply.things:
            w, z = t.x, t.y
            px, py = x + w, y + z
            if abs(px) + abs(py) > 5:
                continue  # outside my vision, exempt
            if (px, py) == (0, 0):
                continue  # that thing is me; my percept excludes self
            if mine.get((px, py)) != (t.kind, t.detail):
                possible = False
                break
        if possible:
            candidates.append(reply.sender)
    return candidates


def record_identity(
    ledger: IdentificationLedger, name: str, sighting: Sighting
) -> bool:
    """Record a concluded identity; returns False when it conflicts.

    Re-identifying a known teammate is a no-op for the ledger but still a
    valid trigger for map-merge checks on the caller's side.
    """
    prior = ledger.identified.get(name)
    if prior is not None and prior.step == sighting.step and prior.pos != sighting.pos:
        ledger.diagnostics.append(
            f"conflicting anchor for {name}: kept {prior}, ignored {sighting}"
        )
        return False
    if prior is None:
        ledger.identified[name] = sighting
    else:
        ledger.identified[name] = sighting  # refresh to the newest sighting
    ledger.pending.discard(sighting)
    return True
