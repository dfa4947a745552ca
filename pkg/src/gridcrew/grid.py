"""Grid geometry: directions, relative offsets, and the diamond vision area.

Coordinates are (x, y) with x growing east and y growing south. Agents
reason in a local frame where they sit at (0, 0); the simulator keeps a
hidden absolute frame; each shared team map has its own frame.
"""

from __future__ import annotations

Pos = tuple[int, int]

DIRECTIONS: tuple[str, ...] = ("n", "s", "e", "w")

OFFSETS: dict[str, Pos] = {"n": (0, -1), "s": (0, 1), "e": (1, 0), "w": (-1, 0)}
DIR_OF: dict[Pos, str] = {v: k for k, v in OFFSETS.items()}

OPPOSITE: dict[str, str] = {"n": "s", "s": "n", "e": "w", "w": "e"}

# Relative right when facing the given direction (y grows south).
RIGHT_OF: dict[str, str] = {"n": "e", "e": "s", "s": "w", "w": "n"}

PERPENDICULAR: dict[str, tuple[str, str]] = {
    "n": ("e", "w"),
    "s": ("e", "w"),
    "e": ("n", "s"),
    "w": ("n", "s"),
}


def add(a: Pos, b: Pos) -> Pos:
    return (a[0] + b[0], a[1] + b[1])


def sub(a: Pos, b: Pos) -> Pos:
    return (a[0] - b[0], a[1] - b[1])


def manhattan(a: Pos, b: Pos = (0, 0)) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def chebyshev(a: Pos, b: Pos = (0, 0)) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def step(pos: Pos, direction: str, dist: int = 1) -> Pos:
    dx, dy = OFFSETS[direction]
    return (pos[0] + dx * dist, pos[1] + dy * dist)


def rotate_cw(off: Pos) -> Pos:
    """Quarter turn clockwise on screen (n -> e -> s -> w)."""
    return (-off[1], off[0])


def rotate_ccw(off: Pos) -> Pos:
    return (off[1], -off[0])


def diamond(radius: int) -> tuple[Pos, ...]:
    """All offsets within Manhattan distance `radius`, in a fixed scan order."""
    cells = []
    for y in range(-radius, radius + 1):
        span = radius - abs(y)
        for x in range(-span, span + 1):
            cells.append((x, y))
    return tuple(cells)


VISION_RADIUS = 5
VISION_CELLS: tuple[Pos, ...] = diamond(VISION_RADIUS)
VISION_BORDER: tuple[Pos, ...] = tuple(p for p in VISION_CELLS if manhattan(p) == VISION_RADIUS)


def toward(src: Pos, dst: Pos) -> str | None:
    """Cardinal direction of dst from src when axis-aligned adjacent-ish; None otherwise."""
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    if dx == 0 and dy == 0:
        return None
    if abs(dx) >= abs(dy):
        return "e" if dx > 0 else "w"
    return "s" if dy > 0 else "n"
