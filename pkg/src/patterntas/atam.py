"""Error-free assembly of rectilinear temperature-2 tile systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .tileset import SIDES, TileSystem, TileType
from .tuples import serialize

__all__ = [
    "AssemblyError",
    "StuckError",
    "NondeterminismError",
    "Assembly",
    "GlueTables",
    "glue_tables",
    "can_bind",
    "assemble",
    "labels",
]

N, E, S, W = range(4)
# (dx, dy, my side, neighbour's side)
NEIGHBOURS = ((0, 1, N, S), (1, 0, E, W), (0, -1, S, N), (-1, 0, W, E))


class AssemblyError(RuntimeError):
    pass


class StuckError(AssemblyError):
    pass


class NondeterminismError(AssemblyError):
    pass


@dataclass(frozen=True)
class GlueTables:
    """Per-tile glue ids (equal iff color and strength are equal) and strengths,
    columns in N, E, S, W order."""

    gid: np.ndarray
    strength: np.ndarray
    glues: tuple


@lru_cache(maxsize=64)
def glue_tables(ts: TileSystem) -> GlueTables:
    glues = sorted({t.glue(s) for t in ts.tiles for s in SIDES}, key=lambda g: (serialize(g.color), g.strength))
    ids = {g: i for i, g in enumerate(glues)}
    gid = np.array([[ids[t.glue(s)] for s in SIDES] for t in ts.tiles], dtype=np.int32)
    st = np.array([[t.strength(s) for s in SIDES] for t in ts.tiles], dtype=np.int32)
    gid.flags.writeable = False
    st.flags.writeable = False
    return GlueTables(gid, st, tuple(glues))


@dataclass
class Assembly:
    """Tiles placed on ``[0, width) x [0, height)``.

    ``grid[y, x]`` is an index into ``system.tiles`` or -1 for an empty site.
    """

    system: TileSystem
    grid: np.ndarray
    meta: dict = field(default_factory=dict)

    @classmethod
    def seeded(cls, ts: TileSystem, width: int, height: int) -> "Assembly":
        grid = np.full((height, width), -1, dtype=np.int32)
        grid[0, 0] = ts.index_of(ts.seed_id)
        return cls(ts, grid)

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def tile_at(self, x: int, y: int) -> TileType | None:
        if not (0 <= x < self.width and 0 <= y < self.height):
            return None
        i = self.grid[y, x]
        return None if i < 0 else self.system.tiles[i]

    @property
    def tiles_placed(self) -> int:
        return int(np.count_nonzero(self.grid >= 0))

    def mismatches(self) -> tuple[np.ndarray, np.ndarray]:
        """Boolean edge flags ``(horizontal, vertical)``.

        ``horizontal[y, x]`` marks a mismatch between ``(x-1, y)`` and
        ``(x, y)``; ``vertical[y, x]`` between ``(x, y-1)`` and ``(x, y)``.
        Column 0 / row 0 respectively are always False.
        """
        return mismatch_flags(self.grid, glue_tables(self.system).gid)

    @property
    def mismatch_edges(self) -> int:
        hz, vt = self.mismatches()
        return int(hz.sum() + vt.sum())


def mismatch_flags(grid: np.ndarray, gid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    occ = grid >= 0
    safe = np.where(occ, grid, 0)
    hz = np.zeros(grid.shape, dtype=bool)
    vt = np.zeros(grid.shape, dtype=bool)
    both = occ[:, 1:] & occ[:, :-1]
    hz[:, 1:] = both & (gid[safe[:, :-1], E] != gid[safe[:, 1:], W])
    both = occ[1:, :] & occ[:-1, :]
    vt[1:, :] = both & (gid[safe[:-1, :], N] != gid[safe[1:, :], S])
    return hz, vt


def can_bind(ts: TileSystem, a: Assembly, tile: TileType, x: int, y: int) -> bool:
    """Whether ``tile`` reaches temperature 2 at the empty site ``(x, y)``."""
    if a.tile_at(x, y) is not None:
        raise AssemblyError(f"site ({x},{y}) is occupied")
    total = 0
    for dx, dy, mine, theirs in NEIGHBOURS:
        other = a.tile_at(x + dx, y + dy)
        if other is None:
            continue
        g = tile.glue(SIDES[mine])
        if g.strength > 0 and g == other.glue(SIDES[theirs]):
            total += g.strength
    return total >= ts.temperature


def _order(width: int, height: int, order: str):
    if order == "diagonal":
        for d in range(width + height - 1):
            for x in range(max(0, d - height + 1), min(d, width - 1) + 1):
                yield x, d - x
    elif order == "row":
        for y in range(height):
            for x in range(width):
                yield x, y
    else:
        raise ValueError(f"unknown fill order {order!r}")


def assemble(ts: TileSystem, max_x: int, max_y: int, order: str = "diagonal") -> Assembly:
    """Fill ``[0, max_x] x [0, max_y]`` from the seed, one site at a time.

    Every site must admit exactly one tile type; anything else raises.
    """
    a = Assembly.seeded(ts, max_x + 1, max_y + 1)
    tables = glue_tables(ts)
    gid, st = tables.gid, tables.strength
    n = len(ts.tiles)
    cache: dict[tuple[int, int], list[int]] = {}
    grid = a.grid
    for x, y in _order(max_x + 1, max_y + 1, order):
        if x == 0 and y == 0:
            continue
        west = int(grid[y, x - 1]) if x > 0 else -1
        south = int(grid[y - 1, x]) if y > 0 else -1
        key = (west, south)
        cands = cache.get(key)
        if cands is None:
            total = np.zeros(n, dtype=np.int32)
            if west >= 0:
                ok = (gid[:, W] == gid[west, E]) & (st[:, W] > 0)
                total += np.where(ok, st[:, W], 0)
            if south >= 0:
                ok = (gid[:, S] == gid[south, N]) & (st[:, S] > 0)
                total += np.where(ok, st[:, S], 0)
            cands = [int(i) for i in np.flatnonzero(total >= ts.temperature)]
            cache[key] = cands
        if len(cands) == 1:
            grid[y, x] = cands[0]
            continue
        inputs = []
        if west >= 0:
            inputs.append(f"W={serialize(ts.tiles[west].E.color)}")
        if south >= 0:
            inputs.append(f"S={serialize(ts.tiles[south].N.color)}")
        if not cands:
            raise StuckError(f"no tile can bind at ({x},{y}) with inputs {', '.join(inputs) or 'none'}")
        ids = ", ".join(ts.tiles[i].id for i in cands)
        raise NondeterminismError(f"{len(cands)} tiles can bind at ({x},{y}) with inputs {', '.join(inputs)}: {ids}")
    return a


def labels(a: Assembly) -> np.ndarray:
    """Label grid ``[y, x]`` (object dtype), ``None`` where empty."""
    out = np.empty(a.grid.shape, dtype=object)
    labs = [t.label for t in a.system.tiles]
    for (y, x), i in np.ndenumerate(a.grid):
        out[y, x] = None if i < 0 else labs[i]
    return out
