"""Tile types, tile systems, and the two tile-set constructions.

``construct_kl`` compiles a recursively defined pattern into a rectilinear
tile system whose glues carry the pattern window (south glue: the block of
rows below, west glue: the partial row to the left).  ``construct_er``
rewrites such a system so that every glue is a pair sharing the lower-left
sub-block, which makes a lone mismatch force a second one nearby.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, NamedTuple

from .pattern import MissingRuleInput, PatternOracle, PatternSpec, spec_from_dict, spec_to_dict
from .tuples import (
    BOT,
    TupleError,
    concat,
    deep_shift_insert,
    deserialize,
    flatten,
    serialize,
    shift_insert,
)

__all__ = [
    "SIDES",
    "Glue",
    "TileType",
    "TileSystem",
    "ConstructionError",
    "construct_kl",
    "construct_er",
    "reachable_contexts",
    "glue_index",
    "tileset_to_dict",
    "tileset_from_dict",
    "dump_tileset",
    "load_tileset",
    "emit_tileset",
    "pattern_of",
]

SIDES = ("N", "E", "S", "W")
OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}
TEMPERATURE = 2

KL = "construction1"
ER = "construction2"


class ConstructionError(ValueError):
    pass


class Glue(NamedTuple):
    color: Any
    strength: int

    def binds(self, other: "Glue") -> bool:
        return self.strength > 0 and self == other


def _tile_id(label: Any, glues: Mapping[str, Glue]) -> str:
    text = serialize((label,)) + "|" + "|".join(
        f"{s}:{serialize(glues[s].color)}/{glues[s].strength}" for s in SIDES
    )
    return "t" + hashlib.sha1(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class TileType:
    id: str
    label: Any
    N: Glue
    E: Glue
    S: Glue
    W: Glue

    @classmethod
    def make(cls, label: Any, glues: Mapping[str, Glue]) -> "TileType":
        for s in SIDES:
            if glues[s].strength not in (0, 1, 2):
                raise ConstructionError(f"glue strength {glues[s].strength} out of range")
        return cls(_tile_id(label, glues), label, glues["N"], glues["E"], glues["S"], glues["W"])

    def glue(self, side: str) -> Glue:
        return getattr(self, side)

    def color(self, side: str) -> Any:
        return getattr(self, side).color

    def strength(self, side: str) -> int:
        return getattr(self, side).strength

    @property
    def glues(self) -> dict[str, Glue]:
        return {s: getattr(self, s) for s in SIDES}

    @property
    def is_interior(self) -> bool:
        return all(getattr(self, s).strength == 1 for s in SIDES)


@dataclass(frozen=True)
class TileSystem:
    tiles: tuple[TileType, ...]
    seed_id: str
    alphabet: tuple
    window: tuple[int, int]
    provenance: str
    mode: str
    temperature: int = TEMPERATURE
    # canonical JSON of the source pattern, when known
    pattern: str | None = None

    def __post_init__(self) -> None:
        if self.temperature != TEMPERATURE:
            raise ConstructionError("only temperature 2 is supported")
        ids = [t.id for t in self.tiles]
        if len(set(ids)) != len(ids):
            raise ConstructionError("duplicate tile ids")
        sigs = {(t.label, t.N, t.E, t.S, t.W) for t in self.tiles}
        if len(sigs) != len(self.tiles):
            raise ConstructionError("two tiles share all four glues")
        seed = self.by_id.get(self.seed_id)
        if seed is None:
            raise ConstructionError(f"seed {self.seed_id} is not a tile of the system")
        if (seed.N.strength, seed.E.strength, seed.S.strength, seed.W.strength) != (2, 2, 0, 0):
            raise ConstructionError("seed must have strength-2 north/east and strength-0 south/west glues")

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self) -> Iterator[TileType]:
        return iter(self.tiles)

    @property
    def by_id(self) -> dict[str, TileType]:
        cache = self.__dict__.get("_by_id")
        if cache is None:
            cache = {t.id: t for t in self.tiles}
            object.__setattr__(self, "_by_id", cache)
        return cache

    @property
    def seed(self) -> TileType:
        return self.by_id[self.seed_id]

    @property
    def interior(self) -> list[TileType]:
        return [t for t in self.tiles if t.is_interior]

    @property
    def boundary(self) -> list[TileType]:
        return [t for t in self.tiles if not t.is_interior]

    def index_of(self, tile_id: str) -> int:
        cache = self.__dict__.get("_pos")
        if cache is None:
            cache = {t.id: i for i, t in enumerate(self.tiles)}
            object.__setattr__(self, "_pos", cache)
        return cache[tile_id]

    def replace_tile(self, old_id: str, new: TileType) -> "TileSystem":
        """Copy with one tile swapped (used for mutation tests)."""
        tiles = tuple(new if t.id == old_id else t for t in self.tiles)
        seed_id = new.id if old_id == self.seed_id else self.seed_id
        return TileSystem(tuple(sorted(tiles, key=lambda t: t.id)), seed_id, self.alphabet,
                          self.window, self.provenance, self.mode, pattern=self.pattern)


# -- Construction 1 -----------------------------------------------------------

def _all_bot(t: tuple) -> bool:
    return all(e is BOT for e in t)


def _admissible(block: tuple, rh: tuple, w: int, h: int) -> bool:
    rows = list(block) + [rh]
    # bottom markers sit at the left of each row ...
    for r in rows:
        seen = False
        for e in r:
            if e is not BOT:
                seen = True
            elif seen:
                return False
    # ... and at the bottom of each column
    for k in range(w):
        seen = False
        for r in rows:
            if k >= len(r):
                continue
            if r[k] is not BOT:
                seen = True
            elif seen:
                return False
    return True


def _strengths(block: tuple, rh: tuple) -> dict[str, int]:
    below, left = _all_bot(block[-1]), _all_bot(rh)
    if below and left:
        return {"N": 2, "E": 2, "S": 0, "W": 0}
    if below:
        return {"N": 1, "E": 2, "S": 0, "W": 2}
    if left:
        return {"N": 2, "E": 1, "S": 2, "W": 0}
    return {"N": 1, "E": 1, "S": 1, "W": 1}


def _kl_tile(block: tuple, rh: tuple, label: Any) -> TileType:
    colors = {
        "W": rh,
        "S": block,
        "E": shift_insert(rh, label),
        "N": shift_insert(block, concat(rh, (label,))),
    }
    st = _strengths(block, rh)
    return TileType.make(label, {s: Glue(colors[s], st[s]) for s in SIDES})


def reachable_contexts(spec: PatternSpec, max_diagonals: int = 4096) -> dict[tuple, Any]:
    """Map each (south block, west row) context realized by the pattern to its label.

    Diagonals ``x + y = d`` are scanned until the run of diagonals adding
    nothing new is at least ``2 * last + w + h`` long, where ``last`` is the
    last diagonal that did.  Self-similar patterns show new contexts only at
    growing scales (the carpet has two first appearing on diagonal 37), so a
    fixed-length quiet window is not enough.
    """
    w, h = spec.w, spec.h
    oracle = PatternOracle(spec)
    found: dict[tuple, Any] = {}
    last = 0
    for d in range(max_diagonals):
        fresh = False
        oracle.evaluate(d, d)
        for x in range(d + 1):
            y = d - x
            ctx = (oracle.block(w, h - 1, x, y - 1), oracle.row(w - 1, x - 1, y))
            label = oracle.evaluate(x, y)
            prev = found.get(ctx, _MISSING)
            if prev is _MISSING:
                found[ctx] = label
                fresh = True
            elif prev != label:
                raise ConstructionError(
                    f"pattern is not ({w},{h})-recursive: context {serialize(ctx)} "
                    f"yields both {prev!r} and {label!r}"
                )
        if fresh:
            last = d
        elif d - last >= 2 * last + w + h:
            return found
    raise ConstructionError(f"context closure did not settle within {max_diagonals} diagonals")


_MISSING = object()


def _admissible_contexts(spec: PatternSpec) -> Iterable[tuple[tuple, tuple]]:
    w, h = spec.w, spec.h
    sym = (BOT,) + tuple(spec.alphabet)
    full_rows = [r for r in itertools.product(sym, repeat=w) if _admissible((), r, w, h)]
    part_rows = [r for r in itertools.product(sym, repeat=w - 1) if _admissible((), r, w, h)]
    for block in itertools.product(full_rows, repeat=h - 1):
        for rh in part_rows:
            if _admissible(block, rh, w, h):
                yield block, rh


def construct_kl(spec: PatternSpec, mode: str = "reachable", max_diagonals: int = 4096) -> TileSystem:
    """Pattern -> rectilinear tile system, one tile per window context.

    ``mode="reachable"`` keeps only contexts the pattern actually realizes;
    ``mode="exhaustive"`` emits every context allowed by the bottom-marker
    placement rules, labelling unrealized ones with the window rule.
    """
    realized = reachable_contexts(spec, max_diagonals)
    if mode == "reachable":
        items = list(realized.items())
    elif mode == "exhaustive":
        items = []
        for ctx in _admissible_contexts(spec):
            if ctx in realized:
                items.append((ctx, realized[ctx]))
                continue
            window = flatten(ctx[0]) + ctx[1]
            try:
                items.append((ctx, spec.rule(window)))
            except MissingRuleInput as exc:
                raise ConstructionError(f"exhaustive mode needs a rule value for input {serialize(exc.window)}") from None
    else:
        raise ConstructionError(f"unknown mode {mode!r}")
    tiles = [_kl_tile(block, rh, label) for (block, rh), label in items]
    seeds = [t for t in tiles if _all_bot(t.S.color[-1]) and _all_bot(t.W.color)]
    if len(seeds) != 1:
        raise ConstructionError(f"expected exactly one seed context, found {len(seeds)}")
    return TileSystem(tuple(sorted(tiles, key=lambda t: t.id)), seeds[0].id, tuple(spec.alphabet),
                      (spec.w, spec.h), KL, mode, pattern=pattern_text(spec))


# -- Construction 2 -----------------------------------------------------------

def _split_south(b: Any, w: int, h: int) -> tuple[tuple, tuple]:
    if not isinstance(b, tuple) or len(b) != h - 1 or any(not isinstance(r, tuple) or len(r) != w for r in b):
        raise ConstructionError(f"south color {serialize(b)} is not a {h - 1}-tuple of {w}-tuples")
    col = tuple(r[w - 1] for r in b)
    block = tuple(r[: w - 1] for r in b)
    return block, col


def er_tile(t: TileType, w: int, h: int) -> TileType:
    block, col = _split_south(t.S.color, w, h)
    row = t.W.color
    if not isinstance(row, tuple) or len(row) != w - 1:
        raise ConstructionError(f"west color {serialize(row)} is not a {w - 1}-tuple")
    lab = t.label
    try:
        colors = {
            "W": (block, row),
            "S": (block, col),
            "E": (deep_shift_insert(block, col), shift_insert(row, lab)),
            "N": (shift_insert(block, row), shift_insert(col, lab)),
        }
    except TupleError as exc:
        raise ConstructionError(str(exc)) from None
    return TileType.make(lab, {s: Glue(colors[s], t.strength(s)) for s in SIDES})


def construct_er(tas: TileSystem) -> TileSystem:
    """Rectilinear system from ``construct_kl`` -> error-resilient system of the same size."""
    if tas.provenance != KL:
        raise ConstructionError("construct_er needs a system built by construct_kl")
    w, h = tas.window
    mapped = {t.id: er_tile(t, w, h) for t in tas.tiles}
    tiles = sorted(mapped.values(), key=lambda t: t.id)
    return TileSystem(tuple(tiles), mapped[tas.seed_id].id, tas.alphabet, tas.window, ER, tas.mode,
                      pattern=tas.pattern)


# -- glue numbering -----------------------------------------------------------

def glue_index(ts: TileSystem) -> dict[Glue, int]:
    """Bond numbers: 0 for every strength-0 glue, 1.. for the rest in canonical order."""
    glues = {t.glue(s) for t in ts.tiles for s in SIDES}
    live = sorted((g for g in glues if g.strength > 0), key=lambda g: (serialize(g.color), g.strength))
    index = {g: i + 1 for i, g in enumerate(live)}
    for g in glues:
        if g.strength == 0:
            index[g] = 0
    return index


# -- JSON ---------------------------------------------------------------------

def tileset_to_dict(ts: TileSystem) -> dict:
    return {
        "alphabet": list(ts.alphabet),
        "w": ts.window[0],
        "h": ts.window[1],
        "provenance": ts.provenance,
        "mode": ts.mode,
        "seed_id": ts.seed_id,
        "pattern": None if ts.pattern is None else json.loads(ts.pattern),
        "tiles": [
            {
                "id": t.id,
                "label": t.label,
                "glues": {s: {"color": serialize(t.color(s)), "strength": t.strength(s)} for s in SIDES},
            }
            for t in ts.tiles
        ],
    }


def tileset_from_dict(d: Mapping, source: str = "<tile set>") -> TileSystem:
    try:
        tiles = []
        for i, td in enumerate(d["tiles"]):
            try:
                glues = {s: Glue(deserialize(td["glues"][s]["color"]), int(td["glues"][s]["strength"])) for s in SIDES}
            except KeyError as exc:
                raise ConstructionError(f"{source}: tiles[{i}].glues missing {exc.args[0]!r}") from None
            except TupleError as exc:
                raise ConstructionError(f"{source}: tiles[{i}].glues: {exc}") from None
            tile = TileType.make(td["label"], glues)
            if "id" in td and td["id"] != tile.id:
                raise ConstructionError(f"{source}: tiles[{i}].id {td['id']} does not match its content")
            tiles.append(tile)
        return TileSystem(
            tuple(sorted(tiles, key=lambda t: t.id)),
            d["seed_id"],
            tuple(d["alphabet"]),
            (int(d["w"]), int(d["h"])),
            d["provenance"],
            d["mode"],
            pattern=None if d.get("pattern") is None else json.dumps(d["pattern"], sort_keys=True),
        )
    except KeyError as exc:
        raise ConstructionError(f"{source}: missing field {exc.args[0]!r}") from None


def pattern_text(spec: PatternSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def pattern_of(ts: TileSystem) -> PatternSpec | None:
    """The pattern a tile system was generated from, if recorded."""
    return None if ts.pattern is None else spec_from_dict(json.loads(ts.pattern))


def emit_tileset(ts: TileSystem) -> str:
    return json.dumps(tileset_to_dict(ts), indent=2) + "\n"


def dump_tileset(ts: TileSystem, path: str | Path) -> None:
    Path(path).write_text(emit_tileset(ts))


def load_tileset(path: str | Path) -> TileSystem:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConstructionError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConstructionError(f"{path}: invalid JSON ({exc})") from None
    return tileset_from_dict(data, str(path))
