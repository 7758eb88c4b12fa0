"""Recursively defined quadrant patterns and their window extractors."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Hashable, Mapping

import numpy as np

from .tuples import BOT, deserialize, serialize

__all__ = [
    "PatternError",
    "MissingRuleInput",
    "AffineModRule",
    "TableRule",
    "Boundary",
    "PatternSpec",
    "PatternOracle",
    "builtin",
    "BUILTIN_NAMES",
    "load_spec",
    "dump_spec",
    "spec_from_dict",
    "spec_to_dict",
]


class PatternError(ValueError):
    pass


class MissingRuleInput(PatternError):
    """The window rule has no value for this input."""

    def __init__(self, window: tuple):
        self.window = window
        super().__init__(f"rule undefined on input {serialize(window)}")


@dataclass(frozen=True)
class AffineModRule:
    """``sum(c_i * window_i) mod modulus``.

    ``coeffs`` is given top row first, as the window is drawn: ``h`` rows of
    ``w`` entries each, with the top-right entry (the cell being defined)
    set to ``None``.
    """

    coeffs: tuple[tuple[int | None, ...], ...]
    modulus: int
    bot_as_zero: bool = True

    def flat_coeffs(self) -> tuple[int, ...]:
        # window order is bottom row first, left to right, top row last
        rows = list(reversed(self.coeffs))
        flat = [c for row in rows[:-1] for c in row] + list(rows[-1][:-1])
        return tuple(int(c) for c in flat)

    def __call__(self, window: tuple) -> int:
        total = 0
        for c, v in zip(self.flat_coeffs(), window):
            if v is BOT:
                if not self.bot_as_zero:
                    raise MissingRuleInput(window)
                continue
            total += c * v
        return total % self.modulus


@dataclass(frozen=True)
class TableRule:
    entries: Mapping[tuple, Hashable]

    def __call__(self, window: tuple) -> Hashable:
        try:
            return self.entries[window]
        except KeyError:
            raise MissingRuleInput(window) from None

    def __hash__(self) -> int:
        return hash(tuple(sorted((serialize(k), str(v)) for k, v in self.entries.items())))


@dataclass(frozen=True)
class Boundary:
    """Periodic label sequences on the two axes: ``P(x, 0) = x_axis[x % len]``."""

    x_axis: tuple
    y_axis: tuple

    def value(self, x: int, y: int) -> Any:
        if y == 0:
            return self.x_axis[x % len(self.x_axis)]
        if x == 0:
            return self.y_axis[y % len(self.y_axis)]
        raise PatternError("boundary queried off the axes")


@dataclass(frozen=True)
class PatternSpec:
    w: int
    h: int
    alphabet: tuple
    rule: AffineModRule | TableRule
    boundary: Boundary | None = None
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.w < 2 or self.h < 2:
            raise PatternError(f"window must be at least 2x2, got {self.w}x{self.h}")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise PatternError("alphabet has repeated labels")
        if isinstance(self.rule, AffineModRule):
            if self.rule.modulus != len(self.alphabet):
                raise PatternError("affine rule modulus must equal the alphabet size")
            if tuple(self.alphabet) != tuple(range(self.rule.modulus)):
                raise PatternError("affine rule labels must be the residues 0..m-1")
            rows = self.rule.coeffs
            if len(rows) != self.h or any(len(r) != self.w for r in rows):
                raise PatternError(f"coeffs must be an {self.h}x{self.w} grid")
            if rows[0][-1] is not None:
                raise PatternError("top-right coefficient must be null")
        if self.boundary is not None:
            b = self.boundary
            if not b.x_axis or not b.y_axis:
                raise PatternError("boundary sequences must be non-empty")
            if b.x_axis[0] != b.y_axis[0]:
                raise PatternError("boundary sequences disagree at the origin")
            for v in (*b.x_axis, *b.y_axis):
                if v not in self.alphabet:
                    raise PatternError(f"boundary label {v!r} not in alphabet")

    @property
    def window_size(self) -> int:
        return self.w * self.h - 1

    def widened(self, dw: int = 1, dh: int = 0) -> "PatternSpec":
        """Same pattern, read through a window grown by ``dw`` columns on the
        left and ``dh`` rows at the bottom, whose extra cells are ignored."""
        if not isinstance(self.rule, AffineModRule):
            raise PatternError("widening is only supported for affine rules")
        rows = [(0,) * dw + tuple(r) for r in self.rule.coeffs]
        rows += [(0,) * (self.w + dw)] * dh
        rule = AffineModRule(tuple(rows), self.rule.modulus, self.rule.bot_as_zero)
        return PatternSpec(self.w + dw, self.h + dh, self.alphabet, rule, self.boundary, self.name)


class PatternOracle:
    """Direct evaluation of ``P(x, y)``, memoized over a growing rectangle.

    Cells are filled row by row, left to right, which respects the window's
    dependencies. Internally labels are stored as alphabet indices, -1 for
    unfilled.
    """

    def __init__(self, spec: PatternSpec):
        self.spec = spec
        self._index = {lab: i for i, lab in enumerate(spec.alphabet)}
        self._cells = np.full((0, 0), -1, dtype=np.int32)  # [y, x]

    def _grow(self, nx: int, ny: int) -> None:
        oy, ox = self._cells.shape
        if nx <= ox and ny <= oy:
            return
        nx, ny = max(nx, ox, 1), max(ny, oy, 1)
        # grow geometrically so repeated probes stay cheap
        if nx > ox:
            nx = max(nx, 2 * ox)
        if ny > oy:
            ny = max(ny, 2 * oy)
        cells = np.full((ny, nx), -1, dtype=np.int32)
        cells[:oy, :ox] = self._cells
        self._cells = cells
        for y in range(ny):
            for x in range(ox if y < oy else 0, nx):
                cells[y, x] = self._index[self._compute(x, y)]

    def _get(self, x: int, y: int) -> Any:
        if x < 0 or y < 0:
            return BOT
        return self.spec.alphabet[self._cells[y, x]]

    def _compute(self, x: int, y: int) -> Any:
        spec = self.spec
        if spec.boundary is not None and (x == 0 or y == 0):
            return spec.boundary.value(x, y)
        return spec.rule(self.window(x, y))

    def window(self, x: int, y: int) -> tuple:
        """Flattened rule input at ``(x, y)``; the cells it reads must be filled."""
        w, h = self.spec.w, self.spec.h
        vals = []
        for yy in range(y - h + 1, y + 1):
            for xx in range(x - w + 1, x + 1):
                if yy == y and xx == x:
                    break
                vals.append(self._get(xx, yy))
        return tuple(vals)

    def evaluate(self, x: int, y: int) -> Any:
        if x < 0 or y < 0:
            return BOT
        self._grow(x + 1, y + 1)
        return self._get(x, y)

    __call__ = evaluate

    def row(self, n: int, x: int, y: int) -> tuple:
        if n < 1:
            raise PatternError("row length must be positive")
        return tuple(self.evaluate(xx, y) for xx in range(x - n + 1, x + 1))

    def col(self, n: int, x: int, y: int) -> tuple:
        if n < 1:
            raise PatternError("column length must be positive")
        return tuple(self.evaluate(x, yy) for yy in range(y - n + 1, y + 1))

    def block(self, w: int, h: int, x: int, y: int) -> tuple:
        """Rows of the ``w`` x ``h`` rectangle with upper-right corner ``(x, y)``, bottom row first."""
        if w < 1 or h < 1:
            raise PatternError("block dimensions must be positive")
        return tuple(self.row(w, x, yy) for yy in range(y - h + 1, y + 1))

    def region(self, nx: int, ny: int) -> np.ndarray:
        """Labels on ``[0, nx) x [0, ny)`` as an object array indexed ``[y, x]``."""
        self._grow(nx, ny)
        out = np.empty((ny, nx), dtype=object)
        alphabet = self.spec.alphabet
        idx = self._cells[:ny, :nx]
        for y in range(ny):
            for x in range(nx):
                out[y, x] = alphabet[idx[y, x]]
        return out


# -- built-in patterns --------------------------------------------------------

BUILTIN_NAMES = ("S", "C", "W")


def builtin(name: str) -> PatternSpec:
    """The three test patterns: Sierpinski triangle, Sierpinski carpet, W."""
    if name == "S":
        rule = AffineModRule(((1, None), (0, 1)), 2)
        return PatternSpec(2, 2, (0, 1), rule, Boundary((1,), (1,)), "S")
    if name == "C":
        rule = AffineModRule(((1, None), (1, 1)), 3)
        return PatternSpec(2, 2, (0, 1, 2), rule, Boundary((1,), (1,)), "C")
    if name == "W":
        rule = AffineModRule(((1, 0, None), (0, 1, 0), (1, 0, 1)), 2)
        return PatternSpec(3, 3, (0, 1), rule, Boundary((1, 0), (1, 0)), "W")
    raise PatternError(f"unknown builtin pattern {name!r}; choose one of {', '.join(BUILTIN_NAMES)}")


# -- file format --------------------------------------------------------------

def spec_to_dict(spec: PatternSpec) -> dict:
    rule = spec.rule
    if isinstance(rule, AffineModRule):
        rd: dict = {
            "type": "affine_mod",
            "coeffs": [list(r) for r in rule.coeffs],
            "modulus": rule.modulus,
            "bot_as_zero": rule.bot_as_zero,
        }
    else:
        rd = {
            "type": "table",
            "entries": {serialize(k): v for k, v in sorted(rule.entries.items(), key=lambda kv: serialize(kv[0]))},
        }
    out: dict = {"name": spec.name, "w": spec.w, "h": spec.h, "alphabet": list(spec.alphabet), "rule": rd}
    if spec.boundary is not None:
        out["boundary"] = {"x_axis": list(spec.boundary.x_axis), "y_axis": list(spec.boundary.y_axis)}
    return out


def spec_from_dict(d: Mapping) -> PatternSpec:
    try:
        w, h = int(d["w"]), int(d["h"])
        alphabet = tuple(d["alphabet"])
        rd = d["rule"]
        kind = rd["type"]
    except KeyError as exc:
        raise PatternError(f"pattern file missing field {exc.args[0]!r}") from None
    if kind == "affine_mod":
        coeffs = tuple(tuple(c for c in row) for row in rd["coeffs"])
        rule: AffineModRule | TableRule = AffineModRule(coeffs, int(rd["modulus"]), bool(rd.get("bot_as_zero", True)))
    elif kind == "table":
        entries = {deserialize(k): v for k, v in rd["entries"].items()}
        for k in entries:
            if not isinstance(k, tuple) or len(k) != w * h - 1:
                raise PatternError(f"table entry {serialize(k)} has the wrong arity")
        rule = TableRule(entries)
    else:
        raise PatternError(f"unknown rule type {kind!r}")
    boundary = None
    if "boundary" in d and d["boundary"] is not None:
        boundary = Boundary(tuple(d["boundary"]["x_axis"]), tuple(d["boundary"]["y_axis"]))
    return PatternSpec(w, h, alphabet, rule, boundary, str(d.get("name", "custom")))


def load_spec(source: str | Path) -> PatternSpec:
    """A built-in name, or a path to a JSON pattern file."""
    if str(source) in BUILTIN_NAMES:
        return builtin(str(source))
    path = Path(source)
    if not path.exists():
        raise PatternError(f"unknown pattern {source!r}: not a builtin name and no such file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PatternError(f"{path}: invalid JSON ({exc})") from None
    return spec_from_dict(data)


def dump_spec(spec: PatternSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")

