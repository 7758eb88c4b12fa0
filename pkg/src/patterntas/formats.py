"""Xgrow tile files, PPM images and verification reports."""

from __future__ import annotations

import colorsys
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .tileset import SIDES, TileSystem, glue_index
from .tuples import display

__all__ = [
    "export_xgrow",
    "RenderPalette",
    "default_palette",
    "render_ppm",
    "read_ppm",
    "write_report",
]


def export_xgrow(ts: TileSystem) -> str:
    """Classic Xgrow block format; bond 0 is the null bond."""
    index = glue_index(ts)
    strengths: dict[int, int] = {}
    for g, i in index.items():
        if i:
            strengths[i] = g.strength
    nbond = len(strengths)
    lines = [
        f"% {ts.provenance} tile set, {ts.mode} mode, window {ts.window[0]}x{ts.window[1]}",
        f"num tile types={len(ts.tiles)}",
        f"num binding types={nbond}",
        "tile edges={",
    ]
    for t in ts.tiles:
        bonds = " ".join(str(index[t.glue(s)]) for s in SIDES)
        mark = " seed" if t.id == ts.seed_id else ""
        lines.append(f"{{{bonds}}}  % label={display(t.label)} id={t.id}{mark}")
    lines.append("}")
    lines.append("binding strengths={" + " ".join(str(strengths[i]) for i in range(1, nbond + 1)) + "}")
    return "\n".join(lines) + "\n"


_PPM_HEADER = re.compile(rb"P6\s+(\d+)\s+(\d+)\s+(\d+)\s")


# -- images -------------------------------------------------------------------

@dataclass(frozen=True)
class RenderPalette:
    colors: Mapping[Any, tuple[int, int, int]]
    background: tuple[int, int, int] = (0, 0, 0)
    overlay: tuple[int, int, int] = (255, 0, 0)

    def __post_init__(self) -> None:
        used = set(self.colors.values())
        if self.overlay in used or self.overlay == self.background:
            raise ValueError("overlay color must be reserved")

    def rgb(self, label: Any) -> tuple[int, int, int]:
        if label is None:
            return self.background
        try:
            return self.colors[label]
        except KeyError:
            raise ValueError(f"palette has no color for label {label!r}") from None


def default_palette(alphabet: Iterable[Any]) -> RenderPalette:
    """White for the first label; grey for a two-letter alphabet, else evenly spaced hues."""
    labels = list(alphabet)
    colors: dict[Any, tuple[int, int, int]] = {}
    if labels:
        colors[labels[0]] = (255, 255, 255)
    rest = labels[1:]
    if len(rest) == 1:
        colors[rest[0]] = (96, 96, 96)
    else:
        for i, lab in enumerate(rest):
            r, g, b = colorsys.hsv_to_rgb(0.15 + 0.8 * i / max(len(rest), 1), 0.55, 0.85)
            colors[lab] = (int(r * 255), int(g * 255), int(b * 255))
    return RenderPalette(colors)


def render_ppm(
    grid: np.ndarray,
    palette: RenderPalette,
    cell_px: int = 1,
    mismatches: tuple[np.ndarray, np.ndarray] | None = None,
) -> bytes:
    """Binary PPM of a label grid indexed ``[y, x]``; row 0 ends up at the bottom.

    Mismatched edges (``(horizontal, vertical)`` flags as produced by
    ``Assembly.mismatches``) are drawn in the overlay color on the west or
    south side of the later cell.
    """
    if cell_px < 1:
        raise ValueError("cell_px must be at least 1")
    ny, nx = grid.shape
    rgb = np.empty((ny, nx, 3), dtype=np.uint8)
    for (y, x), lab in np.ndenumerate(grid):
        rgb[y, x] = palette.rgb(lab)
    img = np.repeat(np.repeat(rgb, cell_px, axis=0), cell_px, axis=1)
    if mismatches is not None:
        hz, vt = mismatches
        for y, x in zip(*np.nonzero(hz)):
            img[y * cell_px:(y + 1) * cell_px, x * cell_px] = palette.overlay
        for y, x in zip(*np.nonzero(vt)):
            img[y * cell_px, x * cell_px:(x + 1) * cell_px] = palette.overlay
    img = img[::-1]
    header = f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img).tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Pixel array ``[row, col, rgb]`` (top row first) of a P6 image."""
    m = _PPM_HEADER.match(data)
    if m is None or int(m.group(3)) != 255:
        raise ValueError("not an 8-bit P6 image")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=m.end()).reshape(h, w, 3)


# -- reports ------------------------------------------------------------------

def write_report(checks: list[dict], path: str | Path | None) -> str:
    report = {"passed": all(c.get("passed", False) for c in checks), "checks": checks}
    text = json.dumps(report, indent=2, default=str) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
