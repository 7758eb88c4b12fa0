"""Kinetic tile assembly: exact stochastic simulation on a bounded canvas.

Rates, in units of the forward constant:

* an empty site touching the assembly receives each permitted tile type at
  rate ``exp(-gmc)``;
* a placed tile other than the seed leaves at rate ``exp(-b * gse)`` where
  ``b`` is the summed strength of its matching sides.

Events are drawn by rate class, then uniformly within the class.
"""

from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numba as nb
import numpy as np

from .atam import Assembly, glue_tables, mismatch_flags
from .tileset import TileSystem

__all__ = [
    "SimParams",
    "SimOutcome",
    "SweepResult",
    "simulate",
    "largest_clean_rectangle",
    "largest_error_free_aggregate",
    "sweep",
    "medians",
    "write_csv",
    "CSV_COLUMNS",
    "default_gmc",
    "derive_seed",
]

GMC_OFFSET = 0.1
CSV_COLUMNS = ("gse", "gmc", "run", "seed", "N", "tiles_placed", "mismatch_edges", "events", "flag")


def default_gmc(gse: float) -> float:
    """Monomer free energy just below twice the bond energy."""
    return 2.0 * gse - GMC_OFFSET


@dataclass(frozen=True)
class SimParams:
    gse: float
    gmc: float | None = None
    width: int = 128
    height: int = 128
    stop_fraction: float = 0.75
    max_events: int = 200_000_000
    two_stage: bool = False
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("target must be at least 1x1")
        if not 0.0 <= self.stop_fraction <= 1.0:
            raise ValueError("stop_fraction must lie in [0, 1]")
        if self.max_events < 0:
            raise ValueError("max_events must be non-negative")

    @property
    def effective_gmc(self) -> float:
        return default_gmc(self.gse) if self.gmc is None else float(self.gmc)


@dataclass
class SimOutcome:
    params: SimParams
    assembly: Assembly
    N: int
    tiles_placed: int
    mismatch_edges: int
    events: int
    time: float
    flag: str = ""
    frozen_detachments: int = 0
    phase_switch_event: int = -1

    def same_as(self, other: "SimOutcome") -> bool:
        return (
            self.params == other.params
            and np.array_equal(self.assembly.grid, other.assembly.grid)
            and (self.N, self.events, self.time, self.flag) == (other.N, other.events, other.time, other.flag)
        )


# -- kernel -------------------------------------------------------------------

_DX = np.array([0, 1, 0, -1], dtype=np.int64)
_DY = np.array([1, 0, -1, 0], dtype=np.int64)
_OPP = np.array([2, 3, 0, 1], dtype=np.int64)


# Every site rate is one of a few values, so sites are kept in per-class
# lists: class 0 contributes nothing, class 1 is an empty site touching the
# assembly, class 2 + b a detachable tile with matched strength b.
_NCLASS = 2 + 9


@nb.njit(cache=True, nogil=True)
def _move(members, count, pos, cls, i, c):
    old = cls[i]
    if old == c:
        return
    if old > 0:
        k = pos[i]
        last = members[old, count[old] - 1]
        members[old, k] = last
        pos[last] = k
        count[old] -= 1
    if c > 0:
        members[c, count[c]] = i
        pos[i] = count[c]
        count[c] += 1
    cls[i] = c


@nb.njit(cache=True, nogil=True)
def _class_of(grid, bond, nocc, x, y, axes_fixed):
    if grid[y, x] >= 0:
        if (x == 0 and y == 0) or (axes_fixed and (x == 0 or y == 0)):
            return 0  # the seed (and, in a two-stage run's second stage, the axes) stay put
        return 2 + bond[y, x]
    return 1 if nocc[y, x] > 0 else 0


@nb.njit(cache=True, nogil=True)
def _run(grid, gid, st, allowed1, allowed2, two_stage, gse, gmc, stop_count, max_events, seed):
    np.random.seed(seed)
    hgt, wid = grid.shape
    ncell = hgt * wid
    rates = np.zeros(_NCLASS)
    for b in range(9):
        rates[2 + b] = np.exp(-b * gse)
    phase = 1 if two_stage else 2
    ntypes = len(allowed1) if two_stage else len(allowed2)
    rates[1] = ntypes * np.exp(-gmc)

    # narrow dtypes keep the working set small
    bond = np.zeros((hgt, wid), dtype=np.int8)
    nmatch = np.zeros((hgt, wid), dtype=np.int8)
    nocc = np.zeros((hgt, wid), dtype=np.int8)
    members = np.zeros((_NCLASS, ncell), dtype=np.int32)
    count = np.zeros(_NCLASS, dtype=np.int64)
    pos = np.zeros(ncell, dtype=np.int32)
    cls = np.zeros(ncell, dtype=np.int8)
    placed = 0
    for y in range(hgt):
        for x in range(wid):
            if grid[y, x] >= 0:
                placed += 1
                k = grid[y, x]
                for d in range(4):
                    xx = x + _DX[d]
                    yy = y + _DY[d]
                    if xx < 0 or yy < 0 or xx >= wid or yy >= hgt:
                        continue
                    nocc[yy, xx] += 1
                    j = grid[yy, xx]
                    if j >= 0 and st[k, d] > 0 and gid[k, d] == gid[j, _OPP[d]]:
                        bond[y, x] += st[k, d]
                        nmatch[y, x] += 1
    for y in range(hgt):
        for x in range(wid):
            _move(members, count, pos, cls, y * wid + x, _class_of(grid, bond, nocc, x, y, False))

    boundary_left = 0
    if two_stage:
        for x in range(wid):
            if grid[0, x] < 0:
                boundary_left += 1
        for y in range(1, hgt):
            if grid[y, 0] < 0:
                boundary_left += 1
    switch_at = -1
    events = 0
    t = 0.0
    frozen = 0
    # 0 done, 1 incomplete, 2 stalled
    status = 0
    while placed < stop_count:
        if two_stage and phase == 1 and boundary_left == 0:
            phase = 2
            switch_at = events
            ntypes = len(allowed2)
            rates[1] = ntypes * np.exp(-gmc)
            for x in range(wid):
                _move(members, count, pos, cls, x, _class_of(grid, bond, nocc, x, 0, True))
            for y in range(1, hgt):
                _move(members, count, pos, cls, y * wid, _class_of(grid, bond, nocc, 0, y, True))
        if events >= max_events:
            status = 1
            break
        total = 0.0
        for c in range(1, _NCLASS):
            total += count[c] * rates[c]
        if not total > 0.0:
            status = 2
            break
        t += -np.log(1.0 - np.random.random()) / total
        u = np.random.random() * total
        c = 1
        while c < _NCLASS - 1:
            part = count[c] * rates[c]
            if u < part:
                break
            u -= part
            c += 1
        while count[c] == 0:
            c -= 1
        k = int(u / rates[c])
        if k >= count[c]:
            k = count[c] - 1
        i = members[c, k]
        x = i % wid
        y = i // wid
        on_axis = x == 0 or y == 0
        sign = 1
        if grid[y, x] >= 0:
            if nmatch[y, x] == 4 and bond[y, x] * gse >= gmc + 10.0:
                frozen += 1
            sign = -1
            k = grid[y, x]
            placed -= 1
            if two_stage and on_axis:
                boundary_left += 1
        else:
            r = np.random.randint(0, ntypes)
            k = allowed1[r] if phase == 1 else allowed2[r]
            grid[y, x] = k
            placed += 1
            if two_stage and on_axis:
                boundary_left -= 1
        events += 1
        # the hot path is written out by hand: helper calls cost refcount traffic
        for d in range(5):
            if d < 4:
                xx = x + _DX[d]
                yy = y + _DY[d]
                if xx < 0 or yy < 0 or xx >= wid or yy >= hgt:
                    continue
                nocc[yy, xx] += sign
                j = grid[yy, xx]
                if j >= 0 and st[k, d] > 0 and gid[k, d] == gid[j, _OPP[d]]:
                    sv = st[k, d]
                    bond[yy, xx] += sign * sv
                    nmatch[yy, xx] += sign
                    bond[y, x] += sign * sv
                    nmatch[y, x] += sign
                j = grid[yy, xx]
            else:
                xx = x
                yy = y
                if sign < 0:
                    grid[y, x] = -1
                j = grid[y, x]
            if j >= 0:
                fixed = (xx == 0 and yy == 0) or (phase == 2 and two_stage and (xx == 0 or yy == 0))
                c = 0 if fixed else 2 + bond[yy, xx]
            else:
                c = 1 if nocc[yy, xx] > 0 else 0
            ii = yy * wid + xx
            old = cls[ii]
            if old == c:
                continue
            if old > 0:
                kk = pos[ii]
                last = members[old, count[old] - 1]
                members[old, kk] = last
                pos[last] = kk
                count[old] -= 1
            if c > 0:
                members[c, count[c]] = ii
                pos[ii] = count[c]
                count[c] += 1
            cls[ii] = c
    return events, t, status, frozen, switch_at, bond, nmatch, nocc, count


# -- measurement --------------------------------------------------------------

def largest_clean_rectangle(occupied: np.ndarray, hz: np.ndarray, vt: np.ndarray) -> int:
    """Largest ``m * n`` with ``[0, m) x [0, n)`` fully occupied and free of mismatches.

    ``hz[y, x]`` flags the edge between ``(x-1, y)`` and ``(x, y)``,
    ``vt[y, x]`` the one between ``(x, y-1)`` and ``(x, y)``.
    """
    ny, nx = occupied.shape
    ok = occupied.copy()
    ok[:, 1:] &= ~hz[:, 1:]
    ok[1:, :] &= ~vt[1:, :]
    best, run_min = 0, nx
    for y in range(ny):
        bad = np.flatnonzero(~ok[y])
        width = int(bad[0]) if len(bad) else nx
        run_min = min(run_min, width)
        if run_min == 0:
            break
        best = max(best, run_min * (y + 1))
    return best


def largest_error_free_aggregate(a: Assembly) -> int:
    """Area of the largest mismatch-free rectangle anchored at the origin."""
    hz, vt = a.mismatches()
    return largest_clean_rectangle(a.grid >= 0, hz, vt)


# -- drivers ------------------------------------------------------------------

def _type_sets(ts: TileSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    everything = np.arange(len(ts.tiles), dtype=np.int32)
    boundary = np.array([i for i, t in enumerate(ts.tiles) if not t.is_interior], dtype=np.int32)
    interior = np.array([i for i, t in enumerate(ts.tiles) if t.is_interior], dtype=np.int32)
    return boundary, interior, everything


def simulate(ts: TileSystem, p: SimParams) -> SimOutcome:
    """Grow from the seed until ``stop_fraction`` of the target is covered.

    With ``two_stage`` only boundary tile types may attach until the bottom
    row and left column are full; from then on only interior types attach
    and the completed axes are held in place like the seed.
    """
    a = Assembly.seeded(ts, p.width, p.height)
    tables = glue_tables(ts)
    gid = np.ascontiguousarray(tables.gid, dtype=np.int64)
    st = np.ascontiguousarray(tables.strength, dtype=np.int64)
    boundary, interior, everything = _type_sets(ts)
    if p.two_stage:
        first, second = boundary, interior
    else:
        first, second = everything, everything
    if len(first) == 0 or len(second) == 0:
        raise ValueError("tile system has no tile types for one of the growth stages")
    stop = int(np.ceil(p.stop_fraction * p.width * p.height))
    events, t, status, frozen, switch_at = _run(
        a.grid, gid, st, first, second, p.two_stage,
        float(p.gse), float(p.effective_gmc), stop, int(p.max_events), int(p.rng_seed) & 0xFFFFFFFF,
    )[:5]
    flag = ("", "incomplete", "stalled")[status]
    hz, vt = mismatch_flags(a.grid, tables.gid)
    return SimOutcome(
        params=p,
        assembly=a,
        N=largest_clean_rectangle(a.grid >= 0, hz, vt),
        tiles_placed=a.tiles_placed,
        mismatch_edges=int(hz.sum() + vt.sum()),
        events=int(events),
        time=float(t),
        flag=flag,
        frozen_detachments=int(frozen),
        phase_switch_event=int(switch_at),
    )


@dataclass(frozen=True)
class SweepResult:
    gse: float
    gmc: float
    run: int
    seed: int
    N: int
    tiles_placed: int
    mismatch_edges: int
    events: int
    flag: str
    frozen_detachments: int = field(default=0, compare=False)


def derive_seed(base: int, gse_index: int, run: int) -> int:
    return int(np.random.SeedSequence([base, gse_index, run]).generate_state(1)[0])


def sweep(
    ts: TileSystem,
    g_se_values: Sequence[float],
    runs: int,
    base: SimParams,
    gmc_override: float | None = None,
    workers: int = 1,
) -> list[SweepResult]:
    """Seeded runs at each bond energy; records are ordered by (gse index, run)."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    jobs = []
    for gi, gse in enumerate(g_se_values):
        gmc = default_gmc(gse) if gmc_override is None else gmc_override
        for r in range(runs):
            jobs.append(replace(base, gse=float(gse), gmc=float(gmc), rng_seed=derive_seed(base.rng_seed, gi, r)))

    def one(job: tuple[int, SimParams]) -> SweepResult:
        r, p = job
        o = simulate(ts, p)
        return SweepResult(p.gse, p.effective_gmc, r, p.rng_seed, o.N, o.tiles_placed,
                           o.mismatch_edges, o.events, o.flag, o.frozen_detachments)

    indexed = [(i % runs, p) for i, p in enumerate(jobs)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, indexed))
    return [one(j) for j in indexed]


def medians(records: Iterable[SweepResult]) -> dict[float, float]:
    """Median ``N`` per bond energy."""
    by: dict[float, list[int]] = {}
    for r in records:
        by.setdefault(r.gse, []).append(r.N)
    return {g: statistics.median(ns) for g, ns in by.items()}


def write_csv(records: Iterable[SweepResult], out: str | Path | TextIO) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for r in records:
        d = asdict(r)
        wr.writerow([f"{d['gse']:.6g}", f"{d['gmc']:.6g}", *(d[c] for c in CSV_COLUMNS[2:])])
    text = buf.getvalue()
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    elif out is not None:
        out.write(text)
    return text
