"""Mechanical checks of the construction's correctness and error-forcing claims.

Neighbourhood naming used throughout, with ``t`` the tile at ``(x, y)``::

    r  s  .
    w  t  q
    u  v  p

``u, v, w`` are the (already matching) tiles below and left of ``t``.  An
initial mismatch on ``t``'s south edge must be followed by one on
``t-q``, ``q-p`` or ``p-v``; one on ``t``'s west edge by one on ``t-s``,
``s-r`` or ``r-w``.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .atam import E, N, S, W, assemble, glue_tables
from .tileset import ER, TileSystem, TileType
from .tuples import TupleError, deep_shift_insert, shift_insert, wedge

__all__ = [
    "VerificationError",
    "LemmaReport",
    "ForcingReport",
    "BijectionReport",
    "SlopeReport",
    "check_lemma_equalities",
    "check_error_forcing",
    "replay_witness",
    "check_bijection",
    "epsilon_slope",
    "POSITIONS",
]

# offsets relative to t
POSITIONS = {
    "u": (-1, -1), "v": (0, -1), "p": (1, -1),
    "w": (-1, 0), "t": (0, 0), "q": (1, 0),
    "r": (-1, 1), "s": (0, 1),
}


class VerificationError(ValueError):
    pass


def _first(c):
    return c[0]


def _second(c):
    return c[1]


# -- glue equalities ----------------------------------------------------------

@dataclass
class LemmaReport:
    triples_checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"check": "lemma2", "passed": self.passed, "triples_checked": self.triples_checked,
                "failures": [dict(f) for f in self.failures[:50]], "failure_count": len(self.failures)}


def _lemma_holds(v: TileType, w: TileType) -> list[int]:
    bad = []
    try:
        if _first(v.N.color) != _first(w.E.color):
            bad.append(1)
        lhs = deep_shift_insert(_first(v.N.color), _second(v.N.color))
        rhs = shift_insert(_first(v.E.color), _second(v.E.color))
        if lhs != rhs:
            bad.append(2)
        lhs = shift_insert(_first(w.E.color), _second(w.E.color))
        rhs = deep_shift_insert(_first(w.N.color), _second(w.N.color))
        if lhs != rhs:
            bad.append(3)
    except (TupleError, TypeError, IndexError):
        return [1, 2, 3]
    return bad


def check_lemma_equalities(ts: TileSystem) -> LemmaReport:
    """Check the three glue equalities on every matching (u, v, w) of interior tiles."""
    if ts.provenance != ER:
        raise VerificationError("lemma equalities apply to error-resilient (construction2) systems only")
    interior = ts.interior
    by_west = defaultdict(list)
    by_south = defaultdict(list)
    for t in interior:
        by_west[t.W].append(t)
        by_south[t.S].append(t)
    rep = LemmaReport()
    for u in interior:
        for v in by_west.get(u.E, ()):
            for w in by_south.get(u.N, ()):
                rep.triples_checked += 1
                bad = _lemma_holds(v, w)
                if bad:
                    rep.failures.append({"u": u.id, "v": v.id, "w": w.id, "equalities": bad})
    return rep


# -- error forcing ------------------------------------------------------------

@dataclass
class ForcingReport:
    system: str
    configurations_checked: int = 0
    completions_checked: int = 0
    violations: list = field(default_factory=list)
    mode: str = "exhaustive"
    note: str = ("completions range over the proof's edge sets only: "
                 "(p, q) for a south-edge mismatch, (r, s) for a west-edge mismatch")

    @property
    def forced_always(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "check": "forcing",
            "system": self.system,
            "mode": self.mode,
            "passed": self.forced_always,
            "forced_always": self.forced_always,
            "configurations_checked": self.configurations_checked,
            "completions_checked": self.completions_checked,
            "violation_count": len(self.violations),
            "witnesses": [
                {**v, "positions": {k: list(POSITIONS[k]) for k in v if k in POSITIONS}}
                for v in self.violations[:20]
            ],
            "note": self.note,
        }


def _system_id(ts: TileSystem) -> str:
    return f"{ts.provenance}/{ts.mode}/{len(ts)}tiles/seed={ts.seed_id}"


def check_error_forcing(
    ts: TileSystem,
    budget: float = 1e9,
    sampled: bool = False,
    samples: int = 10**6,
    seed: int = 0,
    max_witnesses: int = 100,
) -> ForcingReport:
    """Does every lone input mismatch at ``t`` force another one nearby?

    Base configurations are all interior ``(u, v, w, t)`` with ``u-v`` and
    ``u-w`` matching and at least one of ``t-v``, ``t-w`` mismatching.  When
    both mismatch the configuration is forced outright.  Otherwise every
    completion over all tile types is tried (``sampled=True``: ``samples``
    uniform ones per configuration); a completion with no mismatch on the
    three tested edges is a violation.  The budget bounds the edge
    comparisons of the distinct completion searches.
    """
    tables = glue_tables(ts)
    gid = tables.gid
    n = len(ts.tiles)
    interior = np.array([i for i, t in enumerate(ts.tiles) if t.is_interior], dtype=np.int64)
    rep = ForcingReport(_system_id(ts), mode="sampled" if sampled else "exhaustive")
    if len(interior) == 0:
        return rep

    gi = gid[interior]
    # matching (u, v): v.W == u.E ; (u, w): w.S == u.N
    uv = gi[:, None, E] == gi[None, :, W]
    uw = gi[:, None, N] == gi[None, :, S]
    # which (v, t) pairs mismatch on t's south edge, (w, t) on t's west edge
    tv_mm = gi[:, None, N] != gi[None, :, S]   # [v, t]
    tw_mm = gi[:, None, E] != gi[None, :, W]   # [w, t]

    # a completion search depends only on (v, t) or (w, t), so each pair is searched once
    searches = int(np.count_nonzero(tv_mm)) + int(np.count_nonzero(tw_mm))
    work = searches * n * n * 3
    if not sampled and work > budget:
        raise VerificationError(
            f"exhaustive forcing check needs ~{work:.3g} edge comparisons "
            f"(budget {budget:.3g}); rerun in sampled mode"
        )
    rng = np.random.default_rng(seed)

    # q.S == p.N  for all (p, q), and s.W == r.E for all (r, s)
    pq = gid[:, None, N] == gid[None, :, S]
    rs = gid[:, None, E] == gid[None, :, W]
    memo: dict[tuple, tuple | None] = {}

    def case1(v: int, t: int):
        key = (1, v, t)
        if key in memo:
            return memo[key]
        p_ok = gid[:, W] == gid[v, E]
        q_ok = gid[:, W] == gid[t, E]
        found = None
        if sampled:
            ps = rng.integers(0, n, samples)
            qs = rng.integers(0, n, samples)
            hit = p_ok[ps] & q_ok[qs] & pq[ps, qs]
            if hit.any():
                k = int(np.argmax(hit))
                found = (int(ps[k]), int(qs[k]))
        else:
            m = p_ok[:, None] & pq & q_ok[None, :]
            if m.any():
                p, q = np.unravel_index(int(np.argmax(m)), m.shape)
                found = (int(p), int(q))
        memo[key] = found
        return found

    def case2(w: int, t: int):
        key = (2, w, t)
        if key in memo:
            return memo[key]
        r_ok = gid[:, S] == gid[w, N]
        s_ok = gid[:, S] == gid[t, N]
        found = None
        if sampled:
            rr = rng.integers(0, n, samples)
            ss = rng.integers(0, n, samples)
            hit = r_ok[rr] & s_ok[ss] & rs[rr, ss]
            if hit.any():
                k = int(np.argmax(hit))
                found = (int(rr[k]), int(ss[k]))
        else:
            m = r_ok[:, None] & rs & s_ok[None, :]
            if m.any():
                r, s = np.unravel_index(int(np.argmax(m)), m.shape)
                found = (int(r), int(s))
        memo[key] = found
        return found

    per_config = samples if sampled else n * n
    tiles = ts.tiles
    for ui in range(len(interior)):
        u = int(interior[ui])
        for vi in np.flatnonzero(uv[ui]):
            v = int(interior[vi])
            for wi in np.flatnonzero(uw[ui]):
                w = int(interior[wi])
                cand = np.flatnonzero(tv_mm[vi] | tw_mm[wi])
                for ti in cand:
                    t = int(interior[ti])
                    rep.configurations_checked += 1
                    south_bad, west_bad = bool(tv_mm[vi, ti]), bool(tw_mm[wi, ti])
                    if south_bad and west_bad:
                        continue
                    rep.completions_checked += per_config
                    if south_bad:
                        hit = case1(v, t)
                        if hit is not None:
                            rep.violations.append({
                                "case": "south", "u": tiles[u].id, "v": tiles[v].id, "w": tiles[w].id,
                                "t": tiles[t].id, "p": tiles[hit[0]].id, "q": tiles[hit[1]].id})
                    else:
                        hit = case2(w, t)
                        if hit is not None:
                            rep.violations.append({
                                "case": "west", "u": tiles[u].id, "v": tiles[v].id, "w": tiles[w].id,
                                "t": tiles[t].id, "r": tiles[hit[0]].id, "s": tiles[hit[1]].id})
                    if len(rep.violations) >= max_witnesses:
                        return rep
    return rep


def replay_witness(ts: TileSystem, witness: dict) -> int:
    """Place a witness's tiles around ``t`` and count mismatched adjacent pairs."""
    by_id = ts.by_id
    placed = {POSITIONS[k]: by_id[v] for k, v in witness.items() if k in POSITIONS}
    count = 0
    for (x, y), a in placed.items():
        east = placed.get((x + 1, y))
        if east is not None and a.E != east.W:
            count += 1
        north = placed.get((x, y + 1))
        if north is not None and a.N != north.S:
            count += 1
    return count


# -- bijection ----------------------------------------------------------------

@dataclass
class BijectionReport:
    size_t: int
    size_r: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"check": "bijection", "passed": self.passed, "size_t": self.size_t,
                "size_r": self.size_r, "failures": self.failures}


def check_bijection(t_sys: TileSystem, r_sys: TileSystem) -> BijectionReport:
    """Invert each error-resilient tile back to its source tile; the inverse must be 1-1 and onto."""
    rep = BijectionReport(len(t_sys), len(r_sys))
    if len(t_sys) != len(r_sys):
        rep.failures.append(f"|T|={len(t_sys)} but |R|={len(r_sys)}")
    source = {(t.label, t.S.color, t.W.color): t for t in t_sys}
    claimed: dict[str, str] = {}
    for r in r_sys:
        try:
            key = (r.label, wedge(_first(r.S.color), _second(r.S.color)), _second(r.W.color))
        except (TupleError, TypeError, IndexError) as exc:
            rep.failures.append(f"{r.id}: glue colors are not (block, row/col) pairs ({exc})")
            continue
        t = source.get(key)
        if t is None:
            rep.failures.append(f"{r.id}: no source tile with its label, south and west colors")
            continue
        if t.id in claimed:
            rep.failures.append(f"collision: {claimed[t.id]} and {r.id} both invert to {t.id}")
            continue
        claimed[t.id] = r.id
    unclaimed = [t.id for t in t_sys if t.id not in claimed]
    if unclaimed and len(t_sys) == len(r_sys):
        rep.failures.append(f"source tiles with no image: {', '.join(unclaimed)}")
    if Counter(t.label for t in t_sys) != Counter(r.label for r in r_sys):
        rep.failures.append("label multisets differ")
    return rep


# -- error-rate exponent probe ------------------------------------------------

@dataclass
class SlopeReport:
    eps: list
    rates: dict
    events: dict
    slopes: dict
    flags: dict
    trials: int

    @property
    def passed(self) -> bool:
        return not any(self.flags.values())

    def to_dict(self) -> dict:
        return {"check": "slope", "passed": self.passed, "eps": self.eps, "rates": self.rates,
                "events": self.events, "slopes": self.slopes, "flags": self.flags, "trials": self.trials}


class _LocalGrowth:
    """Independent-error growth around one site.

    Each placement waives each input side's match requirement with
    probability ``eps`` and draws uniformly among tiles matching the sides
    still enforced.  If nothing matches, growth can only continue through a
    further surviving mismatch (probability ``eps``, tile drawn among those
    matching at least one input); otherwise the initial error is repaired
    and the trial leaves no trace.
    """

    def __init__(self, ts: TileSystem, correct: np.ndarray):
        tables = glue_tables(ts)
        self.gid = tables.gid
        self.st = tables.strength
        self.correct = correct
        n = len(ts.tiles)
        self.all = np.arange(n)
        self.by_w: dict[int, np.ndarray] = defaultdict(lambda: np.empty(0, dtype=np.int64))
        self.by_s: dict[int, np.ndarray] = defaultdict(lambda: np.empty(0, dtype=np.int64))
        for g in np.unique(self.gid[:, W]):
            self.by_w[int(g)] = np.flatnonzero((self.gid[:, W] == g) & (self.st[:, W] > 0))
        for g in np.unique(self.gid[:, S]):
            self.by_s[int(g)] = np.flatnonzero((self.gid[:, S] == g) & (self.st[:, S] > 0))
        self.by_ws: dict[tuple[int, int], np.ndarray] = {}

    def _both(self, gw: int, gs: int) -> np.ndarray:
        key = (gw, gs)
        c = self.by_ws.get(key)
        if c is None:
            c = np.intersect1d(self.by_w[gw], self.by_s[gs])
            self.by_ws[key] = c
        return c

    def place(self, gw: int, gs: int, waive_w: bool, waive_s: bool, eps: float, rng) -> int:
        """Tile index for a site with west input ``gw`` and south input ``gs``; -1 if repaired."""
        if waive_w and waive_s:
            cands = self.all
        elif waive_w:
            cands = self.by_s[gs]
        elif waive_s:
            cands = self.by_w[gw]
        else:
            cands = self._both(gw, gs)
        if len(cands) == 0:
            if rng.random() >= eps:
                return -1
            cands = np.union1d(self.by_w[gw], self.by_s[gs])
            if len(cands) == 0:
                cands = self.all
        return int(cands[rng.integers(len(cands))])

    def trial(self, x: int, y: int, waive_w: bool, waive_s: bool, eps: float, rng) -> bool:
        """One initial-error trial at ``(x, y)``; True if a mismatch survives."""
        gid, correct = self.gid, self.correct
        local: dict[tuple[int, int], int] = {}

        def at(xx, yy):
            return local.get((xx, yy), correct[yy, xx])

        t = self.place(gid[at(x - 1, y), E], gid[at(x, y - 1), N], waive_w, waive_s, eps, rng)
        if t < 0 or t == correct[y, x]:
            return False
        local[(x, y)] = t
        for xx, yy in ((x + 1, y), (x, y + 1), (x + 1, y + 1)):
            gw, gs = gid[at(xx - 1, yy), E], gid[at(xx, yy - 1), N]
            k = self.place(gw, gs, rng.random() < eps, rng.random() < eps, eps, rng)
            if k < 0:
                return False
            local[(xx, yy)] = k
        mism = 0
        for (xx, yy), k in local.items():
            mism += gid[at(xx - 1, yy), E] != gid[k, W]
            mism += gid[at(xx, yy - 1), N] != gid[k, S]
        return mism > 0


def epsilon_slope(
    ts_pair: Sequence[TileSystem],
    eps_values: Iterable[float],
    region: tuple[int, int] = (96, 96),
    runs: int = 40,
    seed: int = 0,
    names: Sequence[str] = ("T", "R"),
) -> SlopeReport:
    """Fit the exponent of the surviving-error rate against ``eps``.

    For every interior site of ``region`` and every run, a trial draws the
    two input waivers at ``t``; sites without a waiver cannot start an
    error.  The rate is surviving trials per site-run; the slope is the
    least-squares fit of ``log(rate)`` on ``log(eps)``.
    """
    eps_list = [float(e) for e in eps_values]
    nx, ny = region
    rates: dict[str, list] = {}
    events: dict[str, list] = {}
    slopes: dict[str, float | None] = {}
    flags: dict[str, str] = {}
    trials = nx * ny * runs
    for name, ts in zip(names, ts_pair):
        a = assemble(ts, nx + 1, ny + 1)
        growth = _LocalGrowth(ts, a.grid)
        rates[name], events[name] = [], []
        for k, eps in enumerate(eps_list):
            if eps <= 0:
                rates[name].append(0.0)
                events[name].append(0)
                continue
            rng = np.random.default_rng([seed, k, sum(map(ord, name))])
            hits = 0
            for _ in range(runs):
                ww = rng.random((ny, nx)) < eps
                ws = rng.random((ny, nx)) < eps
                for j, i in zip(*np.nonzero(ww | ws)):
                    if growth.trial(int(i) + 1, int(j) + 1, bool(ww[j, i]), bool(ws[j, i]), eps, rng):
                        hits += 1
            events[name].append(hits)
            rates[name].append(hits / trials)
        pts = [(math.log(e), math.log(r)) for e, r in zip(eps_list, rates[name]) if e > 0 and r > 0]
        if len(pts) < 2:
            slopes[name] = None
            if any(e > 0 for e in eps_list):
                flags[name] = "degenerate fit: fewer than two non-zero rates"
            continue
        xs, ys = zip(*pts)
        slopes[name] = float(np.polyfit(xs, ys, 1)[0])
    return SlopeReport(eps_list, rates, events, slopes, flags, trials)
