import json

import pytest

from patterntas.pattern import AffineModRule, PatternSpec, builtin
from patterntas.tileset import (
    ER,
    KL,
    ConstructionError,
    Glue,
    TileSystem,
    TileType,
    construct_er,
    construct_kl,
    emit_tileset,
    glue_index,
    load_tileset,
    pattern_of,
    tileset_from_dict,
)
from patterntas.tuples import BOT, concat, deep_shift_insert, shift_insert, wedge

# reachable-closure counts, frozen from the first green run
REACHABLE = {"S": 11, "C": 26, "W": 46}
EXHAUSTIVE = {"S": 17, "C": 43, "W": 697}


def kinds(ts):
    seed = [t for t in ts if t.id == ts.seed_id]
    vertical = [t for t in ts.boundary if t.id != ts.seed_id and t.N.strength == 2]
    horizontal = [t for t in ts.boundary if t.id != ts.seed_id and t.E.strength == 2]
    return len(ts.interior), len(vertical), len(horizontal), len(seed)


def test_sierpinski_counts(systems):
    assert len(systems["S", "T"]) == 11
    assert kinds(systems["S", "T"]) == (8, 1, 1, 1)


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_counts(systems, exhaustive, name):
    assert len(systems[name, "T"]) == len(systems[name, "R"]) == REACHABLE[name]
    assert len(exhaustive[name, "T"]) == len(exhaustive[name, "R"]) == EXHAUSTIVE[name]
    spec = builtin(name)
    bound = (len(spec.alphabet) + 1) ** (spec.w * spec.h - 1)
    assert REACHABLE[name] <= EXHAUSTIVE[name] <= bound


def test_first_interior_tile(systems):
    ts = systems["S", "T"]
    hits = [t for t in ts if t.W.color == (0,) and t.S.color == ((1, 0),)]
    assert len(hits) == 1
    t = hits[0]
    assert t.label == 0 and t.E.color == (0,) and t.N.color == ((0, 0),)
    assert t.is_interior


def test_error_resilient_seed(systems):
    seed = systems["S", "R"].seed
    assert seed.W.color == seed.S.color == (((BOT,),), (BOT,))
    assert seed.N.color == seed.E.color == (((BOT,),), (1,))
    assert (seed.N.strength, seed.E.strength, seed.S.strength, seed.W.strength) == (2, 2, 0, 0)


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_construction_one_identities(systems, name):
    for t in systems[name, "T"]:
        assert t.E.color == shift_insert(t.W.color, t.label)
        assert t.N.color == shift_insert(t.S.color, concat(t.W.color, (t.label,)))


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_construction_two_identities(systems, name):
    for r in systems[name, "R"]:
        (wb, wr), (sb, sc), (eb, er), (nb, nc) = r.W.color, r.S.color, r.E.color, r.N.color
        assert wb == sb
        assert eb == deep_shift_insert(sb, sc)
        assert nb == shift_insert(wb, wr)
        assert nc == shift_insert(sc, r.label)
        assert er == shift_insert(wr, r.label)


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_construction_two_is_injective(systems, name):
    keys = {(r.label, wedge(r.S.color[0], r.S.color[1]), r.W.color[1]) for r in systems[name, "R"]}
    assert len(keys) == len(systems[name, "R"])
    src = {(t.label, t.S.color, t.W.color) for t in systems[name, "T"]}
    assert keys == src


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_reachable_subset_of_exhaustive(systems, exhaustive, name):
    assert {t.id for t in systems[name, "T"]} <= {t.id for t in exhaustive[name, "T"]}


def test_partial_rule_in_exhaustive_mode():
    rule = AffineModRule(((1, None), (0, 1)), 2, bot_as_zero=False)
    spec = PatternSpec(2, 2, (0, 1), rule, builtin("S").boundary)
    assert len(construct_kl(spec)) == 11
    with pytest.raises(ConstructionError, match="rule value for input"):
        construct_kl(spec, mode="exhaustive")


def test_transform_requires_construction_one(systems):
    with pytest.raises(ConstructionError):
        construct_er(systems["S", "R"])


def test_glue_index():
    a = Glue((1,), 1)
    b = Glue((1,), 2)
    z = Glue((0,), 0)
    seed = TileType.make(1, {"N": b, "E": b, "S": z, "W": z})
    ts = TileSystem((seed,), seed.id, (0, 1), (2, 2), KL, "reachable")
    assert glue_index(ts) == {b: 1, z: 0}
    t = TileType.make(0, {"N": a, "E": a, "S": a, "W": a})
    ts2 = TileSystem(tuple(sorted((seed, t), key=lambda x: x.id)), seed.id, (0, 1), (2, 2), KL, "reachable")
    idx = glue_index(ts2)
    assert idx[a] != idx[b] and idx[a] > 0 and idx[b] > 0


def test_tile_validation():
    with pytest.raises(ConstructionError):
        TileType.make(0, {"N": Glue((1,), 3), "E": Glue((1,), 1), "S": Glue((1,), 1), "W": Glue((1,), 1)})
    t = TileType.make(0, {s: Glue((1,), 1) for s in "NESW"})
    with pytest.raises(ConstructionError, match="seed"):
        TileSystem((t,), t.id, (0,), (2, 2), KL, "reachable")


@pytest.mark.parametrize("name", ["S", "C", "W"])
@pytest.mark.parametrize("kind", ["T", "R"])
def test_json_round_trip(systems, name, kind, tmp_path):
    ts = systems[name, kind]
    text = emit_tileset(ts)
    back = tileset_from_dict(json.loads(text))
    assert back == ts
    assert emit_tileset(back) == text
    assert pattern_of(back) == builtin(name)
    path = tmp_path / "t.json"
    path.write_text(text)
    assert load_tileset(path) == ts


def test_json_errors(systems, tmp_path):
    d = json.loads(emit_tileset(systems["S", "T"]))
    path = tmp_path / "bad.json"
    del d["tiles"][3]["glues"]["E"]
    path.write_text(json.dumps(d))
    with pytest.raises(ConstructionError, match=r"bad\.json: tiles\[3\]\.glues missing 'E'"):
        load_tileset(path)
    d = json.loads(emit_tileset(systems["S", "T"]))
    d["tiles"][0]["id"] = "t000000000000"
    path.write_text(json.dumps(d))
    with pytest.raises(ConstructionError, match="does not match"):
        load_tileset(path)
    d = json.loads(emit_tileset(systems["S", "T"]))
    del d["seed_id"]
    path.write_text(json.dumps(d))
    with pytest.raises(ConstructionError, match="seed_id"):
        load_tileset(path)
    path.write_text("not json")
    with pytest.raises(ConstructionError, match="invalid JSON"):
        load_tileset(path)


def test_provenance_recorded(systems):
    assert systems["S", "T"].provenance == KL
    assert systems["S", "R"].provenance == ER
