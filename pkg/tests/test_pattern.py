import json
from functools import lru_cache
from math import comb

import numpy as np
import pytest

from patterntas.pattern import (
    AffineModRule,
    Boundary,
    MissingRuleInput,
    PatternError,
    PatternOracle,
    PatternSpec,
    TableRule,
    builtin,
    dump_spec,
    load_spec,
    spec_from_dict,
    spec_to_dict,
)
from patterntas.tuples import BOT


def naive(name):
    """Direct recursion written from the pattern definitions, no shared code."""
    if name == "S":
        @lru_cache(maxsize=None)
        def p(x, y):
            if x == 0 or y == 0:
                return 1
            return (p(x - 1, y) + p(x, y - 1)) % 2
    elif name == "C":
        @lru_cache(maxsize=None)
        def p(x, y):
            if x == 0 or y == 0:
                return 1
            return (p(x - 1, y) + p(x, y - 1) + p(x - 1, y - 1)) % 3
    else:
        @lru_cache(maxsize=None)
        def p(x, y):
            if x < 0 or y < 0:
                return 0
            if y == 0:
                return 1 - x % 2
            if x == 0:
                return 1 - y % 2
            return (p(x - 2, y) + p(x - 1, y - 1) + p(x - 2, y - 2) + p(x, y - 2)) % 2
    return p


def test_paper_values():
    s = PatternOracle(builtin("S"))
    assert s(1, 1) == 0
    assert s(2, 2) == 0
    assert s(-1, 0) is BOT
    assert PatternOracle(builtin("C"))(1, 1) == 0
    assert PatternOracle(builtin("C"))(0, 5) == 1
    assert PatternOracle(builtin("W"))(1, 0) == 0


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_against_naive_recursion(name):
    got = PatternOracle(builtin(name)).region(48, 48)
    p = naive(name)
    want = np.array([[p(x, y) for x in range(48)] for y in range(48)], dtype=object)
    assert (got == want).all()


def test_sierpinski_is_pascal_mod_two():
    got = PatternOracle(builtin("S")).region(64, 64)
    assert all(got[y, x] == comb(x + y, x) % 2 for y in range(64) for x in range(64))


def test_extractors():
    s = PatternOracle(builtin("S"))
    assert s.row(1, 0, 1) == (1,)
    assert s.row(2, -5, -5) == (BOT, BOT)
    assert s.row(2, 1, 0) == (1, 1)
    assert s.block(2, 1, 1, 0) == ((1, 1),)
    assert s.block(2, 1, -1, -1) == ((BOT, BOT),)
    assert s.block(2, 1, 1, 1) == ((1, 0),)
    assert s.col(1, 0, 3) == (1,)
    assert s.col(1, 0, -1) == (BOT,)
    assert s.col(2, 1, 1) == (1, 0)
    with pytest.raises(PatternError):
        s.row(0, 1, 1)


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_window_locality(name):
    spec = builtin(name)
    o = PatternOracle(spec)
    for y in range(64):
        for x in range(64):
            if x == 0 or y == 0:
                assert o(x, y) == spec.boundary.value(x, y)
            else:
                assert o(x, y) == spec.rule(o.window(x, y))


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_widened_window_same_pattern(name):
    spec = builtin(name)
    base = PatternOracle(spec).region(32, 32)
    for dw, dh in ((1, 0), (0, 1)):
        assert (PatternOracle(spec.widened(dw, dh)).region(32, 32) == base).all()


def test_two_oracles_agree():
    a, b = PatternOracle(builtin("W")), PatternOracle(builtin("W"))
    assert a(40, 3) == b(40, 3)
    assert (a.region(20, 20) == b.region(20, 20)).all()


def test_affine_coefficients_top_row_first():
    rule = AffineModRule(((1, None), (0, 1)), 2)
    # window order: bottom row left to right, then the top row without its last cell
    assert rule.flat_coeffs() == (0, 1, 1)
    assert rule((1, 0, 1)) == 1
    assert rule((BOT, BOT, 1)) == 1
    with pytest.raises(MissingRuleInput):
        AffineModRule(((1, None), (0, 1)), 2, bot_as_zero=False)((BOT, 1, 1))


def test_validation():
    rule = AffineModRule(((1, None), (0, 1)), 2)
    with pytest.raises(PatternError):
        PatternSpec(1, 2, (0, 1), rule)
    with pytest.raises(PatternError):
        PatternSpec(2, 2, (0, 1, 2), rule)
    with pytest.raises(PatternError):
        PatternSpec(2, 2, (0, 1), AffineModRule(((1, 1), (0, 1)), 2))
    with pytest.raises(PatternError):
        PatternSpec(2, 2, (0, 1), rule, Boundary((1,), (0,)))
    with pytest.raises(PatternError):
        builtin("Q")


def test_table_rule():
    entries = {}
    for a in (BOT, 0, 1):
        for b in (BOT, 0, 1):
            for c in (BOT, 0, 1):
                entries[(a, b, c)] = 1 if (a, b, c).count(1) % 2 else 0
    spec = PatternSpec(2, 2, (0, 1), TableRule(entries))
    o = PatternOracle(spec)
    assert o(0, 0) == 0
    with pytest.raises(MissingRuleInput):
        TableRule({})((0, 0, 0))
    back = spec_from_dict(json.loads(json.dumps(spec_to_dict(spec))))
    assert (PatternOracle(back).region(10, 10) == o.region(10, 10)).all()


@pytest.mark.parametrize("name", ["S", "C", "W"])
def test_file_round_trip(tmp_path, name):
    path = tmp_path / f"{name}.json"
    dump_spec(builtin(name), path)
    assert load_spec(path) == builtin(name)
    assert load_spec(name) == builtin(name)


def test_file_errors(tmp_path):
    with pytest.raises(PatternError, match="nope"):
        load_spec("nope")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(PatternError, match="bad.json"):
        load_spec(bad)
    bad.write_text(json.dumps({"w": 2, "h": 2, "alphabet": [0, 1]}))
    with pytest.raises(PatternError, match="rule"):
        load_spec(bad)
