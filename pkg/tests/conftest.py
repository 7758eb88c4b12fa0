import pytest

from patterntas.pattern import builtin
from patterntas.tileset import construct_er, construct_kl


@pytest.fixture(scope="session")
def systems():
    """``systems[name, kind]`` for name in S, C, W and kind in T (construction 1), R (construction 2)."""
    out = {}
    for name in "SCW":
        t = construct_kl(builtin(name))
        out[name, "T"] = t
        out[name, "R"] = construct_er(t)
    return out


@pytest.fixture(scope="session")
def exhaustive():
    out = {}
    for name in "SCW":
        t = construct_kl(builtin(name), mode="exhaustive")
        out[name, "T"] = t
        out[name, "R"] = construct_er(t)
    return out
