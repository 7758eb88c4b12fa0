"""Tuple operations used to build glue colors.

Values are plain Python tuples. A leaf is a label (``int`` or ``str``) or
``BOT`` (``None``), the marker for positions outside the pattern's quadrant.
Python tuples are immutable and compare structurally, which is exactly the
glue-color equality the tile systems need.
"""

from __future__ import annotations

import re
from typing import Any, Sequence

BOT = None
BOT_TOKEN = "_"

__all__ = [
    "BOT",
    "BOT_TOKEN",
    "TupleError",
    "concat",
    "flatten",
    "shift_insert",
    "deep_shift_insert",
    "wedge",
    "is_flat",
    "serialize",
    "deserialize",
    "display",
]


class TupleError(ValueError):
    """Raised on arity or nesting violations."""


def is_flat(t: Any) -> bool:
    return isinstance(t, tuple) and not any(isinstance(e, tuple) for e in t)


def _require_flat(t: Any, name: str) -> None:
    if not is_flat(t):
        raise TupleError(f"{name} must be a flat tuple, got {serialize_any(t)}")


def concat(t: tuple, u: tuple) -> tuple:
    """``t . u``: concatenation of two flat tuples."""
    _require_flat(t, "t")
    _require_flat(u, "u")
    return t + u


def flatten(t: tuple) -> tuple:
    """``Pi t``: left-to-right concatenation of a tuple of flat tuples."""
    if not isinstance(t, tuple):
        raise TupleError("flatten expects a tuple of flat tuples")
    out: tuple = ()
    for child in t:
        _require_flat(child, "child")
        out += child
    return out


def shift_insert(t: tuple, *elements: Any) -> tuple:
    """``t <- e <- f ...``: drop the first element, append ``e``; chained left to right."""
    if not isinstance(t, tuple):
        raise TupleError("shift_insert expects a tuple")
    for e in elements:
        if len(t) == 0:
            raise TupleError("shift_insert on an empty tuple")
        t = t[1:] + (e,)
    return t


def deep_shift_insert(t: tuple, *us: tuple) -> tuple:
    """``t |^ u |^ v ...``: shift-insert ``u[i]`` into the i-th inner tuple of ``t``."""
    for u in us:
        if not isinstance(t, tuple) or not isinstance(u, tuple):
            raise TupleError("deep_shift_insert expects tuples")
        if len(t) != len(u):
            raise TupleError(f"deep_shift_insert arity mismatch: {len(t)} vs {len(u)}")
        for ti in t:
            _require_flat(ti, "inner tuple")
        t = tuple(shift_insert(ti, ui) for ti, ui in zip(t, u))
    return t


def wedge(t: tuple, u: tuple) -> tuple:
    """Append ``u[i]`` to the end of the i-th inner tuple of ``t``."""
    if not isinstance(t, tuple) or not isinstance(u, tuple):
        raise TupleError("wedge expects tuples")
    if len(t) != len(u):
        raise TupleError(f"wedge arity mismatch: {len(t)} vs {len(u)}")
    out = []
    for ti, ui in zip(t, u):
        _require_flat(ti, "inner tuple")
        out.append(ti + (ui,))
    return tuple(out)


# -- canonical text form ----------------------------------------------------

def _leaf_text(e: Any) -> str:
    if e is BOT:
        return BOT_TOKEN
    if isinstance(e, bool) or not isinstance(e, (int, str)):
        raise TupleError(f"unsupported leaf {e!r}")
    s = str(e)
    if isinstance(e, str) and (s == BOT_TOKEN or not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", s)):
        raise TupleError(f"label {e!r} cannot be serialized unambiguously")
    return s


def serialize_any(v: Any) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(serialize_any(c) for c in v) + ")"
    return _leaf_text(v)


def serialize(v: Any) -> str:
    """Canonical text: ``(a,b)``, ``((a,b),(c,d))``, ``_`` for the bottom marker.

    Integer labels are written as decimal; string labels must be identifiers.
    """
    return serialize_any(v)


_TOKEN = re.compile(r"\s*(\(|\)|,|[A-Za-z0-9_\-]+)")


def deserialize(text: str) -> Any:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TupleError(f"bad tuple text at offset {pos}: {text!r}")
        tokens.append(m.group(1))
        pos = m.end()
    value, i = _parse(tokens, 0)
    if i != len(tokens):
        raise TupleError(f"trailing tokens in {text!r}")
    return value


def _parse(tokens: Sequence[str], i: int) -> tuple[Any, int]:
    if i >= len(tokens):
        raise TupleError("unexpected end of tuple text")
    tok = tokens[i]
    if tok == "(":
        items = []
        i += 1
        if i < len(tokens) and tokens[i] == ")":
            return (), i + 1
        while True:
            item, i = _parse(tokens, i)
            items.append(item)
            if i >= len(tokens):
                raise TupleError("unterminated tuple")
            if tokens[i] == ",":
                i += 1
                continue
            if tokens[i] == ")":
                return tuple(items), i + 1
            raise TupleError(f"unexpected token {tokens[i]!r}")
    if tok in (")", ","):
        raise TupleError(f"unexpected token {tok!r}")
    if tok == BOT_TOKEN:
        return BOT, i + 1
    if re.fullmatch(r"-?\d+", tok):
        return int(tok), i + 1
    return tok, i + 1


def display(v: Any) -> str:
    """Legend form: like :func:`serialize` but 1-tuples lose their parentheses.

    Not injective; never use it for equality.
    """
    if isinstance(v, tuple):
        if len(v) == 1:
            return display(v[0])
        return "(" + ",".join(display(c) for c in v) + ")"
    return "⊥" if v is BOT else str(v)
