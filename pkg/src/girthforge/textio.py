"""Plain-text digraph format, mapping lines, and canonical JSON.

Digraph files look like::

    # optional comments
    digraph c3
    order 3
    arcs 3
    0 1
    1 2
    2 0

Block digraphs add ``blocks <a> <n>`` and sampled digraphs also ``seed <s>``
between the ``digraph`` line and the ``order`` line.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .digraph import Digraph
from .errors import DigraphFormatError

__all__ = [
    "dump_digraph",
    "parse_digraph",
    "read_digraph",
    "write_digraph",
    "format_map",
    "parse_map",
    "canonical_json",
]

_HEADER_KEYS = ("blocks", "seed")


def dump_digraph(D: Digraph, name: str = "D", headers: dict | None = None) -> str:
    lines = [f"digraph {name}"]
    for key in _HEADER_KEYS:
        if headers and key in headers:
            value = headers[key]
            if isinstance(value, (tuple, list)):
                value = " ".join(str(x) for x in value)
            lines.append(f"{key} {value}")
    lines.append(f"order {D.order}")
    lines.append(f"arcs {D.size}")
    lines.extend(f"{u} {v}" for u, v in D.arcs)
    return "\n".join(lines) + "\n"


def _ints(tokens, lineno, count):
    if len(tokens) != count:
        raise DigraphFormatError(f"expected {count} integer(s), got {len(tokens)}", lineno)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise DigraphFormatError(f"non-integer token in {' '.join(tokens)!r}", lineno) from None


def parse_digraph(text: str) -> tuple[str, Digraph, dict]:
    """Parse digraph text; returns ``(name, digraph, headers)``.

    ``headers`` may hold ``blocks`` as an ``(a, n)`` pair and ``seed``.
    """
    rows = [
        (i, line.strip())
        for i, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    it = iter(rows)

    def next_row(expect):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise DigraphFormatError(f"unexpected end of input, expected {expect}") from None
        return lineno, line.split()

    lineno, tok = next_row("'digraph <name>'")
    if tok[0] != "digraph" or len(tok) != 2:
        raise DigraphFormatError("expected 'digraph <name>'", lineno)
    name = tok[1]

    headers: dict = {}
    lineno, tok = next_row("'order <N>'")
    while tok[0] in _HEADER_KEYS:
        if tok[0] in headers:
            raise DigraphFormatError(f"repeated header {tok[0]!r}", lineno)
        if tok[0] == "blocks":
            headers["blocks"] = tuple(_ints(tok[1:], lineno, 2))
        else:
            (seed,) = _ints(tok[1:], lineno, 1)
            if not 0 <= seed < 2**64:
                raise DigraphFormatError("seed must be an unsigned 64-bit integer", lineno)
            headers["seed"] = seed
        lineno, tok = next_row("'order <N>'")
    if tok[0] != "order":
        raise DigraphFormatError("expected 'order <N>'", lineno)
    (order,) = _ints(tok[1:], lineno, 1)
    if order < 0:
        raise DigraphFormatError("negative order", lineno)

    lineno, tok = next_row("'arcs <M>'")
    if tok[0] != "arcs":
        raise DigraphFormatError("expected 'arcs <M>'", lineno)
    (m,) = _ints(tok[1:], lineno, 1)

    arcs = []
    seen = set()
    for _ in range(m):
        lineno, tok = next_row("an arc line 'u v'")
        u, v = _ints(tok, lineno, 2)
        if u == v:
            raise DigraphFormatError(f"loop at vertex {u}", lineno)
        if not (0 <= u < order and 0 <= v < order):
            raise DigraphFormatError(f"arc {u} {v} out of range for order {order}", lineno)
        if (u, v) in seen:
            raise DigraphFormatError(f"duplicate arc {u} {v}", lineno)
        seen.add((u, v))
        arcs.append((u, v))
    extra = next(it, None)
    if extra is not None:
        raise DigraphFormatError("trailing content after arc list", extra[0])
    return name, Digraph._trusted(order, arcs), headers


def read_digraph(path) -> Digraph:
    return parse_digraph(Path(path).read_text())[1]


def write_digraph(path, D: Digraph, name: str = "D", headers: dict | None = None) -> None:
    Path(path).write_text(dump_digraph(D, name, headers))


def format_map(image) -> str:
    return "map " + " ".join(str(int(x)) for x in image)


def parse_map(line: str) -> list[int]:
    tok = line.split()
    if not tok or tok[0] != "map":
        raise DigraphFormatError("expected 'map <v0_image> <v1_image> ...'")
    try:
        return [int(t) for t in tok[1:]]
    except ValueError:
        raise DigraphFormatError("non-integer image in map line") from None


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj):
            out.append('"nan"')
        elif math.isinf(obj):
            out.append('"inf"' if obj > 0 else '"-inf"')
        else:
            out.append(format(obj, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(", ")
            _encode(str(key), out)
            out.append(": ")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(", ")
            _encode(item, out)
        out.append("]")
    elif hasattr(obj, "item"):
        # numpy scalar
        _encode(obj.item(), out)
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")


def canonical_json(obj) -> str:
    """JSON with sorted keys and reals written to 17 significant digits.

    Non-finite reals become the strings ``"inf"``, ``"-inf"`` or ``"nan"``.
    """
    out: list[str] = []
    _encode(obj, out)
    return "".join(out) + "\n"
