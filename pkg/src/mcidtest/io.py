"""Plain-text file formats.

Matrix files hold ``n`` on the first line, then ``n`` rows of ``n``
whitespace-separated decimals.  Trajectory files start with ``#n=<n>`` and
list one 0-based state per line.  In matrix files ``#`` starts a comment.
"""

from __future__ import annotations

import json
import re

import numpy as np

from .chain import Trajectory
from .errors import ParseError
from .linalg import StochasticMatrix, _as_array

_HEADER = re.compile(r"#\s*n\s*=\s*(\d+)\s*$")


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def parse_matrix(text: str) -> StochasticMatrix:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ParseError(f"first line must be the state count, got {lines[0]!r}") from None
    if n < 1:
        raise ParseError("state count must be positive")
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, found {len(rows)}")
    try:
        vals = [[float(x) for x in r.split()] for r in rows]
    except ValueError as exc:
        raise ParseError(f"bad number: {exc}") from None
    if any(len(v) != n for v in vals):
        raise ParseError(f"every row must have {n} entries")
    a = np.array(vals)
    return StochasticMatrix(a)


def format_matrix(P) -> str:
    a = _as_array(P)
    out = [str(a.shape[0])]
    out += [" ".join(repr(float(x)) for x in row) for row in a]
    return "\n".join(out) + "\n"


def parse_trajectory(text: str, n: int | None = None) -> Trajectory:
    """Read a trajectory; an empty file is the empty word when ``n`` is given."""
    lines = [l.strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines and n is not None:
        return Trajectory(np.zeros(0, dtype=np.int64), n)
    if not lines:
        raise ParseError("trajectory file needs a '#n=<n>' header")
    m = _HEADER.match(lines[0])
    if not m:
        raise ParseError(f"bad trajectory header {lines[0]!r}")
    n = int(m.group(1))
    try:
        states = [int(l) for l in lines[1:]]
    except ValueError as exc:
        raise ParseError(f"bad state: {exc}") from None
    if any(s < 0 or s >= n for s in states):
        raise ParseError(f"trajectory has states outside [0, {n})")
    return Trajectory(np.asarray(states, dtype=np.int64), n)


def format_trajectory(w: Trajectory) -> str:
    body = "".join(f"{int(s)}\n" for s in w.states.tolist())
    return f"#n={w.n}\n" + body


def read_matrix(path) -> StochasticMatrix:
    with open(path) as fh:
        return parse_matrix(fh.read())


def read_trajectory(path, n: int | None = None) -> Trajectory:
    with open(path) as fh:
        return parse_trajectory(fh.read(), n)


def dumps(doc) -> str:
    """JSON with keys in insertion order and no trailing whitespace."""
    return json.dumps(doc, separators=(", ", ": "))
