"""JSON system files.

A file holds either a numeric pair or an affine family::

    {"A": [[0, 1], [0, 0]], "B": [[0], [1]],
     "pattern": [[1, 2]], "candidates": [[1, 1], [1, 2]],
     "config": {"gamma": 1.0}}

    {"affine": {"A0": [[...]], "B0": [[...]],
                "directions": [{"A": [[...]], "B": [[...]]}, ...]}}

Entry indices are 1-based ``[row, col]`` pairs into the ``n x (n+m)``
matrix ``[A, B]``; they are 0-based once loaded.
"""

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParseError
from .model import AffineSystem, LinearSystem, PatternMatrix

_NUMBER_LIST = re.compile(r"\[\s+([-0-9.eE+,\s]+?)\s+\]")
_KEYS = {"A", "B", "pattern", "candidates", "affine", "config", "name"}


@dataclass(eq=False)
class SystemFile:
    system: LinearSystem = None
    affine: AffineSystem = None
    pattern: PatternMatrix = None
    candidates: frozenset = None
    config: dict = field(default_factory=dict)
    name: str = None

    @property
    def n(self):
        return (self.system or self.affine).n

    @property
    def m(self):
        return (self.system or self.affine).m

    def __eq__(self, other):
        if not isinstance(other, SystemFile):
            return NotImplemented
        return (
            self.system == other.system
            and self.affine == other.affine
            and self.pattern == other.pattern
            and self.candidates == other.candidates
            and self.config == other.config
            and self.name == other.name
        )


def _line_of(text, key):
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


def _matrix(value, what, text, key, rows=None):
    line = _line_of(text, key)
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} is not a numeric matrix", line) from exc
    if a.size == 0 and rows is not None:
        return np.zeros((rows, 0))
    if a.ndim != 2:
        raise ParseError(f"{what} must be a list of equal-length rows", line)
    if not np.all(np.isfinite(a)):
        raise ParseError(f"{what} has non-finite entries", line)
    return a


def _entries(value, n, n_cols, text, key):
    line = _line_of(text, key)
    if not isinstance(value, list):
        raise ParseError(f"{key} must be a list of [row, col] pairs", line)
    out = set()
    for item in value:
        if not (isinstance(item, list) and len(item) == 2 and all(isinstance(v, int) for v in item)):
            raise ParseError(f"{key} entry {item!r} is not an integer [row, col] pair", line)
        r, c = item
        if not (1 <= r <= n and 1 <= c <= n_cols):
            raise ParseError(f"{key} entry {item} outside the {n}x{n_cols} matrix [A, B]", line)
        out.add((r - 1, c - 1))
    return frozenset(out)


def parse_system(text):
    """Parse and validate a system file; raises :class:`ParseError`."""
    if hasattr(text, "read"):
        text = text.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1)
    unknown = set(doc) - _KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ParseError(f"unknown key {key!r}", _line_of(text, key))
    numeric = "A" in doc or "B" in doc
    if numeric == ("affine" in doc):
        raise ParseError("give exactly one of a numeric system (A, B) or an affine block", 1)

    out = SystemFile(name=doc.get("name"))
    config = doc.get("config", {})
    if not isinstance(config, dict):
        raise ParseError("config must be an object", _line_of(text, "config"))
    out.config = dict(config)

    if numeric:
        if "A" not in doc or "B" not in doc:
            raise ParseError("numeric systems need both A and B", 1)
        a = _matrix(doc["A"], "A", text, "A")
        if a.shape[0] != a.shape[1]:
            raise ParseError(f"A must be square, got {a.shape}", _line_of(text, "A"))
        b = _matrix(doc["B"], "B", text, "B", rows=a.shape[0])
        try:
            out.system = LinearSystem(a, b)
        except DimensionError as exc:
            raise ParseError(str(exc), _line_of(text, "B")) from exc
        n, m = out.system.n, out.system.m
        if "pattern" in doc:
            out.pattern = PatternMatrix(n, n + m, _entries(doc["pattern"], n, n + m, text, "pattern"))
        if "candidates" in doc:
            out.candidates = _entries(doc["candidates"], n, n + m, text, "candidates")
    else:
        for key in ("pattern", "candidates"):
            if key in doc:
                raise ParseError(f"{key} applies to numeric systems only", _line_of(text, key))
        blk = doc["affine"]
        line = _line_of(text, "affine")
        if not isinstance(blk, dict) or "A0" not in blk or "B0" not in blk:
            raise ParseError("affine block needs A0 and B0", line)
        a0 = _matrix(blk["A0"], "A0", text, "A0")
        if a0.shape[0] != a0.shape[1]:
            raise ParseError(f"A0 must be square, got {a0.shape}", _line_of(text, "A0"))
        b0 = _matrix(blk["B0"], "B0", text, "B0", rows=a0.shape[0])
        dirs = []
        for k, d in enumerate(blk.get("directions", []), start=1):
            if not isinstance(d, dict) or "A" not in d or "B" not in d:
                raise ParseError(f"direction {k} needs A and B", line)
            da = _matrix(d["A"], f"direction {k} A", text, "directions")
            db = _matrix(d["B"], f"direction {k} B", text, "directions", rows=da.shape[0])
            dirs.append((da, db))
        try:
            out.affine = AffineSystem(a0, b0, tuple(dirs))
        except DimensionError as exc:
            raise ParseError(str(exc), _line_of(text, "directions") or line) from exc
    return out


def load_system(path):
    with open(path) as fh:
        return parse_system(fh.read())


def _rows(a):
    return [[float(v) if v != int(v) else int(v) for v in row] for row in np.asarray(a)]


def _pairs(entries):
    return [[r + 1, c + 1] for r, c in sorted(entries)]


def serialize(sf):
    """Inverse of :func:`parse_system` (JSON text, 1-based indices)."""
    doc = {}
    if sf.name is not None:
        doc["name"] = sf.name
    if sf.system is not None:
        doc["A"] = _rows(sf.system.A)
        doc["B"] = _rows(sf.system.B)
        if sf.pattern is not None:
            doc["pattern"] = _pairs(sf.pattern.support)
        if sf.candidates is not None:
            doc["candidates"] = _pairs(sf.candidates)
    else:
        af = sf.affine
        doc["affine"] = {
            "A0": _rows(af.A0),
            "B0": _rows(af.B0),
            "directions": [{"A": _rows(a), "B": _rows(b)} for a, b in af.directions],
        }
    if sf.config:
        doc["config"] = sf.config
    return _compact_dump(doc) + "\n"


def _compact_dump(doc):
    # one matrix row per line keeps fixtures diffable
    text = json.dumps(doc, indent=2)
    return _NUMBER_LIST.sub(lambda mo: "[" + ", ".join(p.strip() for p in mo.group(1).split(",")) + "]", text)


def save_system(sf, path):
    with open(path, "w") as fh:
        fh.write(serialize(sf))


def pattern_to_json(pattern):
    return json.dumps({"shape": [pattern.n_rows, pattern.n_cols], "entries": _pairs(pattern.support)})
