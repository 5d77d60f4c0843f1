"""The fks-1 input format and JSON report serialization.

Input documents are line-oriented ``key = value`` text with ``#`` comments.
Values are integers, rationals ``p/q``, or bracketed nested lists of those.
Keys (1-based indices, i < j):

    format = fks-1            required tag
    m = 1                     fiber rank is 2m
    n = 1                     base rank is 2n
    A<i> = [[..], ..]         integer action matrices, i = 1 .. 2n
    c[i,j] = [..]             integer commutator tails, optional (default 0)
    J0 = [[..], ..]           optional rational complex structure on the fiber
    J1 = [[..], ..]           optional rational complex structure on the base
    B  = [[..], ..]           optional rational mixing block
    seed = [[..], ..]         optional rational seed metric on fiber + base

Emission is canonical (fixed key order, fixed spacing, zero tails omitted),
so emit -> parse -> emit is byte-identical.  Parse errors carry the line
number and the offending token.

Reports are emitted as JSON with every rational value rendered as a ``p/q``
string; floating-point values appear only inside certificates flagged
``"approx": true``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .extension import ExtensionData
from .sqrtfield import SqrtMatrix

FORMAT_TAG = "fks-1"


class ParseError(ValueError):
    """Malformed input document; knows the line and token at fault."""

    def __init__(self, line: int, token: str, message: str):
        self.line = line
        self.token = token
        self.message = message
        super().__init__(f"line {line}: {message} (at {token!r})")


@dataclass
class InputDocument:
    """Parsed form of an fks-1 document."""

    m: int
    n: int
    actions: list
    tails: dict = field(default_factory=dict)
    J0: Optional[list] = None
    J1: Optional[list] = None
    B: Optional[list] = None
    seed: Optional[list] = None

    def to_extension_data(self) -> ExtensionData:
        return ExtensionData.make(self.m, self.n, self.actions, self.tails)


# ---------------------------------------------------------------------------
# value scanner


_TOKEN_RE = re.compile(r"\s*(\[|\]|,|-?\d+(?:/\d+)?|\S+)")


def _tokenize(line_no: int, text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


_ATOM_RE = re.compile(r"-?\d+(/\d+)?$")


def _parse_value(line_no: int, tokens: list, pos: int):
    if pos >= len(tokens):
        raise ParseError(line_no, "<end>", "unexpected end of value")
    tok = tokens[pos]
    if tok == "[":
        items = []
        pos += 1
        if pos < len(tokens) and tokens[pos] == "]":
            return items, pos + 1
        while True:
            item, pos = _parse_value(line_no, tokens, pos)
            items.append(item)
            if pos >= len(tokens):
                raise ParseError(line_no, "<end>", "unterminated list")
            if tokens[pos] == ",":
                pos += 1
                continue
            if tokens[pos] == "]":
                return items, pos + 1
            raise ParseError(line_no, tokens[pos], "expected ',' or ']' in list")
    if _ATOM_RE.match(tok):
        if "/" in tok:
            num, den = tok.split("/")
            if int(den) == 0:
                raise ParseError(line_no, tok, "zero denominator")
            return Fraction(int(num), int(den)), pos + 1
        return int(tok), pos + 1
    raise ParseError(line_no, tok, "expected a number or '['")


def _parse_scalar_int(line_no: int, raw: str, key: str) -> int:
    tokens = _tokenize(line_no, raw)
    value, pos = _parse_value(line_no, tokens, 0)
    if pos != len(tokens):
        raise ParseError(line_no, tokens[pos], f"trailing tokens after value for {key}")
    if not isinstance(value, int):
        raise ParseError(line_no, raw.strip(), f"{key} must be an integer")
    return value


def _require_matrix(line_no: int, value, key: str, integral: bool):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ParseError(line_no, key, f"{key} must be a matrix (list of rows)")
    width = len(value[0])
    for row in value:
        if len(row) != width:
            raise ParseError(line_no, key, f"{key} has ragged rows")
        for x in row:
            if integral and not isinstance(x, int):
                raise ParseError(line_no, str(x), f"{key} must have integer entries")
            if not isinstance(x, (int, Fraction)):
                raise ParseError(line_no, str(x), f"{key} entries must be numbers")
    return value


def _require_vector(line_no: int, value, key: str):
    if not isinstance(value, list) or any(isinstance(x, list) for x in value):
        raise ParseError(line_no, key, f"{key} must be a flat vector")
    for x in value:
        if not isinstance(x, int):
            raise ParseError(line_no, str(x), f"{key} must have integer entries")
    return value


_TAIL_KEY_RE = re.compile(r"c\[(\d+),(\d+)\]$")
_ACTION_KEY_RE = re.compile(r"A(\d+)$")


def parse_document(text: str) -> InputDocument:
    """Parse an fks-1 document; raises ParseError naming line and token."""
    entries = {}
    order = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(line_no, line.split()[0], "expected 'key = value'")
        key, raw_value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ParseError(line_no, "=", "missing key before '='")
        if key in entries:
            raise ParseError(line_no, key, f"duplicate key {key}")
        entries[key] = (line_no, raw_value.strip())
        order.append(key)

    if "format" not in entries:
        raise ParseError(1, "format", "missing 'format = fks-1'")
    line_no, tag = entries.pop("format")
    if tag != FORMAT_TAG:
        raise ParseError(line_no, tag, f"unsupported format {tag!r}, expected {FORMAT_TAG!r}")

    for required in ("m", "n"):
        if required not in entries:
            raise ParseError(1, required, f"missing required key {required}")
    m = _parse_scalar_int(*_popentry(entries, "m"), key="m")
    n = _parse_scalar_int(*_popentry(entries, "n"), key="n")
    if m < 1 or n < 1:
        raise ParseError(1, f"{m},{n}", "m and n must be positive")

    actions = []
    for i in range(1, 2 * n + 1):
        key = f"A{i}"
        if key not in entries:
            raise ParseError(1, key, f"missing action matrix {key}")
        line_no, raw = _popentry(entries, key)
        value = _parse_full_value(line_no, raw, key)
        matrix = _require_matrix(line_no, value, key, integral=True)
        if len(matrix) != 2 * m or len(matrix[0]) != 2 * m:
            raise ParseError(line_no, key, f"{key} must be {2 * m}x{2 * m}")
        actions.append(matrix)

    tails = {}
    optional = {}
    for key in list(entries):
        line_no, raw = entries[key]
        tail_match = _TAIL_KEY_RE.match(key)
        if tail_match:
            i, j = int(tail_match.group(1)), int(tail_match.group(2))
            if not (1 <= i < j <= 2 * n):
                raise ParseError(line_no, key, f"tail indices must satisfy 1 <= i < j <= {2 * n}")
            value = _parse_full_value(line_no, raw, key)
            vec = _require_vector(line_no, value, key)
            if len(vec) != 2 * m:
                raise ParseError(line_no, key, f"{key} must have length {2 * m}")
            tails[(i - 1, j - 1)] = vec
            del entries[key]
        elif key in ("J0", "J1", "B", "seed"):
            value = _parse_full_value(line_no, raw, key)
            optional[key] = _require_matrix(line_no, value, key, integral=False)
            del entries[key]
        elif _ACTION_KEY_RE.match(key):
            raise ParseError(line_no, key, f"unexpected extra action matrix {key}")
        else:
            raise ParseError(line_no, key, f"unknown key {key}")

    return InputDocument(
        m=m,
        n=n,
        actions=actions,
        tails=tails,
        J0=optional.get("J0"),
        J1=optional.get("J1"),
        B=optional.get("B"),
        seed=optional.get("seed"),
    )


def _popentry(entries: dict, key: str):
    line_no, raw = entries.pop(key)
    return line_no, raw


def _parse_full_value(line_no: int, raw: str, key: str):
    tokens = _tokenize(line_no, raw)
    if not tokens:
        raise ParseError(line_no, key, f"missing value for {key}")
    value, pos = _parse_value(line_no, tokens, 0)
    if pos != len(tokens):
        raise ParseError(line_no, tokens[pos], f"trailing tokens after value for {key}")
    return value


def parse_matrix_literal(text: str) -> list:
    """Parse a standalone bracketed matrix (used for seed-metric files)."""
    joined = " ".join(
        line.split("#", 1)[0].strip() for line in text.splitlines()
    ).strip()
    tokens = _tokenize(1, joined)
    if not tokens:
        raise ParseError(1, "<empty>", "empty matrix literal")
    value, pos = _parse_value(1, tokens, 0)
    if pos != len(tokens):
        raise ParseError(1, tokens[pos], "trailing tokens after matrix")
    return _require_matrix(1, value, "matrix", integral=False)


# ---------------------------------------------------------------------------
# canonical emission


def _fmt_scalar(x) -> str:
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _fmt_value(value) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_fmt_value(v) for v in value) + "]"
    return _fmt_scalar(value)


def emit_document(doc: InputDocument) -> str:
    """Canonical byte-stable emission (round-trips through parse_document)."""
    lines = [f"format = {FORMAT_TAG}", f"m = {doc.m}", f"n = {doc.n}"]
    for i, A in enumerate(doc.actions, start=1):
        lines.append(f"A{i} = {_fmt_value([list(r) for r in A])}")
    for (i, j) in sorted(doc.tails):
        vec = list(doc.tails[(i, j)])
        if any(vec):
            lines.append(f"c[{i + 1},{j + 1}] = {_fmt_value(vec)}")
    for key in ("J0", "J1", "B", "seed"):
        block = getattr(doc, key)
        if block is not None:
            lines.append(f"{key} = {_fmt_value([list(r) for r in block])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON helpers for reports


def fraction_json(x) -> str:
    return _fmt_scalar(x)


def vector_json(v) -> list:
    return [_fmt_scalar(x) for x in v]


def matrix_json(M) -> list:
    return [[_fmt_scalar(x) for x in row] for row in M]


def sqrt_matrix_json(M: SqrtMatrix) -> dict:
    """Exact certificate block: value = P + Q * sqrt(d), all entries p/q."""
    return {
        "approx": False,
        "d": M.d,
        "P": matrix_json(M.P),
        "Q": matrix_json(M.Q),
    }


def float_matrix_json(M) -> dict:
    return {
        "approx": True,
        "entries": [[float(x) for x in row] for row in M],
    }
