from fractions import Fraction

import pytest

from fks import catalog, pipeline
from fks.formats import (
    InputDocument,
    ParseError,
    emit_document,
    parse_document,
    parse_matrix_literal,
)

GOOD = """\
format = fks-1
m = 1
n = 1
A1 = [[-1, 0], [0, -1]]
A2 = [[1, 0], [0, 1]]
c[1,2] = [1, 0]
"""


def test_parse_good_document():
    doc = parse_document(GOOD)
    assert doc.m == 1 and doc.n == 1
    assert doc.actions[0] == [[-1, 0], [0, -1]]
    assert doc.tails == {(0, 1): [1, 0]}
    assert doc.J0 is None


def test_parse_comments_and_blank_lines():
    text = "# a comment\n\nformat = fks-1  # trailing\nm = 1\nn = 1\n" + \
        "A1 = [[1, 0], [0, 1]]\nA2 = [[1, 0], [0, 1]]\n"
    doc = parse_document(text)
    assert doc.tails == {}


def test_parse_rational_blocks():
    text = GOOD + "J0 = [[0, -1], [1, 0]]\nseed = [[1, 1/2], [1/2, 1]]\n"
    doc = parse_document(text)
    assert doc.seed[0][1] == Fraction(1, 2)


def test_round_trip_is_byte_identical():
    for name in catalog.names():
        text = pipeline.example_document(name)
        assert emit_document(parse_document(text)) == text


def test_round_trip_with_optional_blocks():
    doc = InputDocument(
        m=1,
        n=1,
        actions=[[[1, 0], [0, 1]], [[1, 0], [0, 1]]],
        tails={},
        J1=[[0, -1], [1, 0]],
        seed=[[1, Fraction(1, 2)], [Fraction(1, 2), 1]],
    )
    text = emit_document(doc)
    assert emit_document(parse_document(text)) == text
    assert "seed = [[1, 1/2], [1/2, 1]]" in text


@pytest.mark.parametrize(
    "mutation, line, fragment",
    [
        ("missing_format", 1, "format"),
        ("bad_tag", 1, "unsupported format"),
        ("no_equals", 3, "expected 'key = value'"),
        ("bad_entry", 4, "integer entries"),
        ("ragged", 4, "ragged"),
        ("unbalanced", 4, "unterminated list"),
        ("trailing", 4, "trailing tokens"),
        ("wrong_size", 4, "must be 2x2"),
        ("bad_tail_index", 6, "tail indices"),
        ("unknown_key", 7, "unknown key"),
        ("duplicate", 7, "duplicate key"),
    ],
)
def test_parse_errors_name_line_and_token(mutation, line, fragment):
    lines = GOOD.splitlines()
    if mutation == "missing_format":
        lines = lines[1:]
        line_expect = 1
    elif mutation == "bad_tag":
        lines[0] = "format = fks-2"
    elif mutation == "no_equals":
        lines[2] = "n 1"
    elif mutation == "bad_entry":
        lines[3] = "A1 = [[-1, 1/2], [0, -1]]"
    elif mutation == "ragged":
        lines[3] = "A1 = [[-1, 0], [0]]"
    elif mutation == "unbalanced":
        lines[3] = "A1 = [[-1, 0], [0, -1]"
    elif mutation == "trailing":
        lines[3] = "A1 = [[-1, 0], [0, -1]] junk"
    elif mutation == "wrong_size":
        lines[3] = "A1 = [[-1]]"
    elif mutation == "bad_tail_index":
        lines[5] = "c[2,1] = [1, 0]"
    elif mutation == "unknown_key":
        lines.append("frob = 3")
    elif mutation == "duplicate":
        lines.append("m = 2")
    text = "\n".join(lines) + "\n"
    with pytest.raises(ParseError) as e:
        parse_document(text)
    assert fragment in str(e.value)
    assert e.value.line == line


def test_missing_action_matrix():
    text = "format = fks-1\nm = 1\nn = 1\nA1 = [[1, 0], [0, 1]]\n"
    with pytest.raises(ParseError, match="A2"):
        parse_document(text)


def test_parse_matrix_literal():
    M = parse_matrix_literal("[[1, 1/2],\n [1/2, 1]]  # seed\n")
    assert M == [[1, Fraction(1, 2)], [Fraction(1, 2), 1]]
    with pytest.raises(ParseError):
        parse_matrix_literal("[1, 2, 3]")  # flat vector, not a matrix
    with pytest.raises(ParseError):
        parse_matrix_literal("")
