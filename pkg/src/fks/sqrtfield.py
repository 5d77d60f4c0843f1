"""Exact matrix arithmetic over Q(sqrt(d)).

Invariant complex structures for actions of order 3 or 6 have entries in
Q(sqrt(3)) and provably no rational representative, so certifying identities
like J^2 = -I or metric compatibility exactly needs one real quadratic
extension.  A matrix is stored as the pair (P, Q) with value P + Q*sqrt(d),
P and Q rational; d = 1 means plain rational (Q folded into P).

Only what the complex-structure and metric certificates need is provided:
ring operations, transpose, exact equality, positivity of symmetric matrices
(Sylvester minors over the quadratic field), and float export.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import exactla


def _frozen(M) -> tuple:
    return tuple(tuple(Fraction(x) for x in row) for row in M)


@dataclass(frozen=True)
class SqrtMatrix:
    """Exact matrix P + Q*sqrt(d); d positive and squarefree, d = 1 rational."""

    P: tuple
    Q: tuple
    d: int

    @staticmethod
    def make(P, Q=None, d: int = 1) -> "SqrtMatrix":
        rows, cols = exactla.shape(P)
        if Q is None:
            Q = exactla.zeros(rows, cols)
        if exactla.shape(Q) != (rows, cols):
            raise ValueError("P and Q must have the same shape")
        if d < 1:
            raise ValueError("d must be a positive integer")
        if d == 1:
            P = exactla.mat_add(P, Q)
            Q = exactla.zeros(rows, cols)
        return SqrtMatrix(P=_frozen(P), Q=_frozen(Q), d=d)

    @staticmethod
    def rational(M) -> "SqrtMatrix":
        return SqrtMatrix.make(M, None, 1)

    @staticmethod
    def zero(rows: int, cols: int, d: int = 1) -> "SqrtMatrix":
        return SqrtMatrix.make(exactla.zeros(rows, cols), None, d)

    @staticmethod
    def identity(n: int, d: int = 1) -> "SqrtMatrix":
        return SqrtMatrix.make(exactla.identity(n), None, d)

    @property
    def shape(self) -> tuple[int, int]:
        return exactla.shape(self.P)

    @property
    def is_rational(self) -> bool:
        return self.d == 1 or all(x == 0 for row in self.Q for x in row)

    def with_field(self, d: int) -> "SqrtMatrix":
        """Reinterpret in Q(sqrt(d)); only legal for rational matrices."""
        if not self.is_rational:
            if self.d == d:
                return self
            raise ValueError("cannot change the field of an irrational matrix")
        return SqrtMatrix.make([list(r) for r in self.P], None, d)

    def _coerce(self, other: "SqrtMatrix") -> tuple["SqrtMatrix", "SqrtMatrix"]:
        if self.d == other.d:
            return self, other
        if other.is_rational:
            return self, other.with_field(self.d)
        if self.is_rational:
            return self.with_field(other.d), other
        raise ValueError(f"mixed fields sqrt({self.d}) and sqrt({other.d})")

    def add(self, other: "SqrtMatrix") -> "SqrtMatrix":
        a, b = self._coerce(other)
        return SqrtMatrix.make(
            exactla.mat_add(a.P, b.P), exactla.mat_add(a.Q, b.Q), a.d
        )

    def sub(self, other: "SqrtMatrix") -> "SqrtMatrix":
        a, b = self._coerce(other)
        return SqrtMatrix.make(
            exactla.mat_sub(a.P, b.P), exactla.mat_sub(a.Q, b.Q), a.d
        )

    def mul(self, other: "SqrtMatrix") -> "SqrtMatrix":
        a, b = self._coerce(other)
        P = exactla.mat_add(
            exactla.mat_mul(a.P, b.P),
            exactla.mat_scale(exactla.mat_mul(a.Q, b.Q), a.d),
        )
        Q = exactla.mat_add(exactla.mat_mul(a.P, b.Q), exactla.mat_mul(a.Q, b.P))
        return SqrtMatrix.make(P, Q, a.d)

    def neg(self) -> "SqrtMatrix":
        return SqrtMatrix.make(
            exactla.mat_scale(self.P, -1), exactla.mat_scale(self.Q, -1), self.d
        )

    def scale(self, a, b=0) -> "SqrtMatrix":
        """Multiply by the scalar a + b*sqrt(d)."""
        a, b = Fraction(a), Fraction(b)
        P = exactla.mat_add(
            exactla.mat_scale(self.P, a),
            exactla.mat_scale(self.Q, b * self.d),
        )
        Q = exactla.mat_add(exactla.mat_scale(self.P, b), exactla.mat_scale(self.Q, a))
        return SqrtMatrix.make(P, Q, self.d)

    def transpose(self) -> "SqrtMatrix":
        return SqrtMatrix.make(
            exactla.transpose(self.P), exactla.transpose(self.Q), self.d
        )

    def equals(self, other: "SqrtMatrix") -> bool:
        a, b = self._coerce(other)
        return exactla.mat_eq(a.P, b.P) and exactla.mat_eq(a.Q, b.Q)

    def is_symmetric(self) -> bool:
        return self.equals(self.transpose())

    def to_float(self):
        root = self.d ** 0.5
        return [
            [float(p) + float(q) * root for p, q in zip(prow, qrow)]
            for prow, qrow in zip(self.P, self.Q)
        ]

    def entry(self, i: int, j: int) -> tuple[Fraction, Fraction]:
        return self.P[i][j], self.Q[i][j]

    def block(self, top: int, left: int, rows: int, cols: int) -> "SqrtMatrix":
        P = [[self.P[top + i][left + j] for j in range(cols)] for i in range(rows)]
        Q = [[self.Q[top + i][left + j] for j in range(cols)] for i in range(rows)]
        return SqrtMatrix.make(P, Q, self.d)


def block_matrix(blocks: Sequence[Sequence[Optional[SqrtMatrix]]], d: int) -> SqrtMatrix:
    """Assemble a block matrix; None blocks are zero (sizes inferred)."""
    row_heights = []
    col_widths = []
    for bi, brow in enumerate(blocks):
        h = next(b.shape[0] for b in brow if b is not None)
        row_heights.append(h)
    ncols = len(blocks[0])
    for bj in range(ncols):
        w = next(brow[bj].shape[1] for brow in blocks if brow[bj] is not None)
        col_widths.append(w)
    total_r, total_c = sum(row_heights), sum(col_widths)
    P = exactla.zeros(total_r, total_c)
    Q = exactla.zeros(total_r, total_c)
    r0 = 0
    for bi, brow in enumerate(blocks):
        c0 = 0
        for bj, b in enumerate(brow):
            if b is not None:
                if b.shape != (row_heights[bi], col_widths[bj]):
                    raise ValueError("inconsistent block shapes")
                bb = b.with_field(d) if b.is_rational else b
                if bb.d != d:
                    raise ValueError("block in a different field")
                for i in range(b.shape[0]):
                    for j in range(b.shape[1]):
                        P[r0 + i][c0 + j] = bb.P[i][j]
                        Q[r0 + i][c0 + j] = bb.Q[i][j]
            c0 += col_widths[bj]
        r0 += row_heights[bi]
    return SqrtMatrix.make(P, Q, d)


# ---------------------------------------------------------------------------
# scalars and positivity


def quad_sign(a: Fraction, b: Fraction, d: int) -> int:
    """Sign of a + b*sqrt(d), exactly."""
    if a == 0 and b == 0:
        return 0
    if a >= 0 and b >= 0:
        return 1
    if a <= 0 and b <= 0:
        return -1
    # opposite signs: compare a^2 against d b^2 on the dominant side
    if a > 0:  # b < 0
        return 1 if a * a > d * b * b else -1
    return 1 if d * b * b > a * a else -1


def is_positive_definite(M: SqrtMatrix) -> bool:
    """Sylvester criterion with exact arithmetic in Q(sqrt(d))."""
    n, m = M.shape
    if n != m or not M.is_symmetric():
        raise ValueError("positive definiteness needs a symmetric square matrix")
    d = M.d
    for k in range(1, n + 1):
        det_a, det_b = _quad_det(
            [[M.entry(i, j) for j in range(k)] for i in range(k)], d
        )
        if quad_sign(det_a, det_b, d) <= 0:
            return False
    return True


def _quad_mul(x, y, d):
    return (x[0] * y[0] + d * x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _quad_det(M, d) -> tuple[Fraction, Fraction]:
    """Determinant of a matrix of (a, b) pairs by Gaussian elimination."""
    n = len(M)
    M = [list(row) for row in M]
    det = (Fraction(1), Fraction(0))
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != (0, 0)), None)
        if p is None:
            return (Fraction(0), Fraction(0))
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = (-det[0], -det[1])
        pivot = M[c][c]
        det = _quad_mul(det, pivot, d)
        norm = pivot[0] * pivot[0] - d * pivot[1] * pivot[1]
        inv = (pivot[0] / norm, -pivot[1] / norm)
        for i in range(c + 1, n):
            if M[i][c] != (0, 0):
                f = _quad_mul(M[i][c], inv, d)
                M[i] = [
                    (a[0] - fb[0], a[1] - fb[1])
                    for a, fb in ((M[i][j], _quad_mul(f, M[c][j], d)) for j in range(n))
                ]
    return det
