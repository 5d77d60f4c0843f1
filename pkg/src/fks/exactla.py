"""Exact linear algebra over Z and Q.

Matrices are plain row-major lists of lists holding Python ints (arbitrary
precision) or ``fractions.Fraction``.  Everything here is exact; there is no
floating point in this module.

The workhorse is Smith normal form with transform tracking: ``U * A * V = D``
with ``U``, ``V`` unimodular and ``D`` diagonal satisfying the divisibility
chain d1 | d2 | ... (all nonnegative).  On top of it sit integer and rational
linear solvers, congruence solving modulo a lattice, cokernel invariant
factors, and lattice utilities (membership, saturation).

Entry growth in naive SNF is real even for small matrices, which is why the
entries must be arbitrary precision; the pivot rule (smallest nonzero |entry|)
keeps growth tolerable at the scale this package targets (dims up to ~40).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

Matrix = list  # list of rows; rows are lists of int or Fraction
Vector = list


# ---------------------------------------------------------------------------
# basic matrix/vector arithmetic


def shape(A) -> tuple[int, int]:
    if not A:
        return (0, 0)
    ncols = len(A[0])
    if any(len(row) != ncols for row in A):
        raise ValueError("ragged matrix")
    return (len(A), ncols)


def zeros(rows: int, cols: int) -> Matrix:
    return [[0] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def copy_matrix(A) -> Matrix:
    return [list(row) for row in A]


def transpose(A) -> Matrix:
    return [list(col) for col in zip(*A)] if A else []


def mat_mul(A, B) -> Matrix:
    ra, ca = shape(A)
    rb, cb = shape(B)
    if ca != rb:
        raise ValueError(f"dimension mismatch: {ra}x{ca} times {rb}x{cb}")
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def mat_vec(A, v) -> Vector:
    ra, ca = shape(A)
    if ca != len(v):
        raise ValueError("dimension mismatch in mat_vec")
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def mat_add(A, B) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B) -> Matrix:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(A, s) -> Matrix:
    return [[s * a for a in row] for row in A]


def mat_eq(A, B) -> bool:
    return shape(A) == shape(B) and all(
        a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb)
    )


def vec_add(u, v) -> Vector:
    return [a + b for a, b in zip(u, v)]


def vec_sub(u, v) -> Vector:
    return [a - b for a, b in zip(u, v)]


def vec_scale(v, s) -> Vector:
    return [s * a for a in v]


def is_zero_vector(v) -> bool:
    return all(x == 0 for x in v)


def determinant(A) -> int:
    """Fraction-free Bareiss determinant; exact for integer input."""
    n, m = shape(A)
    if n != m:
        raise ValueError("determinant of non-square matrix")
    if n == 0:
        return 1
    M = copy_matrix(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SNFResult:
    """U * A * V = D with U, V unimodular and D in Smith normal form."""

    U: Matrix
    D: Matrix
    V: Matrix

    def diagonal(self) -> list[int]:
        r, c = shape(self.D)
        return [self.D[i][i] for i in range(min(r, c))]

    def rank(self) -> int:
        return sum(1 for d in self.diagonal() if d != 0)


def smith_normal_form(A) -> SNFResult:
    """Diagonalize an integer matrix by unimodular row/column operations.

    Naive elimination with the smallest-|entry| pivot rule, plus the usual
    fix-up pass so the diagonal satisfies d1 | d2 | ... with all d_k >= 0.
    """
    rows, cols = shape(A)
    D = copy_matrix(A)
    if any(not isinstance(x, int) for row in D for x in row):
        # Fractions with denominator 1 are tolerated, anything else is not.
        D = [[_as_int(x) for x in row] for row in D]
    U = identity(rows)
    V = identity(cols)

    def swap_rows(i, j):
        if i != j:
            D[i], D[j] = D[j], D[i]
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for row in D:
                row[i], row[j] = row[j], row[i]
            for row in V:
                row[i], row[j] = row[j], row[i]

    def negate_row(i):
        D[i] = [-x for x in D[i]]
        U[i] = [-x for x in U[i]]

    def row_sub(i, j, q):
        # row_i -= q * row_j
        D[i] = [a - q * b for a, b in zip(D[i], D[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_sub(i, j, q):
        # col_i -= q * col_j
        for row in D:
            row[i] -= q * row[j]
        for row in V:
            row[i] -= q * row[j]

    t = 0
    while t < rows and t < cols:
        # smallest nonzero |entry| in the trailing block becomes the pivot
        piv = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                e = D[i][j]
                if e != 0 and (best is None or abs(e) < best):
                    best = abs(e)
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        if D[t][t] < 0:
            negate_row(t)

        while True:
            # clear column t; a nonzero remainder becomes the new, smaller pivot
            dirty = False
            for i in range(t + 1, rows):
                if D[i][t] != 0:
                    q = D[i][t] // D[t][t]
                    if q:
                        row_sub(i, t, q)
                    if D[i][t] != 0:
                        swap_rows(t, i)  # remainder is smaller than the pivot
                        dirty = True
                        break
            if dirty:
                continue
            # clear row t
            for j in range(t + 1, cols):
                if D[t][j] != 0:
                    q = D[t][j] // D[t][t]
                    if q:
                        col_sub(j, t, q)
                    if D[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
                        break
            if dirty:
                continue
            # enforce pivot | trailing entries (divisibility chain)
            offender = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if D[i][j] % D[t][t] != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            # folding the offending row into row t re-runs the gcd reduction
            row_sub(t, offender, -1)
        t += 1

    return SNFResult(U=U, D=D, V=V)


def _as_int(x):
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    raise ValueError(f"expected integer entry, got {x!r}")


def invert_unimodular(U) -> Matrix:
    """Exact inverse of an integer matrix with det +-1."""
    n, m = shape(U)
    if n != m:
        raise ValueError("not square")
    sol = _rref_solve(U, identity(n))
    if sol is None:
        raise ValueError("matrix is singular")
    inv = [[_as_int(Fraction(x)) for x in row] for row in sol]
    return inv


# ---------------------------------------------------------------------------
# linear solving


def _rref_solve(A, B) -> Optional[Matrix]:
    """Solve A X = B over Q (B a matrix); None if inconsistent.

    Only used for square invertible systems here; general solving goes
    through solve_linear.
    """
    n, m = shape(A)
    rb, cb = shape(B)
    if rb != n:
        raise ValueError("dimension mismatch")
    M = [[Fraction(x) for x in row] + [Fraction(y) for y in brow]
         for row, brow in zip(A, B)]
    ncols = m + cb
    pivots = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, n) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(n):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if any(M[i][j] != 0 for j in range(m, ncols)):
            return None
    if len(pivots) < m:
        return None  # underdetermined; caller wanted a unique inverse
    X = zeros(m, cb)
    for k, c in enumerate(pivots):
        for j in range(cb):
            X[c][j] = M[k][m + j]
    return X


def solve_linear(A, b, ring: str = "Z"):
    """Solve A x = b over the requested ring ("Z" or "Q").

    Returns (particular_solution, kernel_basis) or None when unsolvable.
    The kernel basis spans the nullspace over the chosen ring; over Z it is
    a basis of the full integer kernel (saturated, from the SNF transform).
    """
    rows, cols = shape(A)
    if len(b) != rows:
        raise ValueError(f"dimension mismatch: {rows} equations, {len(b)} rhs entries")
    if ring == "Q":
        return _solve_rational(A, b)
    if ring != "Z":
        raise ValueError(f"unknown ring {ring!r}")
    if any(Fraction(x).denominator != 1 for x in b):
        return None  # integer matrix times integer vector is integral
    b = [_as_int(Fraction(x)) for x in b]
    snf = smith_normal_form(A)
    c = mat_vec(snf.U, b)
    diag = snf.D
    y = [0] * cols
    rank = 0
    for i in range(min(rows, cols)):
        if diag[i][i] != 0:
            if c[i] % diag[i][i] != 0:
                return None
            y[i] = c[i] // diag[i][i]
            rank += 1
    for i in range(rows):
        if i >= cols or diag[i][i] == 0:
            if c[i] != 0:
                return None
    x = mat_vec(snf.V, y)
    kernel = [[snf.V[i][j] for i in range(cols)] for j in range(rank, cols)]
    return x, kernel


def _solve_rational(A, b):
    """Gauss-Jordan over Fraction; deliberately not SNF-based so the two
    rings go through independent elimination code."""
    rows, cols = shape(A)
    M = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * v for a, v in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if M[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for k, c in enumerate(pivots):
        x[c] = M[k][cols]
    free = [c for c in range(cols) if c not in pivots]
    kernel = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for k, c in enumerate(pivots):
            v[c] = -M[k][f]
        kernel.append(v)
    return x, kernel


def rational_kernel(A) -> list[Vector]:
    """Basis of the nullspace of A over Q."""
    rows, cols = shape(A)
    sol = _solve_rational(A, [0] * rows)
    assert sol is not None
    return sol[1]


def integer_kernel(A) -> list[Vector]:
    """Basis of the integer nullspace of A (a saturated sublattice)."""
    sol = solve_linear(A, [0] * shape(A)[0], ring="Z")
    assert sol is not None
    return sol[1]


# ---------------------------------------------------------------------------
# cokernel and lattices


def cokernel_invariants(A) -> tuple[int, list[int]]:
    """Structure of Z^rows / column-lattice(A): (free rank, invariant factors > 1)."""
    rows, _ = shape(A)
    diag = smith_normal_form(A).diagonal()
    nonzero = [d for d in diag if d != 0]
    free_rank = rows - len(nonzero)
    torsion = [d for d in nonzero if d > 1]
    return free_rank, torsion


def column_lattice_basis(A) -> list[Vector]:
    """Basis (as a list of vectors) of the lattice spanned by the columns."""
    snf = smith_normal_form(A)
    u_inv = invert_unimodular(snf.U)
    diag = snf.diagonal()
    return [
        [d * u_inv[i][k] for i in range(len(u_inv))]
        for k, d in enumerate(diag)
        if d != 0
    ]


def in_column_lattice(A, v) -> bool:
    return solve_linear(A, v, ring="Z") is not None


def saturation_basis(A) -> list[Vector]:
    """Basis of the saturation (Q-span intersected with Z^rows) of the
    column lattice of A."""
    snf = smith_normal_form(A)
    u_inv = invert_unimodular(snf.U)
    r = snf.rank()
    return [[u_inv[i][k] for i in range(len(u_inv))] for k in range(r)]


# ---------------------------------------------------------------------------
# congruences modulo a lattice


@dataclass(frozen=True)
class LatticeCosetSolutions:
    """All x with A x = b (mod L), described as

        point + integer combinations of lattice_gens + real span of kernel.

    ``torus_points`` counts solutions on the torus R^p / L when that count is
    finite and well defined (the solution set must be L-periodic), else None.
    """

    point: Vector
    lattice_gens: list[Vector]
    kernel: list[Vector]
    torus_points: Optional[int]

    @property
    def is_finite_on_torus(self) -> bool:
        return self.torus_points is not None


def solve_mod_lattice(A, b, L) -> Optional[LatticeCosetSolutions]:
    """Solve A x ≡ b (mod column lattice of L) for x in R^cols(A).

    A is integral, b rational, L a full-rank integer lattice basis of the
    ambient space of b.  Returns None when the congruence has no solution.
    Everything is reduced to integer/rational solves on the augmented system
    [A | -L], which is where the Smith normal form does its work.
    """
    rows, cols = shape(A)
    lr, lc = shape(L)
    if lr != rows or lc != rows:
        raise ValueError("lattice basis must be square of the ambient dimension")
    if determinant(L) == 0:
        raise ValueError("lattice basis is singular")
    if len(b) != rows:
        raise ValueError("dimension mismatch between A and b")
    b = [Fraction(x) for x in b]

    # Left-kernel rows of A cut the solvability condition on the lattice shift:
    # b + L k must lie in the column span of A.
    left_kernel = rational_kernel(transpose(A))
    if left_kernel:
        den = 1
        for row in left_kernel:
            for x in row:
                den = den * x.denominator // _gcd(den, x.denominator)
        Y = [[_as_int(x * den) for x in row] for row in left_kernel]
        YL = mat_mul(Y, L)
        rhs = [-sum(y * bi for y, bi in zip(row, b)) for row in Y]
        rhs_den = 1
        for x in rhs:
            rhs_den = rhs_den * x.denominator // _gcd(rhs_den, x.denominator)
        scaled = mat_scale(YL, rhs_den)
        scaled_rhs = [x * rhs_den for x in rhs]
        if any(x.denominator != 1 for x in scaled_rhs):
            return None
        sol = solve_linear(scaled, [x.numerator for x in scaled_rhs], ring="Z")
        if sol is None:
            return None
        k0, k_kernel = sol
    else:
        k0 = [0] * rows
        k_kernel = [list(row) for row in identity(rows)]

    shifted = vec_add(b, [Fraction(x) for x in mat_vec(L, k0)])
    part = _solve_rational(A, shifted)
    assert part is not None, "consistency was arranged by the left-kernel solve"
    x0, kernel = part

    lattice_gens = []
    for k in k_kernel:
        w = _solve_rational(A, mat_vec(L, k))
        assert w is not None
        lattice_gens.append(w[0])

    torus_points = _torus_point_count(A, L, lattice_gens, kernel)
    return LatticeCosetSolutions(
        point=x0, lattice_gens=lattice_gens, kernel=kernel, torus_points=torus_points
    )


def _torus_point_count(A, L, lattice_gens, kernel) -> Optional[int]:
    rows, cols = shape(A)
    if kernel or rows != cols or len(lattice_gens) != cols:
        return None
    # The count on the torus is [K : L] where K is the solution lattice; it is
    # only well defined when translating by L preserves solutions, i.e. every
    # column of L lies in K.
    W = transpose(lattice_gens)  # columns are the K-basis
    den = 1
    for row in W:
        for x in row:
            f = Fraction(x)
            den = den * f.denominator // _gcd(den, f.denominator)
    W_int = [[_as_int(Fraction(x) * den) for x in row] for row in W]
    L_scaled = mat_scale(L, den)
    sol = _rref_solve(W_int, L_scaled)
    if sol is None:
        return None
    if any(Fraction(x).denominator != 1 for row in sol for x in row):
        return None
    M = [[_as_int(Fraction(x)) for x in row] for row in sol]
    return abs(determinant(M))


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)
