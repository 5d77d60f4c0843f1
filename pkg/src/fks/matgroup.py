"""Finite commuting groups of integer matrices.

The groups handled here are images of homomorphisms from a free abelian group
into GL(d, Z), given by a list of pairwise commuting generator matrices.  The
module provides:

* ``finite_order`` -- multiplicative order of a single matrix, decided by
  cyclotomic factorization of its minimal polynomial (exact, no order table);
* ``closure`` -- breadth-first closure of the generated group with a size cap,
  tracking a word (generator-exponent vector) per element and the lattice of
  relations among the generators;
* ``isotypic`` -- joint eigenspace decomposition over R, split into real-type
  components (every generator acts as +-1) and complex-pair components, with
  exact rational bases whenever the joint characters live in orders
  {1, 2, 3, 4, 6} and flagged floating bases otherwise;
* ``average_form`` -- group averaging of a positive-definite form, exact.

Eigenvector clustering is floating point (tolerance 1e-9), but every
decomposition that can be certified exactly is: real-type components come from
integer kernels, complex-pair components from rational group-character
projectors verified by exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import exactla

__all__ = [
    "FiniteActionGroup",
    "IsotypicComponent",
    "IsotypicDecomposition",
    "NonCommutingGeneratorsError",
    "ClosureCapExceededError",
    "finite_order",
    "closure",
    "isotypic",
    "average_form",
    "DEFAULT_CLOSURE_CAP",
]

DEFAULT_CLOSURE_CAP = 10000

CLUSTER_TOL = 1e-9


class NonCommutingGeneratorsError(ValueError):
    """The generators do not commute, so they cannot be the images of a
    homomorphism out of a free abelian group."""

    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(f"generators {i + 1} and {j + 1} do not commute")


class ClosureCapExceededError(RuntimeError):
    """Group closure grew past the configured cap (infinite image, or the
    cap is too small)."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"group closure exceeded cap {cap}")


# ---------------------------------------------------------------------------
# polynomial helpers (coefficient lists, low degree first, Fraction entries)


def _poly_trim(p):
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _poly_trim(out)


def _poly_divmod(p, q):
    rem = _poly_trim([Fraction(x) for x in p])
    q = _poly_trim([Fraction(x) for x in q])
    if q == [Fraction(0)]:
        raise ZeroDivisionError("division by zero polynomial")
    dq = len(q) - 1
    quot = [Fraction(0)] * max(1, len(rem) - dq)
    while len(rem) - 1 >= dq and any(rem):
        k = len(rem) - 1 - dq
        c = rem[-1] / q[-1]
        quot[k] = c
        for j in range(len(q)):
            rem[k + j] -= c * q[j]
        rem = _poly_trim(rem)
    return _poly_trim(quot), rem


def _poly_deriv(p):
    if len(p) <= 1:
        return [Fraction(0)]
    return [Fraction(i) * c for i, c in enumerate(p)][1:]


def _poly_gcd(p, q):
    p = _poly_trim([Fraction(x) for x in p])
    q = _poly_trim([Fraction(x) for x in q])
    while any(q):
        _, r = _poly_divmod(p, q)
        p, q = q, r
    if p[-1] != 0:
        p = [c / p[-1] for c in p]
    return p


@lru_cache(maxsize=None)
def _cyclotomic(k: int) -> tuple:
    """Coefficients of the k-th cyclotomic polynomial (exact)."""
    if k == 1:
        return (Fraction(-1), Fraction(1))
    p = [Fraction(-1)] + [Fraction(0)] * (k - 1) + [Fraction(1)]  # x^k - 1
    for d in range(1, k):
        if k % d == 0:
            q, r = _poly_divmod(p, list(_cyclotomic(d)))
            assert not any(r), "cyclotomic division must be exact"
            p = q
    return tuple(p)


def _euler_phi(k: int) -> int:
    out = k
    d = 2
    while d * d <= k:
        if k % d == 0:
            out -= out // d
            while k % d == 0:
                k //= d
        d += 1
    if k > 1:
        out -= out // k
    return out


def _cyclotomic_candidates(max_degree: int):
    # phi(k) >= sqrt(k/2) so phi(k) <= D forces k <= 2 D^2.
    for k in range(1, 2 * max_degree * max_degree + 2):
        if _euler_phi(k) <= max_degree:
            yield k


def minimal_polynomial(M) -> list[Fraction]:
    """Monic minimal polynomial of a square matrix, by finding the first
    linear dependence among the flattened powers I, M, M^2, ..."""
    n, m = exactla.shape(M)
    if n != m:
        raise ValueError("minimal polynomial of a non-square matrix")
    dim = n * n
    # incremental RREF over the flattened powers, carrying the combination of
    # powers that produced each reduced row
    reduced: list[tuple[list[Fraction], list[Fraction], int]] = []
    power = exactla.identity(n)
    k = 0
    while True:
        vec = [Fraction(x) for row in power for x in row]
        combo = [Fraction(0)] * (k + 1)
        combo[k] = Fraction(1)
        for rvec, rcombo, piv in reduced:
            f = vec[piv]
            if f != 0:
                vec = [a - f * b for a, b in zip(vec, rvec)]
                for i, b in enumerate(rcombo):
                    combo[i] -= f * b
        piv = next((i for i, x in enumerate(vec) if x != 0), None)
        if piv is None:
            # first dependence: combo is the minimal polynomial (monic, since
            # earlier combos never touch the x^k coefficient)
            assert combo[-1] == 1
            return combo
        inv = 1 / vec[piv]
        vec = [x * inv for x in vec]
        combo = [c * inv for c in combo]
        reduced.append((vec, combo, piv))
        power = exactla.mat_mul(power, M)
        k += 1
        if k > dim + 1:
            raise AssertionError("minimal polynomial search exceeded dimension bound")


def finite_order(M) -> Optional[int]:
    """Multiplicative order of M in GL(n, Z), or None if infinite.

    Finite order holds exactly when the minimal polynomial is a squarefree
    product of cyclotomic polynomials; the order is the lcm of their indices.
    """
    n, m = exactla.shape(M)
    if n != m:
        raise ValueError("finite_order needs a square matrix")
    if abs(exactla.determinant(M)) != 1:
        raise ValueError("matrix is not invertible over Z")
    p = minimal_polynomial(M)
    g = _poly_gcd(p, _poly_deriv(p))
    if len(g) > 1:
        return None  # not squarefree, hence not semisimple
    remaining = p
    order = 1
    for k in _cyclotomic_candidates(len(p) - 1):
        if len(remaining) == 1:
            break
        phi = _euler_phi(k)
        if phi > len(remaining) - 1:
            continue
        q, r = _poly_divmod(remaining, list(_cyclotomic(k)))
        if not any(r):
            remaining = q
            order = order * k // math.gcd(order, k)
    if len(remaining) > 1 or remaining[0] != 1:
        return None
    return order


# ---------------------------------------------------------------------------
# group closure


def _freeze(M) -> tuple:
    return tuple(tuple(int(x) for x in row) for row in M)


@dataclass(frozen=True)
class FiniteActionGroup:
    """A finite abelian subgroup of GL(d, Z) with generator words.

    ``elements[k]`` carries the exponent vector ``words[k]``: applying the
    generators with those exponents reproduces the element.  ``relations``
    generate the lattice of exponent vectors that map to the identity (the
    kernel of the evaluation map Z^len(generators) -> group).
    """

    generators: tuple
    elements: tuple
    words: tuple
    relations: tuple
    order: int

    @property
    def dim(self) -> int:
        return len(self.generators[0]) if self.generators else 0

    def index_of(self, M) -> int:
        return self.elements.index(_freeze(M))

    def eigenvalue_shadow(self) -> list[tuple[Fraction, ...]]:
        """Per-element eigenvalue data: for each element, the sorted multiset
        of eigenvalue angles (as fractions of a full turn), from cyclotomic
        factorization of its characteristic polynomial."""
        out = []
        for el in self.elements:
            p = _char_poly(el)
            angles: list[Fraction] = []
            remaining = p
            for k in _cyclotomic_candidates(len(p) - 1):
                while len(remaining) > 1:
                    q, r = _poly_divmod(remaining, list(_cyclotomic(k)))
                    if any(r):
                        break
                    remaining = q
                    angles.extend(
                        Fraction(j, k) for j in range(k) if math.gcd(j, k) == 1
                    )
            assert len(remaining) == 1, "element of a finite group must be semisimple"
            out.append(tuple(sorted(angles)))
        return out


def _char_poly(M) -> list[Fraction]:
    """Characteristic polynomial det(xI - M) via exact interpolation."""
    n, _ = exactla.shape(M)
    xs = list(range(n + 1))
    ys = []
    for x in xs:
        shifted = [[(x if i == j else 0) - M[i][j] for j in range(n)] for i in range(n)]
        ys.append(exactla.determinant(shifted))
    # Lagrange interpolation on n+1 integer points
    coeffs = [Fraction(0)] * (n + 1)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                basis = _poly_mul(basis, [Fraction(-xj), Fraction(1)])
                denom *= xi - xj
        scale = Fraction(yi) / denom
        for k, c in enumerate(basis):
            coeffs[k] += scale * c
    return _poly_trim(coeffs)


def closure(generators: Sequence, cap: int = DEFAULT_CLOSURE_CAP) -> FiniteActionGroup:
    """BFS closure of commuting generators under multiplication and inversion.

    Raises ClosureCapExceededError when the group would exceed ``cap`` and
    NonCommutingGeneratorsError when the generators fail to commute.
    """
    gens = [_freeze(g) for g in generators]
    if gens:
        d = len(gens[0])
        for g in gens:
            if len(g) != d or any(len(row) != d for row in g):
                raise ValueError("generators must be square matrices of equal size")
            if abs(exactla.determinant(g)) != 1:
                raise ValueError("generator is not invertible over Z")
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                if exactla.mat_mul(gens[i], gens[j]) != exactla.mat_mul(gens[j], gens[i]):
                    raise NonCommutingGeneratorsError(i, j)
    else:
        d = 0

    steps = []
    for i, g in enumerate(gens):
        steps.append((i, 1, g))
        steps.append((i, -1, _freeze(exactla.invert_unimodular(g))))

    ident = _freeze(exactla.identity(d))
    words: dict[tuple, tuple] = {ident: tuple([0] * len(gens))}
    order_list = [ident]
    relations: set[tuple] = set()
    queue = [ident]
    while queue:
        current = queue.pop(0)
        t = words[current]
        for i, sign, g in steps:
            nxt = _freeze(exactla.mat_mul(current, g))
            word = tuple(x + (sign if k == i else 0) for k, x in enumerate(t))
            if nxt not in words:
                if len(words) >= cap:
                    raise ClosureCapExceededError(cap)
                words[nxt] = word
                order_list.append(nxt)
                queue.append(nxt)
            else:
                rel = tuple(a - b for a, b in zip(word, words[nxt]))
                if any(rel):
                    relations.add(rel)
    return FiniteActionGroup(
        generators=tuple(gens),
        elements=tuple(order_list),
        words=tuple(words[el] for el in order_list),
        relations=tuple(sorted(relations)),
        order=len(order_list),
    )


# ---------------------------------------------------------------------------
# isotypic decomposition


@dataclass(frozen=True)
class IsotypicComponent:
    """One joint isotypic piece of the action on R^d.

    ``angles`` holds one eigenvalue angle per generator, as a fraction of a
    full turn in [0, 1); real-type components have every angle in {0, 1/2}.
    For complex-pair components the angles follow a consistent orientation
    (one of the two conjugate characters).  ``basis`` is exact (Fractions)
    when certification succeeded, else None with ``basis_float`` the fallback.
    """

    kind: str  # "real" | "pair"
    dimension: int
    angles: tuple
    basis: Optional[list]
    basis_float: np.ndarray
    projector: Optional[list]
    projector_float: np.ndarray
    exact: bool


@dataclass(frozen=True)
class IsotypicDecomposition:
    group: FiniteActionGroup
    components: tuple

    @property
    def dim(self) -> int:
        return self.group.dim

    def all_exact(self) -> bool:
        return all(c.exact for c in self.components)


_RATIONAL_COS = {
    (0, 1): Fraction(1),
    (1, 2): Fraction(-1),
    (1, 3): Fraction(-1, 2),
    (2, 3): Fraction(-1, 2),
    (1, 4): Fraction(0),
    (3, 4): Fraction(0),
    (1, 6): Fraction(1, 2),
    (5, 6): Fraction(1, 2),
}


def _rational_cos(theta: Fraction) -> Optional[Fraction]:
    theta = theta % 1
    return _RATIONAL_COS.get((theta.numerator, theta.denominator))


def isotypic(group: FiniteActionGroup) -> IsotypicDecomposition:
    """Joint isotypic decomposition of a finite commuting action on R^d."""
    d = group.dim
    gens = group.generators
    if not gens or d == 0:
        raise ValueError("isotypic needs at least one generator matrix")
    orders = [finite_order(list(map(list, g))) for g in gens]
    if any(o is None for o in orders):
        raise ValueError("isotypic requires a finite group")
    gens_np = [np.array(g, dtype=float) for g in gens]

    clusters = _cluster_joint_eigenvectors(gens_np, orders)

    components = []
    seen = set()
    for char in sorted(clusters, key=lambda c: [(t.numerator, t.denominator) for t in c]):
        if char in seen:
            continue
        vectors = clusters[char]
        if all(t in (Fraction(0), Fraction(1, 2)) for t in char):
            seen.add(char)
            components.append(_real_component(group, char, len(vectors)))
        else:
            conj = tuple((-t) % 1 for t in char)
            if conj not in clusters:
                raise AssertionError("conjugate character cluster missing")
            seen.add(char)
            seen.add(conj)
            components.append(_pair_component(group, char, vectors))

    total = sum(c.dimension for c in components)
    if total != d:
        raise AssertionError(f"component dimensions sum to {total}, expected {d}")
    return IsotypicDecomposition(group=group, components=tuple(components))


def _cluster_joint_eigenvectors(gens_np, orders):
    """Group eigenvectors of a random commuting combination by their exact
    joint character; retried with fresh weights if verification fails."""
    d = gens_np[0].shape[0]
    rng = np.random.default_rng(20270318)
    scale = max(np.abs(g).max() for g in gens_np) + 1.0
    last_err = None
    for _ in range(32):
        weights = rng.uniform(1.0, 2.0, size=len(gens_np))
        T = sum(w * g for w, g in zip(weights, gens_np))
        _, vecs = np.linalg.eig(T)
        clusters: dict[tuple, list] = {}
        ok = True
        for idx in range(d):
            v = vecs[:, idx]
            char = []
            for g, o in zip(gens_np, orders):
                gv = g @ v
                lam = np.vdot(v, gv) / np.vdot(v, v)
                theta = Fraction(round((np.angle(lam) / (2 * np.pi)) % 1.0 * o), o) % 1
                lam_exact = np.exp(2j * np.pi * float(theta))
                if np.linalg.norm(gv - lam_exact * v) > CLUSTER_TOL * scale * np.linalg.norm(v):
                    ok = False
                    break
                char.append(theta)
            if not ok:
                break
            clusters.setdefault(tuple(char), []).append(v)
        if ok:
            return clusters
        last_err = "joint eigenvector verification failed"
    raise RuntimeError(f"isotypic clustering did not converge: {last_err}")


def _real_component(group, char, expected_dim):
    """Real-type component: exact integer kernel of the stacked (A_i -+ I)."""
    d = group.dim
    stacked = []
    for g, theta in zip(group.generators, char):
        s = 1 if theta == 0 else -1
        stacked.extend(
            [g[i][j] - (s if i == j else 0) for j in range(d)] for i in range(d)
        )
    basis = exactla.integer_kernel(stacked)
    if len(basis) != expected_dim:
        raise AssertionError("real component dimension mismatch with float clustering")
    projector = _character_projector(group, char)
    assert projector is not None, "real characters always give rational projectors"
    _verify_projector(group, projector, expected_dim)
    return IsotypicComponent(
        kind="real",
        dimension=expected_dim,
        angles=char,
        basis=[[Fraction(x) for x in v] for v in basis],
        basis_float=np.array([[float(x) for x in v] for v in basis], dtype=float).T
        if basis
        else np.zeros((d, 0)),
        projector=projector,
        projector_float=np.array([[float(x) for x in row] for row in projector]),
        exact=True,
    )


def _pair_component(group, char, vectors):
    """Complex-pair component; exact via the rational character projector when
    the joint character takes values of order 1, 2, 3, 4 or 6 only."""
    d = group.dim
    dim = 2 * len(vectors)
    projector = _character_projector(group, char)
    if projector is None:
        proj_float = _float_projector(group, char)
        basis_float = _projector_column_space(proj_float, dim)
        return IsotypicComponent(
            kind="pair",
            dimension=dim,
            angles=char,
            basis=None,
            basis_float=basis_float,
            projector=None,
            projector_float=proj_float,
            exact=False,
        )
    _verify_projector(group, projector, dim)
    basis = _column_space_basis(projector)
    if len(basis) != dim:
        raise AssertionError("pair component dimension mismatch")
    return IsotypicComponent(
        kind="pair",
        dimension=dim,
        angles=char,
        basis=basis,
        basis_float=np.array(
            [[float(x) for x in v] for v in basis], dtype=float
        ).T,
        projector=projector,
        projector_float=np.array([[float(x) for x in row] for row in projector]),
        exact=True,
    )


def _projector_column_space(P: np.ndarray, dim: int) -> np.ndarray:
    # nonzero singular values of an idempotent are >= 1
    u, s, _ = np.linalg.svd(P)
    if sum(1 for x in s if x > 0.5) != dim:
        raise AssertionError("float projector rank mismatch")
    return u[:, :dim]


def _element_angle(char, word) -> Fraction:
    return sum((t * w for t, w in zip(char, word)), Fraction(0)) % 1


def _character_projector(group, char) -> Optional[list]:
    """(2/|G|) sum_g Re(chi(g^-1)) rho(g), exact when every character value
    has rational real part (value order in {1, 2, 3, 4, 6})."""
    d = group.dim
    real_type = all(t in (Fraction(0), Fraction(1, 2)) for t in char)
    total = exactla.zeros(d, d)
    for el, word in zip(group.elements, group.words):
        theta = _element_angle(char, word)
        c = _rational_cos(theta)
        if c is None:
            return None
        if c:
            total = exactla.mat_add(total, exactla.mat_scale(list(map(list, el)), c))
    factor = Fraction(1 if real_type else 2, group.order)
    return [[factor * Fraction(x) for x in row] for row in total]


def _float_projector(group, char) -> np.ndarray:
    d = group.dim
    total = np.zeros((d, d))
    for el, word in zip(group.elements, group.words):
        theta = _element_angle(char, word)
        total += math.cos(2 * math.pi * float(theta)) * np.array(el, dtype=float)
    return (2.0 / group.order) * total


def _verify_projector(group, P, expected_dim):
    PP = exactla.mat_mul(P, P)
    if not exactla.mat_eq(PP, P):
        raise AssertionError("character projector is not idempotent")
    tr = sum(P[i][i] for i in range(len(P)))
    if tr != expected_dim:
        raise AssertionError("character projector has wrong rank")
    for g in group.generators:
        if not exactla.mat_eq(exactla.mat_mul(list(map(list, g)), P),
                              exactla.mat_mul(P, list(map(list, g)))):
            raise AssertionError("projector does not commute with a generator")


def _column_space_basis(P) -> list:
    """Pivot columns of P as an exact basis of its column space."""
    rows, cols = exactla.shape(P)
    M = [[Fraction(x) for x in row] for row in P]
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
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return [[Fraction(P[i][c]) for i in range(rows)] for c in pivots]


# ---------------------------------------------------------------------------
# invariant forms


def average_form(group: FiniteActionGroup, seed) -> list:
    """Average gᵀ S g over the group: the unique G-invariant form built from
    the seed.  Exact rational arithmetic; the result is positive definite
    whenever the seed is."""
    d = group.dim
    rows, cols = exactla.shape(seed)
    if rows != d or cols != d:
        raise ValueError(f"seed must be {d}x{d}")
    S = [[Fraction(x) for x in row] for row in seed]
    if not exactla.mat_eq(S, exactla.transpose(S)):
        raise ValueError("seed form must be symmetric")
    if not is_positive_definite(S):
        raise ValueError("seed form must be positive definite")
    total = exactla.zeros(d, d)
    for el in group.elements:
        g = list(map(list, el))
        total = exactla.mat_add(total, exactla.mat_mul(exactla.transpose(g), exactla.mat_mul(S, g)))
    inv = Fraction(1, group.order)
    return [[inv * x for x in row] for row in total]


def is_positive_definite(S) -> bool:
    """Exact Sylvester criterion: all leading principal minors positive."""
    n, m = exactla.shape(S)
    if n != m:
        raise ValueError("form must be square")
    for k in range(1, n + 1):
        minor = [[Fraction(S[i][j]) for j in range(k)] for i in range(k)]
        if _fraction_det(minor) <= 0:
            return False
    return True


def _fraction_det(M) -> Fraction:
    n = len(M)
    M = [list(row) for row in M]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        inv = 1 / M[c][c]
        for i in range(c + 1, n):
            if M[i][c]:
                f = M[i][c] * inv
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return det
