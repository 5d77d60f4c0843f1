"""Two-step lattice extensions: presentation data and exact group arithmetic.

The groups handled here are extensions of a rank-2n lattice by a rank-2m
lattice, presented by

* pairwise commuting action matrices ``A_1 .. A_{2n}`` in GL(2m, Z), and
* commutator tails ``c[i, j]`` in Z^{2m} for i < j,

with the relation convention (1-based generator indices)

    x_j * x_i = fiber(c[i, j]) * x_i * x_j          for i < j
    x_i * fiber(a) * x_i^{-1} = fiber(A_i @ a)

Every element has the normal form ``fiber(v) * x_1^{t_1} ... x_{2n}^{t_{2n}}``
and is stored as the pair (v, t).  Multiplication collects words into normal
form exactly; associativity of the result is equivalent to the degree-2
consistency condition on the tails, which ``validate`` checks explicitly.

On top of the arithmetic sit the four structural/conditional checks used by
the model builder: validation with witnesses, the torsion test for the
extension class (by rational solvability of the lift relation system, which
directly produces the splitting vectors), the finite-index abelian subgroup
certificate, and the abelianization invariants.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

from . import exactla, matgroup
from .matgroup import (
    ClosureCapExceededError,
    DEFAULT_CLOSURE_CAP,
    FiniteActionGroup,
    NonCommutingGeneratorsError,
)

__all__ = [
    "ExtensionData",
    "GroupElement",
    "CheckResult",
    "ValidationReport",
    "CohomologyCertificate",
    "AbelianCert",
    "AbelianSubgroupResult",
    "InvalidExtensionError",
    "validate",
    "class_torsion",
    "abelian_subgroup",
    "abelianization",
    "multiply",
    "inverse",
    "identity_element",
    "word_normal_form",
    "action_of",
]


class InvalidExtensionError(ValueError):
    """The extension data violates a structural invariant."""


def _freeze_matrix(M):
    return tuple(tuple(int(x) for x in row) for row in M)


def _freeze_vector(v):
    return tuple(int(x) for x in v)


@dataclass(frozen=True)
class ExtensionData:
    """Presentation of one extension: ranks, actions, commutator tails.

    ``actions[i]`` is the matrix for generator i (0-based); ``tails`` maps the
    0-based pair (i, j) with i < j to a fiber vector, omitted pairs are zero.
    """

    m: int
    n: int
    actions: tuple
    tails: tuple  # ((i, j), vector) pairs, sorted, zero tails omitted

    @staticmethod
    def make(m: int, n: int, actions: Sequence, tails=None) -> "ExtensionData":
        if m < 1 or n < 1:
            raise InvalidExtensionError("ranks must be positive (m >= 1, n >= 1)")
        if len(actions) != 2 * n:
            raise InvalidExtensionError(f"expected {2 * n} action matrices, got {len(actions)}")
        frozen_actions = []
        for k, A in enumerate(actions):
            rows = len(A)
            if rows != 2 * m or any(len(row) != 2 * m for row in A):
                raise InvalidExtensionError(f"action {k + 1} is not {2 * m}x{2 * m}")
            frozen_actions.append(_freeze_matrix(A))
        cleaned = {}
        for (i, j), c in (tails or {}).items():
            if not (0 <= i < j < 2 * n):
                raise InvalidExtensionError(f"tail index ({i + 1}, {j + 1}) out of range")
            if len(c) != 2 * m:
                raise InvalidExtensionError(f"tail ({i + 1}, {j + 1}) has wrong length")
            v = _freeze_vector(c)
            if any(v):
                cleaned[(i, j)] = v
        return ExtensionData(
            m=m, n=n, actions=tuple(frozen_actions), tails=tuple(sorted(cleaned.items()))
        )

    @property
    def fiber_rank(self) -> int:
        return 2 * self.m

    @property
    def base_rank(self) -> int:
        return 2 * self.n

    def tail(self, i: int, j: int) -> tuple:
        """Tail vector for the 0-based pair i < j."""
        if not (0 <= i < j < self.base_rank):
            raise InvalidExtensionError(f"tail index ({i + 1}, {j + 1}) out of range")
        return self._tail_map.get((i, j), (0,) * self.fiber_rank)

    @cached_property
    def _tail_map(self) -> dict:
        return dict(self.tails)

    @cached_property
    def action_inverses(self) -> tuple:
        return tuple(
            _freeze_matrix(exactla.invert_unimodular([list(r) for r in A]))
            for A in self.actions
        )

    def action_power(self, i: int, e: int):
        """A_i^e by binary exponentiation (exact)."""
        base = self.actions[i] if e >= 0 else self.action_inverses[i]
        e = abs(e)
        result = exactla.identity(self.fiber_rank)
        square = [list(r) for r in base]
        while e:
            if e & 1:
                result = exactla.mat_mul(result, square)
            square = exactla.mat_mul(square, square) if e > 1 else square
            e >>= 1
        return result


def action_of(data: ExtensionData, t: Sequence[int]):
    """The action matrix of the base vector t: the product of A_i^{t_i}."""
    if len(t) != data.base_rank:
        raise ValueError("base vector has wrong length")
    out = exactla.identity(data.fiber_rank)
    for i, e in enumerate(t):
        if e:
            out = exactla.mat_mul(out, data.action_power(i, e))
    return out


def _geometric_sum(data: ExtensionData, i: int, e: int):
    """I + A_i + ... + A_i^{e-1} for e >= 0, and the matching twisted sum for
    negative e, so that conjugating a power always uses (A_i^e - I)-compatible
    corrections:  S(e + f) = S(e) + A_i^e S(f)."""
    d = data.fiber_rank
    if e == 0:
        return exactla.zeros(d, d)
    if e < 0:
        inv_pow = data.action_power(i, e)
        pos = _geometric_sum(data, i, -e)
        return exactla.mat_scale(exactla.mat_mul(inv_pow, pos), -1)
    if e == 1:
        return exactla.identity(d)
    half = e // 2
    s_half = _geometric_sum(data, i, half)
    out = exactla.mat_add(s_half, exactla.mat_mul(data.action_power(i, half), s_half))
    if e % 2:
        out = exactla.mat_add(out, data.action_power(i, e - 1))
    return out


# ---------------------------------------------------------------------------
# group elements and word arithmetic


@dataclass(frozen=True)
class GroupElement:
    """Normal form fiber(v) * x_1^{t_1} ... x_{2n}^{t_{2n}}."""

    v: tuple
    t: tuple

    def is_identity(self) -> bool:
        return not any(self.v) and not any(self.t)

    def __repr__(self):
        return f"GroupElement(v={list(self.v)}, t={list(self.t)})"


def identity_element(data: ExtensionData) -> GroupElement:
    return GroupElement(v=(0,) * data.fiber_rank, t=(0,) * data.base_rank)


def fiber_element(data: ExtensionData, v) -> GroupElement:
    if len(v) != data.fiber_rank:
        raise ValueError("fiber vector has wrong length")
    return GroupElement(v=_freeze_vector(v), t=(0,) * data.base_rank)


def base_generator(data: ExtensionData, i: int, e: int = 1) -> GroupElement:
    """The element x_i^e (1-based i)."""
    if not (1 <= i <= data.base_rank):
        raise ValueError(f"generator index {i} out of range")
    t = [0] * data.base_rank
    t[i - 1] = e
    return GroupElement(v=(0,) * data.fiber_rank, t=tuple(t))


def _fold_generator(data: ExtensionData, cur: list, i: int, e: int) -> list:
    """Fiber correction g with  X^cur * x_i^e = fiber(g) * X^{cur + e*e_i}.

    Passing x_i^e left across x_j^{cur_j} (j > i) emits a tail term, which is
    then conjugated to the front by everything to its left.
    """
    d = data.fiber_rank
    g = [0] * d
    if e == 0:
        return g
    s_i = None
    prefix = None
    for j in range(i + 1, data.base_rank):
        tj = cur[j]
        if tj == 0:
            continue
        c = data.tail(i, j)
        if not any(c):
            continue
        if s_i is None:
            s_i = _geometric_sum(data, i, e)
        if prefix is None:
            prefix = exactla.identity(d)
            for k in range(j):
                if cur[k]:
                    prefix = exactla.mat_mul(prefix, data.action_power(k, cur[k]))
            prefix_at = j
        else:
            for k in range(prefix_at, j):
                if cur[k]:
                    prefix = exactla.mat_mul(prefix, data.action_power(k, cur[k]))
            prefix_at = j
        term = exactla.mat_vec(
            exactla.mat_mul(prefix, exactla.mat_mul(_geometric_sum(data, j, tj), s_i)),
            list(c),
        )
        g = exactla.vec_add(g, term)
    return g


def multiply(a: GroupElement, b: GroupElement, data: ExtensionData) -> GroupElement:
    """Exact product of normal forms."""
    if len(a.v) != data.fiber_rank or len(b.v) != data.fiber_rank:
        raise ValueError("fiber parts have wrong length")
    if len(a.t) != data.base_rank or len(b.t) != data.base_rank:
        raise ValueError("base parts have wrong length")
    acc = exactla.vec_add(list(a.v), exactla.mat_vec(action_of(data, a.t), list(b.v)))
    cur = list(a.t)
    for i in range(data.base_rank):
        e = b.t[i]
        if e:
            acc = exactla.vec_add(acc, _fold_generator(data, cur, i, e))
            cur[i] += e
    return GroupElement(v=tuple(acc), t=tuple(cur))


def inverse(a: GroupElement, data: ExtensionData) -> GroupElement:
    """The inverse in normal form: solve (v, t) * (w, -t) = identity for w."""
    acc = [0] * data.fiber_rank
    cur = list(a.t)
    for i in range(data.base_rank):
        e = -a.t[i]
        if e:
            acc = exactla.vec_add(acc, _fold_generator(data, cur, i, e))
            cur[i] += e
    neg_t = [-x for x in a.t]
    rho_inv = action_of(data, neg_t)
    w = exactla.mat_vec(rho_inv, [-(x + y) for x, y in zip(a.v, acc)])
    return GroupElement(v=tuple(w), t=tuple(neg_t))


def conjugate(g: GroupElement, h: GroupElement, data: ExtensionData) -> GroupElement:
    """g h g^{-1}."""
    return multiply(multiply(g, h, data), inverse(g, data), data)


def commutator(a: GroupElement, b: GroupElement, data: ExtensionData) -> GroupElement:
    """a b a^{-1} b^{-1}."""
    return multiply(
        multiply(a, b, data), multiply(inverse(a, data), inverse(b, data), data), data
    )


def word_normal_form(word, data: ExtensionData) -> GroupElement:
    """Collect a word into normal form.

    Tokens: ("x", i, e) for x_i^e with 1-based i, and ("a", vector) for a
    fiber element.
    """
    out = identity_element(data)
    for token in word:
        if not token:
            raise ValueError("empty token in word")
        kind = token[0]
        if kind == "x":
            if len(token) != 3:
                raise ValueError(f"malformed generator token {token!r}")
            out = multiply(out, base_generator(data, token[1], token[2]), data)
        elif kind == "a":
            if len(token) != 2:
                raise ValueError(f"malformed fiber token {token!r}")
            out = multiply(out, fiber_element(data, token[1]), data)
        else:
            raise ValueError(f"unknown token kind {kind!r}")
    return out


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: Optional[str] = None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    image_order: Optional[int]
    group: Optional[FiniteActionGroup]

    @property
    def structural_ok(self) -> bool:
        return all(c.passed for c in self.checks if c.name != "finite_image")

    @property
    def condition_a(self) -> bool:
        return all(c.passed for c in self.checks if c.name == "finite_image")

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def _structural_checks(data: ExtensionData) -> list:
    checks = []
    k = data.base_rank

    invertible = True
    for i, A in enumerate(data.actions):
        if abs(exactla.determinant([list(r) for r in A])) != 1:
            checks.append(
                CheckResult("actions_invertible", False, f"action {i + 1} has |det| != 1")
            )
            invertible = False
    if invertible:
        checks.append(CheckResult("actions_invertible", True))

    commuting = True
    for i in range(k):
        for j in range(i + 1, k):
            Ai = [list(r) for r in data.actions[i]]
            Aj = [list(r) for r in data.actions[j]]
            if exactla.mat_mul(Ai, Aj) != exactla.mat_mul(Aj, Ai):
                checks.append(
                    CheckResult(
                        "actions_commute", False, f"actions {i + 1} and {j + 1} do not commute"
                    )
                )
                commuting = False
    if commuting:
        checks.append(CheckResult("actions_commute", True))

    consistent = True
    ident = exactla.identity(data.fiber_rank)
    for i in range(k):
        for j in range(i + 1, k):
            for l in range(j + 1, k):
                # (A_i - I) c_jl - (A_j - I) c_il + (A_l - I) c_ij = 0
                total = [0] * data.fiber_rank
                for (a, pair, sign) in (
                    (i, (j, l), 1),
                    (j, (i, l), -1),
                    (l, (i, j), 1),
                ):
                    Am = exactla.mat_sub([list(r) for r in data.actions[a]], ident)
                    total = exactla.vec_add(
                        total, exactla.vec_scale(exactla.mat_vec(Am, list(data.tail(*pair))), sign)
                    )
                if any(total):
                    checks.append(
                        CheckResult(
                            "cocycle_consistency",
                            False,
                            f"triple ({i + 1}, {j + 1}, {l + 1}) violates consistency",
                        )
                    )
                    consistent = False
    if consistent:
        checks.append(CheckResult("cocycle_consistency", True))
    return checks


def validate(data: ExtensionData, cap: int = DEFAULT_CLOSURE_CAP) -> ValidationReport:
    """Structural checks plus condition (a); failures are report entries."""
    checks = _structural_checks(data)
    structural_ok = all(c.passed for c in checks)

    image_order = None
    group = None
    if structural_ok:
        infinite = [
            i + 1
            for i, A in enumerate(data.actions)
            if matgroup.finite_order([list(r) for r in A]) is None
        ]
        if infinite:
            checks.append(
                CheckResult(
                    "finite_image", False, f"action {infinite[0]} has infinite order"
                )
            )
        else:
            try:
                group = matgroup.closure([[list(r) for r in A] for A in data.actions], cap=cap)
                image_order = group.order
                checks.append(CheckResult("finite_image", True, f"image order {image_order}"))
            except ClosureCapExceededError as e:
                checks.append(CheckResult("finite_image", False, str(e)))
            except NonCommutingGeneratorsError as e:  # pragma: no cover - guarded above
                checks.append(CheckResult("finite_image", False, str(e)))
    else:
        checks.append(
            CheckResult("finite_image", False, "skipped: structural checks failed")
        )

    return ValidationReport(checks=tuple(checks), image_order=image_order, group=group)


def _require_structural(data: ExtensionData):
    failures = [c for c in _structural_checks(data) if not c.passed]
    if failures:
        raise InvalidExtensionError(f"{failures[0].name}: {failures[0].witness}")


# ---------------------------------------------------------------------------
# condition (d): torsion of the extension class


@dataclass(frozen=True)
class CohomologyCertificate:
    """Result of the torsion test for the extension class.

    When ``torsion`` holds, ``splitting_vectors[i]`` is a rational fiber
    vector u_i such that the lifts (u_i, e_i) satisfy every defining relation
    in the rational semidirect product; this is the splitting of the pushed
    out extension that the construction needs.
    """

    torsion: bool
    splitting_vectors: Optional[tuple]

    def vector(self, i: int) -> tuple:
        return self.splitting_vectors[i]


def _lift_relation_system(data: ExtensionData):
    """Matrix and rhs of the relation system for lifts (u_i, e_i):

        (A_j - I) u_i - (A_i - I) u_j = c[i, j]   for all i < j.
    """
    d = data.fiber_rank
    k = data.base_rank
    ident = exactla.identity(d)
    rows = []
    rhs = []
    for i in range(k):
        for j in range(i + 1, k):
            Aj = exactla.mat_sub([list(r) for r in data.actions[j]], ident)
            Ai = exactla.mat_sub([list(r) for r in data.actions[i]], ident)
            for r in range(d):
                row = [0] * (k * d)
                for c in range(d):
                    row[i * d + c] += Aj[r][c]
                    row[j * d + c] -= Ai[r][c]
                rows.append(row)
            rhs.extend(data.tail(i, j))
    return rows, rhs


def class_torsion(data: ExtensionData) -> CohomologyCertificate:
    """Condition (d): the class has finite order iff the lift relation system
    is solvable over Q."""
    _require_structural(data)
    rows, rhs = _lift_relation_system(data)
    if not rows:
        return CohomologyCertificate(
            torsion=True,
            splitting_vectors=tuple((Fraction(0),) * data.fiber_rank for _ in range(data.base_rank)),
        )
    sol = exactla.solve_linear(rows, rhs, ring="Q")
    if sol is None:
        return CohomologyCertificate(torsion=False, splitting_vectors=None)
    x, _ = sol
    d = data.fiber_rank
    vectors = tuple(
        tuple(Fraction(v) for v in x[i * d : (i + 1) * d]) for i in range(data.base_rank)
    )
    return CohomologyCertificate(torsion=True, splitting_vectors=vectors)


def check_splitting(data: ExtensionData, vectors) -> bool:
    """Substitution check: do the lifts (u_i, e_i) satisfy all relations?"""
    d = data.fiber_rank
    ident = exactla.identity(d)
    for i in range(data.base_rank):
        for j in range(i + 1, data.base_rank):
            Aj = exactla.mat_sub([list(r) for r in data.actions[j]], ident)
            Ai = exactla.mat_sub([list(r) for r in data.actions[i]], ident)
            lhs = exactla.vec_sub(
                exactla.mat_vec(Aj, list(vectors[i])), exactla.mat_vec(Ai, list(vectors[j]))
            )
            if lhs != [Fraction(c) for c in data.tail(i, j)]:
                return False
    return True


# ---------------------------------------------------------------------------
# Lemma-level certificate: finite-index normal abelian subgroup


@dataclass(frozen=True)
class AbelianCert:
    """Certificate that the group is virtually abelian.

    ``kernel_basis`` spans the finite-index sublattice of the base acting
    trivially on the fiber; ``delta_generators`` (fiber basis plus canonical
    lifts of the kernel basis) generate a normal abelian subgroup of the given
    index.  ``integral_splitting`` holds the fiber parts of the chosen lifts.
    """

    kernel_basis: tuple
    index: int
    delta_generators: tuple
    integral_splitting: tuple

    def member(self, g: GroupElement) -> bool:
        """Membership in the subgroup: the base part must lie in the kernel
        lattice (the fiber part is unconstrained)."""
        basis_cols = [list(col) for col in zip(*self.kernel_basis)]
        return exactla.solve_linear(basis_cols, list(g.t), ring="Z") is not None


@dataclass(frozen=True)
class AbelianSubgroupResult:
    certificate: Optional[AbelianCert]
    failed_condition: Optional[str]

    @property
    def ok(self) -> bool:
        return self.certificate is not None


def abelian_subgroup(
    data: ExtensionData, cap: int = DEFAULT_CLOSURE_CAP
) -> AbelianSubgroupResult:
    """Construct the finite-index normal abelian subgroup when conditions (a)
    and (d) hold; report the failing condition otherwise."""
    report = validate(data, cap=cap)
    if not report.structural_ok:
        _require_structural(data)  # raises with the first failure
    if not report.condition_a:
        return AbelianSubgroupResult(certificate=None, failed_condition="(a)")
    torsion = class_torsion(data)
    if not torsion.torsion:
        return AbelianSubgroupResult(certificate=None, failed_condition="(d)")

    group = report.group
    # The kernel lattice is generated by the closure's word relations.
    rel_cols = [list(col) for col in zip(*group.relations)] if group.relations else [
        [] for _ in range(data.base_rank)
    ]
    if group.relations:
        basis = exactla.column_lattice_basis(rel_cols)
    else:
        basis = [list(r) for r in exactla.identity(data.base_rank)]
    if len(basis) != data.base_rank:
        raise AssertionError("kernel lattice must have full rank for a finite image")
    index = abs(exactla.determinant([list(col) for col in zip(*basis)]))
    if index != group.order:
        raise AssertionError("kernel index disagrees with the image order")

    gens = []
    for p in range(data.fiber_rank):
        e = [0] * data.fiber_rank
        e[p] = 1
        gens.append(fiber_element(data, e))
    splitting = []
    for d_vec in basis:
        lift = GroupElement(v=(0,) * data.fiber_rank, t=tuple(d_vec))
        gens.append(lift)
        splitting.append(lift.v)
    cert = AbelianCert(
        kernel_basis=tuple(tuple(v) for v in basis),
        index=index,
        delta_generators=tuple(gens),
        integral_splitting=tuple(splitting),
    )

    # The splitting exists by the torsion-freeness argument; a failure here is
    # an internal inconsistency, not a property of the input.
    for a in cert.delta_generators:
        for b in cert.delta_generators:
            if multiply(a, b, data) != multiply(b, a, data):
                raise AssertionError("canonical lifts of the kernel basis do not commute")
    for gamma in _ambient_generators(data):
        for delta in cert.delta_generators:
            if not cert.member(conjugate(gamma, delta, data)):
                raise AssertionError("subgroup is not normal")
    return AbelianSubgroupResult(certificate=cert, failed_condition=None)


def _ambient_generators(data: ExtensionData):
    for p in range(data.fiber_rank):
        e = [0] * data.fiber_rank
        e[p] = 1
        yield fiber_element(data, e)
    for i in range(1, data.base_rank + 1):
        yield base_generator(data, i, 1)
        yield base_generator(data, i, -1)


# ---------------------------------------------------------------------------
# abelianization


def abelianization(data: ExtensionData) -> tuple[int, list[int]]:
    """(b1, torsion invariant factors) of the abelianized group.

    Abelianizing kills the columns of every (A_i - I) and every tail, all
    inside the fiber summand; the base summand survives freely.
    """
    _require_structural(data)
    d = data.fiber_rank
    ident = exactla.identity(d)
    cols = []
    for A in data.actions:
        diff = exactla.mat_sub([list(r) for r in A], ident)
        for c in range(d):
            cols.append([diff[r][c] for r in range(d)])
    for (_, c) in data.tails:
        cols.append(list(c))
    if not cols:
        return 2 * data.m + 2 * data.n, []
    M = [list(col) for col in zip(*cols)]
    free_rank, torsion = exactla.cokernel_invariants(M)
    return data.base_rank + free_rank, torsion
