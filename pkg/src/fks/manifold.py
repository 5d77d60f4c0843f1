"""Assembly of the full quotient model from certified extension data.

``build`` runs the whole pipeline: structural validation, the four
conditions, the splitting embedding into the real semidirect product, the
finite-index abelian subgroup, and the averaged invariant metric.  On failure
it returns a diagnostic naming the first failed condition with a witness; on
success a model that can answer for its geometry:

* the affine action of the group on V = R^{2m} (+) R^{2n} (complex affine
  with respect to the chosen structure J),
* the presentation as a finite free quotient of a torus (translation lattice
  plus deck transformations, freeness verified by solving the fixed-point
  congruences),
* the canonical bundle-over-a-torus presentation (saturated fiber lattice),
* topological invariants: first Betti number, torsion of the abelianized
  group, fiber and base ranks.

Conditions are named in the order structural, (a), (d), (c), (b): the two
spectral conditions (b) and (c) provably fail together on this class of data
(odd real-type components come in pairs, at most one of them fixed), and the
complex-structure obstruction is the one worth reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import cxstruct, exactla, extension, matgroup
from .cxstruct import ComplexStructureData, RealExtensionCert
from .extension import (
    AbelianCert,
    CohomologyCertificate,
    ExtensionData,
    GroupElement,
    ValidationReport,
)
from .matgroup import DEFAULT_CLOSURE_CAP, FiniteActionGroup, IsotypicDecomposition
from .sqrtfield import SqrtMatrix
from .sqrtfield import is_positive_definite as sqrt_is_positive_definite

__all__ = [
    "Diagnostic",
    "AffineMap",
    "MetricData",
    "SolvmanifoldModel",
    "TorusQuotientPresentation",
    "FibrationPresentation",
    "build",
    "affine_action",
    "invariant_metric",
    "torus_quotient",
    "fixed_points",
    "canonical_fibration",
    "is_torus",
    "completely_solvable",
]

FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class Diagnostic:
    """A rejection: the first failed condition and its witness."""

    condition: str  # "structural" | "(a)" | "(b)" | "(c)" | "(d)"
    witness: str

    def __str__(self):
        return f"{self.condition}: {self.witness}"


@dataclass(frozen=True)
class AffineMap:
    """x -> linear @ x + translation on V, exact entries."""

    linear: tuple
    translation: tuple

    def apply(self, p: Sequence) -> list:
        moved = exactla.mat_vec([list(r) for r in self.linear], [Fraction(x) for x in p])
        return [a + b for a, b in zip(moved, self.translation)]

    def compose(self, other: "AffineMap") -> "AffineMap":
        lin = exactla.mat_mul([list(r) for r in self.linear], [list(r) for r in other.linear])
        trans = exactla.vec_add(
            exactla.mat_vec([list(r) for r in self.linear], list(other.translation)),
            list(self.translation),
        )
        return AffineMap(
            linear=tuple(tuple(x for x in row) for row in lin), translation=tuple(trans)
        )

    def is_identity(self) -> bool:
        n = len(self.linear)
        return all(
            self.linear[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n)
        ) and not any(self.translation)


@dataclass(frozen=True)
class MetricData:
    """Invariant positive-definite form on V, compatible with J."""

    exact: Optional[SqrtMatrix]
    matrix_float: np.ndarray
    seed: tuple
    is_exact: bool


@dataclass(frozen=True)
class TorusQuotientPresentation:
    lattice: tuple  # basis of the translation lattice in V (columns as vectors)
    deck_group: tuple  # AffineMap coset representatives, identity first
    deck_order: int
    freeness_verified: bool


@dataclass(frozen=True)
class FibrationPresentation:
    fiber_rank: int
    base_rank: int
    fiber_lattice: tuple  # saturated basis inside the fiber lattice
    component_torsion: tuple


@dataclass(frozen=True)
class SolvmanifoldModel:
    data: ExtensionData
    validation: ValidationReport
    cohomology: CohomologyCertificate
    real_extension: RealExtensionCert
    cxstructure: ComplexStructureData
    abelian: AbelianCert
    group: FiniteActionGroup
    decomposition: IsotypicDecomposition
    metric: MetricData
    b1: int
    torsion_factors: tuple

    @property
    def fiber_rank(self) -> int:
        return self.data.fiber_rank

    @property
    def base_rank(self) -> int:
        return self.data.base_rank

    @property
    def dim(self) -> int:
        return self.fiber_rank + self.base_rank

    @property
    def splitting(self) -> tuple:
        return self.cohomology.splitting_vectors

    def embed(self, g: GroupElement) -> AffineMap:
        """The affine transformation of V realizing g under the splitting
        embedding x_i -> (u_i, e_i)."""
        data = self.data
        u = [Fraction(x) for x in g.v]
        s = [0] * data.base_rank
        for i in range(data.base_rank):
            e = g.t[i]
            if e:
                # xi_i^e has fiber part S(A_i, e) u_i in the semidirect product
                step = exactla.mat_vec(
                    extension._geometric_sum(data, i, e),
                    list(self.splitting[i]),
                )
                rho_s = extension.action_of(data, s)
                u = exactla.vec_add(u, exactla.mat_vec(rho_s, step))
                s[i] += e
        rho = extension.action_of(data, list(g.t))
        d = self.dim
        linear = exactla.identity(d)
        for i in range(data.fiber_rank):
            for j in range(data.fiber_rank):
                linear[i][j] = rho[i][j]
        translation = [Fraction(x) for x in u] + [Fraction(x) for x in g.t]
        return AffineMap(
            linear=tuple(tuple(x for x in row) for row in linear),
            translation=tuple(translation),
        )


# ---------------------------------------------------------------------------
# build


def build(
    data: ExtensionData,
    seed_metric=None,
    J0=None,
    J1=None,
    B=None,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> Union[SolvmanifoldModel, Diagnostic]:
    """Run the acceptance pipeline; a Diagnostic is a value, not an error.

    J0, J1, B and the seed metric are the construction's free choices; a
    supplied J0 must be rational, square to -I and commute with the action
    (the construction is many-valued, all valid choices are accepted)."""
    report = extension.validate(data, cap=cap)
    if not report.structural_ok:
        first = next(c for c in report.checks if not c.passed and c.name != "finite_image")
        return Diagnostic("structural", f"{first.name}: {first.witness}")
    if not report.condition_a:
        failure = next(c for c in report.checks if c.name == "finite_image")
        return Diagnostic("(a)", failure.witness)

    cohomology = extension.class_torsion(data)
    if not cohomology.torsion:
        return Diagnostic("(d)", "extension class has infinite order")

    decomposition = matgroup.isotypic(report.group)
    j0 = cxstruct.find_invariant_J0(data, decomposition=decomposition)
    if not j0.passed:
        return Diagnostic("(c)", j0.obstruction)
    real_ext = cxstruct.check_real_extension(data, decomposition=decomposition)
    if not real_ext.passed:  # unreachable when (c) holds; kept as a guard
        return Diagnostic("(b)", real_ext.obstruction)

    fiber_structure = j0
    if J0 is not None:
        problem = _user_j0_problem(data, J0)
        if problem:
            return Diagnostic("structural", problem)
        fiber_structure = SqrtMatrix.rational(J0)
    try:
        cx = cxstruct.extend_J(fiber_structure, m=data.m, n=data.n, J1=J1, B=B)
    except ValueError as e:
        return Diagnostic("structural", str(e))

    # the action is complex affine only if the linear parts commute with J,
    # which pins the mixing block down to action-fixed columns
    b_block = [list(r) for r in cx.B.P]
    for idx, A in enumerate(data.actions):
        if exactla.mat_mul([list(r) for r in A], b_block) != b_block:
            return Diagnostic(
                "structural",
                f"mixing block B is not fixed by action {idx + 1}; "
                "the deck action would not be complex affine",
            )

    abelian = extension.abelian_subgroup(data, cap=cap)
    assert abelian.ok, "conditions (a) and (d) already verified"

    b1, torsion = extension.abelianization(data)

    model = SolvmanifoldModel(
        data=data,
        validation=report,
        cohomology=cohomology,
        real_extension=real_ext.cert,
        cxstructure=cx,
        abelian=abelian.certificate,
        group=report.group,
        decomposition=decomposition,
        metric=None,  # type: ignore[arg-type]  (replaced below)
        b1=b1,
        torsion_factors=tuple(torsion),
    )
    _verify_embedding_relations(model)
    return replace(model, metric=invariant_metric(model, seed_metric))


def _user_j0_problem(data: ExtensionData, J0) -> Optional[str]:
    d = data.fiber_rank
    rows, cols = exactla.shape(J0)
    if rows != d or cols != d:
        return f"supplied J0 must be {d}x{d}"
    M = [[Fraction(x) for x in row] for row in J0]
    if not exactla.mat_eq(exactla.mat_mul(M, M), exactla.mat_scale(exactla.identity(d), -1)):
        return "supplied J0 fails J0^2 = -I"
    for i, A in enumerate(data.actions):
        Af = [list(r) for r in A]
        if not exactla.mat_eq(exactla.mat_mul(Af, M), exactla.mat_mul(M, Af)):
            return f"supplied J0 does not commute with action {i + 1}"
    return None


def _verify_embedding_relations(model: SolvmanifoldModel):
    """All defining relations hold under affine composition, exactly."""
    data = model.data
    gens = {}
    for i in range(1, data.base_rank + 1):
        gens[i] = model.embed(extension.base_generator(data, i))
    fiber_maps = []
    for p in range(data.fiber_rank):
        e = [0] * data.fiber_rank
        e[p] = 1
        fiber_maps.append(model.embed(extension.fiber_element(data, e)))
    for i in range(1, data.base_rank + 1):
        for j in range(i + 1, data.base_rank + 1):
            c = data.tail(i - 1, j - 1)
            lhs = gens[j].compose(gens[i])
            rhs = model.embed(extension.fiber_element(data, c)).compose(
                gens[i].compose(gens[j])
            )
            if lhs != rhs:
                raise AssertionError(f"embedding breaks relation for pair ({i}, {j})")
    for i in range(1, data.base_rank + 1):
        inv = model.embed(extension.inverse(extension.base_generator(data, i), data))
        for p, fm in enumerate(fiber_maps):
            image = [model.data.actions[i - 1][r][p] for r in range(data.fiber_rank)]
            target = model.embed(extension.fiber_element(data, image))
            if gens[i].compose(fm).compose(inv) != target:
                raise AssertionError(f"embedding breaks conjugation relation {i}")


# ---------------------------------------------------------------------------
# geometry operations


def affine_action(g: GroupElement, p: Sequence, model: SolvmanifoldModel) -> list:
    """Apply the embedded element to a point of V (exact on rational input)."""
    if len(p) != model.dim:
        raise ValueError(f"point must have length {model.dim}")
    return model.embed(g).apply(p)


def invariant_metric(model: SolvmanifoldModel, seed=None) -> MetricData:
    """Average a seed form over the linear parts of the action, then
    symmetrize against J:  h = S + J^T S J.

    Exact whenever the complex structure is exact; invariance under every
    linear part and compatibility with J are verified before returning.
    """
    d = model.dim
    fiber = model.fiber_rank
    if seed is None:
        seed = exactla.identity(d)
    rows, cols = exactla.shape(seed)
    if rows != d or cols != d:
        raise ValueError(f"seed metric must be {d}x{d}")
    S = [[Fraction(x) for x in row] for row in seed]
    if not exactla.mat_eq(S, exactla.transpose(S)):
        raise ValueError("seed metric must be symmetric")
    if not matgroup.is_positive_definite(S):
        raise ValueError("seed metric must be positive definite")

    linear_parts = _linear_parts(model)
    total = exactla.zeros(d, d)
    for L in linear_parts:
        total = exactla.mat_add(
            total, exactla.mat_mul(exactla.transpose(L), exactla.mat_mul(S, L))
        )
    count = len(linear_parts)
    avg = [[Fraction(x) / count for x in row] for row in total]

    cx = model.cxstructure
    if cx.exact:
        S_quad = SqrtMatrix.rational(avg).with_field(cx.J.d)
        h = S_quad.add(cx.J.transpose().mul(S_quad).mul(cx.J))
        h_float = np.array(h.to_float())
        for L in linear_parts:
            Lq = SqrtMatrix.rational(L).with_field(h.d)
            if not Lq.transpose().mul(h).mul(Lq).equals(h):
                raise AssertionError("averaged metric is not invariant")
        if not cx.J.transpose().mul(h).mul(cx.J).equals(h):
            raise AssertionError("averaged metric is not J-compatible")
        if not sqrt_is_positive_definite(h):
            raise AssertionError("averaged metric is not positive definite")
        return MetricData(
            exact=h,
            matrix_float=h_float,
            seed=tuple(tuple(x for x in row) for row in S),
            is_exact=True,
        )

    avg_f = np.array([[float(x) for x in row] for row in avg])
    Jf = cx.J_float
    h_float = avg_f + Jf.T @ avg_f @ Jf
    for L in linear_parts:
        Lf = np.array([[float(x) for x in row] for row in L])
        if np.max(np.abs(Lf.T @ h_float @ Lf - h_float)) > FLOAT_TOL:
            raise AssertionError("averaged metric is not invariant (float)")
    if np.max(np.abs(Jf.T @ h_float @ Jf - h_float)) > FLOAT_TOL:
        raise AssertionError("averaged metric is not J-compatible (float)")
    if np.min(np.linalg.eigvalsh(h_float)) <= 0:
        raise AssertionError("averaged metric is not positive definite (float)")
    return MetricData(
        exact=None,
        matrix_float=h_float,
        seed=tuple(tuple(x for x in row) for row in S),
        is_exact=False,
    )


def _linear_parts(model: SolvmanifoldModel) -> list:
    d = model.dim
    fiber = model.fiber_rank
    parts = []
    for el in model.group.elements:
        L = exactla.identity(d)
        for i in range(fiber):
            for j in range(fiber):
                L[i][j] = el[i][j]
        parts.append(L)
    return parts


def fixed_points(linear, translation, lattice):
    """Solutions of  linear x + translation = x  (mod lattice) on the torus.

    The lattice basis may be rational (deck lattices carry the splitting
    denominators); the congruence is rescaled to an integer system first.
    Returns a LatticeCosetSolutions in the original coordinates, or None.
    """
    d = len(translation)
    L = [list(r) for r in linear]
    rows, cols = exactla.shape(L)
    if rows != d or cols != d:
        raise ValueError("affine map has inconsistent dimensions")
    lat_rows, lat_cols = exactla.shape(lattice)
    if lat_rows != d or lat_cols != d:
        raise ValueError("lattice must be square of the ambient dimension")

    q = 1
    for row in lattice:
        for x in row:
            f = Fraction(x)
            q = q * f.denominator // math.gcd(q, f.denominator)
    A = exactla.mat_sub(L, exactla.identity(d))
    b = [-Fraction(x) * q for x in translation]
    lat_int = [[int(Fraction(x) * q) for x in row] for row in lattice]
    sol = exactla.solve_mod_lattice(A, b, lat_int)
    if sol is None:
        return None
    inv_q = Fraction(1, q)
    return exactla.LatticeCosetSolutions(
        point=[x * inv_q for x in sol.point],
        lattice_gens=[[x * inv_q for x in g] for g in sol.lattice_gens],
        kernel=sol.kernel,
        torus_points=sol.torus_points,
    )


def torus_quotient(model: SolvmanifoldModel) -> TorusQuotientPresentation:
    """Present the model as a free finite quotient of the covering torus.

    The translation lattice is the embedded abelian subgroup; the deck group
    is one affine representative per coset, and freeness is verified by
    checking that every nontrivial representative has no fixed point on the
    covering torus (guaranteed by torsion-freeness; checked anyway)."""
    data = model.data
    lattice_vectors = []
    for gen in model.abelian.delta_generators:
        lattice_vectors.append(tuple(model.embed(gen).translation))
    lattice = [list(col) for col in zip(*lattice_vectors)]

    deck = []
    for el, word in zip(model.group.elements, model.group.words):
        rep = model.embed(GroupElement(v=(0,) * data.fiber_rank, t=tuple(word)))
        deck.append(rep)

    # deck maps must normalize the lattice
    for rep in deck:
        for vec in lattice_vectors:
            moved = exactla.mat_vec([list(r) for r in rep.linear], list(vec))
            if not _in_rational_lattice(lattice, moved):
                raise AssertionError("deck representative does not normalize the lattice")

    free = True
    for rep in deck:
        if rep.is_identity():
            continue
        sol = fixed_points(rep.linear, rep.translation, lattice)
        if sol is not None:
            raise AssertionError(
                "nontrivial deck element has a fixed point; the group data is inconsistent"
            )
    return TorusQuotientPresentation(
        lattice=tuple(tuple(v) for v in lattice_vectors),
        deck_group=tuple(deck),
        deck_order=model.group.order,
        freeness_verified=free,
    )


def _in_rational_lattice(basis_matrix, v) -> bool:
    q = 1
    for row in basis_matrix:
        for x in row:
            q = q * Fraction(x).denominator // math.gcd(q, Fraction(x).denominator)
    for x in v:
        q = q * Fraction(x).denominator // math.gcd(q, Fraction(x).denominator)
    B = [[int(Fraction(x) * q) for x in row] for row in basis_matrix]
    w = [Fraction(x) * q for x in v]
    if any(x.denominator != 1 for x in w):
        return False
    return exactla.solve_linear(B, [int(x) for x in w], ring="Z") is not None


def canonical_fibration(model: SolvmanifoldModel) -> FibrationPresentation:
    """The bundle-over-a-torus presentation: the fiber is spanned by the
    saturation of the images of (A_i - I) inside the fiber lattice."""
    data = model.data
    d = data.fiber_rank
    ident = exactla.identity(d)
    cols = []
    for A in data.actions:
        diff = exactla.mat_sub([list(r) for r in A], ident)
        for c in range(d):
            cols.append([diff[r][c] for r in range(d)])
    stacked = [list(col) for col in zip(*cols)]
    saturated = exactla.saturation_basis(stacked) if any(any(c) for c in cols) else []
    fiber_rank = len(saturated)
    base_rank = model.dim - fiber_rank
    if base_rank != model.b1:
        raise AssertionError("fibration base rank must equal the first Betti number")
    return FibrationPresentation(
        fiber_rank=fiber_rank,
        base_rank=base_rank,
        fiber_lattice=tuple(tuple(v) for v in saturated),
        component_torsion=model.torsion_factors,
    )


def is_torus(model: SolvmanifoldModel) -> bool:
    """True exactly when the group is abelian: trivial action, zero tails."""
    data = model.data
    ident = exactla.identity(data.fiber_rank)
    if any([list(r) for r in A] != ident for A in data.actions):
        return False
    return not data.tails


def completely_solvable(model: SolvmanifoldModel) -> bool:
    """All logs have only real eigenvalues.  Since every action matrix has
    finite order, the logs are rotation generators with imaginary spectrum,
    so this holds exactly when every action matrix is the identity."""
    data = model.data
    ident = exactla.identity(data.fiber_rank)
    return all([list(r) for r in A] == ident for A in data.actions)
