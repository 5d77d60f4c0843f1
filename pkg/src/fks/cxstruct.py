"""Conditions (b) and (c): real one-parameter extension of the action and
invariant complex structures.

Both conditions are decided on the joint isotypic decomposition of the finite
action:

* a real one-parameter extension exists iff every real-type component on
  which some generator acts as -1 has even dimension (a real logarithm of -I
  needs the eigenvalue -1 in pairs); the logarithms are then pi-rotation
  blocks on those components and rotation generators on complex pairs, and
  all of them commute because each component carries a single rotation plane
  structure;

* an invariant complex structure on the fiber exists iff every real-type
  component has even dimension; on complex pairs it is multiplication by i
  transported to real coordinates, on even real components the standard
  block [[0, -I], [I, 0]].

For actions whose characters live in orders {1, 2, 3, 4, 6} the structure is
exact: rational for orders 1, 2, 4, and in Q(sqrt(3)) for orders 3 and 6 (an
order-3 action has no rational invariant complex structure at all, which is
why the exact representation carries sqrt(3)).  Anything else falls back to
floating point with an approximate flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import exactla, matgroup
from .extension import ExtensionData
from .matgroup import (
    DEFAULT_CLOSURE_CAP,
    FiniteActionGroup,
    IsotypicComponent,
    IsotypicDecomposition,
)
from .sqrtfield import SqrtMatrix, block_matrix

__all__ = [
    "RealExtensionCert",
    "RealExtensionResult",
    "InvariantJ0Result",
    "ComplexStructureData",
    "check_real_extension",
    "find_invariant_J0",
    "extend_J",
    "standard_complex_block",
    "CERT_TOL",
]

CERT_TOL = 1e-12
EXP_TOL = 1e-9


def standard_complex_block(half: int) -> list:
    """The 2*half x 2*half block [[0, -I], [I, 0]]."""
    n = 2 * half
    J = exactla.zeros(n, n)
    for k in range(half):
        J[k][half + k] = -1
        J[half + k][k] = 1
    return J


def _pairing_rotation(dim: int) -> list:
    """Rotation generator pairing consecutive coordinates of an even block."""
    J = exactla.zeros(dim, dim)
    for k in range(0, dim, 2):
        J[k][k + 1] = -1
        J[k + 1][k] = 1
    return J


# ---------------------------------------------------------------------------
# per-component structure shared by (b) and (c)


@dataclass(frozen=True)
class _ComponentStructure:
    component: IsotypicComponent
    # orientation structure K with K^2 = -I on the component (None when the
    # component is real-type of odd dimension, or no structure is needed)
    k_exact: Optional[SqrtMatrix]
    k_float: Optional[np.ndarray]
    # per-generator rotation angles (fractions of a full turn)
    angles: tuple


def _component_structures(dec: IsotypicDecomposition) -> list[_ComponentStructure]:
    out = []
    for comp in dec.components:
        if comp.kind == "real":
            if comp.dimension % 2 == 0 and comp.dimension > 0:
                k = _pairing_rotation(comp.dimension)
                out.append(
                    _ComponentStructure(
                        component=comp,
                        k_exact=SqrtMatrix.rational(k),
                        k_float=np.array(k, dtype=float),
                        angles=comp.angles,
                    )
                )
            else:
                out.append(
                    _ComponentStructure(
                        component=comp, k_exact=None, k_float=None, angles=comp.angles
                    )
                )
            continue
        # complex pair: orient by a generator with a genuinely complex angle,
        # preferring one whose cosine and sine stay rational-or-sqrt(3)
        idx_order = sorted(
            range(len(comp.angles)),
            key=lambda i: (
                {4: 0, 3: 1, 6: 1}.get((comp.angles[i] % 1).denominator, 2),
                i,
            ),
        )
        orient = next(
            i for i in idx_order if (comp.angles[i] % 1) not in (Fraction(0), Fraction(1, 2))
        )
        theta = comp.angles[orient] % 1
        k_exact = None
        if comp.exact:
            k_exact = _exact_pair_structure(dec.group, comp, orient, theta)
        k_float = _float_pair_structure(dec.group, comp, orient, theta)
        out.append(
            _ComponentStructure(
                component=comp, k_exact=k_exact, k_float=k_float, angles=comp.angles
            )
        )
    return out


def _restriction_exact(group: FiniteActionGroup, comp: IsotypicComponent, gen_idx: int):
    """Matrix of generator gen_idx on the component in its exact basis."""
    C = [[Fraction(v[r]) for v in comp.basis] for r in range(group.dim)]
    A = [list(r) for r in group.generators[gen_idx]]
    AC = exactla.mat_mul(A, C)
    n = len(comp.basis)
    M = []
    for col in range(n):
        rhs = [AC[r][col] for r in range(group.dim)]
        sol = exactla.solve_linear(C, rhs, ring="Q")
        assert sol is not None, "component basis must be invariant"
        M.append(sol[0])
    return exactla.transpose(M)


def _exact_pair_structure(group, comp, orient: int, theta: Fraction) -> Optional[SqrtMatrix]:
    c = matgroup._rational_cos(theta)
    if c is None:
        return None
    M = _restriction_exact(group, comp, orient)
    shifted = exactla.mat_sub(M, exactla.mat_scale(exactla.identity(len(M)), c))
    s_squared = 1 - c * c  # in {3/4, 1} for the rational-cosine angles
    sign = 1 if theta < Fraction(1, 2) else -1  # sin(2*pi*theta) sign
    if s_squared == 1:
        K = SqrtMatrix.rational(exactla.mat_scale(shifted, sign))
    elif s_squared == Fraction(3, 4):
        # 1/s = sign * 2/sqrt(3) = sign * (2/3) sqrt(3)
        K = SqrtMatrix.make(
            exactla.zeros(len(M), len(M)),
            exactla.mat_scale(shifted, Fraction(2 * sign, 3)),
            3,
        )
    else:  # pragma: no cover - rational cosines only produce the two cases
        return None
    ident = SqrtMatrix.identity(len(M), K.d)
    if not K.mul(K).equals(ident.neg()):
        raise AssertionError("pair structure fails K^2 = -I")
    return K


def _float_pair_structure(group, comp, orient: int, theta: Fraction) -> np.ndarray:
    C = comp.basis_float
    A = np.array(group.generators[orient], dtype=float)
    M = np.linalg.pinv(C) @ A @ C
    c = math.cos(2 * math.pi * float(theta))
    s = math.sin(2 * math.pi * float(theta))
    return (M - c * np.eye(M.shape[0])) / s


# ---------------------------------------------------------------------------
# condition (b): real one-parameter extension


@dataclass(frozen=True)
class RealExtensionCert:
    """Commuting logarithms X_i with exp(X_i) = A_i.

    ``evaluate(t)`` is the extended homomorphism at a real base vector t,
    computed in closed form on the block decomposition (each block is a
    rotation with angle linear in t).
    """

    logs: tuple
    _blocks: tuple  # (basis cols, inverse basis rows, K or None, angle row)
    dim: int

    def evaluate(self, t: Sequence[float]) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for basis, basis_inv, K, angles in self._blocks:
            phi = 2.0 * math.pi * float(sum(float(a) * float(x) for a, x in zip(angles, t)))
            blk = math.cos(phi) * np.eye(basis.shape[1])
            if K is not None:
                blk = blk + math.sin(phi) * K
            out += basis @ blk @ basis_inv
        return out

    def exp_of_log(self, i: int) -> np.ndarray:
        t = [0.0] * len(self._blocks[0][3])
        t[i] = 1.0
        return self.evaluate(t)


@dataclass(frozen=True)
class RealExtensionResult:
    cert: Optional[RealExtensionCert]
    obstruction: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.cert is not None


def check_real_extension(
    data: ExtensionData,
    decomposition: Optional[IsotypicDecomposition] = None,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> RealExtensionResult:
    """Condition (b): extend the action to a one-parameter family.

    Every real-type joint component on which some generator acts as -1 must
    have even dimension; the certificate carries the commuting logarithms.
    """
    dec = decomposition or _decompose(data, cap)
    structures = _component_structures(dec)
    for st in structures:
        comp = st.component
        if comp.kind == "real" and comp.dimension % 2 == 1:
            if any(a == Fraction(1, 2) for a in comp.angles):
                return RealExtensionResult(
                    cert=None,
                    obstruction=(
                        f"real-type component of odd dimension {comp.dimension} "
                        f"with a -1 action (character {_fmt_char(comp.angles)})"
                    ),
                )
    blocks = []
    d = dec.dim
    basis_full = np.hstack([st.component.basis_float for st in structures])
    basis_inv = np.linalg.inv(basis_full)
    col = 0
    for st in structures:
        width = st.component.dimension
        basis_cols = basis_full[:, col : col + width]
        inv_rows = basis_inv[col : col + width, :]
        if st.component.kind == "real":
            angles = tuple(Fraction(0) if a == 0 else Fraction(1, 2) for a in st.angles)
        else:
            angles = st.angles
        blocks.append((basis_cols, inv_rows, st.k_float, angles))
        col += width
    logs = []
    for i in range(data.base_rank):
        X = np.zeros((d, d))
        for basis_cols, inv_rows, K, angles in blocks:
            phi = 2.0 * math.pi * float(angles[i])
            if phi != 0.0 and K is not None:
                X += basis_cols @ (phi * K) @ inv_rows
            # a zero angle contributes nothing; phi != 0 with K None cannot
            # happen after the parity check above
        logs.append(X)
    cert = RealExtensionCert(logs=tuple(logs), _blocks=tuple(blocks), dim=d)
    return RealExtensionResult(cert=cert)


def _fmt_char(angles) -> str:
    return "(" + ", ".join(str(a) for a in angles) + ")"


def _decompose(data: ExtensionData, cap: int) -> IsotypicDecomposition:
    group = matgroup.closure([[list(r) for r in A] for A in data.actions], cap=cap)
    return matgroup.isotypic(group)


# ---------------------------------------------------------------------------
# condition (c): invariant complex structure on the fiber


@dataclass(frozen=True)
class InvariantJ0Result:
    J0: Optional[SqrtMatrix]
    J0_float: Optional[np.ndarray]
    exact: bool
    obstruction: Optional[str] = None
    decomposition: Optional[IsotypicDecomposition] = None

    @property
    def passed(self) -> bool:
        return self.J0_float is not None


def find_invariant_J0(
    data: ExtensionData,
    decomposition: Optional[IsotypicDecomposition] = None,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> InvariantJ0Result:
    """Condition (c): a complex structure on the fiber commuting with the
    action exists iff every real-type joint component has even dimension."""
    dec = decomposition or _decompose(data, cap)
    structures = _component_structures(dec)
    for st in structures:
        comp = st.component
        if comp.kind == "real" and comp.dimension % 2 == 1:
            return InvariantJ0Result(
                J0=None,
                J0_float=None,
                exact=False,
                obstruction=(
                    f"real-type component of odd dimension {comp.dimension} "
                    f"(character {_fmt_char(comp.angles)})"
                ),
                decomposition=dec,
            )

    exact = all(st.component.exact and st.k_exact is not None for st in structures)
    J0_exact = None
    if exact:
        field = 1
        for st in structures:
            if st.k_exact is not None and st.k_exact.d != 1:
                field = st.k_exact.d
        n_comp = len(structures)
        blocks = [[None] * n_comp for _ in range(n_comp)]
        for idx, st in enumerate(structures):
            blocks[idx][idx] = st.k_exact
        block_diag = block_matrix(blocks, field)
        basis_cols = []
        for st in structures:
            basis_cols.extend(st.component.basis)
        B = exactla.transpose([[Fraction(x) for x in v] for v in basis_cols])
        B_inv = _rational_inverse(B)
        J0_exact = SqrtMatrix.rational(B).with_field(field).mul(block_diag).mul(
            SqrtMatrix.rational(B_inv).with_field(field)
        )
        _verify_exact_J0(data, J0_exact)

    # float version, always available for reporting
    basis_full = np.hstack([st.component.basis_float for st in structures])
    basis_inv = np.linalg.inv(basis_full)
    d = dec.dim
    J0_float = np.zeros((d, d))
    col = 0
    for st in structures:
        width = st.component.dimension
        J0_float += basis_full[:, col : col + width] @ st.k_float @ basis_inv[col : col + width, :]
        col += width
    if J0_exact is not None:
        J0_float = np.array(J0_exact.to_float())
    _verify_float_J0(data, J0_float)
    return InvariantJ0Result(
        J0=J0_exact, J0_float=J0_float, exact=exact, decomposition=dec
    )


def _rational_inverse(B):
    n, m = exactla.shape(B)
    assert n == m
    sol = exactla._rref_solve(B, exactla.identity(n))
    if sol is None:
        raise AssertionError("component bases must assemble to an invertible matrix")
    return sol


def _verify_exact_J0(data: ExtensionData, J0: SqrtMatrix):
    n = J0.shape[0]
    if not J0.mul(J0).equals(SqrtMatrix.identity(n, J0.d).neg()):
        raise AssertionError("J0^2 = -I fails in exact arithmetic")
    for A in data.actions:
        Am = SqrtMatrix.rational([list(r) for r in A]).with_field(J0.d)
        if not Am.mul(J0).equals(J0.mul(Am)):
            raise AssertionError("J0 does not commute with an action matrix")


def _verify_float_J0(data: ExtensionData, J0: np.ndarray, tol: float = EXP_TOL):
    n = J0.shape[0]
    if np.max(np.abs(J0 @ J0 + np.eye(n))) > tol:
        raise AssertionError("J0^2 = -I fails beyond tolerance")
    for A in data.actions:
        Af = np.array(A, dtype=float)
        if np.max(np.abs(Af @ J0 - J0 @ Af)) > tol:
            raise AssertionError("J0 fails to commute with an action beyond tolerance")


# ---------------------------------------------------------------------------
# extending J0 to the whole space


@dataclass(frozen=True)
class ComplexStructureData:
    """J = [[J0, B], [0, J1]] on fiber + base, with J^2 = -I.

    Exact blocks are SqrtMatrix (J exact iff J0 was); the float views are
    always present.  The invariants J0^2 = J1^2 = -I and J0 B + B J1 = 0 are
    validated on construction.
    """

    m: int
    n: int
    J0: Optional[SqrtMatrix]
    J1: SqrtMatrix
    B: SqrtMatrix
    J: Optional[SqrtMatrix]
    J0_float: np.ndarray
    J_float: np.ndarray
    exact: bool

    @property
    def dim(self) -> int:
        return 2 * self.m + 2 * self.n


def extend_J(
    j0: InvariantJ0Result | SqrtMatrix | np.ndarray,
    m: int,
    n: int,
    J1=None,
    B=None,
) -> ComplexStructureData:
    """Extend a fiber complex structure to V = fiber + base.

    J1 defaults to the standard block structure on the base, B to zero; any
    user-supplied rational blocks are accepted as long as the structure
    invariants hold, and rejected with the failing identity otherwise.
    """
    if isinstance(j0, InvariantJ0Result):
        if not j0.passed:
            raise ValueError("cannot extend: no invariant complex structure exists")
        J0_exact, J0_float, exact = j0.J0, j0.J0_float, j0.exact
    elif isinstance(j0, SqrtMatrix):
        J0_exact, J0_float, exact = j0, np.array(j0.to_float()), True
    else:
        J0_exact, J0_float, exact = None, np.asarray(j0, dtype=float), False
    fiber = 2 * m
    base = 2 * n
    if J0_float.shape != (fiber, fiber):
        raise ValueError(f"J0 must be {fiber}x{fiber}")

    J1 = SqrtMatrix.rational(J1 if J1 is not None else standard_complex_block(n))
    if J1.shape != (base, base):
        raise ValueError(f"J1 must be {base}x{base}")
    B = SqrtMatrix.rational(B if B is not None else exactla.zeros(fiber, base))
    if B.shape != (fiber, base):
        raise ValueError(f"B must be {fiber}x{base}")

    # J1^2 = -I is exact (J1 is rational)
    if not J1.mul(J1).equals(SqrtMatrix.identity(base).neg()):
        raise ValueError("invalid J1: J1^2 = -I fails")

    field = J0_exact.d if J0_exact is not None else 1
    if exact:
        mix = J0_exact.mul(B.with_field(field)).add(B.with_field(field).mul(J1.with_field(field)))
        if not mix.equals(SqrtMatrix.zero(fiber, base, field)):
            raise ValueError("invalid B: J0 B + B J1 = 0 fails")
    else:
        mix_f = J0_float @ np.array(B.to_float()) + np.array(B.to_float()) @ np.array(
            J1.to_float()
        )
        resid = float(np.max(np.abs(mix_f)))
        if resid > CERT_TOL:
            raise ValueError(f"invalid B: J0 B + B J1 = 0 fails (residual {resid:.3e})")

    J_exact = None
    if exact:
        J_exact = block_matrix(
            [[J0_exact, B], [None, J1]],
            field,
        )
        total = 2 * m + 2 * n
        if not J_exact.mul(J_exact).equals(SqrtMatrix.identity(total, field).neg()):
            raise AssertionError("J^2 = -I fails in exact arithmetic")
    J_float = np.zeros((fiber + base, fiber + base))
    J_float[:fiber, :fiber] = J0_float
    J_float[:fiber, fiber:] = np.array(B.to_float())
    J_float[fiber:, fiber:] = np.array(J1.to_float())
    resid = float(np.max(np.abs(J_float @ J_float + np.eye(fiber + base))))
    if resid > (CERT_TOL if exact else EXP_TOL):
        raise ValueError(f"invalid J: J^2 = -I fails (residual {resid:.3e})")
    return ComplexStructureData(
        m=m,
        n=n,
        J0=J0_exact,
        J1=J1,
        B=B,
        J=J_exact,
        J0_float=J0_float,
        J_float=J_float,
        exact=exact,
    )
