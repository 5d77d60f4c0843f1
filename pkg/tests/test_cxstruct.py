import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from fks import exactla
from fks.cxstruct import (
    check_real_extension,
    extend_J,
    find_invariant_J0,
    standard_complex_block,
)
from fks.extension import ExtensionData
from fks.sqrtfield import SqrtMatrix

I2 = [[1, 0], [0, 1]]
NEG_I2 = [[-1, 0], [0, -1]]
ROT4 = [[0, -1], [1, 0]]
ROT3 = [[0, -1], [1, -1]]
ROT6 = [[1, -1], [1, 0]]
DIAG = [[-1, 0], [0, 1]]

ORDER5 = [
    [0, 0, 0, -1],
    [1, 0, 0, -1],
    [0, 1, 0, -1],
    [0, 0, 1, -1],
]
I4 = [[1 if i == j else 0 for j in range(4)] for i in range(4)]


def torus():
    return ExtensionData.make(1, 1, [I2, I2])


def hyper2():
    return ExtensionData.make(1, 1, [NEG_I2, I2], {(0, 1): [1, 0]})


def hyper3():
    return ExtensionData.make(1, 1, [ROT3, I2], {(0, 1): [1, 0]})


def hyper6():
    return ExtensionData.make(1, 1, [ROT6, I2], {(0, 1): [1, 0]})


def diag_fail():
    return ExtensionData.make(1, 1, [DIAG, I2])


def order5_data():
    return ExtensionData.make(2, 1, [ORDER5, I4])


# ---------------------------------------------------------------------------
# condition (b)


def test_real_extension_torus_logs_are_zero():
    result = check_real_extension(torus())
    assert result.passed
    for X in result.cert.logs:
        assert np.max(np.abs(X)) == 0.0


def test_real_extension_diag_fails():
    result = check_real_extension(diag_fail())
    assert not result.passed
    assert "odd dimension 1" in result.obstruction


def test_real_extension_hyper2_log_is_pi_rotation():
    result = check_real_extension(hyper2())
    assert result.passed
    X1 = result.cert.logs[0]
    target = math.pi * np.array([[0.0, -1.0], [1.0, 0.0]])
    assert np.max(np.abs(np.abs(X1) - np.abs(target))) < 1e-9
    assert np.max(np.abs(X1 + X1.T)) < 1e-9  # rotation generator
    assert np.max(np.abs(result.cert.logs[1])) == 0.0


@pytest.mark.parametrize("factory", [torus, hyper2, hyper3, hyper6, order5_data])
def test_exp_of_logs_reproduces_actions(factory):
    data = factory()
    result = check_real_extension(data)
    assert result.passed
    cert = result.cert
    for i, A in enumerate(data.actions):
        Af = np.array(A, dtype=float)
        # closed-form evaluation
        assert np.max(np.abs(cert.exp_of_log(i) - Af)) < 1e-9
        # independent oracle: generic scaling-and-squaring exponential
        assert np.max(np.abs(expm(cert.logs[i]) - Af)) < 1e-9


@pytest.mark.parametrize("factory", [hyper2, hyper3, hyper6, order5_data])
def test_logs_commute_and_add(factory):
    data = factory()
    cert = check_real_extension(data).cert
    k = len(cert.logs)
    for i in range(k):
        for j in range(i + 1, k):
            Xi, Xj = cert.logs[i], cert.logs[j]
            assert np.max(np.abs(Xi @ Xj - Xj @ Xi)) < 1e-9
            assert np.max(np.abs(expm(Xi) @ expm(Xj) - expm(Xi + Xj))) < 1e-9


def test_evaluate_interpolates_fractional_times():
    # the one-parameter family at t = 1/2 must be a square root of the action
    data = hyper2()
    cert = check_real_extension(data).cert
    half = cert.evaluate([0.5, 0.0])
    assert np.max(np.abs(half @ half - np.array(NEG_I2, dtype=float))) < 1e-9


# ---------------------------------------------------------------------------
# condition (c)


def test_j0_torus_standard():
    result = find_invariant_J0(torus())
    assert result.passed and result.exact
    assert result.J0.is_rational
    assert [[int(x) for x in row] for row in result.J0.P] in (
        [[0, -1], [1, 0]],
        [[0, 1], [-1, 0]],
    )


def test_j0_hyper2_standard():
    result = find_invariant_J0(hyper2())
    assert result.passed and result.exact
    Af = np.array(NEG_I2, dtype=float)
    assert np.max(np.abs(result.J0_float @ Af - Af @ result.J0_float)) == 0.0


def test_j0_diag_fail():
    result = find_invariant_J0(diag_fail())
    assert not result.passed
    assert "odd dimension 1" in result.obstruction


def test_j0_order3_needs_sqrt3():
    # no rational J commutes with an order-3 action: the exact structure
    # lives in Q(sqrt(3)) and equals +-(I + 2A)/sqrt(3)
    result = find_invariant_J0(hyper3())
    assert result.passed and result.exact
    J0 = result.J0
    assert J0.d == 3
    assert all(x == 0 for row in J0.P for x in row)
    expected_Q = [
        [Fraction(1, 3), Fraction(-2, 3)],
        [Fraction(2, 3), Fraction(-1, 3)],
    ]
    assert [list(r) for r in J0.Q] in (
        expected_Q,
        [[-x for x in row] for row in expected_Q],
    )


def test_j0_order6_exact():
    result = find_invariant_J0(hyper6())
    assert result.passed and result.exact
    assert result.J0.d == 3
    # exact verification happened inside; double-check commutation in floats
    Af = np.array(ROT6, dtype=float)
    assert np.max(np.abs(result.J0_float @ Af - Af @ result.J0_float)) < 1e-12


def test_j0_order5_approximate():
    result = find_invariant_J0(order5_data())
    assert result.passed
    assert not result.exact
    assert result.J0 is None
    J0 = result.J0_float
    Af = np.array(ORDER5, dtype=float)
    assert np.max(np.abs(J0 @ J0 + np.eye(4))) < 1e-9
    assert np.max(np.abs(J0 @ Af - Af @ J0)) < 1e-9


def test_j0_success_implies_real_extension():
    for factory in (torus, hyper2, hyper3, hyper6, order5_data):
        data = factory()
        if find_invariant_J0(data).passed:
            assert check_real_extension(data).passed
    # and the contrapositive witness: diag_fail fails both
    assert not find_invariant_J0(diag_fail()).passed
    assert not check_real_extension(diag_fail()).passed


# ---------------------------------------------------------------------------
# extend_J


def test_extend_defaults():
    j0 = find_invariant_J0(torus())
    cx = extend_J(j0, m=1, n=1)
    assert cx.exact
    total = SqrtMatrix.identity(4).neg()
    assert cx.J.mul(cx.J).equals(total)
    # block triangular: fiber subspace is J-invariant
    assert np.max(np.abs(cx.J_float[2:, :2])) == 0.0


def test_extend_conjugate_j1():
    j0 = find_invariant_J0(torus())
    J1 = [[0, 1], [-1, 0]]
    cx = extend_J(j0, m=1, n=1, J1=J1)
    assert cx.exact


def test_extend_rejects_bad_j1():
    j0 = find_invariant_J0(torus())
    with pytest.raises(ValueError, match="J1"):
        extend_J(j0, m=1, n=1, J1=[[1, 0], [0, 1]])


def test_extend_accepts_compatible_B():
    # with J0 = J1 = std rotation, B anti-commuting with the rotation works:
    # J0 B + B J1 = 0 for B = [[1, 0], [0, -1]]
    j0 = find_invariant_J0(torus())
    J0m = [[int(x) for x in row] for row in j0.J0.P]
    B = [[1, 0], [0, -1]]
    lhs = exactla.mat_add(
        exactla.mat_mul(J0m, B), exactla.mat_mul(B, J0m)
    )
    assert all(x == 0 for row in lhs for x in row)
    cx = extend_J(j0, m=1, n=1, J1=J0m, B=B)
    assert cx.exact
    assert cx.J.mul(cx.J).equals(SqrtMatrix.identity(4).neg())


def test_extend_rejects_incompatible_B():
    j0 = find_invariant_J0(torus())
    with pytest.raises(ValueError, match="B"):
        extend_J(j0, m=1, n=1, B=[[1, 0], [0, 1]])


def test_extend_order3_exact_in_quadratic_field():
    j0 = find_invariant_J0(hyper3())
    cx = extend_J(j0, m=1, n=1)
    assert cx.exact
    assert cx.J.d == 3
    assert cx.J.mul(cx.J).equals(SqrtMatrix.identity(4, 3).neg())
    resid = np.max(np.abs(cx.J_float @ cx.J_float + np.eye(4)))
    assert resid < 1e-12


def test_extend_order5_approximate():
    j0 = find_invariant_J0(order5_data())
    cx = extend_J(j0, m=2, n=1)
    assert not cx.exact
    assert cx.J is None
    resid = np.max(np.abs(cx.J_float @ cx.J_float + np.eye(6)))
    assert resid < 1e-9


def test_standard_complex_block():
    J = standard_complex_block(2)
    sq = exactla.mat_mul(J, J)
    assert sq == exactla.mat_scale(exactla.identity(4), -1)
