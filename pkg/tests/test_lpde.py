from fractions import Fraction

import numpy as np
import pytest

from src.errors import ContractViolation, SingularPointError
from src.hgseries import (AppellF4Params, Chart, HGParamsF2n, HGParamsF2nm, HGParamsFnm, f4_solution_series,
                          series_expand, series_expand_multi)
from src.lpde import (Prefactored, build_F2_classical, build_F2n_a_eq_cprime, build_F2n_constrained,
                      build_F2n_degenerate, build_F2n_general, build_F4_system, build_FA_system, build_Fn2, const,
                      euler_coeffs, lin, pprod, residual, residual_at, residual_grid, shift_poly, system_battery, var)

F = Fraction
B = (F(3, 10), F(2, 5), F(7, 20))
C = (F(6, 5), F(7, 5), F(13, 10))
F4_POINTS = [(0.05, 0.95), (0.04, 0.97), (0.03, 0.95), (0.06, 0.96)]


def f2n(n, a=F(1, 2), bprime=F(1, 5), cprime=F(11, 10)):
    return HGParamsF2n(B[:n], bprime, a, C[:n], cprime)


def test_operator_polynomials():
    assert euler_coeffs(lin((1, 0), 2)) == {(0, 0): 2, (1, 0): 1}
    assert euler_coeffs(var(0) * var(0)) == {(2, 0): 1}
    assert pprod([]) == const(1)
    assert euler_coeffs(lin((0, 1), F(-1, 3))) == {(0, 1): 1, (0, 0): F(-1, 3)}
    # (d1 + 1)^2 shifted by d1 -> d1 + 2
    sq = lin((1, 0), 1) * lin((1, 0), 1)
    assert shift_poly(sq, (1, 0)) == lin((1, 0), 2) ** 2
    assert euler_coeffs(shift_poly(var(0) * var(1), (F(1, 2), -1))) == {
        (1, 1): 1, (1, 0): -1, (0, 1): F(1, 2), (0, 0): F(-1, 2)}
    assert var(2, 3).gens == lin((1, 1, 1)).gens


def test_operator_terms_apply_like_coefficient_maps():
    p = f2n(1)
    z = series_expand(p, 8)
    op = lin((1, 1), F(1, 3)) * var(1)
    assert z.apply_euler(op).rows == z.apply_euler(euler_coeffs(op)).rows


@pytest.mark.parametrize("n", [1, 2, 3])
def test_general_system_annihilates_series(n):
    p = f2n(n)
    assert residual(build_F2n_general(p), series_expand(p, 16)) == 0
    assert build_F2n_general(p).orders() == [n + 1, 2]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_wrong_series_is_rejected(n):
    p = f2n(n)
    wrong = f2n(n, a=p.a + F(1, 2))
    assert residual(build_F2n_general(p), series_expand(wrong, 16)) > 1e-4


def test_second_solution_with_prefactor():
    # (1-t2)^(1-c') F2n[b; b'-c'+1, a-c'+1; c; 2-c']
    p = f2n(2)
    q = HGParamsF2n(p.b, p.bprime - p.cprime + 1, p.a - p.cprime + 1, p.c, 2 - p.cprime)
    z = Prefactored(series_expand(q, 16), y_exponent=1 - p.cprime)
    assert residual(build_F2n_general(p), z) == 0


def test_constrained_system():
    p = f2n(2, a=C[0] + F(11, 10) - 2)
    assert residual(build_F2n_constrained(p), series_expand(p, 16)) == 0
    with pytest.raises(ContractViolation):
        build_F2n_constrained(f2n(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_degenerate_system(n):
    c1, cp = C[0], F(11, 10)
    p = HGParamsF2n((c1 - 1,) + B[1:n], F(1, 5), c1 + cp - 2, C[:n], cp)
    zt = series_expand(p, 16).apply_euler(lin((1, 0), c1 - 1))
    assert residual(build_F2n_degenerate(p), zt) == 0
    # same as the general system of one order lower with the constrained a
    if n > 1:
        lower = HGParamsF2n(B[1:n], F(1, 5), c1 + cp - 2, C[1:n], cp)
        assert build_F2n_degenerate(p).equations == build_F2n_general(lower).equations


def test_a_equals_cprime_system_has_three_equations():
    p = f2n(2, a=F(11, 10))
    sys = build_F2n_a_eq_cprime(p)
    assert len(sys.equations) == 3
    assert residual(sys, series_expand(p, 16)) == 0
    with pytest.raises(ContractViolation):
        build_F2n_a_eq_cprime(f2n(2))


@pytest.mark.parametrize("n", [1, 2])
def test_fn2_system(n):
    p = HGParamsFnm(B[:n], (F(1, 3), F(1, 4)), C[:n])
    assert residual(build_Fn2(p), series_expand(p, 16)) == 0
    wrong = HGParamsFnm(B[:n], (F(1, 4), F(1, 3)), C[:n])
    assert residual(build_Fn2(p), series_expand(wrong, 16)) > 1e-4


def test_classical_appell_f2():
    p = f2n(1)
    z = series_expand(p, 16, Chart.X_T1_Y_T2)
    assert residual(build_F2_classical(p.a, p.b[0], p.bprime, p.c[0], p.cprime), z) == 0


def test_f4_system_pointwise():
    p = AppellF4Params(F(3, 10), F(1, 2), F(6, 5), F(7, 5))
    sys = build_F4_system(p)
    z = f4_solution_series(p, 40)
    assert residual(sys, z, F4_POINTS) < 1e-9
    with pytest.raises(ContractViolation):
        residual_grid(sys, z)
    with pytest.raises(SingularPointError):
        residual_at(sys, z, (0.5, 0.5))


def test_f4_system_rejects_wrong_solution():
    p = AppellF4Params(F(3, 10), F(1, 2), F(6, 5), F(7, 5))
    wrong = AppellF4Params(F(3, 10), F(1, 2), F(7, 5), F(6, 5))
    assert residual(build_F4_system(p), f4_solution_series(wrong, 40), F4_POINTS) > 1e-4


@pytest.mark.parametrize("m", [2, 3])
def test_lauricella_fa(m):
    p = HGParamsF2nm((F(1, 3),), (F(1, 5), F(2, 7))[:m - 1], F(1, 2), (F(4, 3),), (F(6, 5), F(9, 7))[:m - 1])
    assert residual(build_FA_system(p), series_expand_multi(p, 12)) == 0


def test_pointwise_agrees_with_coefficientwise_zero():
    p = f2n(2)
    z = series_expand(p, 30)
    assert residual(build_F2n_general(p), z, [(0.05, 0.95), (0.1, 0.9)]) < 1e-9


def test_system_battery_small():
    out = system_battery(1, np.random.default_rng(3), draws=2)
    negative = out.pop('negative_control')
    assert negative > 1e-4
    assert out['Appell F4'] < 1e-9
    assert all(v == 0 for k, v in out.items() if k != 'Appell F4')
