from fractions import Fraction
from math import factorial

import pytest
from scipy.special import hyp2f1

from src.errors import ContractViolation, DomainError, RegionError, UnsupportedError
from src.hgseries import (AppellF4Params, Chart, HGParamsF2n, HGParamsF2nm, HGParamsFnm, MultiSeries,
                          TruncatedSeries2D, coeff_F2n, coeff_F2nm, coeff_Fnm, eval_F2n, eval_F2nm, eval_F4,
                          eval_F4_solution, eval_Fnm, f2nm_as_f2n, f4_solution_series, pochhammer, series_expand,
                          series_expand_multi)

F = Fraction


def classical_f2_coeff(a, b, bp, c, cp, i, j):
    return (pochhammer(a, i + j) * pochhammer(b, i) * pochhammer(bp, j)
            / (pochhammer(c, i) * pochhammer(cp, j) * factorial(i) * factorial(j)))


def test_pochhammer_exact():
    assert pochhammer(F(1, 2), 0) == 1
    assert pochhammer(1, 5) == 120
    assert pochhammer(F(1, 2), 3) == F(1, 2) * F(3, 2) * F(5, 2)
    assert pochhammer(-2, 3) == 0
    with pytest.raises(ContractViolation):
        pochhammer(1, -1)


def test_coeff_F2n_matches_classical_appell():
    a, b, bp, c, cp = F(7, 10), F(1, 2), F(2, 5), F(3, 2), F(13, 10)
    p = HGParamsF2n((b,), bp, a, (c,), cp)
    for i in range(13):
        for j in range(13 - i):
            assert coeff_F2n(p, i, j) == classical_f2_coeff(a, b, bp, c, cp, i, j)


def test_series_expand_grid_is_coefficients():
    p = HGParamsF2n((F(3, 10), F(2, 5)), F(1, 5), F(1, 2), (F(6, 5), F(7, 5)), F(11, 10))
    s = series_expand(p, 10)
    assert s.chart is Chart.X_T1_Y_ONE_MINUS_T2
    for i, j, c in s.items():
        assert c == coeff_F2n(p, i, j)


def test_a_zero_gives_one():
    p = HGParamsF2n((F(3, 10),), F(1, 5), 0, (F(6, 5),), F(11, 10))
    v = eval_F2n(p, 0.3, 0.4, 20)
    assert v.value == 1.0
    assert v.tail_bound == 0.0
    assert not v.warning


def test_degree_zero_evaluation_always_warns():
    p = HGParamsF2n((F(1, 3),), F(1, 5), F(3, 4), (F(5, 4),), F(11, 10))
    v = eval_F2n(p, 0.3, 0.4, 0)
    assert v.value == 1.0
    assert v.tail_bound == float('inf')
    assert v.warning
    # a = 0 terminates after the constant term, but one anti-diagonal gives no ratio
    assert eval_F2n(HGParamsF2n((F(1, 3),), F(1, 5), 0, (F(5, 4),), F(11, 10)), 0.3, 0.4, 0).warning
    assert eval_Fnm(HGParamsFnm((F(1, 3),), (F(1, 5), F(1, 4)), (F(5, 4),)), (0.2, 0.3), 0).warning


def test_eval_F2n_reference_point():
    p = HGParamsF2n(('0.3', '0.4'), '0.2', '0.5', ('1.2', '1.4'), '1.1')
    v = eval_F2n(p, 0.1, 1.0 - 0.95, 24)
    exact = series_expand(p, 40).evaluate(0.1, 0.05)
    assert v.value == pytest.approx(exact, abs=1e-12)
    assert v.tail_bound < 1e-10


def test_eval_F2n_reduces_to_gauss_on_y_zero():
    p = HGParamsF2n((F(1, 3),), F(1, 5), F(3, 4), (F(5, 4),), F(11, 10))
    v = eval_F2n(p, 0.4, 0.0, 80)
    assert v.value == pytest.approx(hyp2f1(0.75, 1 / 3, 1.25, 0.4), abs=1e-12)


def test_eval_F2n_region():
    p = HGParamsF2n((F(1, 3),), F(1, 5), F(3, 4), (F(5, 4),), F(11, 10))
    with pytest.raises(RegionError) as e:
        eval_F2n(p, 0.6, 0.5, 10)
    assert e.value.point == (0.6, 0.5)


def test_params_contracts():
    with pytest.raises(ContractViolation):
        HGParamsF2n((F(1, 2),), 0, 0, (F(3, 2), F(5, 2)), F(3, 2))
    with pytest.raises(ContractViolation):
        HGParamsF2n((), 0, 0, (), F(3, 2))
    with pytest.raises(DomainError):
        HGParamsF2n((F(1, 2),), 0, 0, (-1,), F(3, 2))
    with pytest.raises(DomainError):
        AppellF4Params(1, 1, 0, F(1, 2))


def test_eval_Fnm_matches_appell_f1_double_sum():
    a, b1, b2, c = 0.35, 0.6, 0.25, 1.3
    p = HGParamsFnm((a,), (b1, b2), (c,))
    for s1, s2 in ((0.1, 0.2), (0.3, -0.2), (0.5, 0.45), (-0.4, 0.3)):
        oracle = 0.0
        for i in range(60):
            for j in range(60 - i):
                oracle += (pochhammer(a, i + j) * pochhammer(b1, i) * pochhammer(b2, j)
                           / (pochhammer(c, i + j) * factorial(i) * factorial(j))) * s1 ** i * s2 ** j
        assert eval_Fnm(p, (s1, s2), 60).value == pytest.approx(oracle, abs=1e-12)


def test_eval_Fnm_m3_with_zero_variable_is_m2():
    p3 = HGParamsFnm((F(1, 3), F(2, 5)), (F(1, 2), F(1, 4), F(3, 5)), (F(6, 5), F(7, 5)))
    p2 = HGParamsFnm(p3.alpha, p3.beta[:2], p3.gamma)
    v3 = eval_Fnm(p3, (0.2, 0.3, 0.0), 40)
    v2 = eval_Fnm(p2, (0.2, 0.3), 40)
    assert v3.value == pytest.approx(v2.value, abs=1e-12)


def test_coeff_Fnm_total_degree():
    p = HGParamsFnm((F(1, 2),), (F(1, 3), F(1, 4)), (F(3, 2),))
    # (1/2)_2 (1/3)_1 (1/4)_1 / ((3/2)_2 1! 1!)
    expected = F(1, 2) * F(3, 2) * F(1, 3) * F(1, 4) / (F(3, 2) * F(5, 2))
    assert coeff_Fnm(p, (1, 1)) == expected


def test_f2nm_m2_is_f2n():
    p = HGParamsF2nm((F(1, 3),), (F(1, 5),), F(1, 2), (F(4, 3),), (F(6, 5),))
    q = f2nm_as_f2n(p)
    assert eval_F2nm(p, (0.2, 0.3), 40).value == pytest.approx(eval_F2n(q, 0.2, 0.3, 40).value, abs=1e-14)
    assert coeff_F2nm(p, (2, 3)) == coeff_F2n(q, 2, 3)


def test_f2nm_m3_series_and_value_agree():
    p = HGParamsF2nm((F(1, 3),), (F(1, 5), F(2, 7)), F(1, 2), (F(4, 3),), (F(6, 5), F(9, 7)))
    s = series_expand_multi(p, 30)
    t = (0.1, 0.15, 0.2)
    assert eval_F2nm(p, t, 30).value == pytest.approx(s.evaluate(t), abs=1e-12)


def test_multiseries_limit():
    with pytest.raises(UnsupportedError):
        MultiSeries(4, 3, {})


def test_eval_F4_reduces_to_gauss_on_axis():
    p = AppellF4Params(F(3, 10), F(1, 2), F(6, 5), F(7, 5))
    assert eval_F4(p, 0.3, 0.0, 80).value == pytest.approx(hyp2f1(0.3, 0.5, 1.2, 0.3), abs=1e-12)
    with pytest.raises(RegionError):
        eval_F4(p, 0.5, 0.2, 10)


def test_f4_solution_series_matches_composed_value():
    p = AppellF4Params(F(3, 10), F(1, 2), F(6, 5), F(7, 5))
    s = f4_solution_series(p, 40)
    assert s.chart is Chart.X_T1_Y_ONE_MINUS_T2
    for t1, t2 in ((0.1, 0.9), (0.05, 0.95), (0.12, 0.88)):
        direct = eval_F4_solution(p, t1, t2, 60).value
        assert s.jet_t(t1, t2) == pytest.approx(direct, abs=1e-10)


def test_truncated_series_operations():
    s = TruncatedSeries2D.from_function(Chart.X_T1_Y_T2, 4, lambda i, j: F(i + 1, j + 1))
    assert s.euler_delta1()[2, 1] == 2 * F(3, 2)
    assert s.euler_delta2()[1, 2] == 2 * F(2, 3)
    assert s.apply_euler({(1, 1): 1, (0, 0): 2})[1, 1] == (1 + 2) * F(2, 2)
    assert s.mul_x()[0, 0] == 0
    assert s.mul_x()[1, 0] == s[0, 0]
    assert s.mul_x().N == 4
    assert s.truncate(2).N == 2
    with pytest.raises(ContractViolation):
        s.truncate(5)
    other = TruncatedSeries2D.zeros(Chart.X_T1_Y_ONE_MINUS_T2, 4)
    with pytest.raises(ContractViolation):
        s.add(other)


def test_derivatives_and_chart_sign():
    # y = 1 - t2, so d/dt2 of y is -1
    s = TruncatedSeries2D.from_function(Chart.X_T1_Y_ONE_MINUS_T2, 3,
                                        lambda i, j: 1 if (i, j) == (0, 1) else 0)
    assert s.jet_t(0.2, 0.7) == pytest.approx(0.3)
    assert s.jet_t(0.2, 0.7, 0, 1) == pytest.approx(-1.0)
    q = TruncatedSeries2D.from_function(Chart.X_T1_Y_T2, 3, lambda i, j: 1 if (i, j) == (2, 1) else 0)
    assert q.derivative(0.5, 0.4, 1, 0) == pytest.approx(2 * 0.5 * 0.4)
    assert q.partial_x()[1, 1] == 2
