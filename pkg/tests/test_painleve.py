from fractions import Fraction

import numpy as np
import pytest

from src.errors import ContractViolation, SingularPointError
from src.painleve import (Manifold, PainleveParamsF4, PhasePoint, birational_map, check_on_manifold,
                          constraint_drift, eval_H, eval_H_F4, flow_compatibility, generic_params,
                          hamiltonian_battery, involution_defect, parameter_relation, random_manifold_point,
                          random_phase_point, symplectic_defect, vector_field, verify_reduction,
                          verify_reduction_F4, verify_symmetry, w0_logderiv)
from src.pfaff import PainleveParams

F = Fraction


def draw(n, manifold, seed):
    rng = np.random.default_rng(seed)
    params = generic_params(rng, 3 if manifold is Manifold.F4 else n, manifold)
    return params, random_manifold_point(params, manifold, rng)


def test_phase_point_layout():
    with pytest.raises(ContractViolation):
        PhasePoint((0.5,), (0.1, 0.2), (0.3,), (0.0,), 0.2, 0.6)
    pt = PhasePoint((0.5,), (0.1,), (0.3,), (0.0,), 0.2, 0.6)
    assert pt.coords().tolist() == [0.5, 0.1, 0.3, 0.0]
    assert pt.with_coords([1, 2, 3, 4]).pp == (4.0,)
    assert pt.at(0.3, 0.7).t2 == 0.7


def test_hamiltonian_contracts():
    params, pt = draw(2, Manifold.F2, 0)
    assert np.isfinite(eval_H(params, pt, 1))
    with pytest.raises(ContractViolation):
        eval_H(params, pt, 3)
    small = PhasePoint((0.5,), (0.1,), (0.3,), (0.0,), 0.2, 0.6)
    with pytest.raises(ContractViolation):
        eval_H(params, small, 1)
    with pytest.raises(SingularPointError):
        eval_H(params, pt.at(0.4, 0.4), 1)
    alpha, f4pt = draw(3, Manifold.F4, 1)
    assert np.isfinite(eval_H_F4(alpha, f4pt, 2))
    with pytest.raises(ContractViolation):
        eval_H_F4(alpha, pt, 1)


def test_f4_parameter_relation():
    with pytest.raises(ContractViolation):
        PainleveParamsF4((F(1, 10), 0, F(1, 5), F(3, 10), 0, F(2, 5)))
    alpha = PainleveParamsF4((F(1, 10), 0, F(1, 5), F(3, 10), -F(4, 5), F(1, 10)))
    moved = alpha.shifted(1, F(1, 10))
    assert moved.alpha[1] == F(1, 10)
    assert moved.alpha[4] == -F(9, 10)
    assert parameter_relation(moved, Manifold.F4) == pytest.approx(0.1)


@pytest.mark.parametrize("manifold", list(Manifold))
@pytest.mark.parametrize("n", [1, 2])
def test_constraint_manifolds_are_invariant(n, manifold):
    for seed in range(3):
        params, pt = draw(n, manifold, 100 * n + seed)
        check_on_manifold(params, pt, manifold)
        assert max(abs(d) for d in constraint_drift(params, pt, manifold)) < 1e-6


def test_generic_point_leaves_the_manifold():
    rng = np.random.default_rng(5)
    params = generic_params(rng, 2, Manifold.F2)
    pt = random_phase_point(2, rng)
    with pytest.raises(ContractViolation):
        check_on_manifold(params, pt, Manifold.F2)
    assert max(abs(d) for d in constraint_drift(params, pt, Manifold.F2, check=False)) > 1e-3


@pytest.mark.parametrize("manifold", [Manifold.F2, Manifold.DEG])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_reduction_to_pfaff_connection(n, manifold):
    for seed in range(2):
        params, pt = draw(n, manifold, 200 + 10 * n + seed)
        assert verify_reduction(params, pt, manifold) < 1e-6


def test_reduction_off_manifold_fails():
    rng = np.random.default_rng(6)
    params = generic_params(rng, 1, Manifold.F2)
    pt = random_phase_point(1, rng)
    assert verify_reduction(params, pt, Manifold.F2, check=False) > 1e-3


def test_reduction_rejects_other_manifolds():
    params, pt = draw(1, Manifold.F1, 7)
    with pytest.raises(ContractViolation):
        verify_reduction(params, pt, Manifold.F1)
    with pytest.raises(ContractViolation):
        verify_reduction(params, pt, Manifold.F4)


def test_f4_reduction():
    for seed in range(3):
        alpha, pt = draw(3, Manifold.F4, 300 + seed)
        assert verify_reduction_F4(alpha, pt) < 1e-6
    alpha, pt = draw(3, Manifold.F4, 310)
    assert verify_reduction_F4(alpha.shifted(1, F(1, 10)), pt, check=False) > 1e-3


@pytest.mark.parametrize("n", [1, 2])
def test_flows_commute(n):
    rng = np.random.default_rng(400 + n)
    params = generic_params(rng, n, Manifold.F2)
    pt = random_phase_point(n, rng)
    scale = max(np.max(np.abs(vector_field(params, pt, i))) for i in (1, 2))
    assert flow_compatibility(params, pt) < 1e-4 * max(1.0, scale)


def test_birational_map_is_symplectic_involution():
    for n in (1, 2, 3):
        rng = np.random.default_rng(500 + n)
        params = generic_params(rng, n, Manifold.F2)
        pt = random_phase_point(n, rng)
        assert involution_defect(pt, params) < 1e-9
        assert symplectic_defect(pt, params) < 1e-9


def test_birational_map_swaps_theta():
    params, pt = draw(1, Manifold.F2, 8)
    image, params2, jac = birational_map(pt, params)
    assert (params2.theta1, params2.theta3) == (params.theta3, params.theta1)
    assert image.t1 == pytest.approx(1.0 / pt.t1)
    assert image.t2 == pytest.approx(pt.t2 / pt.t1)
    assert jac.shape == (2, 2)
    with pytest.raises(SingularPointError):
        birational_map(pt.with_coords([0.0] + list(pt.coords()[1:])), params)


@pytest.mark.parametrize("n", [1, 2])
def test_symmetry_of_the_system(n):
    rng = np.random.default_rng(600 + n)
    params = generic_params(rng, n, Manifold.F2)
    pt = random_phase_point(n, rng)
    assert verify_symmetry(params, pt) < 1e-5
    assert verify_symmetry(params, pt, swap_theta=False) > 1e-3


def test_hamiltonian_battery_small():
    out = hamiltonian_battery(1, np.random.default_rng(9), draws=2)
    for key in ('drift_F2', 'drift_F1', 'drift_DEG', 'drift_F4',
                'reduction_F2', 'reduction_DEG', 'reduction_F4'):
        assert out[key] < 1e-6, key
    assert out['involution'] < 1e-9
    assert out['symplectic'] < 1e-9
    assert out['symmetry'] < 1e-5


P = PainleveParams(theta1=-F(3, 4), theta2=F(1, 3), theta3=F(1, 5), kappa=(F(1, 7), F(2, 9)), rho=(F(1, 2),))
ALPHA = PainleveParamsF4((F(1, 10), 0, F(1, 5), F(3, 10), -F(4, 5), F(1, 10)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reduction_needs_theta_relation(n):
    for seed in range(2):
        params, pt = draw(n, Manifold.F2, 700 + 10 * n + seed)
        assert verify_reduction(params, pt, Manifold.F2) < 1e-6
        moved = params.replace(theta1=params.theta1 + F(1, 10))
        assert verify_reduction(moved, pt, Manifold.F2, check=False) > 1e-3


def test_w0_logderiv_main():
    pt = PhasePoint((0.4,), (0.0,), (1.0,), (0.3,), 0.2, 0.6)
    assert w0_logderiv(P, pt, Manifold.F2) == pytest.approx((0.2, 1 / 7 + 1 / 2, 1 / 3))
    pt = PhasePoint((0.4,), (0.5,), (0.25,), (0.3,), 0.2, 0.6)
    c1, c0, ct = w0_logderiv(P, pt, Manifold.F2)
    assert c1 == pytest.approx(0.5 + 0.2)
    assert c0 == pytest.approx(-0.75 * 0.5 + 1 / 7 + 1 / 2)
    assert ct == pytest.approx(-0.25 * 0.5 + 1 / 3)


def test_w0_logderiv_F4():
    pt = PhasePoint((0.0, 0.0, 0.0), (0.0, 0.4, 0.1), (), (), 0.3, 0.7)
    d1, d2 = w0_logderiv(ALPHA, pt, Manifold.F4)
    # alpha0 + alpha5 + 1 = 1.2, alpha3 = 0.3
    assert d1 == pytest.approx(-1.2 / (0.3 - 1.0) - 0.3 / 0.3)
    assert d2 == pytest.approx((0.4 - 1.2) / (0.7 - 1.0) - 0.3 / 0.7)
    with pytest.raises(ContractViolation):
        w0_logderiv(P, PhasePoint((0.4,), (0.0,), (1.0,), (0.3,), 0.2, 0.6), Manifold.F1)


def test_hamiltonians_at_the_origin():
    t1, t2 = 0.3, 0.7
    origin = PhasePoint((0.0,), (0.0,), (0.0,), (0.0,), t1, t2)
    th1, th2, th3, k0, kr1 = -0.75, 1 / 3, 0.2, 1 / 7, 2 / 9 + 1 / 2
    assert eval_H(P, origin, 1) == pytest.approx(
        th1 * th2 / (t1 - t2) + th1 * (kr1 + th3) / (t1 - 1.0) + th1 * k0 / t1)
    assert eval_H(P, origin, 2) == pytest.approx(
        th2 * th1 / (t2 - t1) + th2 * (kr1 + th3) / (t2 - 1.0) + th2 * k0 / t2)
    f4_origin = PhasePoint((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (), (), t1, t2)
    assert eval_H_F4(ALPHA, f4_origin, 1) == 0.0
    assert eval_H_F4(ALPHA, f4_origin, 2) == 0.0


@pytest.mark.parametrize("n", [1, 2])
def test_second_hamiltonian_is_the_swapped_first(n):
    rng = np.random.default_rng(800 + n)
    params = generic_params(rng, n, Manifold.F2)
    pt = random_phase_point(n, rng)
    swapped = PhasePoint(pt.qp, pt.pp, pt.q, pt.p, pt.t2, pt.t1)
    flipped = params.replace(theta1=params.theta2, theta2=params.theta1)
    assert eval_H(params, pt, 2) == pytest.approx(eval_H(flipped, swapped, 1), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_hamiltonian_is_quadratic_in_momenta(n):
    rng = np.random.default_rng(900 + n)
    params = generic_params(rng, n, Manifold.F2)
    pt = random_phase_point(n, rng)
    x0 = pt.coords()
    h = 0.5
    for k in list(range(n, 2 * n)) + list(range(3 * n, 4 * n)):
        for i in (1, 2):
            def f(s):
                x = x0.copy()
                x[k] += s
                return eval_H(params, pt.with_coords(x), i)
            third = f(2 * h) - 3 * f(h) + 3 * f(0.0) - f(-h)
            assert abs(third) < 1e-9 * max(1.0, abs(f(0.0))), (k, i)


def test_momentum_slope_on_the_zero_section():
    # q = q' = p' = 0: H1 = const + theta1 p (1/(t1-1) - 1/t1)
    t1, t2 = 0.3, 0.7

    def f(s):
        return eval_H(P, PhasePoint((0.0,), (s,), (0.0,), (0.0,), t1, t2), 1)
    assert (f(1.0) - f(-1.0)) / 2 == pytest.approx(-0.75 * (1 / (t1 - 1.0) - 1 / t1))


def test_birational_fixed_locus():
    kr = float(P.kr(1))
    pt = PhasePoint((1.0,), (kr / 2,), (0.0,), (0.0,), -1.0, 0.5)
    image, _, _ = birational_map(pt, P)
    assert image.coords() == pytest.approx(pt.coords())
    qp, pp = 0.4, -0.3
    pt = PhasePoint((-1.0,), ((qp * pp - kr) / 2,), (qp,), (pp,), 0.4, 0.5)
    image, _, _ = birational_map(pt, P)
    assert image.coords() == pytest.approx(pt.coords())


@pytest.mark.parametrize("n", [1, 2, 3])
def test_birational_map_sends_F2_manifold_to_F1(n):
    params, pt = draw(n, Manifold.F2, 1000 + n)
    check_on_manifold(params, pt, Manifold.F2)
    image, params2, _ = birational_map(pt, params)
    assert np.max(np.abs(image.p)) < 1e-12
    assert np.max(np.abs(image.pp)) < 1e-12
    check_on_manifold(params2, image, Manifold.F1)
