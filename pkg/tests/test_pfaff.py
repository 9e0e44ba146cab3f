from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from src.errors import ContractViolation, SingularPointError
from src.hgseries import Chart, HGParamsF2n, f4_solution_series, series_expand
from src.painleve import Manifold, generic_params
from src.pfaff import (Divisor, LogConnection, PainleveParams, build_connection_F4, build_connection_degenerate,
                       build_connection_main, connection_to_json, construct_w_F4, construct_w_degenerate,
                       construct_w_main, continue_solution, degenerate_z, degeneration_substitution,
                       f2n_from_painleve, f4_from_alpha, flatness_residual, painleve_from_f2n,
                       reduce_connection_degenerate, riemann_scheme, scheme_to_json, verify_component_odes,
                       verify_pfaff_solution, verify_scheme, zero_connection)
from src.settings import Settings, default_grid

F = Fraction
GRID = default_grid(Settings())


def random_points(rng, count):
    out = []
    while len(out) < count:
        t1, t2 = rng.uniform(-0.9, 0.9, size=2)
        if min(abs(t1), abs(t2), abs(t1 - t2)) > 0.05:
            out.append((float(t1), float(t2)))
    return out


def connections(rng, n):
    return [build_connection_main(generic_params(rng, n, Manifold.F2)),
            build_connection_degenerate(generic_params(rng, n, Manifold.DEG)),
            build_connection_F4(generic_params(rng, 3, Manifold.F4).alpha)]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_connections_are_flat(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        for conn in connections(rng, n):
            worst = max(flatness_residual(conn, t1, t2) for t1, t2 in random_points(rng, 100))
            assert worst < 1e-11, conn.kind


def test_zero_and_perturbed_connections():
    zero = zero_connection(3)
    assert flatness_residual(zero, 0.3, 0.6) == 0.0
    conn = build_connection_main(generic_params(np.random.default_rng(0), 1, Manifold.F2))
    bad = conn.perturbed(Divisor.T1, 0, 0, 0.1)
    assert bad.kind == 'main+perturbed'
    assert max(flatness_residual(bad, t1, t2) for t1, t2 in [(0.3, 0.6), (-0.4, 0.2), (0.7, -0.5)]) > 1e-6
    assert flatness_residual(conn.scaled(0.0), 0.3, 0.6) == 0.0


def test_connection_contracts():
    with pytest.raises(ContractViolation):
        LogConnection('broken', 2, {Divisor.T1: np.zeros((2, 2))})
    with pytest.raises(SingularPointError) as e:
        flatness_residual(zero_connection(2), 0.4, 0.4)
    assert e.value.divisor == 't1-t2'
    p = generic_params(np.random.default_rng(1), 2, Manifold.F2)
    with pytest.raises(ContractViolation):
        build_connection_degenerate(p.replace(kappa=(F(1, 5), F(3, 10), F(2, 5))))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_riemann_schemes(n):
    rng = np.random.default_rng(10 + n)
    for _ in range(5):
        for conn in connections(rng, n):
            report = verify_scheme(conn)
            assert report.ok, (conn.kind, report.deviations)


def test_scheme_spectral_types():
    rng = np.random.default_rng(4)
    main = riemann_scheme(build_connection_main(generic_params(rng, 2, Manifold.F2)))
    assert main.spectral_type('t1=1') == (4, 1)
    assert main.spectral_type('t1=t2') == (4, 1)
    f4 = riemann_scheme(build_connection_F4(generic_params(rng, 3, Manifold.F4).alpha))
    assert f4.spectral_type('t1=t2') == (3, 1)
    assert f4.spectral_type('t1=0') == (2, 2)


def test_wrong_params_fail_scheme():
    rng = np.random.default_rng(5)
    p = generic_params(rng, 1, Manifold.F2)
    conn = build_connection_main(p)
    report = verify_scheme(conn, params=p.replace(theta3=p.theta3 + F(1, 10)))
    assert not report.ok
    assert not report.columns['t1=1']


def test_reduced_main_connection_is_degenerate_connection():
    for n in (1, 2, 3):
        p = generic_params(np.random.default_rng(20 + n), n, Manifold.DEG)
        reduced = reduce_connection_degenerate(build_connection_main(p))
        direct = build_connection_degenerate(p)
        for d in Divisor:
            assert np.max(np.abs(reduced[d] - direct[d])) < 1e-12


def test_dictionary_round_trip():
    hp = HGParamsF2n((F(3, 10), F(2, 5)), F(1, 5), F(6, 5) + F(11, 10) - 2, (F(6, 5), F(7, 5)), F(11, 10))
    p = painleve_from_f2n(hp)
    assert p.r(1) == 0
    assert p.theta1 == -p.sum_kr
    assert f2n_from_painleve(p) == hp


def test_f4_parameters():
    with pytest.raises(ContractViolation):
        f4_from_alpha((F(1, 10), 0, F(1, 5), F(3, 10), 0, F(2, 5)))
    alpha = generic_params(np.random.default_rng(6), 3, Manifold.F4).alpha
    f4 = f4_from_alpha(alpha)
    assert f4.c1 == alpha[3] + 1
    assert f4.c2 == alpha[5] + 1


@pytest.mark.parametrize("n", [1, 2])
def test_main_solution_vector(n):
    p = generic_params(np.random.default_rng(30 + n), n, Manifold.F2)
    hp = f2n_from_painleve(p)
    w = construct_w_main(series_expand(hp, 40, Chart.X_T1_Y_ONE_MINUS_T2), hp)
    assert w.dim == 2 * n + 1
    assert w.labels[0] == 'w0'
    conn = build_connection_main(p)
    assert verify_pfaff_solution(conn, w, GRID) < 1e-9
    for name, r in verify_component_odes(w, hp, GRID).items():
        assert r < 1e-9, name
    wrong = build_connection_main(p.replace(theta2=p.theta2 + F(1, 10)))
    assert verify_pfaff_solution(wrong, w, GRID) > 1e-4
    moved = replace(hp, b=(hp.b[0] + F(1, 20),) + hp.b[1:])
    w_moved = construct_w_main(series_expand(moved, 40, Chart.X_T1_Y_ONE_MINUS_T2), moved)
    assert verify_pfaff_solution(conn, w_moved, GRID) > 1e-4


def test_main_solution_needs_constrained_a():
    hp = HGParamsF2n((F(3, 10),), F(1, 5), F(1, 2), (F(6, 5),), F(11, 10))
    with pytest.raises(ContractViolation):
        construct_w_main(series_expand(hp, 10), hp)


@pytest.mark.parametrize("n", [1, 2])
def test_degenerate_square_commutes(n):
    p = generic_params(np.random.default_rng(40 + n), n, Manifold.DEG)
    hp = f2n_from_painleve(p)
    assert hp.b[0] == hp.c[0] - 1
    z = series_expand(hp, 40, Chart.X_T1_Y_ONE_MINUS_T2)
    conn = build_connection_degenerate(p)

    w_sub = degeneration_substitution(construct_w_main(z, hp), p)
    assert verify_pfaff_solution(conn, w_sub, GRID) < 1e-9

    w_deg = construct_w_degenerate(degenerate_z(z, hp), hp)
    assert w_deg.dim == 2 * n
    for a, b in zip(w_deg.components, w_sub.components):
        assert a.sub(b).max_abs() == 0
    assert verify_pfaff_solution(conn, w_deg, GRID) < 1e-9
    moved = replace(hp, b=(hp.b[0] + F(1, 20),) + hp.b[1:])
    z_moved = series_expand(moved, 40, Chart.X_T1_Y_ONE_MINUS_T2)
    assert verify_pfaff_solution(conn, construct_w_degenerate(degenerate_z(z_moved, moved), moved), GRID) > 1e-4


def test_substitution_needs_equal_kappas():
    p = generic_params(np.random.default_rng(7), 1, Manifold.F2)
    hp = f2n_from_painleve(p)
    w = construct_w_main(series_expand(hp, 12, Chart.X_T1_Y_ONE_MINUS_T2), hp)
    with pytest.raises(ContractViolation):
        degeneration_substitution(w, p)


def test_f4_solution_vector():
    alpha = generic_params(np.random.default_rng(8), 3, Manifold.F4)
    z = f4_solution_series(f4_from_alpha(alpha.alpha), 40)
    w = construct_w_F4(z, alpha.alpha)
    assert w.labels == ('w0', 'w1', 'w2', 'w3')
    assert verify_pfaff_solution(build_connection_F4(alpha.alpha), w, GRID) < 1e-9
    wrong = build_connection_F4(alpha.shifted(2, F(1, 10)).alpha)
    assert verify_pfaff_solution(wrong, w, GRID) > 1e-4
    f4 = f4_from_alpha(alpha.alpha)
    w_moved = construct_w_F4(f4_solution_series(replace(f4, a=f4.a + F(1, 20)), 40), alpha.alpha)
    assert verify_pfaff_solution(build_connection_F4(alpha.alpha), w_moved, GRID) > 1e-4


def test_transport_matches_series_solution():
    p = generic_params(np.random.default_rng(9), 1, Manifold.F2)
    hp = f2n_from_painleve(p)
    w = construct_w_main(series_expand(hp, 40, Chart.X_T1_Y_ONE_MINUS_T2), hp)
    conn = build_connection_main(p)
    start, end = (0.05, 0.92), (0.12, 0.88)
    moved = continue_solution(conn, w.values(*start), [start, (0.1, 0.95), end])
    assert np.max(np.abs(moved - w.values(*end))) < 1e-8


def test_transport_refuses_divisor_crossing():
    conn = zero_connection(2)
    with pytest.raises(SingularPointError):
        continue_solution(conn, [1.0, 0.0], [(0.3, 0.5), (0.6, 0.4)])
    with pytest.raises(ContractViolation):
        continue_solution(conn, [1.0, 0.0, 0.0], [(0.3, 0.5), (0.2, 0.6)])


def test_json_dumps():
    conn = build_connection_F4(generic_params(np.random.default_rng(11), 3, Manifold.F4).alpha)
    data = connection_to_json(conn)
    assert data['kind'] == 'F4'
    assert set(data['residues']) == {d.value for d in Divisor}
    scheme = scheme_to_json(riemann_scheme(conn))
    assert scheme['spectral_types']['t1=t2'] == [3, 1]
    assert sum(e['multiplicity'] for e in scheme['columns']['t1=0']) == 4


def test_painleve_params_contract():
    with pytest.raises(ContractViolation):
        PainleveParams(0, 0, 0, (F(1, 2),), (F(1, 3),))
