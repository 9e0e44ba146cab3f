"""
Command-line harness: evaluate series, run verification suites and dump
connection data. Every subcommand prints one JSON report:

    {command, seed, params, checks: [{name, residual, tolerance, pass}], summary}

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or config error.
"""
import argparse
import asyncio
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.concurrency import map_points, run_checks_async, run_checks_threaded
from src.equivalence import (corollary_points, degeneration_chain_report, verify_corollary_identity,
                             verify_system_transform, wrong_dictionary)
from src.errors import ContractViolation, HPLabError
from src.hgseries import (AppellF4Params, Chart, HGParamsF2n, HGParamsF2nm, HGParamsFnm, eval_F2n, eval_F2nm,
                          eval_F4, eval_F4_solution, eval_Fnm, f4_solution_series, series_expand, to_fraction)
from src.integrals import (QuadratureConfig, degenerate_series_params, inner_beta_reduction, integral_F2n,
                           integral_F2n_degenerate, integral_Fn2, pochhammer_ratio_identity)
from src.logs import configure_logging, log
from src.lpde import system_battery
from src.painleve import (Manifold, PainleveParamsF4, generic_params, hamiltonian_battery, random_manifold_point,
                          random_phase_point, verify_reduction, verify_reduction_F4, verify_symmetry)
from src.pfaff import (PainleveParams, build_connection_F4, build_connection_degenerate, build_connection_main,
                       connection_to_json, construct_w_F4, construct_w_degenerate, construct_w_main, degenerate_z,
                       degeneration_substitution, f2n_from_painleve, f4_from_alpha, flatness_residual,
                       riemann_scheme, scheme_to_json, verify_component_odes, verify_pfaff_solution, verify_scheme)
from src.settings import Settings, default_grid, generic_draws, load_settings, resolve_seed

Check = Dict[str, object]
SYSTEMS = ('main', 'degenerate', 'F4')
SOLUTION_DRAWS = 2
DICTIONARY_SHIFT = Fraction(1, 20)


def check(name: str, residual: float, tolerance: float, negative: bool = False) -> Check:
    """A negative control passes when its residual stays above the tolerance."""
    residual = float(residual)
    ok = residual > tolerance if negative else residual < tolerance
    log(f"check {name}: residual={residual:.3e} tol={tolerance:.1e} pass={ok}")
    return {'name': name, 'residual': residual, 'tolerance': float(tolerance), 'pass': bool(ok)}


def _fracs(text: str) -> Tuple[Fraction, ...]:
    try:
        return tuple(to_fraction(v.strip()) for v in text.split(',') if v.strip())
    except (ValueError, ZeroDivisionError):
        raise ContractViolation(f"cannot parse parameter list {text!r}")


def _floats(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise ContractViolation(f"cannot parse point {text!r}")


def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _run(tasks: Sequence[Tuple[str, Callable[[], List[Check]]]], mode: str) -> List[Check]:
    if mode == 'async':
        results = asyncio.run(run_checks_async(tasks))
    else:
        results = run_checks_threaded(tasks)
    out = []
    for _, checks in results:
        out.extend(checks)
    return out


def _off_divisor_points(rng: np.random.Generator, count: int, gap: float = 0.05) -> List[Tuple[float, float]]:
    out = []
    while len(out) < count:
        t1, t2 = (float(v) for v in rng.uniform(-0.9, 0.9, size=2))
        if min(abs(t1), abs(t2), abs(t1 - t2)) > gap:
            out.append((t1, t2))
    return out


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _eval(args, settings: Settings) -> Tuple[dict, List[Check], dict]:
    kind = args.series
    if kind == 'f2n':
        p = HGParamsF2n(_fracs(args.b), to_fraction(args.bprime), to_fraction(args.a),
                        _fracs(args.c), to_fraction(args.cprime))
        if args.n is not None and args.n != p.n:
            raise ContractViolation(f"--n {args.n} does not match {p.n} values of b")
        value = eval_F2n(p, args.t1, 1.0 - args.t2, args.N, margin=settings.margin, tol=settings.tail_tol)
        params = {'n': p.n, 'b': p.b, 'bprime': p.bprime, 'a': p.a, 'c': p.c, 'cprime': p.cprime,
                  't1': args.t1, 't2': args.t2, 'N': args.N}
    elif kind == 'fn2':
        p = HGParamsFnm(_fracs(args.alpha), (to_fraction(args.beta1), to_fraction(args.beta2)), _fracs(args.gamma))
        value = eval_Fnm(p, (args.s1, args.s2), args.N, margin=settings.margin, tol=settings.tail_tol)
        params = {'alpha': p.alpha, 'beta': p.beta, 'gamma': p.gamma, 's': [args.s1, args.s2], 'N': args.N}
    elif kind == 'fnm':
        p = HGParamsFnm(_fracs(args.alpha), _fracs(args.beta), _fracs(args.gamma))
        s = _floats(args.s)
        value = eval_Fnm(p, s, args.N, margin=settings.margin, tol=settings.tail_tol)
        params = {'alpha': p.alpha, 'beta': p.beta, 'gamma': p.gamma, 's': s, 'N': args.N}
    elif kind == 'f2nm':
        p = HGParamsF2nm(_fracs(args.b1row), _fracs(args.b_rest), to_fraction(args.a),
                         _fracs(args.c1row), _fracs(args.c_rest))
        t = _floats(args.t)
        value = eval_F2nm(p, t, args.N, margin=settings.margin, tol=settings.tail_tol)
        params = {'b1row': p.b1row, 'b_rest': p.b_rest, 'a': p.a, 'c1row': p.c1row, 'c_rest': p.c_rest,
                  't': t, 'N': args.N}
    else:
        p = AppellF4Params(to_fraction(args.a), to_fraction(args.b), to_fraction(args.c1), to_fraction(args.c2))
        fn = eval_F4_solution if args.solution else eval_F4
        value = fn(p, args.t1, args.t2, args.N, margin=settings.margin, tol=settings.tail_tol)
        params = {'a': p.a, 'b': p.b, 'c1': p.c1, 'c2': p.c2, 't1': args.t1, 't2': args.t2, 'N': args.N,
                  'solution': bool(args.solution)}
    checks = [check('tail_bound', value.tail_bound, settings.tail_tol)]
    summary = {'value': value.value, 'tail_bound': value.tail_bound, 'warning': value.warning}
    return params, checks, summary


# ---------------------------------------------------------------------------
# verify suites; each returns a list of checks and draws from its own generator
# ---------------------------------------------------------------------------

def verify_lpde(n: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst = system_battery(n, rng, draws=draws)
    negative = worst.pop('negative_control')
    checks = [check(f'lpde n={n} {name}', r, settings.tol('lpde_pointwise')) for name, r in worst.items()]
    checks.append(check(f'lpde n={n} negative_control', negative, settings.tol('negative_lpde'), negative=True))
    return checks


def _integral_draw(rng: np.random.Generator, n: int) -> HGParamsF2n:
    """b, b' in (0.1, 0.9); c - b and c' - b' in (0.1, 0.9)."""
    v = generic_draws(rng, 1, 2 * n + 3)[0]
    b, bp, a = v[:n], v[n], v[n + 1]
    c = tuple(bk + uk for bk, uk in zip(b, v[n + 2:2 * n + 2]))
    return HGParamsF2n(tuple(b), bp, a, c, bp + v[2 * n + 2])


def verify_integral(n: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    q = QuadratureConfig(nodes_per_axis=settings.quad_nodes)
    tol = settings.tol('integral')
    points = ((0.1, 0.95), (0.15, 0.92))
    worst = {'F2n': 0.0, 'degenerate': 0.0, 'F_(n+1,2)': 0.0}
    for _ in range(draws):
        p = _integral_draw(rng, n)
        for t1, t2 in points:
            series = eval_F2n(p, t1, 1.0 - t2, settings.N_pfaff, margin=settings.margin).value
            worst['F2n'] = max(worst['F2n'], abs(integral_F2n(p, t1, t2, q) - series))
            y = 1.0 - t2
            side = y ** (1.0 - float(p.cprime)) * eval_F2n(degenerate_series_params(p), t1, y,
                                                            settings.N_pfaff, margin=settings.margin).value
            worst['degenerate'] = max(worst['degenerate'], abs(integral_F2n_degenerate(p, t1, t2, q) - side))
        pf = HGParamsFnm(p.b, (p.a, p.bprime), p.c)
        s1, s2 = 0.2, 0.4
        series = eval_Fnm(pf, (s1, s2), 80, margin=settings.margin).value
        worst['F_(n+1,2)'] = max(worst['F_(n+1,2)'], abs(integral_Fn2(pf, s1, s2, q) - series))
    checks = [check(f'integral n={n} {name}', r, tol) for name, r in worst.items()]

    bp, cp = sorted(generic_draws(rng, 1, 2)[0])
    red = inner_beta_reduction(bp, cp, 0.2, 0.7, q)
    checks.append(check('inner_beta_reduction', abs(red.lhs - red.rhs), settings.tol('beta_reduction')))

    c1, b1 = generic_draws(rng, 1, 2)[0]
    failures = sum(not pochhammer_ratio_identity(c1 + 1, b1, i, j) for i in range(7) for j in range(7))
    checks.append(check('pochhammer_ratio_identity', failures, 0.5))
    return checks


def _draw_connection(system: str, n: int, rng: np.random.Generator):
    if system == 'F4':
        alpha = generic_params(rng, 3, Manifold.F4)
        return alpha, build_connection_F4(alpha.alpha)
    if system == 'degenerate':
        p = generic_params(rng, n, Manifold.DEG)
        return p, build_connection_degenerate(p)
    p = generic_params(rng, n, Manifold.F2)
    return p, build_connection_main(p)


def _solution_and_controls(system: str, params, settings: Settings):
    """(solution vector, connection with a shifted parameter, vector built from a perturbed dictionary)."""
    N = settings.N_pfaff
    if system == 'F4':
        f4 = f4_from_alpha(params.alpha)
        moved = replace(f4, a=f4.a + DICTIONARY_SHIFT)
        return (construct_w_F4(f4_solution_series(f4, N), params.alpha),
                build_connection_F4(params.shifted(2, Fraction(1, 10)).alpha),
                construct_w_F4(f4_solution_series(moved, N), params.alpha))

    def vector(hp):
        z = series_expand(hp, N, Chart.X_T1_Y_ONE_MINUS_T2)
        if system == 'degenerate':
            return construct_w_degenerate(degenerate_z(z, hp), hp)
        return construct_w_main(z, hp)

    hp = f2n_from_painleve(params)
    moved = replace(hp, b=(hp.b[0] + DICTIONARY_SHIFT,) + hp.b[1:])
    wrong = params.replace(theta2=params.theta2 + Fraction(1, 10))
    build = build_connection_degenerate if system == 'degenerate' else build_connection_main
    return vector(hp), build(wrong), vector(moved)


def verify_pfaff(system: str, n: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    """
    Flatness over `draws` parameter draws of 100 off-divisor points each; the
    solution vector and the negative controls on the first SOLUTION_DRAWS of them.
    """
    if system not in SYSTEMS:
        raise ContractViolation(f"unknown system {system!r}, expected one of {SYSTEMS}")
    rng = np.random.default_rng(seed)
    grid = default_grid(settings)
    label = f'pfaff {system}' + ('' if system == 'F4' else f' n={n}')
    flat, solution = 0.0, 0.0
    negative, dictionary = float('inf'), float('inf')
    components: Dict[str, float] = {}
    for k in range(max(1, draws)):
        params, conn = _draw_connection(system, n, rng)
        values = map_points(lambda pt: flatness_residual(conn, *pt), _off_divisor_points(rng, 100),
                            settings.threads)
        flat = max(flat, max(values))
        if k >= SOLUTION_DRAWS:
            continue
        w, wrong, moved = _solution_and_controls(system, params, settings)
        solution = max(solution, verify_pfaff_solution(conn, w, grid))
        negative = min(negative, verify_pfaff_solution(wrong, w, grid))
        dictionary = min(dictionary, verify_pfaff_solution(conn, moved, grid))
        if system == 'main':
            hp = f2n_from_painleve(conn.params)
            for name, r in verify_component_odes(w, hp, grid).items():
                components[name] = max(components.get(name, 0.0), r)
    checks = [check(f'{label} flatness', flat, settings.tol('flatness')),
              check(f'{label} solution', solution, settings.tol('pfaff_solution'))]
    checks.extend(check(f'{label} component {name}', r, settings.tol('component_ode'))
                  for name, r in components.items())
    floor = settings.tol('negative_pfaff')
    checks.append(check(f'{label} negative_control shifted_parameter', negative, floor, negative=True))
    checks.append(check(f'{label} negative_control perturbed_dictionary', dictionary, floor, negative=True))
    if system == 'degenerate':
        checks.append(_substitution_check(n, rng, settings, grid))
    return checks


def _substitution_check(n: int, rng: np.random.Generator, settings: Settings, grid) -> Check:
    """The substituted main vector solves the degenerate system."""
    p = generic_params(rng, n, Manifold.DEG)
    hp = f2n_from_painleve(p)
    z = series_expand(hp, settings.N_pfaff, Chart.X_T1_Y_ONE_MINUS_T2)
    w = degeneration_substitution(construct_w_main(z, hp), p)
    r = verify_pfaff_solution(build_connection_degenerate(p), w, grid)
    return check(f'pfaff degenerate n={n} substitution', r, settings.tol('pfaff_solution'))


def verify_schemes(n: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst = {'main': 0.0, 'degenerate': 0.0, 'F4': 0.0}
    for _ in range(draws):
        conns = {'main': build_connection_main(generic_params(rng, n, Manifold.F2)),
                 'degenerate': build_connection_degenerate(generic_params(rng, n, Manifold.DEG)),
                 'F4': build_connection_F4(generic_params(rng, 3, Manifold.F4).alpha)}
        for kind, conn in conns.items():
            report = verify_scheme(conn, tol=settings.tol('scheme'))
            worst[kind] = max(worst[kind], report.max_deviation)
    return [check(f'scheme {kind}' + ('' if kind == 'F4' else f' n={n}'), r, settings.tol('scheme'))
            for kind, r in worst.items()]


def verify_reductions(n: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst = hamiltonian_battery(n, rng, draws=draws)
    checks = [check(f'hamiltonian n={n} {key}', worst[key], settings.tol('drift'))
              for key in ('drift_F2', 'drift_F1', 'drift_DEG', 'drift_F4')]
    checks.extend(check(f'hamiltonian n={n} {key}', worst[key], settings.tol('reduction'))
                  for key in ('reduction_F2', 'reduction_DEG', 'reduction_F4'))

    p = generic_params(rng, n, Manifold.F2)
    off = verify_reduction(p, random_phase_point(n, rng), Manifold.F2, check=False)
    # on the F2 manifold of p, with theta1 moved off theta1 = -sum(kappa_j + rho_j)
    on = random_manifold_point(p, Manifold.F2, rng)
    relation = verify_reduction(p.replace(theta1=p.theta1 + Fraction(1, 10)), on, Manifold.F2, check=False)
    alpha = generic_params(rng, 3, Manifold.F4)
    pt = random_manifold_point(alpha, Manifold.F4, rng)
    off_f4 = verify_reduction_F4(alpha.shifted(1, Fraction(1, 10)), pt, check=False)
    floor = settings.tol('negative_hamiltonian')
    checks.append(check(f'hamiltonian n={n} negative_control off_manifold', off, floor, negative=True))
    checks.append(check(f'hamiltonian n={n} negative_control theta_relation', relation, floor, negative=True))
    checks.append(check('hamiltonian F4 negative_control shifted_alpha1', off_f4, floor, negative=True))
    return checks


def verify_symmetries(n: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst = hamiltonian_battery(n, rng, draws=draws)
    checks = [check(f'symmetry n={n} involution', worst['involution'], settings.tol('involution')),
              check(f'symmetry n={n} symplectic', worst['symplectic'], settings.tol('symplectic')),
              check(f'symmetry n={n} flows', worst['symmetry'], settings.tol('symmetry'))]
    p = generic_params(rng, n, Manifold.F2)
    r = verify_symmetry(p, random_phase_point(n, rng), swap_theta=False)
    checks.append(check(f'symmetry n={n} negative_control unswapped', r,
                        settings.tol('negative_hamiltonian'), negative=True))
    return checks


def verify_equivalence(n: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    v = generic_draws(rng, 1, 2 * n + 2)[0]
    fn2 = HGParamsFnm(tuple(v[:n]), (v[n], v[n + 1]), tuple(v[n + 2:]))
    discrepancy = max(verify_corollary_identity(fn2, s1, s2).discrepancy
                      for s1, s2 in corollary_points(rng, 20))

    w = generic_draws(rng, 1, 2 * n + 2)[0]
    cp = w[n + 1]
    p = HGParamsF2n(tuple(w[:n]), w[n], cp, tuple(w[n + 2:]), cp)
    grid = default_grid(settings)
    transform = verify_system_transform(p, grid)
    negative = verify_system_transform(p, grid, target=wrong_dictionary(p))
    return [check(f'equivalence n={n} corollary', discrepancy, settings.tol('corollary')),
            check(f'equivalence n={n} transform', transform, settings.tol('transform')),
            check(f'equivalence n={n} negative_control wrong_dictionary', negative,
                  settings.tol('negative_lpde'), negative=True)]


def verify_chain(n_max: int, seed: int, settings: Settings, draws: int) -> List[Check]:
    report = degeneration_chain_report(n_max, seed=seed, settings=settings, draws=draws)
    return [{**edge, 'name': f"chain n={row['n']} {edge['name']}"}
            for row in report['rows'] for edge in row['edges']]


def _verify_tasks(args, seed: int, settings: Settings) -> List[Tuple[str, Callable[[], List[Check]]]]:
    target = args.suite
    draws = args.draws if args.draws is not None else settings.draws
    if target == 'all':
        tasks = []
        for n in range(1, args.n_max + 1):
            tasks += [(f'lpde {n}', lambda n=n: verify_lpde(n, seed, settings, draws)),
                      (f'integral {n}', lambda n=n: verify_integral(n, seed, settings, min(draws, 10))),
                      (f'pfaff main {n}', lambda n=n: verify_pfaff('main', n, seed, settings, draws)),
                      (f'pfaff degenerate {n}', lambda n=n: verify_pfaff('degenerate', n, seed, settings, draws)),
                      (f'scheme {n}', lambda n=n: verify_schemes(n, seed, settings, draws)),
                      (f'reduction {n}', lambda n=n: verify_reductions(n, seed, settings, min(draws, 10))),
                      (f'symmetry {n}', lambda n=n: verify_symmetries(n, seed, settings, min(draws, 10))),
                      (f'equivalence {n}', lambda n=n: verify_equivalence(n, seed, settings, draws))]
        tasks.append(('pfaff F4', lambda: verify_pfaff('F4', 1, seed, settings, draws)))
        tasks.append(('chain', lambda: verify_chain(args.n_max, seed, settings, 3)))
        return tasks
    n = args.n
    suites = {
        'lpde': lambda: verify_lpde(n, seed, settings, draws),
        'integral': lambda: verify_integral(n, seed, settings, draws),
        'pfaff': lambda: verify_pfaff(args.system, n, seed, settings, draws),
        'scheme': lambda: verify_schemes(n, seed, settings, draws),
        'reduction': lambda: verify_reductions(n, seed, settings, draws),
        'symmetry': lambda: verify_symmetries(n, seed, settings, draws),
        'equivalence': lambda: verify_equivalence(n, seed, settings, draws),
        'chain': lambda: verify_chain(args.n_max, seed, settings, args.draws or 3),
    }
    return [(target, suites[target])]


# ---------------------------------------------------------------------------
# dump
# ---------------------------------------------------------------------------

def _dump_params(args, rng: np.random.Generator):
    if args.system == 'F4':
        if args.alpha:
            return PainleveParamsF4(_fracs(args.alpha))
        return generic_params(rng, 3, Manifold.F4)
    if args.kappa or args.rho:
        if not (args.kappa and args.rho):
            raise ContractViolation("--kappa and --rho must be given together")
        return PainleveParams(to_fraction(args.theta1), to_fraction(args.theta2), to_fraction(args.theta3),
                              _fracs(args.kappa), _fracs(args.rho))
    manifold = Manifold.DEG if args.system == 'degenerate' else Manifold.F2
    return generic_params(rng, args.n, manifold)


def _dump(args, seed: int, settings: Settings) -> Tuple[dict, List[Check], dict]:
    rng = np.random.default_rng(seed)
    p = _dump_params(args, rng)
    if args.system == 'F4':
        conn = build_connection_F4(p.alpha)
        params = {'system': 'F4', 'alpha': p.alpha}
    else:
        conn = (build_connection_degenerate if args.system == 'degenerate' else build_connection_main)(p)
        params = {'system': args.system, 'theta1': p.theta1, 'theta2': p.theta2, 'theta3': p.theta3,
                  'kappa': p.kappa, 'rho': p.rho}
    if args.what == 'connection':
        t1, t2 = _off_divisor_points(rng, 1)[0]
        checks = [check('flatness', flatness_residual(conn, t1, t2), settings.tol('flatness'))]
        return params, checks, connection_to_json(conn)
    report = verify_scheme(conn, tol=settings.tol('scheme'))
    checks = [check('scheme', report.max_deviation, settings.tol('scheme'))]
    return params, checks, scheme_to_json(riemann_scheme(conn))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["thread", "async"], default="thread", help="Modo de concurrencia")
    common.add_argument("--log-file", default=None, help="Archivo de log ('' lo desactiva)")
    common.add_argument("--verbose", action="store_true", help="Log de depuracion")
    common.add_argument("--config", default=None, help="Archivo JSON de configuracion")
    common.add_argument("--out", default=None, help="Escribir el reporte en este archivo")
    common.add_argument("--no-timestamp", action="store_true", help="Reporte sin marca de tiempo")
    common.add_argument("--tol", type=float, default=None, help="Tolerancia para todos los checks")
    common.add_argument("--seed", type=int, default=None, help="Semilla (por defecto HPLAB_SEED o 0)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(description="hplab - series hipergeometricas, sistemas de Pfaff y Painleve")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="Evaluar una serie")
    ev_sub = ev.add_subparsers(dest="series", required=True)
    f2n = ev_sub.add_parser("f2n", parents=[common])
    f2n.add_argument("--n", type=int, default=None)
    f2n.add_argument("--b", required=True)
    f2n.add_argument("--bprime", required=True)
    f2n.add_argument("--a", required=True)
    f2n.add_argument("--c", required=True)
    f2n.add_argument("--cprime", required=True)
    fn2 = ev_sub.add_parser("fn2", parents=[common])
    fn2.add_argument("--alpha", required=True)
    fn2.add_argument("--beta1", required=True)
    fn2.add_argument("--beta2", required=True)
    fn2.add_argument("--gamma", required=True)
    fn2.add_argument("--s1", type=float, required=True)
    fn2.add_argument("--s2", type=float, required=True)
    fnm = ev_sub.add_parser("fnm", parents=[common])
    fnm.add_argument("--alpha", required=True)
    fnm.add_argument("--beta", required=True)
    fnm.add_argument("--gamma", required=True)
    fnm.add_argument("--s", required=True, help="s1,...,sm")
    f2nm = ev_sub.add_parser("f2nm", parents=[common])
    f2nm.add_argument("--b1row", required=True)
    f2nm.add_argument("--b-rest", required=True)
    f2nm.add_argument("--a", required=True)
    f2nm.add_argument("--c1row", required=True)
    f2nm.add_argument("--c-rest", required=True)
    f2nm.add_argument("--t", required=True, help="t1,...,tm")
    f4 = ev_sub.add_parser("f4", parents=[common])
    f4.add_argument("--a", required=True)
    f4.add_argument("--b", required=True)
    f4.add_argument("--c1", required=True)
    f4.add_argument("--c2", required=True)
    f4.add_argument("--solution", action="store_true", help="Solucion del sistema F4 en (t1, 1-t2) = (0, 0)")
    for p in (f2n, f4):
        p.add_argument("--t1", type=float, required=True)
        p.add_argument("--t2", type=float, required=True)
    for p in (f2n, fn2, fnm, f2nm, f4):
        p.add_argument("--N", type=int, default=24)

    ve = sub.add_parser("verify", help="Ejecutar una bateria de verificacion")
    ve_sub = ve.add_subparsers(dest="suite", required=True)
    for name in ('lpde', 'integral', 'pfaff', 'scheme', 'reduction', 'symmetry', 'equivalence', 'chain', 'all'):
        p = ve_sub.add_parser(name, parents=[common])
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--n-max", type=int, default=2)
        p.add_argument("--draws", type=int, default=None)
        if name == 'pfaff':
            p.add_argument("--system", choices=SYSTEMS, default="main")

    du = sub.add_parser("dump", help="Volcar residuos o esquema de Riemann")
    du_sub = du.add_subparsers(dest="what", required=True)
    for name in ('connection', 'scheme'):
        p = du_sub.add_parser(name, parents=[common])
        p.add_argument("--system", choices=SYSTEMS, default="main")
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--theta1", default="0")
        p.add_argument("--theta2", default="0")
        p.add_argument("--theta3", default="0")
        p.add_argument("--kappa", default=None, help="kappa_0,...,kappa_n")
        p.add_argument("--rho", default=None, help="rho_1,...,rho_n")
        p.add_argument("--alpha", default=None, help="alpha_0,...,alpha_5")
    return parser


def _command_name(args) -> str:
    leaf = {'eval': 'series', 'verify': 'suite', 'dump': 'what'}[args.command]
    return f"{args.command} {getattr(args, leaf)}"


def _check_n(args):
    if getattr(args, 'n', None) is not None and not 1 <= args.n <= 3:
        raise ContractViolation(f"n must be in 1..3, got {args.n}")
    if args.command == 'verify' and not 1 <= args.n_max <= 3:
        raise ContractViolation(f"--n-max must be in 1..3, got {args.n_max}")


def run(args) -> dict:
    settings = load_settings(args.config)
    if args.tol is not None:
        settings = settings.with_tolerance(args.tol)
    seed = resolve_seed(args.seed, settings)
    if args.command != 'eval':
        _check_n(args)
    log(f"{_command_name(args)} seed={seed} mode={args.mode}")

    if args.command == 'eval':
        params, checks, summary = _eval(args, settings)
    elif args.command == 'dump':
        params, checks, summary = _dump(args, seed, settings)
    else:
        params = {'n': args.n, 'n_max': args.n_max, 'draws': args.draws}
        if args.suite == 'pfaff':
            params['system'] = args.system
        checks = _run(_verify_tasks(args, seed, settings), args.mode)
        summary = {}
    failed = [c['name'] for c in checks if not c['pass']]
    summary = {**summary, 'checks': len(checks), 'failed': failed, 'pass': not failed}
    report = {'command': _command_name(args), 'seed': seed, 'params': params, 'checks': checks,
              'summary': summary}
    if not args.no_timestamp:
        report['timestamp'] = datetime.now(timezone.utc).isoformat()
    return _jsonable(report)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    configure_logging(args.log_file, args.verbose)
    try:
        report = run(args)
    except HPLabError as e:
        log(f"error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2

    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    else:
        print(text)
    ok = report['summary']['pass']
    log(f"{report['command']}: {'pass' if ok else 'FAIL'} ({len(report['checks'])} checks)")
    return 0 if ok else 1


if __name__ == '__main__':
    sys.exit(main())
