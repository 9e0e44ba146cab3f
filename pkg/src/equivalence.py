"""
F2n with a = c' against F_(n+1,2).

The variable change s1 = t1, s2 = t1/t2, y = t2^b' z turns the Euler
operators of the s-variables into
    D1 -> d1 + d2 + b',   D2 -> -d2 - b'
acting on z, with d_i = t_i d/dt_i. The F_(n+1,2) system is checked on the
series of z through that substitution, so every derivative is exact.
"""
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from src.errors import ConsistencyError, ContractViolation, DomainError, RegionError
from src.hgseries import (Chart, HGParamsF2n, HGParamsFnm, TruncatedSeries2D, eval_F2n, eval_Fnm,
                          pochhammer, series_expand)
from src.lpde import build_Fn2, euler_coeffs, euler_image, rational
from src.logs import debug, log
from src.painleve import Manifold, generic_params, random_manifold_point, verify_reduction
from src.pfaff import (build_connection_degenerate, build_connection_main, construct_w_degenerate,
                       construct_w_main, degenerate_z, degeneration_substitution, f2n_from_painleve,
                       reduce_connection_degenerate, verify_pfaff_solution, Divisor)
from src.settings import Settings, default_grid

IDENTIFICATION = "b' = beta2"


class CorollaryCheck(NamedTuple):
    lhs: float
    rhs: float
    discrepancy: float
    tail_bound: float
    identification: str = IDENTIFICATION


def fn2_from_f2n(p: HGParamsF2n) -> HGParamsFnm:
    """alpha_i = b_i, beta1 = c' - b', beta2 = b', gamma_i = c_i (needs a = c')."""
    if p.a != p.cprime:
        raise ContractViolation(f"the transform needs a = c', got a = {p.a}, c' = {p.cprime}")
    return HGParamsFnm(alpha=p.b, beta=(p.cprime - p.bprime, p.bprime), gamma=p.c)


def f2n_from_fn2(p: HGParamsFnm) -> HGParamsF2n:
    if p.m != 2:
        raise ContractViolation(f"needs m = 2, got m = {p.m}")
    b1, b2 = p.beta
    return HGParamsF2n(b=p.alpha, bprime=b2, a=b1 + b2, c=p.gamma, cprime=b1 + b2)


def verify_corollary_identity(p: HGParamsFnm, s1: float, s2: float, N: int = 400,
                              margin: float = 0.02) -> CorollaryCheck:
    """
    F2n[alpha, beta2, beta1+beta2; gamma, beta1+beta2; s1, 1-s1/s2]
      = (s2/s1)^beta2 F_(n+1,2)[alpha; beta1, beta2; gamma; s1, s2]
    """
    if s1 == 0.0 or s2 == 0.0:
        raise DomainError(f"s1 and s2 must be nonzero, got ({s1}, {s2})")
    ratio = s2 / s1
    if ratio <= 0.0:
        raise DomainError(f"(s2/s1)^beta2 needs s2/s1 > 0, got {ratio}")
    x, y = s1, 1.0 - s1 / s2
    if abs(x) + abs(y) >= 1.0 - margin:
        raise RegionError((s1, s2), 1.0 - margin)
    left = eval_F2n(f2n_from_fn2(p), x, y, N, margin=margin)
    right = eval_Fnm(p, (s1, s2), N, margin=margin)
    rhs = ratio ** float(p.beta[1]) * right.value
    check = CorollaryCheck(left.value, rhs, abs(left.value - rhs), max(left.tail_bound, right.tail_bound))
    debug(f"corollary at ({s1:.4g}, {s2:.4g}): lhs={check.lhs:.15g} rhs={check.rhs:.15g}")
    return check


def corollary_points(rng: np.random.Generator, count: int, bound: float = 0.88) -> List[Tuple[float, float]]:
    """Points 0 < s1 < s2 < 1 with s1 + (1 - s1/s2) < bound."""
    out = []
    while len(out) < count:
        s2 = float(rng.uniform(0.2, 0.95))
        s1 = float(rng.uniform(0.02, s2))
        if s1 + 1.0 - s1 / s2 < bound:
            out.append((s1, s2))
    return out


# ---------------------------------------------------------------------------
# system transform
# ---------------------------------------------------------------------------

def pull_back(dpoly: sp.Poly, bprime) -> sp.Poly:
    """P(D1, D2) -> P(d1 + d2 + b', -d2 - b')"""
    d1, d2 = dpoly.gens
    b = rational(bprime)
    moved = dpoly.as_expr().subs({d1: d1 + d2 + b, d2: -d2 - b}, simultaneous=True)
    return sp.Poly(moved.expand(), d1, d2, domain=sp.QQ)


def transform_residual_at(target: HGParamsFnm, z: TruncatedSeries2D, bprime, t1: float, t2: float,
                          cache: Optional[dict] = None) -> List[float]:
    """Residual of each F_(n+1,2) equation at s = (t1, t1/t2) for y = t2^b' z."""
    if z.chart is not Chart.X_T1_Y_ONE_MINUS_T2:
        raise ContractViolation(f"z must be expanded in X_T1_Y_ONE_MINUS_T2, got {z.chart.name}")
    if t2 == 0.0:
        raise DomainError("t2 = 0 has no image s2 = t1/t2")
    cache = {} if cache is None else cache
    s1, s2 = t1, t1 / t2
    pref = t2 ** float(bprime)
    x, y = t1, 1.0 - t2
    values = []
    for eq in build_Fn2(target).equations:
        total = 0.0
        for term in eq:
            inner = sum(float(c) * euler_image(z, exps, Chart.X_T1_Y_T2, cache).evaluate(x, y)
                        for exps, c in euler_coeffs(pull_back(term.dpoly, bprime)).items())
            total += s1 ** term.xpow * s2 ** term.ypow * inner
        values.append(pref * total)
    return values


def verify_system_transform(p: HGParamsF2n, points: Sequence[Tuple[float, float]], N: int = 30,
                            target: Optional[HGParamsFnm] = None) -> float:
    """
    Max residual of the F_(n+1,2) system (parameters `target`, by default the
    dictionary image of p) on y = t2^b' z over the (t1, t2) points.
    """
    if not points:
        raise ContractViolation("empty sample grid")
    target = fn2_from_f2n(p) if target is None else target
    if target.m != 2 or target.n != p.n:
        raise ContractViolation(f"target must be F_({p.n + 1},2) parameters")
    z = series_expand(p, N, Chart.X_T1_Y_ONE_MINUS_T2)
    cache = {}
    worst = 0.0
    for t1, t2 in points:
        if abs(t1) + abs(1.0 - t2) >= 1.0 or not abs(t1 / t2) < 1.0:
            raise RegionError((t1, t2), 1.0)
        r = max(abs(v) for v in transform_residual_at(target, z, p.bprime, t1, t2, cache))
        debug(f"transform at ({t1:.4g}, {t2:.4g}): {r:.3e}")
        worst = max(worst, r)
    log(f"system transform n={p.n}: residual={worst:.3e}")
    return worst


def wrong_dictionary(p: HGParamsF2n) -> HGParamsFnm:
    """beta1 = b' instead of c' - b'."""
    return HGParamsFnm(alpha=p.b, beta=(p.bprime, p.bprime), gamma=p.c)


# ---------------------------------------------------------------------------
# degeneration chain
# ---------------------------------------------------------------------------

def _edge(name: str, residual: float, tolerance: float, exact: bool = False) -> dict:
    ok = residual == 0 if exact else residual < tolerance
    return {'name': name, 'residual': float(residual), 'tolerance': 0.0 if exact else tolerance, 'pass': bool(ok)}


def expected_degenerate_series(hp: HGParamsF2n, N: int) -> TruncatedSeries2D:
    """(c1-1) times the F2 series of one order lower, parameters (b2..; b'; a; c2..; c')."""
    b, c = hp.b[1:], hp.c[1:]

    def coeff(i, j):
        num = pochhammer(hp.a, i + j) * pochhammer(hp.bprime, j)
        den = pochhammer(hp.cprime, j) * pochhammer(1, i) * pochhammer(1, j)
        for bk, ck in zip(b, c):
            num *= pochhammer(bk, i)
            den *= pochhammer(ck, i)
        return (hp.c[0] - 1) * Fraction(num) / den
    return TruncatedSeries2D.from_function(Chart.X_T1_Y_ONE_MINUS_T2, N, coeff)


def _chain_row(n: int, rng: np.random.Generator, settings: Settings, draws: int) -> dict:
    tol = settings.tol
    p = generic_params(rng, n, Manifold.DEG)
    edges = []

    worst = 0.0
    for _ in range(draws):
        for manifold in (Manifold.F2, Manifold.DEG):
            worst = max(worst, verify_reduction(p, random_manifold_point(p, manifold, rng), manifold))
    edges.append(_edge('hamiltonian_specialization', worst, tol('reduction')))

    reduced = reduce_connection_degenerate(build_connection_main(p))
    direct = build_connection_degenerate(p)
    gap = max(float(np.max(np.abs(reduced[d] - direct[d]))) for d in Divisor)
    edges.append(_edge('pfaff_substitution', gap, 1e-12))

    hp = f2n_from_painleve(p)
    z = series_expand(hp, settings.N_pfaff, Chart.X_T1_Y_ONE_MINUS_T2)
    zt = degenerate_z(z, hp)
    diff = zt.sub(expected_degenerate_series(hp, settings.N_pfaff)).max_abs()
    edges.append(_edge('series_degeneration', diff, 0.0, exact=True))

    w_deg = construct_w_degenerate(zt, hp)
    try:
        w_sub = degeneration_substitution(construct_w_main(z, hp), p)
        mismatch = max(a.sub(b).max_abs() for a, b in zip(w_deg.components, w_sub.components))
    except ConsistencyError as e:
        mismatch = float(e.residual) if e.residual is not None else float('inf')
    edges.append(_edge('solution_match', mismatch, 0.0, exact=True))
    res = verify_pfaff_solution(direct, w_deg, default_grid(settings))
    edges.append(_edge('solution_construction', res, tol('pfaff_solution')))

    for e in edges:
        log(f"chain n={n} {e['name']}: residual={e['residual']:.3e} pass={e['pass']}")
    return {'n': n, 'params': {'theta2': str(p.theta2), 'theta3': str(p.theta3),
                               'kappa': [str(k) for k in p.kappa], 'rho': [str(r) for r in p.rho]},
            'edges': edges, 'pass': all(e['pass'] for e in edges)}


def degeneration_chain_report(n_max: int, seed: int = 0, settings: Settings = None, draws: int = 3) -> dict:
    """Commuting-square checks for every n <= n_max; failures are report entries."""
    if not 1 <= n_max <= 3:
        raise ContractViolation(f"n_max must be in 1..3, got {n_max}")
    settings = settings or Settings()
    rng = np.random.default_rng(seed)
    rows = [_chain_row(n, rng, settings, draws) for n in range(1, n_max + 1)]
    return {'seed': seed, 'n_max': n_max, 'rows': rows, 'pass': all(r['pass'] for r in rows)}
