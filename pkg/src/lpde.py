"""
Linear PDE systems as polynomials in Euler operators with monomial coefficients
in the chart variables, and their residuals on truncated series.

A term x^px y^py P(d1, d2) acts as: apply P to z, then multiply by x^px y^py
(and by the named rational factor, if any). P is a sympy Poly over QQ in the
symbols d1..dm.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from operator import mul
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy as sp

from src.errors import ContractViolation, SingularPointError, UnsupportedError
from src.hgseries import (AppellF4Params, Chart, HGParamsF2n, HGParamsF2nm, HGParamsFnm, f4_solution_series,
                          MultiSeries, TruncatedSeries2D, series_expand, series_expand_multi, to_fraction)
from src.logs import debug, log
from src.settings import generic_draws

EULER = sp.symbols('d1:4')

# rational coefficient factors allowed in pointwise-only systems: name -> (function, divisor label)
_FACTORS = {
    '1/(t1-t2)': (lambda t1, t2: 1.0 / (t1 - t2), 't1-t2'),
}
SINGULAR_EPS = 1e-12


# ---------------------------------------------------------------------------
# polynomials in Euler operators
# ---------------------------------------------------------------------------

def rational(c) -> sp.Rational:
    f = to_fraction(c)
    return sp.Rational(f.numerator, f.denominator)


def _poly(expr, nvars: int) -> sp.Poly:
    if nvars > len(EULER):
        raise UnsupportedError(f"Euler operators supported for at most {len(EULER)} variables, got {nvars}")
    return sp.Poly(expr, *EULER[:nvars], domain=sp.QQ)


def const(c, nvars: int = 2) -> sp.Poly:
    return _poly(rational(c), nvars)


def var(k: int, nvars: int = 2) -> sp.Poly:
    return _poly(EULER[k], nvars)


def lin(weights: Sequence[int], c=0) -> sp.Poly:
    """sum_k weights[k] d_k + c"""
    return _poly(sum(w * d for w, d in zip(weights, EULER)) + rational(c), len(weights))


def pprod(polys: Sequence[sp.Poly], nvars: int = 2) -> sp.Poly:
    return reduce(mul, polys, const(1, nvars))


def shift_poly(p: sp.Poly, shifts: Sequence) -> sp.Poly:
    """P(d_1 + s_1, ..., d_m + s_m)"""
    moved = {d: d + rational(s) for d, s in zip(p.gens, shifts)}
    return _poly(p.as_expr().subs(moved, simultaneous=True).expand(), len(p.gens))


def euler_coeffs(p: sp.Poly) -> Dict[Tuple[int, ...], Fraction]:
    return {exps: Fraction(int(c.p), int(c.q)) for exps, c in p.as_dict().items() if c != 0}


def _degree(p: sp.Poly) -> int:
    return max((sum(k) for k in euler_coeffs(p)), default=0)


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTerm:
    powers: Tuple[int, ...]
    dpoly: sp.Poly
    factor: Optional[str] = None

    def __post_init__(self):
        if any(e < 0 for e in self.powers):
            raise ContractViolation(f"negative monomial power {self.powers}")
        if self.factor is not None and self.factor not in _FACTORS:
            raise ContractViolation(f"unknown coefficient factor {self.factor!r}")

    @property
    def xpow(self) -> int:
        return self.powers[0]

    @property
    def ypow(self) -> int:
        return self.powers[1]


def term(xpow: int, ypow: int, dpoly: sp.Poly, factor: str = None) -> OperatorTerm:
    return OperatorTerm((xpow, ypow), dpoly, factor)


@dataclass(frozen=True)
class LPDESystem:
    name: str
    chart: Optional[Chart]
    equations: Tuple[Tuple[OperatorTerm, ...], ...]
    pointwise_only: bool = False
    nvars: int = 2

    def __post_init__(self):
        if not self.equations or any(not eq for eq in self.equations):
            raise ContractViolation(f"{self.name}: empty system or equation")

    def orders(self) -> List[int]:
        """Total Euler-operator degree of each equation."""
        return [max(_degree(t.dpoly) for t in eq) for eq in self.equations]

    def shift(self, eq: Sequence[OperatorTerm]) -> int:
        return max(sum(t.powers) for t in eq)


@dataclass(frozen=True)
class Prefactored:
    """x^x_exponent * y^y_exponent * series, in the chart variables of the series."""
    series: TruncatedSeries2D
    y_exponent: Fraction = Fraction(0)
    x_exponent: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'y_exponent', to_fraction(self.y_exponent))
        object.__setattr__(self, 'x_exponent', to_fraction(self.x_exponent))


Series = Union[TruncatedSeries2D, MultiSeries, Prefactored]


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

D1 = var(0)
D2 = var(1)


def _f2n_equations(b, bprime, a, c, cprime):
    s = lin((1, 1), a)
    upper = pprod([lin((1, 0), bi) for bi in b])
    lower = D1 * pprod([lin((1, 0), ci - 1) for ci in c])
    eq1 = (term(1, 0, s * upper), term(0, 0, -lower))
    eq2 = (term(0, 1, s * lin((0, 1), bprime)),
           term(0, 0, -(D2 * lin((0, 1), cprime - 1))))
    return eq1, eq2


def build_F2n_general(p: HGParamsF2n) -> LPDESystem:
    eq1, eq2 = _f2n_equations(p.b, p.bprime, p.a, p.c, p.cprime)
    return LPDESystem('F2n general', Chart.X_T1_Y_ONE_MINUS_T2, (eq1, eq2))


def build_F2n_constrained(p: HGParamsF2n) -> LPDESystem:
    a = p.c[0] + p.cprime - 2
    if abs(float(p.a - a)) >= 1e-12:
        raise ContractViolation(f"constrained system needs a = c1 + c' - 2 = {a}, got a = {p.a}")
    eq1, eq2 = _f2n_equations(p.b, p.bprime, a, p.c, p.cprime)
    return LPDESystem('F2n constrained', Chart.X_T1_Y_ONE_MINUS_T2, (eq1, eq2))


def build_F2n_degenerate(p: HGParamsF2n) -> LPDESystem:
    """System for (d1 + c1 - 1)z when b1 = c1 - 1; the value of b1 itself is not used."""
    a = p.c[0] + p.cprime - 2
    eq1, eq2 = _f2n_equations(p.b[1:], p.bprime, a, p.c[1:], p.cprime)
    return LPDESystem('F2n degenerate', Chart.X_T1_Y_ONE_MINUS_T2, (eq1, eq2))


def build_F2n_a_eq_cprime(p: HGParamsF2n) -> LPDESystem:
    if p.a != p.cprime:
        raise ContractViolation(f"system needs a = c', got a = {p.a}, c' = {p.cprime}")
    eq1, eq2 = _f2n_equations(p.b, p.bprime, p.cprime, p.c, p.cprime)
    upper = pprod([lin((1, 0), bi) for bi in p.b])
    lower = pprod([lin((1, 0), ci - 1) for ci in p.c])
    eq3 = (term(1, 0, D2 * upper),
           term(0, 1, lin((0, 1), p.bprime) * lower),
           term(0, 0, -(D2 * lower)))
    return LPDESystem('F2n a=c\'', Chart.X_T1_Y_ONE_MINUS_T2, (eq1, eq2, eq3))


def build_F2_classical(a, b, bprime, c, cprime) -> LPDESystem:
    a, b, bprime, c, cprime = (to_fraction(v) for v in (a, b, bprime, c, cprime))
    eq1, eq2 = _f2n_equations((b,), bprime, a, (c,), cprime)
    return LPDESystem('Appell F2', Chart.X_T1_Y_T2, (eq1, eq2))


def build_Fn2(p: HGParamsFnm) -> LPDESystem:
    if p.m != 2:
        raise ContractViolation(f"F_(n+1,2) system needs m = 2, got m = {p.m}")
    b1, b2 = p.beta
    upper = pprod([lin((1, 1), al) for al in p.alpha])
    lower = pprod([lin((1, 1), g - 1) for g in p.gamma])
    eq1 = (term(1, 0, lin((1, 0), b1) * upper), term(0, 0, -(D1 * lower)))
    eq2 = (term(0, 1, lin((0, 1), b2) * upper), term(0, 0, -(D2 * lower)))
    eq3 = (term(1, 0, lin((1, 0), b1) * D2), term(0, 1, -(lin((0, 1), b2) * D1)))
    return LPDESystem('F_(n+1,2)', Chart.X_S1_Y_S2, (eq1, eq2, eq3))


def build_F4_system(p: AppellF4Params) -> LPDESystem:
    """
    Equation 1: t1(d1+a)(d1+b) - d1(d1+c1-1) + K t1(t2-1)(d1-d2)/(t1-t2),
    K = a+b-c1-c2+1, d_i = t_i d/dt_i; equation 2 is the t1<->t2 mirror.
    """
    K = p.a + p.b - p.c1 - p.c2 + 1
    eqs = []
    for k in (0, 1):
        dk, dl = var(k), var(1 - k)
        own, other = [0, 0], [1, 1]
        own[k] = 1
        main = lin(own, p.a) * lin(own, p.b)
        euler = dk * lin(own, p.c1 - 1)
        cross = (dk - dl) * rational(K)
        # t_k(t_l - 1)/(t_k - t_l) = (t1 t2 - t_k) * sign / (t1 - t2)
        sign = 1 if k == 0 else -1
        eqs.append((term(*own, main), term(0, 0, -euler),
                    term(*other, cross * sign, factor='1/(t1-t2)'),
                    term(*own, cross * -sign, factor='1/(t1-t2)')))
    return LPDESystem('Appell F4', Chart.X_T1_Y_T2, tuple(eqs), pointwise_only=True)


def build_FA_system(p: HGParamsF2nm) -> LPDESystem:
    """{t_i (D+a)(d_i+b_i) - d_i(d_i+c_i-1)} z = 0, i = 1..m."""
    if p.n != 1:
        raise ContractViolation(f"Lauricella F_A system needs n = 1, got n = {p.n}")
    m = p.m
    if m > 3:
        raise UnsupportedError(f"F_A system supported for m <= 3, got m={m}")
    bs = (p.b1row[0],) + p.b_rest
    cs = (p.c1row[0],) + p.c_rest
    D = lin((1,) * m, p.a)
    eqs = []
    for i in range(m):
        w = [0] * m
        w[i] = 1
        upper = D * lin(w, bs[i])
        lower = var(i, m) * lin(w, cs[i] - 1)
        eqs.append((OperatorTerm(tuple(w), upper), OperatorTerm((0,) * m, -lower)))
    chart = Chart.X_T1_Y_T2 if m == 2 else None
    return LPDESystem(f'Lauricella F_A m={m}', chart, tuple(eqs), nvars=m)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def _truncate_multi(s: MultiSeries, M: int) -> MultiSeries:
    return MultiSeries(s.m, M, {k: v for k, v in s.coeffs.items() if sum(k) <= M})


def _apply_equation(eq: Sequence[OperatorTerm], z, shifts=None):
    out = None
    for t in eq:
        dpoly = t.dpoly if shifts is None else shift_poly(t.dpoly, shifts)
        if isinstance(z, MultiSeries):
            image = z.apply_euler(dpoly).mul_monomial(t.powers)
        else:
            image = z.apply_euler(dpoly).mul_monomial(*t.powers)
        out = image if out is None else out.add(image)
    return out


def residual_grid(sys: LPDESystem, z: Series) -> list:
    """Exact residual series of every equation over the trusted degree range."""
    if sys.pointwise_only:
        raise ContractViolation(f"{sys.name} has rational coefficients; use pointwise residuals")
    shifts = None
    if isinstance(z, Prefactored):
        shifts = (z.x_exponent, z.y_exponent)
        z = z.series
    if isinstance(z, MultiSeries):
        if z.m != sys.nvars:
            raise ContractViolation(f"{sys.name} has {sys.nvars} variables, series has {z.m}")
    elif z.chart is not sys.chart or sys.nvars != 2:
        raise ContractViolation(f"chart mismatch: system {sys.name} in "
                                f"{sys.chart.name if sys.chart else sys.nvars}, series in {z.chart.name}")
    out = []
    for eq in sys.equations:
        M = z.N - sys.shift(eq)
        if M < 0:
            raise ContractViolation(f"series degree {z.N} too low for {sys.name}")
        r = _apply_equation(eq, z, shifts)
        out.append(_truncate_multi(r, M) if isinstance(r, MultiSeries) else r.truncate(M))
    return out


def _max_coeff(r) -> float:
    values = r.coeffs.values() if isinstance(r, MultiSeries) else (c for _, _, c in r.items())
    return float(max((abs(v) for v in values), default=0))


def _sys_chart_point(chart: Chart, t1: float, t2: float) -> Tuple[float, float]:
    if chart is Chart.X_T1_Y_ONE_MINUS_T2:
        return t1, 1.0 - t2
    return t1, t2


def euler_image(z: TruncatedSeries2D, exps: Tuple[int, int], sys_chart: Chart, cache: dict):
    if exps in cache:
        return cache[exps]
    e1, e2 = exps
    s = z.apply_euler({(e1, 0): 1})
    if sys_chart is z.chart or e2 == 0:
        s = s.apply_euler({(0, e2): 1})
    elif {sys_chart, z.chart} == {Chart.X_T1_Y_T2, Chart.X_T1_Y_ONE_MINUS_T2}:
        # t2 d/dt2 = y d/dy - d/dy for y = 1-t2, and (t2-1)d/dt2 = y d/dy - d/dy for y = t2
        for _ in range(e2):
            s = s.euler_delta2().sub(s.partial_y())
    else:
        raise UnsupportedError(f"no operator conversion from {sys_chart.name} to {z.chart.name}")
    cache[exps] = s
    return s


def residual_at(sys: LPDESystem, z: Union[TruncatedSeries2D, Prefactored], point: Tuple[float, float]) -> List[float]:
    """Residual of every equation at one point, (t1, t2) or (s1, s2) for the S chart."""
    return _pointwise(sys, z, [point])[0]


def _pointwise(sys: LPDESystem, z, points) -> List[List[float]]:
    if sys.nvars != 2:
        raise UnsupportedError("pointwise residuals are implemented for two variables")
    shifts = None
    prefactor = None
    if isinstance(z, Prefactored):
        if z.series.chart is not sys.chart:
            raise UnsupportedError("prefactored series must share the chart of the system")
        shifts = (z.x_exponent, z.y_exponent)
        prefactor = (float(z.x_exponent), float(z.y_exponent))
        z = z.series
    if (sys.chart is Chart.X_S1_Y_S2) != (z.chart is Chart.X_S1_Y_S2):
        raise ContractViolation(f"chart mismatch: system {sys.chart.name}, series {z.chart.name}")
    cache = {}
    rows = []
    for t1, t2 in points:
        x, y = _sys_chart_point(sys.chart, t1, t2)
        zx, zy, _ = z.chart_point(t1, t2)
        values = []
        for eq in sys.equations:
            total = 0.0
            for t in eq:
                dpoly = t.dpoly if shifts is None else shift_poly(t.dpoly, shifts)
                inner = sum(float(c) * euler_image(z, exps, sys.chart, cache).evaluate(zx, zy)
                            for exps, c in euler_coeffs(dpoly).items())
                coef = x ** t.xpow * y ** t.ypow
                if t.factor is not None:
                    f, divisor = _FACTORS[t.factor]
                    if abs(t1 - t2) < SINGULAR_EPS:
                        raise SingularPointError((t1, t2), divisor)
                    coef *= f(t1, t2)
                total += coef * inner
            if prefactor is not None:
                total *= x ** prefactor[0] * y ** prefactor[1]
            values.append(total)
        debug(f"{sys.name} residual at ({t1:.4g}, {t2:.4g}): {max(abs(v) for v in values):.3e}")
        rows.append(values)
    return rows


def residual(sys: LPDESystem, z: Series, eval_points: Optional[Sequence[Tuple[float, float]]] = None) -> float:
    """
    Max |residual|. Coefficientwise (exact, trusted degree range) when the
    system has polynomial coefficients and shares the chart of z; pointwise at
    eval_points otherwise.
    """
    inner = z.series if isinstance(z, Prefactored) else z
    coefficientwise = (not sys.pointwise_only
                       and (isinstance(inner, MultiSeries) or inner.chart is sys.chart)
                       and eval_points is None)
    if coefficientwise:
        return max(_max_coeff(r) for r in residual_grid(sys, z))
    if not eval_points:
        raise ContractViolation(f"{sys.name}: pointwise residual needs a nonempty point list")
    return max(abs(v) for row in _pointwise(sys, z, eval_points) for v in row)


# ---------------------------------------------------------------------------
# seeded battery over every system family
# ---------------------------------------------------------------------------

def system_battery(n: int, rng, draws: int = 20, N: int = 16,
                   points: Sequence[Tuple[float, float]] = ((0.1, 0.9), (0.05, 0.85), (0.15, 0.95)),
                   N_pointwise: int = 30) -> Dict[str, float]:
    """
    Worst residual per system over `draws` generic parameter sets. Every entry
    should vanish (exactly, or below the pointwise floor for the F4 system) except
    'negative_control', a series with a shifted by 1/2 tested against the original system.
    """
    out = {k: 0.0 for k in ('F2n general', 'F2n constrained', 'F2n degenerate', "F2n a=c'",
                            'F_(n+1,2)', 'Appell F2', 'Appell F4', 'Lauricella F_A')}
    negative = float('inf')
    for v in generic_draws(rng, draws, 2 * n + 3):
        b, bp, a, c, cp = tuple(v[:n]), v[n], v[n + 1], tuple(v[n + 2:2 * n + 2]), v[2 * n + 2]

        p = HGParamsF2n(b, bp, a, c, cp)
        out['F2n general'] = max(out['F2n general'], residual(build_F2n_general(p), series_expand(p, N)))
        shifted = HGParamsF2n(b, bp, a + Fraction(1, 2), c, cp)
        negative = min(negative, residual(build_F2n_general(p), series_expand(shifted, N)))

        pc = HGParamsF2n(b, bp, c[0] + cp - 2, c, cp)
        out['F2n constrained'] = max(out['F2n constrained'],
                                     residual(build_F2n_constrained(pc), series_expand(pc, N)))

        # b1 = c1 - 1: (d1 + c1 - 1) z solves the system of one order lower
        pd = HGParamsF2n((c[0] - 1,) + b[1:], bp, c[0] + cp - 2, c, cp)
        zt = series_expand(pd, N).apply_euler(lin((1, 0), c[0] - 1))
        out['F2n degenerate'] = max(out['F2n degenerate'], residual(build_F2n_degenerate(pd), zt))

        pa = HGParamsF2n(b, bp, cp, c, cp)
        out["F2n a=c'"] = max(out["F2n a=c'"], residual(build_F2n_a_eq_cprime(pa), series_expand(pa, N)))

        pf = HGParamsFnm(alpha=b, beta=(a, bp), gamma=c)
        out['F_(n+1,2)'] = max(out['F_(n+1,2)'], residual(build_Fn2(pf), series_expand(pf, N)))

        p1 = HGParamsF2n(b[:1], bp, a, c[:1], cp)
        z1 = series_expand(p1, N, Chart.X_T1_Y_T2)
        out['Appell F2'] = max(out['Appell F2'], residual(build_F2_classical(a, b[0], bp, c[0], cp), z1))

        p4 = AppellF4Params(a, bp, c[0], cp)
        z4 = f4_solution_series(p4, N_pointwise)
        out['Appell F4'] = max(out['Appell F4'], residual(build_F4_system(p4), z4, list(points)))

        m = min(n + 1, 3)
        fa = HGParamsF2nm(b1row=b[:1], b_rest=(bp,) + tuple(b[1:m - 1]), a=a,
                          c1row=c[:1], c_rest=(cp,) + tuple(c[1:m - 1]))
        out['Lauricella F_A'] = max(out['Lauricella F_A'],
                                    residual(build_FA_system(fa), series_expand_multi(fa, N)))
    out['negative_control'] = negative
    for name, worst in out.items():
        log(f"battery n={n} {name}: residual={worst:.3e}")
    return out
