"""
Hypergeometric series used by the verifier.

Coefficient grids are exact (fractions.Fraction) so operator residuals vanish
identically; pointwise values are computed in floating point from ratio
recurrences over numpy arrays.

Series covered:
  F2n   extended Appell F2, variables (t1, 1-t2)
  Fnm   F_{n+1,m}, extension of Appell F1 / Lauricella F_D
  F2nm  F_2^{(n,m)}, extension of F2n / Lauricella F_A
  F4    Appell F4 (classical double series) and the solution of the F4 system
        holomorphic at (t1, 1-t2) = (0, 0)
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb, sqrt
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from src.errors import ContractViolation, DomainError, RegionError, UnsupportedError

Number = Union[int, float, Fraction]


class Chart(Enum):
    X_T1_Y_ONE_MINUS_T2 = 'x=t1,y=1-t2'
    X_T1_Y_T2 = 'x=t1,y=t2'
    X_S1_Y_S2 = 'x=s1,y=s2'


class SeriesValue(NamedTuple):
    value: float
    tail_bound: float
    warning: bool


def to_fraction(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    # shortest repr keeps 0.1 as 1/10 instead of the binary expansion
    return Fraction(repr(float(x)))


def _euler_items(poly) -> List[Tuple[Tuple[int, ...], Number]]:
    if hasattr(poly, 'as_dict'):
        return [(e, Fraction(int(c.p), int(c.q))) for e, c in poly.as_dict().items() if c != 0]
    return list(poly.items())


def _fractions(xs) -> Tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in xs)


def _check_denominator(value: Fraction, name: str):
    if value.denominator == 1 and value <= 0:
        raise DomainError(f"denominator parameter {name}={value} is a nonpositive integer")


# ---------------------------------------------------------------------------
# parameter tuples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HGParamsF2n:
    b: Tuple[Fraction, ...]
    bprime: Fraction
    a: Fraction
    c: Tuple[Fraction, ...]
    cprime: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'b', _fractions(self.b))
        object.__setattr__(self, 'c', _fractions(self.c))
        for name in ('bprime', 'a', 'cprime'):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if len(self.b) < 1:
            raise ContractViolation("F2n needs n >= 1")
        if len(self.b) != len(self.c):
            raise ContractViolation(f"len(b)={len(self.b)} but len(c)={len(self.c)}")
        for k, ck in enumerate(self.c, start=1):
            _check_denominator(ck, f"c{k}")
        _check_denominator(self.cprime, "c'")

    @property
    def n(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class HGParamsFnm:
    alpha: Tuple[Fraction, ...]
    beta: Tuple[Fraction, ...]
    gamma: Tuple[Fraction, ...]

    def __post_init__(self):
        for name in ('alpha', 'beta', 'gamma'):
            object.__setattr__(self, name, _fractions(getattr(self, name)))
        if len(self.alpha) < 1 or len(self.beta) < 1:
            raise ContractViolation("F_{n+1,m} needs n >= 1 and m >= 1")
        if len(self.alpha) != len(self.gamma):
            raise ContractViolation("alpha and gamma must have the same length")
        for k, g in enumerate(self.gamma, start=1):
            _check_denominator(g, f"gamma{k}")

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def m(self) -> int:
        return len(self.beta)


@dataclass(frozen=True)
class HGParamsF2nm:
    b1row: Tuple[Fraction, ...]
    b_rest: Tuple[Fraction, ...]
    a: Fraction
    c1row: Tuple[Fraction, ...]
    c_rest: Tuple[Fraction, ...]

    def __post_init__(self):
        for name in ('b1row', 'b_rest', 'c1row', 'c_rest'):
            object.__setattr__(self, name, _fractions(getattr(self, name)))
        object.__setattr__(self, 'a', to_fraction(self.a))
        if len(self.b1row) < 1 or len(self.b1row) != len(self.c1row):
            raise ContractViolation("b1row and c1row must be nonempty and of equal length")
        if len(self.b_rest) != len(self.c_rest):
            raise ContractViolation("b_rest and c_rest must have equal length")
        for k, c in enumerate(self.c1row, start=1):
            _check_denominator(c, f"c1,{k}")
        for k, c in enumerate(self.c_rest, start=2):
            _check_denominator(c, f"c{k}")

    @property
    def n(self) -> int:
        return len(self.b1row)

    @property
    def m(self) -> int:
        return len(self.b_rest) + 1


@dataclass(frozen=True)
class AppellF4Params:
    a: Fraction
    b: Fraction
    c1: Fraction
    c2: Fraction

    def __post_init__(self):
        for name in ('a', 'b', 'c1', 'c2'):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        _check_denominator(self.c1, 'c1')
        _check_denominator(self.c2, 'c2')


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def pochhammer(a, k: int):
    """Rising factorial (a)_k; exact when a is a Fraction or int."""
    if k < 0:
        raise ContractViolation(f"pochhammer index must be >= 0, got {k}")
    out = 1 if not isinstance(a, float) else 1.0
    for l in range(k):
        out = out * (a + l)
    return out


def _prod(values):
    out = 1
    for v in values:
        out = out * v
    return out


def coeff_F2n(p: HGParamsF2n, i: int, j: int) -> Fraction:
    if i < 0 or j < 0:
        raise ContractViolation(f"indices must be non-negative, got ({i}, {j})")
    num = _prod(pochhammer(bk, i) for bk in p.b) * pochhammer(p.bprime, j) * pochhammer(p.a, i + j)
    den = _prod(pochhammer(ck, i) for ck in p.c) * pochhammer(p.cprime, j) * pochhammer(1, i) * pochhammer(1, j)
    return Fraction(num) / Fraction(den)


def coeff_Fnm(p: HGParamsFnm, idx: Sequence[int]) -> Fraction:
    if len(idx) != p.m or any(i < 0 for i in idx):
        raise ContractViolation(f"bad multi-index {tuple(idx)} for m={p.m}")
    total = sum(idx)
    num = _prod(pochhammer(al, total) for al in p.alpha) * _prod(pochhammer(be, i) for be, i in zip(p.beta, idx))
    den = _prod(pochhammer(g, total) for g in p.gamma) * _prod(pochhammer(1, i) for i in idx)
    return Fraction(num) / Fraction(den)


def coeff_F2nm(p: HGParamsF2nm, idx: Sequence[int]) -> Fraction:
    if len(idx) != p.m or any(i < 0 for i in idx):
        raise ContractViolation(f"bad multi-index {tuple(idx)} for m={p.m}")
    i1, rest = idx[0], idx[1:]
    num = (_prod(pochhammer(b, i1) for b in p.b1row)
           * _prod(pochhammer(b, i) for b, i in zip(p.b_rest, rest))
           * pochhammer(p.a, sum(idx)))
    den = (_prod(pochhammer(c, i1) for c in p.c1row)
           * _prod(pochhammer(c, i) for c, i in zip(p.c_rest, rest))
           * _prod(pochhammer(1, i) for i in idx))
    return Fraction(num) / Fraction(den)


def coeff_F4(p: AppellF4Params, i: int, j: int) -> Fraction:
    if i < 0 or j < 0:
        raise ContractViolation(f"indices must be non-negative, got ({i}, {j})")
    num = pochhammer(p.a, i + j) * pochhammer(p.b, i + j)
    den = pochhammer(p.c1, i) * pochhammer(p.c2, j) * pochhammer(1, i) * pochhammer(1, j)
    return Fraction(num) / Fraction(den)


# ratio recurrences: coefficient(i+1, j)/coefficient(i, j) and (i, j+1)/(i, j)

def _f2n_ratios(p):
    def ri(i, j):
        return _prod(bk + i for bk in p.b) * (p.a + i + j) / (_prod(ck + i for ck in p.c) * (1 + i))

    def rj(i, j):
        return (p.bprime + j) * (p.a + i + j) / ((p.cprime + j) * (1 + j))
    return ri, rj


def _fn2_ratios(p):
    b1, b2 = p.beta

    def ri(i, j):
        return _prod(al + i + j for al in p.alpha) * (b1 + i) / (_prod(g + i + j for g in p.gamma) * (1 + i))

    def rj(i, j):
        return _prod(al + i + j for al in p.alpha) * (b2 + j) / (_prod(g + i + j for g in p.gamma) * (1 + j))
    return ri, rj


def _f4_ratios(p):
    def ri(i, j):
        return (p.a + i + j) * (p.b + i + j) / ((p.c1 + i) * (1 + i))

    def rj(i, j):
        return (p.a + i + j) * (p.b + i + j) / ((p.c2 + j) * (1 + j))
    return ri, rj


def _exact_grid(ri, rj, N: int) -> List[List[Fraction]]:
    rows = []
    first = Fraction(1)
    for i in range(N + 1):
        if i > 0:
            first = first * ri(i - 1, 0)
        row = [first]
        for j in range(N - i):
            row.append(row[-1] * rj(i, j))
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# truncated bivariate series
# ---------------------------------------------------------------------------

class TruncatedSeries2D:
    """
    Triangular grid c[i][j], i+j <= N, of a power series in the chart variables
    (x, y). Every operation returns a new series.
    """

    def __init__(self, chart: Chart, N: int, rows):
        if N < 0:
            raise ContractViolation(f"degree must be >= 0, got {N}")
        if len(rows) != N + 1 or any(len(r) != N - i + 1 for i, r in enumerate(rows)):
            raise ContractViolation("coefficient grid must cover exactly {(i, j): i + j <= N}")
        self.chart = chart
        self.N = N
        self.rows = tuple(tuple(r) for r in rows)
        self._array = None

    # construction ---------------------------------------------------------
    @classmethod
    def from_function(cls, chart: Chart, N: int, f: Callable[[int, int], Number]):
        return cls(chart, N, [[f(i, j) for j in range(N - i + 1)] for i in range(N + 1)])

    @classmethod
    def zeros(cls, chart: Chart, N: int):
        return cls.from_function(chart, N, lambda i, j: Fraction(0))

    @classmethod
    def constant(cls, chart: Chart, N: int, value: Number = 1):
        v = to_fraction(value)
        return cls.from_function(chart, N, lambda i, j: v if i == j == 0 else Fraction(0))

    def coeff(self, i: int, j: int):
        if i < 0 or j < 0 or i + j > self.N:
            return 0
        return self.rows[i][j]

    def __getitem__(self, ij):
        return self.coeff(*ij)

    def items(self):
        for i, row in enumerate(self.rows):
            for j, c in enumerate(row):
                yield i, j, c

    def __repr__(self):
        return f"TruncatedSeries2D(chart={self.chart.name}, N={self.N})"

    # algebra ----------------------------------------------------------------
    def _same_chart(self, other: 'TruncatedSeries2D'):
        if other.chart is not self.chart:
            raise ContractViolation(f"chart mismatch: {self.chart.name} vs {other.chart.name}")

    def map(self, f: Callable[[int, int, Number], Number]) -> 'TruncatedSeries2D':
        return TruncatedSeries2D(self.chart, self.N,
                                 [[f(i, j, c) for j, c in enumerate(row)] for i, row in enumerate(self.rows)])

    def truncate(self, M: int) -> 'TruncatedSeries2D':
        if M > self.N:
            raise ContractViolation(f"cannot extend degree {self.N} to {M}")
        return TruncatedSeries2D.from_function(self.chart, M, self.coeff)

    def scale(self, k: Number) -> 'TruncatedSeries2D':
        return self.map(lambda i, j, c: c * k)

    def add(self, other: 'TruncatedSeries2D') -> 'TruncatedSeries2D':
        self._same_chart(other)
        M = min(self.N, other.N)
        return TruncatedSeries2D.from_function(self.chart, M, lambda i, j: self.coeff(i, j) + other.coeff(i, j))

    def sub(self, other: 'TruncatedSeries2D') -> 'TruncatedSeries2D':
        return self.add(other.scale(-1))

    __add__ = add
    __sub__ = sub

    def __mul__(self, k: Number):
        return self.scale(k)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1)

    def euler_delta1(self) -> 'TruncatedSeries2D':
        return self.map(lambda i, j, c: c * i)

    def euler_delta2(self) -> 'TruncatedSeries2D':
        # y d/dy in every chart: (t2-1)d/dt2 for y=1-t2, t2 d/dt2 for y=t2, D2 for y=s2
        return self.map(lambda i, j, c: c * j)

    def apply_euler(self, poly) -> 'TruncatedSeries2D':
        """Apply a polynomial in the chart Euler operators, a sympy Poly in d1, d2 or {(e1, e2): coeff}."""
        terms = _euler_items(poly)

        def f(i, j, c):
            if c == 0:
                return c
            return c * sum(k * i ** e1 * j ** e2 for (e1, e2), k in terms)
        return self.map(f)

    def partial_x(self) -> 'TruncatedSeries2D':
        if self.N == 0:
            raise ContractViolation("cannot differentiate a degree-0 series")
        return TruncatedSeries2D.from_function(self.chart, self.N - 1, lambda i, j: (i + 1) * self.coeff(i + 1, j))

    def partial_y(self) -> 'TruncatedSeries2D':
        if self.N == 0:
            raise ContractViolation("cannot differentiate a degree-0 series")
        return TruncatedSeries2D.from_function(self.chart, self.N - 1, lambda i, j: (j + 1) * self.coeff(i, j + 1))

    def mul_monomial(self, px: int, py: int) -> 'TruncatedSeries2D':
        """Multiply by x^px y^py, truncating at the same degree."""
        return TruncatedSeries2D.from_function(self.chart, self.N, lambda i, j: self.coeff(i - px, j - py))

    def mul_x(self) -> 'TruncatedSeries2D':
        return self.mul_monomial(1, 0)

    def mul_y(self) -> 'TruncatedSeries2D':
        return self.mul_monomial(0, 1)

    def mul_poly(self, poly: Dict[Tuple[int, int], Number]) -> 'TruncatedSeries2D':
        """Multiply by a polynomial in the chart variables, {(px, py): coeff}."""
        out = None
        for (px, py), k in poly.items():
            term = self.mul_monomial(px, py).scale(k)
            out = term if out is None else out.add(term)
        return out if out is not None else TruncatedSeries2D.zeros(self.chart, self.N)

    # floating point -----------------------------------------------------------
    def to_array(self) -> np.ndarray:
        if self._array is None:
            A = np.zeros((self.N + 1, self.N + 1))
            for i, row in enumerate(self.rows):
                A[i, :len(row)] = [float(c) for c in row]
            self._array = A
        return self._array

    def max_abs(self, max_degree: int = None) -> float:
        top = self.N if max_degree is None else max_degree
        best = 0
        for i, j, c in self.items():
            if i + j <= top and abs(c) > best:
                best = abs(c)
        return float(best)

    def derivative(self, x: float, y: float, ax: int = 0, ay: int = 0) -> float:
        """d^ax/dx^ax d^ay/dy^ay of the truncated sum at the chart point (x, y)."""
        A = self.to_array()
        return float(_falling_powers(x, self.N, ax) @ A @ _falling_powers(y, self.N, ay))

    def evaluate(self, x: float, y: float) -> float:
        return self.derivative(x, y, 0, 0)

    def chart_point(self, t1: float, t2: float) -> Tuple[float, float, int]:
        """Chart coordinates of (t1, t2) and the sign picked up by one d/dt2."""
        if self.chart is Chart.X_T1_Y_ONE_MINUS_T2:
            return t1, 1.0 - t2, -1
        return t1, t2, 1

    def jet_t(self, t1: float, t2: float, a1: int = 0, a2: int = 0) -> float:
        """Partial derivative d^a1/dt1^a1 d^a2/dt2^a2 at (t1, t2)."""
        x, y, sign = self.chart_point(t1, t2)
        return (sign ** a2) * self.derivative(x, y, a1, a2)


def _falling_powers(x: float, N: int, order: int) -> np.ndarray:
    # entry i holds d^order/dx^order of x^i
    out = np.zeros(N + 1)
    for i in range(order, N + 1):
        k = 1
        for r in range(order):
            k *= (i - r)
        out[i] = k * x ** (i - order)
    return out


# ---------------------------------------------------------------------------
# m-variate series (m <= 3)
# ---------------------------------------------------------------------------

def _multi_indices(m: int, N: int):
    if m == 1:
        for i in range(N + 1):
            yield (i,)
        return
    for i in range(N + 1):
        for rest in _multi_indices(m - 1, N - i):
            yield (i,) + rest


class MultiSeries:
    """Exact m-variate truncated series {multi-index: coefficient}, |idx| <= N."""

    def __init__(self, m: int, N: int, coeffs: Dict[Tuple[int, ...], Fraction]):
        if m > 3:
            raise UnsupportedError(f"m-variate series supported for m <= 3, got m={m}")
        self.m = m
        self.N = N
        self.coeffs = dict(coeffs)

    def coeff(self, idx) -> Fraction:
        return self.coeffs.get(tuple(idx), Fraction(0))

    def apply_euler(self, poly) -> 'MultiSeries':
        terms = _euler_items(poly)
        out = {}
        for idx, c in self.coeffs.items():
            w = 0
            for exps, k in terms:
                t = k
                for e, i in zip(exps, idx):
                    t = t * i ** e
                w += t
            out[idx] = c * w
        return MultiSeries(self.m, self.N, out)

    def mul_monomial(self, powers: Sequence[int]) -> 'MultiSeries':
        out = {}
        for idx, c in self.coeffs.items():
            new = tuple(i + p for i, p in zip(idx, powers))
            if sum(new) <= self.N:
                out[new] = c
        return MultiSeries(self.m, self.N, out)

    def add(self, other: 'MultiSeries') -> 'MultiSeries':
        keys = set(self.coeffs) | set(other.coeffs)
        return MultiSeries(self.m, min(self.N, other.N),
                           {k: self.coeff(k) + other.coeff(k) for k in keys if sum(k) <= min(self.N, other.N)})

    def scale(self, k: Number) -> 'MultiSeries':
        return MultiSeries(self.m, self.N, {idx: c * k for idx, c in self.coeffs.items()})

    def evaluate(self, t: Sequence[float]) -> float:
        total = 0.0
        for idx, c in self.coeffs.items():
            term = float(c)
            for ti, i in zip(t, idx):
                term *= ti ** i
            total += term
        return total


def series_expand_multi(p: Union[HGParamsFnm, HGParamsF2nm], N: int) -> MultiSeries:
    if N < 0:
        raise ContractViolation(f"degree must be >= 0, got {N}")
    if p.m > 3:
        raise UnsupportedError(f"m-variate expansion supported for m <= 3, got m={p.m}")
    coeff = coeff_Fnm if isinstance(p, HGParamsFnm) else coeff_F2nm
    return MultiSeries(p.m, N, {idx: coeff(p, idx) for idx in _multi_indices(p.m, N)})


# ---------------------------------------------------------------------------
# exact expansions
# ---------------------------------------------------------------------------

def series_expand(p, N: int, chart: Chart = None) -> TruncatedSeries2D:
    """
    Exact coefficient grid. Default charts: F2n -> X_T1_Y_ONE_MINUS_T2,
    F_{n+1,2} -> X_S1_Y_S2, F4 -> X_T1_Y_T2. Passing chart=X_T1_Y_T2 for an
    F2n parameter set gives the classical Appell F2 series in (t1, t2).
    """
    if N < 0:
        raise ContractViolation(f"degree must be >= 0, got {N}")
    if isinstance(p, HGParamsF2n):
        ri, rj = _f2n_ratios(p)
        default = Chart.X_T1_Y_ONE_MINUS_T2
    elif isinstance(p, HGParamsFnm):
        if p.m != 2:
            raise ContractViolation(f"bivariate expansion needs m=2, got m={p.m}; use series_expand_multi")
        ri, rj = _fn2_ratios(p)
        default = Chart.X_S1_Y_S2
    elif isinstance(p, AppellF4Params):
        ri, rj = _f4_ratios(p)
        default = Chart.X_T1_Y_T2
    elif isinstance(p, HGParamsF2nm):
        if p.m != 2:
            raise ContractViolation(f"bivariate expansion needs m=2, got m={p.m}; use series_expand_multi")
        return series_expand(f2nm_as_f2n(p), N, chart=chart or Chart.X_T1_Y_T2)
    else:
        raise ContractViolation(f"no series for {type(p).__name__}")
    return TruncatedSeries2D(chart or default, N, _exact_grid(ri, rj, N))


def f2nm_as_f2n(p: HGParamsF2nm) -> HGParamsF2n:
    if p.m != 2:
        raise ContractViolation(f"F2^(n,m) coincides with F2n only at m=2, got m={p.m}")
    return HGParamsF2n(b=p.b1row, bprime=p.b_rest[0], a=p.a, c=p.c1row, cprime=p.c_rest[0])


def f4_solution_series(p: AppellF4Params, N: int) -> TruncatedSeries2D:
    """
    F4(a, b; c1, c2; t1 t2, (1-t1)(1-t2)) re-expanded exactly in x = t1, y = 1-t2.

    With u = x(1-y), v = (1-x)y every term u^m v^n contributes
    C(n,k)(-1)^k C(m,l)(-1)^l at x^(m+k) y^(n+l).
    """
    if N < 0:
        raise ContractViolation(f"degree must be >= 0, got {N}")
    A = _exact_grid(*_f4_ratios(p), N)
    acc = [[Fraction(0)] * (N - i + 1) for i in range(N + 1)]
    for m in range(N + 1):
        for n in range(N - m + 1):
            a_mn = A[m][n]
            if a_mn == 0:
                continue
            for k in range(0, min(n, N - m - n) + 1):
                ck = comb(n, k) * (-1) ** k
                for l in range(0, min(m, N - m - n - k) + 1):
                    acc[m + k][n + l] += a_mn * ck * comb(m, l) * (-1) ** l
    return TruncatedSeries2D(Chart.X_T1_Y_ONE_MINUS_T2, N, acc)


# ---------------------------------------------------------------------------
# floating point evaluation
# ---------------------------------------------------------------------------

def _float_grid(ri, rj, u: float, v: float, N: int) -> np.ndarray:
    """Terms coeff(i,j) u^i v^j for i+j <= N via cumulative products of the ratios."""
    T = np.zeros((N + 1, N + 1))
    col = np.ones(N + 1)
    for i in range(N):
        col[i + 1] = col[i] * ri(i, 0) * u
    for i in range(N + 1):
        T[i, 0] = col[i]
        L = N - i
        if L > 0 and col[i] != 0.0:
            js = np.arange(L, dtype=float)
            T[i, 1:L + 1] = col[i] * np.cumprod(rj(float(i), js) * v)
    return T


class _F:
    """Float view of a parameter dataclass for the vectorised ratio recurrences."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


def _tail_bound(diag_sums: Sequence[float]) -> float:
    """
    Geometric estimate of the tail from the ratio of the last two anti-diagonal
    sums. With a single anti-diagonal (N = 0) there is no ratio: the bound is
    infinite, so an N = 0 evaluation of a nonzero series always warns.
    """
    if len(diag_sums) < 2:
        return 0.0 if diag_sums[-1] == 0 else float('inf')
    last, prev = diag_sums[-1], diag_sums[-2]
    if last == 0.0:
        return 0.0
    if prev == 0.0:
        return float('inf')
    r = last / prev
    if r >= 1.0:
        return float('inf')
    # safety factor 2 on the geometric estimate
    return 2.0 * last * r / (1.0 - r)


def _anti_diagonal_sums(T: np.ndarray, N: int) -> List[float]:
    flipped = np.fliplr(np.abs(T))
    return [float(np.trace(flipped, offset=N - k)) for k in range(N + 1)]


def _value_from_grid(T: np.ndarray, N: int, tol: float) -> SeriesValue:
    tail = _tail_bound(_anti_diagonal_sums(T, N))
    return SeriesValue(float(T.sum()), tail, bool(tail > tol))


def eval_F2n(p: HGParamsF2n, x: float, y: float, N: int, margin: float = 0.02,
             tol: float = 1e-10) -> SeriesValue:
    """F2n at (t1, 1-t2) = (x, y), partial sum over i+j <= N."""
    if abs(x) + abs(y) >= 1.0 - margin:
        raise RegionError((x, y), 1.0 - margin)
    if N < 0:
        raise ContractViolation(f"N must be >= 0, got {N}")
    f = _F(b=[float(v) for v in p.b], c=[float(v) for v in p.c], a=float(p.a),
           bprime=float(p.bprime), cprime=float(p.cprime))
    ri, rj = _f2n_ratios(f)
    return _value_from_grid(_float_grid(ri, rj, x, y, N), N, tol)


def eval_F4(p: AppellF4Params, t1: float, t2: float, N: int, margin: float = 0.02,
            tol: float = 1e-10) -> SeriesValue:
    """Classical Appell F4 double series."""
    if sqrt(abs(t1)) + sqrt(abs(t2)) >= 1.0 - margin:
        raise RegionError((t1, t2), 1.0 - margin)
    if N < 0:
        raise ContractViolation(f"N must be >= 0, got {N}")
    f = _F(a=float(p.a), b=float(p.b), c1=float(p.c1), c2=float(p.c2))
    ri, rj = _f4_ratios(f)
    return _value_from_grid(_float_grid(ri, rj, t1, t2, N), N, tol)


def eval_F4_solution(p: AppellF4Params, t1: float, t2: float, N: int, margin: float = 0.02,
                     tol: float = 1e-10) -> SeriesValue:
    """The F4-system solution holomorphic at (t1, 1-t2) = (0, 0)."""
    return eval_F4(p, t1 * t2, (1.0 - t1) * (1.0 - t2), N, margin=margin, tol=tol)


def _eval_multi(terms, N: int, tol: float) -> SeriesValue:
    diag = [0.0] * (N + 1)
    total = 0.0
    for idx, value in terms.items():
        total += value
        diag[sum(idx)] += abs(value)
    tail = _tail_bound(diag)
    return SeriesValue(total, tail, bool(tail > tol))


def _multi_terms(m: int, N: int, t: Sequence[float], step: Callable[[Tuple[int, ...], int], float]):
    """Terms by the recurrence term(idx + e_k) = term(idx) * step(idx, k) * t_k."""
    terms = {(0,) * m: 1.0}
    for idx in _multi_indices(m, N):
        if idx in terms or sum(idx) == 0:
            continue
        k = next(pos for pos, i in enumerate(idx) if i > 0)
        prev = list(idx)
        prev[k] -= 1
        prev = tuple(prev)
        terms[idx] = terms[prev] * step(prev, k) * t[k]
    return terms


def eval_Fnm(p: HGParamsFnm, s: Sequence[float], N: int, margin: float = 0.02,
             tol: float = 1e-10) -> SeriesValue:
    if len(s) != p.m:
        raise ContractViolation(f"expected {p.m} variables, got {len(s)}")
    if any(abs(si) >= 1.0 - margin for si in s):
        raise RegionError(tuple(s), 1.0 - margin)
    if N < 0:
        raise ContractViolation(f"N must be >= 0, got {N}")
    alpha = [float(v) for v in p.alpha]
    beta = [float(v) for v in p.beta]
    gamma = [float(v) for v in p.gamma]
    if p.m == 2:
        f = _F(alpha=alpha, beta=beta, gamma=gamma)
        ri, rj = _fn2_ratios(f)
        return _value_from_grid(_float_grid(ri, rj, s[0], s[1], N), N, tol)

    def step(idx, k):
        tot = sum(idx)
        return (_prod(a + tot for a in alpha) * (beta[k] + idx[k])
                / (_prod(g + tot for g in gamma) * (1 + idx[k])))
    return _eval_multi(_multi_terms(p.m, N, s, step), N, tol)


def eval_F2nm(p: HGParamsF2nm, t: Sequence[float], N: int, margin: float = 0.02,
              tol: float = 1e-10) -> SeriesValue:
    if len(t) != p.m:
        raise ContractViolation(f"expected {p.m} variables, got {len(t)}")
    # no region is known beyond m=2; sum(|t_i|) < 1 is a heuristic
    if sum(abs(ti) for ti in t) >= 1.0 - margin:
        raise RegionError(tuple(t), 1.0 - margin)
    if p.m == 2:
        return eval_F2n(f2nm_as_f2n(p), t[0], t[1], N, margin=margin, tol=tol)
    b1 = [float(v) for v in p.b1row]
    c1 = [float(v) for v in p.c1row]
    br = [float(v) for v in p.b_rest]
    cr = [float(v) for v in p.c_rest]
    a = float(p.a)

    def step(idx, k):
        tot = sum(idx)
        if k == 0:
            num = _prod(b + idx[0] for b in b1)
            den = _prod(c + idx[0] for c in c1)
        else:
            num = br[k - 1] + idx[k]
            den = cr[k - 1] + idx[k]
        return num * (a + tot) / (den * (1 + idx[k]))
    return _eval_multi(_multi_terms(p.m, N, t, step), N, tol)
