"""
Euler-type integral representations evaluated on the unit cube.

Every iterated integral is first mapped to [0,1]^k so that the endpoint
singularities become Jacobi weights v^p (1-v)^q; those are integrated exactly
by Gauss-Jacobi rules, the remaining kernel is smooth.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Callable, List, NamedTuple, Tuple

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import roots_jacobi

from src.errors import ContractViolation, DomainError, RegionError
from src.hgseries import HGParamsF2n, HGParamsFnm, pochhammer, to_fraction
from src.logs import debug


class QuadRule(Enum):
    GAUSS_JACOBI = 'gauss-jacobi'
    TANH_SINH = 'tanh-sinh'


@dataclass(frozen=True)
class QuadratureConfig:
    nodes_per_axis: int = 64
    rule: QuadRule = QuadRule.GAUSS_JACOBI
    tolerance: float = 1e-7

    def __post_init__(self):
        if self.nodes_per_axis < 4:
            raise ContractViolation(f"nodes_per_axis must be >= 4, got {self.nodes_per_axis}")


class BetaReduction(NamedTuple):
    lhs: float
    rhs: float
    # the integral runs from 1 to t2; computed over (t2, 1) and multiplied by this sign
    orientation: int


@lru_cache(maxsize=256)
def gauss_jacobi_01(nodes: int, p: float, q: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi rule on [0,1] for the weight v^p (1-v)^q, p, q > -1."""
    if p <= -1 or q <= -1:
        raise DomainError(f"Jacobi weight exponents must exceed -1, got p={p}, q={q}")
    # roots_jacobi uses (1-x)^alpha (1+x)^beta on [-1, 1]; v = (1+x)/2
    x, w = roots_jacobi(nodes, q, p)
    v = (1.0 + x) / 2.0
    w = w / 2.0 ** (p + q + 1)
    v.flags.writeable = False
    w.flags.writeable = False
    return v, w


@lru_cache(maxsize=256)
def tanh_sinh_01(nodes: int, p: float, q: float) -> Tuple[np.ndarray, np.ndarray]:
    """Double-exponential rule on [0,1] with the weight v^p (1-v)^q folded into the weights."""
    if p <= -1 or q <= -1:
        raise DomainError(f"weight exponents must exceed -1, got p={p}, q={q}")
    K = nodes // 2
    h = 3.2 / K
    k = np.arange(-K, K + 1) * h
    u = 0.5 * np.pi * np.sinh(k)
    # v and 1-v computed separately so neither loses digits near its endpoint
    v = 1.0 / (1.0 + np.exp(-2.0 * u))
    one_minus_v = 1.0 / (1.0 + np.exp(2.0 * u))
    dv = h * 0.5 * np.pi * np.cosh(k) / (2.0 * np.cosh(u) ** 2)
    w = dv * np.exp(p * np.log(v) + q * np.log(one_minus_v))
    v.flags.writeable = False
    w.flags.writeable = False
    return v, w


def _rule(q: QuadratureConfig, p: float, r: float):
    if q.rule is QuadRule.TANH_SINH:
        return tanh_sinh_01(q.nodes_per_axis, float(p), float(r))
    return gauss_jacobi_01(q.nodes_per_axis, float(p), float(r))


def _tensor_sum(rules: List[Tuple[np.ndarray, np.ndarray]], kernel: Callable) -> float:
    """sum over the tensor grid of prod(weights) * kernel(v_1, ..., v_k)."""
    if len(rules) > 3:
        (v0, w0), rest = rules[0], rules[1:]
        return float(sum(wk * _tensor_sum(rest, lambda *vs, vk=vk: kernel(vk, *vs))
                         for vk, wk in zip(v0, w0)))
    grids = np.meshgrid(*[v for v, _ in rules], indexing='ij', sparse=True)
    W = reduce(np.multiply.outer, [w for _, w in rules])
    return float(np.sum(W * kernel(*grids)))


def _require_positive(**exponents):
    for name, value in exponents.items():
        if not value > 0:
            raise DomainError(f"integral diverges: {name} = {value} must be > 0")


def _check_t_region(t1: float, t2: float):
    if abs(t1) + abs(1.0 - t2) >= 1.0:
        raise RegionError((t1, t2), 1.0)


def _prod_axes(vs):
    return reduce(np.multiply, vs, 1.0)


def integral_F2n(p: HGParamsF2n, t1: float, t2: float, q: QuadratureConfig = QuadratureConfig()) -> float:
    """
    Cube form:
      int prod v_k^(b_k-1)(1-v_k)^(c_k-b_k-1) v^(b'-1)(1-v)^(c'-b'-1)
          {1 - t1 v_1...v_n - (1-t2) v}^(-a) dv / prod Beta
    """
    for k, (bk, ck) in enumerate(zip(p.b, p.c), start=1):
        _require_positive(**{f'b{k}': bk, f'c{k}-b{k}': ck - bk})
    _require_positive(**{"b'": p.bprime, "c'-b'": p.cprime - p.bprime})
    _check_t_region(t1, t2)
    rules = [_rule(q, bk - 1, ck - bk - 1) for bk, ck in zip(p.b, p.c)]
    rules.append(_rule(q, p.bprime - 1, p.cprime - p.bprime - 1))
    norm = float(np.prod([beta_fn(float(bk), float(ck - bk)) for bk, ck in zip(p.b, p.c)]))
    norm *= beta_fn(float(p.bprime), float(p.cprime - p.bprime))
    a, y = float(p.a), 1.0 - t2

    def kernel(*vs):
        return (1.0 - t1 * _prod_axes(vs[:-1]) - y * vs[-1]) ** (-a)

    value = _tensor_sum(rules, kernel) / norm
    debug(f"integral F2n n={p.n} at ({t1}, {t2}) = {value:.15g}")
    return value


def degenerate_series_params(p: HGParamsF2n) -> HGParamsF2n:
    """Parameters of the series equal to the degenerate integral: b' -> b'-c'+1, a -> c1-1, c1 -> c1-1, c' -> 2-c'."""
    return HGParamsF2n(b=p.b, bprime=p.bprime - p.cprime + 1, a=p.c[0] - 1,
                       c=(p.c[0] - 1,) + tuple(p.c[1:]), cprime=2 - p.cprime)


def integral_F2n_degenerate(p: HGParamsF2n, t1: float, t2: float,
                            q: QuadratureConfig = QuadratureConfig()) -> float:
    """
    (1-t2)^(1-c') times
      int prod_{k<n} v_k^(b_{k+1}-1)(1-v_k)^(c_{k+1}-b_{k+1}-1) v_n^(b'-c')(1-v_n)^(-b')
          {1 - t1 v_1...v_{n-1} - (1-t2) v_n}^(-b1) {1 - (1-t2) v_n}^(b1-c1+1) dv / prod Beta
    """
    for k in range(1, p.n):
        bk, ck = p.b[k], p.c[k]
        _require_positive(**{f'b{k + 1}': bk, f'c{k + 1}-b{k + 1}': ck - bk})
    _require_positive(**{"b'-c'+1": p.bprime - p.cprime + 1, "1-b'": 1 - p.bprime})
    _check_t_region(t1, t2)
    rules = [_rule(q, bk - 1, ck - bk - 1) for bk, ck in zip(p.b[1:], p.c[1:])]
    rules.append(_rule(q, p.bprime - p.cprime, -p.bprime))
    norm = float(np.prod([beta_fn(float(bk), float(ck - bk)) for bk, ck in zip(p.b[1:], p.c[1:])]))
    norm *= beta_fn(float(p.bprime - p.cprime + 1), float(1 - p.bprime))
    b1, c1, y = float(p.b[0]), float(p.c[0]), 1.0 - t2

    def kernel(*vs):
        yv = y * vs[-1]
        return (1.0 - t1 * _prod_axes(vs[:-1]) - yv) ** (-b1) * (1.0 - yv) ** (b1 - c1 + 1.0)

    value = y ** (1.0 - float(p.cprime)) * _tensor_sum(rules, kernel) / norm
    debug(f"degenerate integral n={p.n} at ({t1}, {t2}) = {value:.15g}")
    return value


def integral_Fn2(p: HGParamsFnm, s1: float, s2: float, q: QuadratureConfig = QuadratureConfig()) -> float:
    """
    The chain 0 < v_n < ... < v_1 < 1 mapped to the cube by v_k = w_1...w_k:
      int prod w_k^(alpha_k-1)(1-w_k)^(gamma_k-alpha_k-1) (1-s1 W)^(-beta1)(1-s2 W)^(-beta2) dw / prod Beta
    with W = w_1...w_n.
    """
    if p.m != 2:
        raise ContractViolation(f"integral needs m = 2, got m = {p.m}")
    for k, (al, g) in enumerate(zip(p.alpha, p.gamma), start=1):
        _require_positive(**{f'alpha{k}': al, f'gamma{k}-alpha{k}': g - al})
    if abs(s1) >= 1.0 or abs(s2) >= 1.0:
        raise RegionError((s1, s2), 1.0)
    rules = [_rule(q, al - 1, g - al - 1) for al, g in zip(p.alpha, p.gamma)]
    norm = float(np.prod([beta_fn(float(al), float(g - al)) for al, g in zip(p.alpha, p.gamma)]))
    b1, b2 = (float(b) for b in p.beta)

    def kernel(*ws):
        W = _prod_axes(ws)
        return (1.0 - s1 * W) ** (-b1) * (1.0 - s2 * W) ** (-b2)

    return _tensor_sum(rules, kernel) / norm


def inner_beta_reduction(bprime, cprime, u: float, t2: float,
                         q: QuadratureConfig = QuadratureConfig()) -> BetaReduction:
    """
    int_1^t2 (u-w)^(-c')(t2-w)^(c'-b'-1)(1-w)^(b'-1) dw evaluated on the reflected
    segment w in (t2, 1), where every factor is real and positive:
      int_t2^1 (w-u)^(-c')(w-t2)^(c'-b'-1)(1-w)^(b'-1) dw
        = B(b', c'-b') (1-t2)^(c'-1) (t2-u)^(-b') (1-u)^(b'-c').
    """
    bp, cp = float(bprime), float(cprime)
    _require_positive(**{"b'": bp, "c'-b'": cp - bp})
    if not u < t2 < 1.0:
        raise DomainError(f"real branch needs u < t2 < 1, got u={u}, t2={t2}")
    # w = 1 - (1-t2) v
    y = 1.0 - t2
    v, w = _rule(q, bp - 1.0, cp - bp - 1.0)
    lhs = y ** (cp - 1.0) * float(np.sum(w * (1.0 - u - y * v) ** (-cp)))
    rhs = beta_fn(bp, cp - bp) * y ** (cp - 1.0) * (t2 - u) ** (-bp) * (1.0 - u) ** (bp - cp)
    return BetaReduction(lhs, rhs, -1)


def pochhammer_ratio_identity(c1, b1, i: int, j: int) -> bool:
    """
    (c1-1+i)_j / (b1+i)_j == sum_k (c1-b1-1)_k / (b1+i+j-k)_k * j! / (k! (j-k)!),
    both sides in exact rational arithmetic.
    """
    c1, b1 = to_fraction(c1), to_fraction(b1)
    if i < 0 or j < 0:
        raise ContractViolation(f"indices must be non-negative, got ({i}, {j})")
    den = pochhammer(b1 + i, j)
    if den == 0:
        raise DomainError(f"(b1+i)_j vanishes at b1={b1}, i={i}, j={j}")
    lhs = Fraction(pochhammer(c1 - 1 + i, j)) / den
    rhs = Fraction(0)
    for k in range(j + 1):
        dk = pochhammer(b1 + i + j - k, k)
        if dk == 0:
            raise DomainError(f"(b1+i+j-k)_k vanishes at k={k}")
        binom = Fraction(pochhammer(1, j), pochhammer(1, k) * pochhammer(1, j - k))
        rhs += Fraction(pochhammer(c1 - b1 - 1, k)) / dk * binom
    return lhs == rhs
