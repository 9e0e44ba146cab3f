"""
Hamiltonian side: the Schlesinger-Tsuda type system in two times with 4n
coordinates (q, p, q', p'), the six-coordinate F4 system, their constraint
manifolds, and the checks that the constrained flows reproduce the linear
Pfaff connections of src.pfaff.

Gradients of H are taken by central differences with one Richardson step.
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from src.errors import ContractViolation, SingularPointError
from src.hgseries import to_fraction
from src.logs import debug, log
from src.pfaff import (PainleveParams, LogConnection, alpha_relation, build_connection_F4,
                       build_connection_degenerate, build_connection_main, matrices_at)
from src.settings import generic_draws

FD_STEP = 1e-5
SINGULAR_EPS = 1e-12
MANIFOLD_TOL = 1e-12


class Manifold(Enum):
    F2 = 'F2'      # the main specialization; w-vector of dimension 2n+1
    F1 = 'F1'
    DEG = 'DEG'
    F4 = 'F4'


@dataclass(frozen=True)
class PhasePoint:
    q: Tuple[float, ...]
    p: Tuple[float, ...]
    qp: Tuple[float, ...]
    pp: Tuple[float, ...]
    t1: float
    t2: float

    def __post_init__(self):
        for name in ('q', 'p', 'qp', 'pp'):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if len(self.p) != len(self.q) or len(self.pp) != len(self.qp):
            raise ContractViolation("q/p and q'/p' must have matching lengths")

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def m(self) -> int:
        return len(self.qp)

    def coords(self) -> np.ndarray:
        return np.array(self.q + self.p + self.qp + self.pp, dtype=float)

    def with_coords(self, x: Sequence[float]) -> 'PhasePoint':
        n, m = self.n, self.m
        x = [float(v) for v in x]
        return PhasePoint(x[:n], x[n:2 * n], x[2 * n:2 * n + m], x[2 * n + m:], self.t1, self.t2)

    def at(self, t1: float, t2: float) -> 'PhasePoint':
        return replace(self, t1=float(t1), t2=float(t2))

    def to_dict(self) -> dict:
        return {'q': list(self.q), 'p': list(self.p), 'qp': list(self.qp), 'pp': list(self.pp),
                't1': self.t1, 't2': self.t2}


@dataclass(frozen=True)
class PainleveParamsF4:
    alpha: Tuple  # alpha_0 .. alpha_5

    def __post_init__(self):
        alpha = tuple(to_fraction(a) for a in self.alpha)
        if len(alpha) != 6:
            raise ContractViolation(f"need alpha_0..alpha_5, got {len(alpha)} values")
        rel = alpha_relation(alpha)
        if abs(float(rel)) > 1e-12:
            raise ContractViolation(f"2a0+a1+a2+a3+a4+a5 = {float(rel)} must vanish")
        object.__setattr__(self, 'alpha', alpha)

    def floats(self) -> Tuple[float, ...]:
        return tuple(float(a) for a in self.alpha)

    def shifted(self, i: int, delta) -> 'PainleveParamsF4':
        """alpha_i += delta, alpha_4 -= delta so that the linear relation survives."""
        a = list(self.alpha)
        a[i] += to_fraction(delta)
        a[4] -= to_fraction(delta)
        return PainleveParamsF4(tuple(a))


Params = Union[PainleveParams, PainleveParamsF4]


def _as_f4(alpha) -> PainleveParamsF4:
    return alpha if isinstance(alpha, PainleveParamsF4) else PainleveParamsF4(tuple(alpha))


def _check_times(t1: float, t2: float):
    for label, value in (('t1', t1), ('t1-1', t1 - 1.0), ('t2', t2), ('t2-1', t2 - 1.0), ('t1-t2', t1 - t2)):
        if abs(value) < SINGULAR_EPS:
            raise SingularPointError((t1, t2), label)


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def _H1_blocks(th1, th2, th3, kappa, rho, q, p, qp, pp):
    n = len(q)
    kr = [kappa[i + 1] + rho[i] for i in range(n)]
    Ht = (sum(q[i] * (p[i] - pp[i]) for i in range(n)) + th1) * \
         (sum(qp[i] * (pp[i] - p[i]) for i in range(n)) + th2)
    e = [(q[i] - 1.0) * p[i] + qp[i] * pp[i] - kr[i] for i in range(n)]
    H1 = (sum(e) - th3) * (sum(q[i] * e[i] for i in range(n)) - th1)
    H0 = (sum(q[i] * p[i] for i in range(n)) + th1) * \
         (sum((q[i] + qp[i] - 1.0) * p[i] for i in range(n)) + kappa[0])
    H0 -= sum(kappa[i + 1] * q[i] * p[i] for i in range(n))
    for i in range(n):
        for j in range(i + 1, n):
            H0 += q[i] * p[j] * ((q[i] - q[j]) * p[i] + (qp[i] - qp[j]) * pp[i] - kr[i])
    return Ht, H1, H0


def _H1(params: PainleveParams, x: np.ndarray, t1: float, t2: float, swap: bool = False) -> float:
    n = params.n
    q, p, qp, pp = x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:]
    th1, th2, th3 = float(params.theta1), float(params.theta2), float(params.theta3)
    if swap:
        q, p, qp, pp = qp, pp, q, p
        th1, th2 = th2, th1
        t1, t2 = t2, t1
    kappa = [float(k) for k in params.kappa]
    rho = [float(r) for r in params.rho]
    Ht, H1, H0 = _H1_blocks(th1, th2, th3, kappa, rho, q, p, qp, pp)
    return Ht / (t1 - t2) + H1 / (t1 - 1.0) + H0 / t1


def _H_main(params: PainleveParams, x: np.ndarray, t1: float, t2: float, i: int) -> float:
    # H2 is H1 under t1<->t2, p<->p', q<->q', theta1<->theta2
    return _H1(params, x, t1, t2, swap=(i == 2))


def eval_H(params: PainleveParams, pt: PhasePoint, i: int) -> float:
    if i not in (1, 2):
        raise ContractViolation(f"time index must be 1 or 2, got {i}")
    if pt.n != params.n or pt.m != params.n:
        raise ContractViolation(f"phase point layout ({pt.n}, {pt.m}) does not match n = {params.n}")
    _check_times(pt.t1, pt.t2)
    return _H_main(params, pt.coords(), pt.t1, pt.t2, i)


def _H_F4(a: Tuple[float, ...], x: np.ndarray, t1: float, t2: float, i: int) -> float:
    q, p, t = x[:3], x[3:6], (t1, t2)
    j = 2 if i == 1 else 1
    qi, qj, q1, q2, q3 = q[i - 1], q[j - 1], q[0], q[1], q[2]
    pi, pj, p1, p2, p3 = p[i - 1], p[j - 1], p[0], p[1], p[2]
    ti, tj = t[i - 1], t[j - 1]
    a0, a1, a2, a3, a4, a5 = a
    ai, aj = a[i], a[j]
    quad = ti * (ti - 1.0) * pi ** 2 - 2.0 * ti * (tj - 1.0) * p1 * p2 + (ti - 1.0) * tj * pj ** 2

    gar = (qi * (qi - 1.0) * (qi - ti) * pi ** 2
           - (aj + a3 - 1.0) * qi * (qi - 1.0) * pi
           - a4 * qi * (qi - ti) * pi
           - ai * (qi - 1.0) * (qi - ti) * pi
           + a0 * (a0 + a5 + 1.0) * qi
           + q1 * q2 * pj * (2.0 * qi * pi + qj * pj + 2.0 * a0 + a5 + 1.0)
           - q1 * q2 * quad / (ti - tj)
           + ai * ti / (ti - tj) * qj * ((ti - 1.0) * pi - (tj - 1.0) * pj)
           - aj * (ti - 1.0) * tj / (ti - tj) * qi * (pi - pj))

    H = gar - (a1 - a2) * t1 / (t1 - t2) * q2 * ((ti - 1.0) * pi - (t2 - 1.0) * pj)
    if i == 2:
        H += (a1 - a2) * t2 * (q2 - 1.0) * p2
    H += (-(ti + 1.0) * q3 ** 2 * p3 ** 2
          + (a1 + a3 - 1.0 + (a1 + a4) * ti) * q3 * p3
          + qi * q3 * p3 * (2.0 * q1 * p1 + 2.0 * q2 * p2 + q3 * p3 + 2.0 * a0 + a5 + 1.0)
          + ti * qj * p3 * (q3 * p3 - a1 + a2)
          - 2.0 * (ti + 1.0) * qi * q3 * pi * p3
          - q3 * pj * (2.0 * qi * pi + qj * pj + 2.0 * q3 * p3 + 2.0 * a0 + a2 + a5 + 1.0)
          + 2.0 * ti * q3 * pi * p3
          + q3 * quad / (ti - tj))
    return H


def eval_H_F4(alpha, pt: PhasePoint, i: int) -> float:
    f4 = _as_f4(alpha)
    if i not in (1, 2):
        raise ContractViolation(f"time index must be 1 or 2, got {i}")
    if pt.n != 3 or pt.m != 0:
        raise ContractViolation("the F4 system uses q1..q3, p1..p3 and no primed coordinates")
    _check_times(pt.t1, pt.t2)
    return _H_F4(f4.floats(), pt.coords(), pt.t1, pt.t2, i)


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------

def _richardson(f: Callable[[float], float], h: float) -> float:
    def central(s):
        return (f(s) - f(-s)) / (2.0 * s)
    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def _gradient(fn: Callable[[np.ndarray], float], x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = 1.0
        g[k] = _richardson(lambda s: fn(x + s * e), h)
    return g


def _pairs(n: int, m: int) -> List[Tuple[int, int]]:
    return [(k, n + k) for k in range(n)] + [(2 * n + k, 2 * n + m + k) for k in range(m)]


def _hamiltonian(params: Params) -> Callable[[np.ndarray, float, float, int], float]:
    if isinstance(params, PainleveParams):
        return lambda x, t1, t2, i: _H_main(params, x, t1, t2, i)
    a = _as_f4(params).floats()
    return lambda x, t1, t2, i: _H_F4(a, x, t1, t2, i)


def _field(params: Params, n: int, m: int, x: np.ndarray, t1: float, t2: float, i: int,
           h: float = FD_STEP) -> np.ndarray:
    H = _hamiltonian(params)
    g = _gradient(lambda y: H(y, t1, t2, i), x, h)
    dx = np.empty_like(x)
    for a, b in _pairs(n, m):
        dx[a] = g[b]
        dx[b] = -g[a]
    if not isinstance(params, PainleveParams):
        t = t1 if i == 1 else t2
        dx /= t * (t - 1.0)
    return dx


def _check_layout(params: Params, pt: PhasePoint):
    if isinstance(params, PainleveParams):
        if pt.n != params.n or pt.m != params.n:
            raise ContractViolation(f"phase point layout ({pt.n}, {pt.m}) does not match n = {params.n}")
    elif pt.n != 3 or pt.m != 0:
        raise ContractViolation("the F4 system uses q1..q3, p1..p3 and no primed coordinates")


def vector_field(params, pt: PhasePoint, i: int, h: float = FD_STEP) -> np.ndarray:
    """d/dt_i of the coordinates (q, p, q', p') at pt."""
    if not isinstance(params, PainleveParams):
        params = _as_f4(params)
    if i not in (1, 2):
        raise ContractViolation(f"time index must be 1 or 2, got {i}")
    _check_layout(params, pt)
    _check_times(pt.t1, pt.t2)
    return _field(params, pt.n, pt.m, pt.coords(), pt.t1, pt.t2, i, h)


def flow_compatibility(params, pt: PhasePoint, h: float = 1e-3) -> float:
    """
    max |d/dt1 X2 - d/dt2 X1| along the flows, i.e.
    dX2/dt1 + DX2.X1 - dX1/dt2 - DX1.X2 at pt.
    """
    if not isinstance(params, PainleveParams):
        params = _as_f4(params)
    _check_layout(params, pt)
    _check_times(pt.t1, pt.t2)
    n, m, x, t1, t2 = pt.n, pt.m, pt.coords(), pt.t1, pt.t2
    X1 = _field(params, n, m, x, t1, t2, 1)
    X2 = _field(params, n, m, x, t1, t2, 2)

    def along(k_field, v, dt1, dt2):
        return _richardson(lambda s: _field(params, n, m, x + s * v, t1 + s * dt1, t2 + s * dt2, k_field), h)

    worst = float(np.max(np.abs(along(2, X1, 1.0, 0.0) - along(1, X2, 0.0, 1.0))))
    debug(f"flow compatibility at ({t1:.4g}, {t2:.4g}): {worst:.3e}")
    return worst


# ---------------------------------------------------------------------------
# constraint manifolds
# ---------------------------------------------------------------------------

def _constraints(params: Params, manifold: Manifold, n: int, m: int) -> List[Tuple[str, Callable]]:
    out = []
    if manifold is Manifold.F4:
        for k in range(3):
            out.append((f'q{k + 1}', lambda x, k=k: x[k]))
        return out
    kr = [float(params.kr(i)) for i in range(1, n + 1)]
    if manifold in (Manifold.F2, Manifold.DEG):
        for k in range(n):
            out.append((f'q{k + 1}p{k + 1}-kr{k + 1}', lambda x, k=k: x[k] * x[n + k] - kr[k]))
            out.append((f"p'{k + 1}", lambda x, k=k: x[2 * n + m + k]))
        if manifold is Manifold.DEG:
            out.append(("q'1+q1-1", lambda x: x[2 * n] + x[0] - 1.0))
    elif manifold is Manifold.F1:
        for k in range(n):
            out.append((f'p{k + 1}', lambda x, k=k: x[n + k]))
            out.append((f"p'{k + 1}", lambda x, k=k: x[2 * n + m + k]))
    return out


def parameter_relation(params: Params, manifold: Manifold) -> float:
    """Value of the parameter condition attached to the manifold; zero when it holds."""
    if manifold is Manifold.F4:
        return float(_as_f4(params).alpha[1])
    if manifold is Manifold.F1:
        return float(params.theta3 + params.sum_kr)
    rel = float(params.theta1 + params.sum_kr)
    if manifold is Manifold.DEG:
        rel = max(abs(rel), abs(float(params.k(0) - params.k(1))))
    return rel


def _manifold_params(params, manifold: Manifold) -> Params:
    if manifold is Manifold.F4:
        return _as_f4(params)
    if not isinstance(params, PainleveParams):
        raise ContractViolation(f"manifold {manifold.value} needs PainleveParams")
    return params


def check_on_manifold(params, pt: PhasePoint, manifold: Manifold, tol: float = MANIFOLD_TOL):
    params = _manifold_params(params, manifold)
    _check_layout(params, pt)
    x = pt.coords()
    for label, g in _constraints(params, manifold, pt.n, pt.m):
        if abs(g(x)) > tol:
            raise ContractViolation(f"point is off the {manifold.value} manifold: {label} = {g(x):.3e}")
    rel = parameter_relation(params, manifold)
    if abs(rel) > tol:
        raise ContractViolation(f"parameters violate the {manifold.value} relation: {rel:.3e}")


def constraint_drift(params, pt: PhasePoint, manifold: Manifold, check: bool = True) -> List[float]:
    """d/dt_i of every constraint function along the flow, for i = 1, 2."""
    params = _manifold_params(params, manifold)
    if check:
        check_on_manifold(params, pt, manifold)
    x = pt.coords()
    drifts = []
    for i in (1, 2):
        X = vector_field(params, pt, i)
        for label, g in _constraints(params, manifold, pt.n, pt.m):
            d = _richardson(lambda s: g(x + s * X), 1e-4)
            debug(f"drift {manifold.value} {label} along t{i}: {d:.3e}")
            drifts.append(float(d))
    return drifts


# ---------------------------------------------------------------------------
# w-variables
# ---------------------------------------------------------------------------

def w0_logderiv(params, pt: PhasePoint, manifold: Manifold) -> Tuple[float, ...]:
    """
    F2 and DEG: coefficients of dlog(t1-1), dlog t1, dlog(t1-t2) in dlog w0.
    F4: the two partial derivatives (d/dt1 log w0, d/dt2 log w0).
    """
    params = _manifold_params(params, manifold)
    n = pt.n
    if manifold is Manifold.F4:
        a = params.floats()
        S = a[0] + a[5] + 1.0
        p = pt.p
        return tuple((p[i] - S) / (t - 1.0) - a[3] / t for i, t in ((0, pt.t1), (1, pt.t2)))
    if manifold not in (Manifold.F2, Manifold.DEG):
        raise ContractViolation(f"w0 is not defined on the {manifold.value} manifold")
    q, p, qp = pt.q, pt.p, pt.qp
    th2, th3 = float(params.theta2), float(params.theta3)
    c1 = sum(p) + th3
    if manifold is Manifold.F2:
        c0 = sum((qp[j] - 1.0) * p[j] for j in range(n)) + float(params.k(0) + params.r(1))
        ct = -sum(qp[j] * p[j] for j in range(n)) + th2
    else:
        c0 = -q[0] * p[0] + sum((qp[j] - 1.0) * p[j] for j in range(1, n)) + float(params.kr(1))
        ct = (q[0] - 1.0) * p[0] - sum(qp[j] * p[j] for j in range(1, n)) + th2
    return c1, c0, ct


def _dlog_w0(params, pt: PhasePoint, manifold: Manifold) -> Tuple[float, float]:
    if manifold is Manifold.F4:
        return w0_logderiv(params, pt, manifold)
    c1, c0, ct = w0_logderiv(params, pt, manifold)
    t1, t2 = pt.t1, pt.t2
    return c1 / (t1 - 1.0) + c0 / t1 + ct / (t1 - t2), ct / (t2 - t1)


def _ratios(params, manifold: Manifold, n: int, m: int) -> Callable[[np.ndarray, float, float], np.ndarray]:
    """w/w0 as a function of (coordinates, t1, t2)."""
    if manifold is Manifold.F4:
        a2 = float(params.alpha[2])

        def f4(x, t1, t2):
            p1, p2, p3 = x[3], x[4], x[5]
            return np.array([1.0, -t1 * p1, -t2 * p2, t1 * t2 * (p1 * p2 - a2 * p3)])
        return f4
    first = 0 if manifold is Manifold.F2 else 1

    def main(x, t1, t2):
        p, qp = x[n:2 * n], x[2 * n:2 * n + m]
        return np.concatenate(([1.0], p, [-qp[k] * p[k] for k in range(first, n)]))
    return main


def reduction_connection(params, manifold: Manifold) -> LogConnection:
    if manifold is Manifold.F2:
        return build_connection_main(params)
    if manifold is Manifold.DEG:
        return build_connection_degenerate(params)
    if manifold is Manifold.F4:
        return build_connection_F4(_as_f4(params).alpha)
    raise ContractViolation(f"no Pfaff reduction on the {manifold.value} manifold")


def _reduction_residual(params, pt: PhasePoint, manifold: Manifold, conn: LogConnection) -> float:
    x, t1, t2 = pt.coords(), pt.t1, pt.t2
    R = _ratios(params, manifold, pt.n, pt.m)
    r = R(x, t1, t2)
    M = matrices_at(conn, t1, t2)
    L = _dlog_w0(params, pt, manifold)
    worst = 0.0
    for i in (1, 2):
        X = vector_field(params, pt, i)
        dt1, dt2 = (1.0, 0.0) if i == 1 else (0.0, 1.0)
        dr = _richardson(lambda s: R(x + s * X, t1 + s * dt1, t2 + s * dt2), 1e-4)
        # w0 = 1 at pt, so dw = dr + r dlog w0
        res = dr + r * L[i - 1] - M[i - 1] @ r
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def verify_reduction(params: PainleveParams, pt: PhasePoint, manifold: Manifold = Manifold.F2,
                     check: bool = True) -> float:
    """Constrained Hamiltonian flow against the main (F2) or degenerate (DEG) connection."""
    if manifold not in (Manifold.F2, Manifold.DEG):
        raise ContractViolation(f"verify_reduction covers F2 and DEG, got {manifold.value}")
    if check:
        check_on_manifold(params, pt, manifold)
    conn = reduction_connection(params, manifold)
    worst = _reduction_residual(params, pt, manifold, conn)
    debug(f"reduction {manifold.value} at ({pt.t1:.4g}, {pt.t2:.4g}): {worst:.3e}")
    return worst


def verify_reduction_F4(alpha, pt: PhasePoint, check: bool = True) -> float:
    f4 = _as_f4(alpha)
    if check:
        check_on_manifold(f4, pt, Manifold.F4)
    # the connection is built from the given alphas even when alpha_1 != 0
    conn = build_connection_F4(f4.alpha)
    worst = _reduction_residual(f4, pt, Manifold.F4, conn)
    debug(f"reduction F4 at ({pt.t1:.4g}, {pt.t2:.4g}): {worst:.3e}")
    return worst


# ---------------------------------------------------------------------------
# birational symmetry
# ---------------------------------------------------------------------------

def _phase_map(params: PainleveParams, x: np.ndarray, n: int) -> np.ndarray:
    q, p, qp, pp = x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:]
    kr = np.array([float(params.kr(i)) for i in range(1, n + 1)])
    return np.concatenate((1.0 / q, -q * (q * p + qp * pp - kr), -qp / q, -q * pp))


def swap_theta13(params: PainleveParams) -> PainleveParams:
    return params.replace(theta1=params.theta3, theta3=params.theta1)


def birational_map(pt: PhasePoint, params: PainleveParams, swap_theta: bool = True):
    """
    q -> 1/q, p -> -q(qp + q'p' - kappa - rho), q' -> -q'/q, p' -> -q p',
    theta1 <-> theta3, (t1, t2) -> (1/t1, t2/t1).
    Returns the image point, the image parameters and d(T1, T2)/d(t1, t2).
    """
    _check_layout(params, pt)
    for k, qk in enumerate(pt.q, start=1):
        if abs(qk) < SINGULAR_EPS:
            raise SingularPointError(pt.to_dict(), f'q{k}')
    if abs(pt.t1) < SINGULAR_EPS:
        raise SingularPointError(pt.to_dict(), 't1')
    t1, t2 = pt.t1, pt.t2
    image = pt.with_coords(_phase_map(params, pt.coords(), pt.n)).at(1.0 / t1, t2 / t1)
    jac = np.array([[-1.0 / t1 ** 2, 0.0],
                    [-t2 / t1 ** 2, 1.0 / t1]])
    return image, (swap_theta13(params) if swap_theta else params), jac


def phase_jacobian(pt: PhasePoint, params: PainleveParams) -> np.ndarray:
    """Exact Jacobian of the phase part of the birational map; each index k is its own 4x4 block."""
    n = pt.n
    J = np.zeros((4 * n, 4 * n))
    for k in range(n):
        q, p, qp, pp = pt.q[k], pt.p[k], pt.qp[k], pt.pp[k]
        iq, ip, iqp, ipp = k, n + k, 2 * n + k, 3 * n + k
        J[iq, iq] = -1.0 / q ** 2
        J[ip, iq] = -(2.0 * q * p + qp * pp - float(params.kr(k + 1)))
        J[ip, ip] = -q ** 2
        J[ip, iqp] = -q * pp
        J[ip, ipp] = -q * qp
        J[iqp, iq] = qp / q ** 2
        J[iqp, iqp] = -1.0 / q
        J[ipp, iq] = -pp
        J[ipp, ipp] = -q
    return J


def symplectic_form(n: int, m: int) -> np.ndarray:
    dim = 2 * (n + m)
    omega = np.zeros((dim, dim))
    for a, b in _pairs(n, m):
        omega[a, b] = 1.0
        omega[b, a] = -1.0
    return omega


def symplectic_defect(pt: PhasePoint, params: PainleveParams) -> float:
    """max |J^T Omega J - Omega| for the phase part of the birational map."""
    J = phase_jacobian(pt, params)
    omega = symplectic_form(pt.n, pt.m)
    return float(np.max(np.abs(J.T @ omega @ J - omega)))


def involution_defect(pt: PhasePoint, params: PainleveParams) -> float:
    once, p1, _ = birational_map(pt, params)
    twice, _, _ = birational_map(once, p1)
    diff = np.abs(twice.coords() - pt.coords())
    return float(max(np.max(diff), abs(twice.t1 - pt.t1), abs(twice.t2 - pt.t2)))


def verify_symmetry(params: PainleveParams, pt: PhasePoint, swap_theta: bool = True) -> float:
    """
    Push the two flows through the map: DPhi X_k(x, t) against
    sum_l dT_l/dt_k Y_l(Phi(x), T) with Y the flows of the image system.
    """
    image, params2, jt = birational_map(pt, params, swap_theta)
    J = phase_jacobian(pt, params)
    X = [vector_field(params, pt, k) for k in (1, 2)]
    Y = [vector_field(params2, image, l) for l in (1, 2)]
    worst = 0.0
    for k in (0, 1):
        rhs = jt[0, k] * Y[0] + jt[1, k] * Y[1]
        worst = max(worst, float(np.max(np.abs(J @ X[k] - rhs))))
    debug(f"symmetry at ({pt.t1:.4g}, {pt.t2:.4g}): {worst:.3e}")
    return worst


# ---------------------------------------------------------------------------
# random batteries
# ---------------------------------------------------------------------------

def generic_params(rng: np.random.Generator, n: int, manifold: Manifold = Manifold.F2) -> Params:
    """Seeded generic parameters satisfying the relation of the manifold."""
    if manifold is Manifold.F4:
        a0, a2, a3, a5 = generic_draws(rng, 1, 4)[0]
        a4 = -(2 * a0 + a2 + a3 + a5)
        return PainleveParamsF4((a0, 0, a2, a3, a4, a5))
    vals = generic_draws(rng, 1, 2 * n + 3)[0]
    th2, th3, kappa, rho = vals[0], vals[1], list(vals[2:n + 3]), vals[n + 3:]
    if manifold is Manifold.DEG:
        kappa[0] = kappa[1]
    sum_kr = sum(kappa[i] + rho[i - 1] for i in range(1, n + 1))
    if manifold is Manifold.F1:
        return PainleveParams(theta1=-th3, theta2=th2, theta3=-sum_kr, kappa=tuple(kappa), rho=tuple(rho))
    return PainleveParams(theta1=-sum_kr, theta2=th2, theta3=th3, kappa=tuple(kappa), rho=tuple(rho))


def _random_times(rng: np.random.Generator, gap: float = 0.15) -> Tuple[float, float]:
    while True:
        t1, t2 = rng.uniform(0.15, 0.85, size=2)
        if abs(t1 - t2) > gap:
            return float(t1), float(t2)


def random_manifold_point(params, manifold: Manifold, rng: np.random.Generator) -> PhasePoint:
    t1, t2 = _random_times(rng)
    if manifold is Manifold.F4:
        return PhasePoint((0.0, 0.0, 0.0), tuple(rng.uniform(-0.6, 0.6, size=3)), (), (), t1, t2)
    n = params.n
    q = rng.uniform(0.3, 0.9, size=n)
    qp = rng.uniform(0.2, 0.8, size=n)
    if manifold is Manifold.F1:
        return PhasePoint(q, np.zeros(n), qp, np.zeros(n), t1, t2)
    kr = np.array([float(params.kr(i)) for i in range(1, n + 1)])
    if manifold is Manifold.DEG:
        qp[0] = 1.0 - q[0]
    return PhasePoint(q, kr / q, qp, np.zeros(n), t1, t2)


def random_phase_point(n: int, rng: np.random.Generator) -> PhasePoint:
    """Generic point with every q_i away from zero, for the birational map."""
    t1, t2 = _random_times(rng)
    return PhasePoint(rng.uniform(0.3, 0.9, size=n), rng.uniform(-0.8, 0.8, size=n),
                      rng.uniform(0.2, 0.8, size=n), rng.uniform(-0.8, 0.8, size=n), t1, t2)


def hamiltonian_battery(n: int, rng: np.random.Generator, draws: int = 10) -> dict:
    """Worst drift, reduction, involution, symplectic and symmetry values over seeded draws."""
    out = {'drift_F2': 0.0, 'drift_F1': 0.0, 'drift_DEG': 0.0, 'drift_F4': 0.0,
           'reduction_F2': 0.0, 'reduction_DEG': 0.0, 'reduction_F4': 0.0,
           'involution': 0.0, 'symplectic': 0.0, 'symmetry': 0.0}
    for _ in range(draws):
        for manifold in Manifold:
            if manifold is Manifold.F4:
                hp = generic_params(rng, 3, manifold)
            else:
                hp = generic_params(rng, n, manifold)
            pt = random_manifold_point(hp, manifold, rng)
            key = f'drift_{manifold.value}'
            out[key] = max(out[key], max(abs(d) for d in constraint_drift(hp, pt, manifold)))
            if manifold in (Manifold.F2, Manifold.DEG):
                key = f'reduction_{manifold.value}'
                out[key] = max(out[key], verify_reduction(hp, pt, manifold))
            elif manifold is Manifold.F4:
                out['reduction_F4'] = max(out['reduction_F4'], verify_reduction_F4(hp, pt))
        hp = generic_params(rng, n, Manifold.F2)
        pt = random_phase_point(n, rng)
        out['involution'] = max(out['involution'], involution_defect(pt, hp))
        out['symplectic'] = max(out['symplectic'], symplectic_defect(pt, hp))
        out['symmetry'] = max(out['symmetry'], verify_symmetry(hp, pt))
    log(f"hamiltonian battery n={n}: " + ", ".join(f"{k}={v:.2e}" for k, v in out.items()))
    return out
