"""
Logarithmic Pfaff connections

    dw = {A1 dlog(t1-1) + A0 dlog t1 + At dlog(t1-t2) + B1 dlog(t2-1) + B0 dlog t2} w

for the main (2n+1), degenerate (2n) and F4 (4) systems, their Riemann schemes,
and solution vectors built from hypergeometric series.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
import sympy as sp

from src.errors import ConsistencyError, ContractViolation, SingularPointError
from src.hgseries import AppellF4Params, HGParamsF2n, TruncatedSeries2D, Chart, to_fraction
from src.lpde import lin, pprod, D1
from src.logs import debug, log

SINGULAR_EPS = 1e-12


class Divisor(Enum):
    T1_MINUS_1 = 't1-1'
    T1 = 't1'
    T1_MINUS_T2 = 't1-t2'
    T2_MINUS_1 = 't2-1'
    T2 = 't2'


COLUMNS = ('t1=1', 't1=0', 't1=inf', 't1=t2', 't2=1', 't2=0', 't2=inf')


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PainleveParams:
    theta1: Fraction
    theta2: Fraction
    theta3: Fraction
    kappa: Tuple[Fraction, ...]   # kappa_0 .. kappa_n
    rho: Tuple[Fraction, ...]     # rho_1 .. rho_n

    def __post_init__(self):
        for name in ('theta1', 'theta2', 'theta3'):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        object.__setattr__(self, 'kappa', tuple(to_fraction(k) for k in self.kappa))
        object.__setattr__(self, 'rho', tuple(to_fraction(r) for r in self.rho))
        if len(self.rho) < 1 or len(self.kappa) != len(self.rho) + 1:
            raise ContractViolation(f"need kappa_0..kappa_n and rho_1..rho_n, got "
                                    f"{len(self.kappa)} kappas and {len(self.rho)} rhos")

    @property
    def n(self) -> int:
        return len(self.rho)

    def k(self, i: int) -> Fraction:
        return self.kappa[i]

    def r(self, i: int) -> Fraction:
        """rho_i, 1-based."""
        return self.rho[i - 1]

    def kr(self, i: int) -> Fraction:
        """kappa_i + rho_i, 1-based."""
        return self.kappa[i] + self.rho[i - 1]

    @property
    def sum_kr(self) -> Fraction:
        return sum((self.kr(i) for i in range(1, self.n + 1)), Fraction(0))

    def replace(self, **changes) -> 'PainleveParams':
        data = dict(theta1=self.theta1, theta2=self.theta2, theta3=self.theta3,
                    kappa=self.kappa, rho=self.rho)
        data.update(changes)
        return PainleveParams(**data)


def f2n_from_painleve(p: PainleveParams) -> HGParamsF2n:
    """b_i = -kappa_i-rho_1, b' = -theta2, c_1 = 1-kappa_0-rho_1, c_i = rho_i-rho_1+1, c' = 1-theta2-theta3, a = c_1+c'-2."""
    r1 = p.r(1)
    b = tuple(-p.k(i) - r1 for i in range(1, p.n + 1))
    c = (1 - p.k(0) - r1,) + tuple(p.r(i) - r1 + 1 for i in range(2, p.n + 1))
    cprime = 1 - p.theta2 - p.theta3
    return HGParamsF2n(b=b, bprime=-p.theta2, a=c[0] + cprime - 2, c=c, cprime=cprime)


def painleve_from_f2n(hp: HGParamsF2n) -> PainleveParams:
    """Inverse dictionary normalised by rho_1 = 0 and theta1 = -sum(kappa_j + rho_j)."""
    kappa = (1 - hp.c[0],) + tuple(-bi for bi in hp.b)
    rho = (Fraction(0),) + tuple(ci - 1 for ci in hp.c[1:])
    theta2 = -hp.bprime
    theta3 = 1 + hp.bprime - hp.cprime
    theta1 = -sum((kappa[i] + rho[i - 1] for i in range(1, hp.n + 1)), Fraction(0))
    return PainleveParams(theta1=theta1, theta2=theta2, theta3=theta3, kappa=kappa, rho=rho)


def alpha_relation(alpha: Sequence) -> Fraction:
    a = [to_fraction(x) for x in alpha]
    return 2 * a[0] + a[1] + a[2] + a[3] + a[4] + a[5]


def _check_alpha(alpha: Sequence):
    if len(alpha) != 6:
        raise ContractViolation(f"need alpha_0..alpha_5, got {len(alpha)} values")
    rel = alpha_relation(alpha)
    if abs(float(rel)) > 1e-12:
        raise ContractViolation(f"2a0+a1+a2+a3+a4+a5 = {float(rel)} must vanish")


def f4_from_alpha(alpha: Sequence) -> AppellF4Params:
    _check_alpha(alpha)
    a0, _, a2, a3, _, a5 = (to_fraction(x) for x in alpha)
    return AppellF4Params(a=a0 + a3 + a5 + 1, b=-a0 - a2, c1=a3 + 1, c2=a5 + 1)


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------

@dataclass
class LogConnection:
    kind: str
    dim: int
    residues: Dict[Divisor, np.ndarray]
    params: object = None

    def __post_init__(self):
        missing = [d.name for d in Divisor if d not in self.residues]
        if missing:
            raise ContractViolation(f"connection missing residues {missing}")
        for d, A in self.residues.items():
            if A.shape != (self.dim, self.dim):
                raise ContractViolation(f"residue {d.name} has shape {A.shape}, expected {(self.dim, self.dim)}")

    def __getitem__(self, d: Divisor) -> np.ndarray:
        return self.residues[d]

    def scaled(self, lam: float) -> 'LogConnection':
        return LogConnection(self.kind, self.dim, {d: lam * A for d, A in self.residues.items()}, self.params)

    def perturbed(self, d: Divisor, i: int, j: int, eps: float) -> 'LogConnection':
        res = {k: A.copy() for k, A in self.residues.items()}
        res[d][i, j] += eps
        return LogConnection(self.kind + '+perturbed', self.dim, res, self.params)


def zero_connection(dim: int) -> LogConnection:
    return LogConnection('zero', dim, {d: np.zeros((dim, dim)) for d in Divisor})


def build_connection_main(p: PainleveParams) -> LogConnection:
    n = p.n
    dim = 2 * n + 1
    th2, th3 = float(p.theta2), float(p.theta3)
    kr = [None] + [float(p.kr(i)) for i in range(1, n + 1)]
    rho = [None] + [float(p.r(i)) for i in range(1, n + 1)]
    k0 = float(p.k(0))
    A1, A0, At, B1, B0 = (np.zeros((dim, dim)) for _ in range(5))

    A1[0, 0] = th3
    A0[0, 0] = k0 + rho[1]
    At[0, 0] = th2
    for j in range(1, n + 1):
        A1[0, j] = 1.0
        A0[0, j] = -1.0
        A0[0, n + j] = -1.0
        At[0, n + j] = 1.0
    for i in range(1, n + 1):
        A1[i, 0] = th3 * kr[i]
        At[n + i, 0] = th2 * kr[i]
        A0[i, i] = rho[1] - rho[i]
        A0[n + i, n + i] = rho[1] - rho[i]
        for j in range(1, n + 1):
            A1[i, j] = kr[i]
            At[n + i, n + j] = kr[i]
        for j in range(i + 1, n + 1):
            A0[i, j] = -kr[i]
            A0[n + i, n + j] = -kr[i]
        B1[i, i] = th2
        B1[i, n + i] = -th3
        B1[n + i, i] = -th2
        B1[n + i, n + i] = th3
        B0[n + i, 0] = -th2 * kr[i]
        B0[n + i, i] = th2
        for j in range(1, i):
            B0[n + i, n + j] = -kr[i]
        B0[n + i, n + i] = th2 + k0 - float(p.k(i))
    return LogConnection('main', dim, {Divisor.T1_MINUS_1: A1, Divisor.T1: A0, Divisor.T1_MINUS_T2: At,
                                       Divisor.T2_MINUS_1: B1, Divisor.T2: B0}, p)


def build_connection_degenerate(p: PainleveParams) -> LogConnection:
    """Order (w0, w1..wn, w'2..w'n); index n+i holds w'_{i+1}."""
    if p.k(0) != p.k(1):
        raise ContractViolation(f"degenerate connection needs kappa_0 = kappa_1, got {p.k(0)} and {p.k(1)}")
    n = p.n
    dim = 2 * n
    th2, th3 = float(p.theta2), float(p.theta3)
    kr = [None] + [float(p.kr(i)) for i in range(1, n + 1)]
    rho = [None] + [float(p.r(i)) for i in range(1, n + 1)]
    k1 = float(p.k(1))
    A1, A0, At, B1, B0 = (np.zeros((dim, dim)) for _ in range(5))

    A1[0, 0] = th3
    for j in range(1, n + 1):
        A1[0, j] = 1.0
    for i in range(1, n + 1):
        A1[i, 0] = th3 * kr[i]
        for j in range(1, n + 1):
            A1[i, j] = kr[i]

    for j in range(2, n + 1):
        A0[0, j] = -1.0
    for j in range(1, n):
        A0[0, n + j] = -1.0
    for i in range(1, n + 1):
        A0[i, i] = rho[1] - rho[i]
        for j in range(i + 1, n + 1):
            A0[i, j] = -kr[i]
    for i in range(1, n):
        A0[n + i, n + i] = rho[1] - rho[i + 1]
        for j in range(i + 1, n):
            A0[n + i, n + j] = -kr[i + 1]

    s = th2 + kr[1]
    At[0, 0] = s
    At[0, 1] = -1.0
    for j in range(1, n):
        At[0, n + j] = 1.0
    for i in range(1, n):
        At[n + i, 0] = s * kr[i + 1]
        At[n + i, 1] = -kr[i + 1]
        for j in range(1, n):
            At[n + i, n + j] = kr[i + 1]

    B1[1, 0] = -th3 * kr[1]
    B1[1, 1] = th2 + th3
    for i in range(1, n):
        B1[i + 1, i + 1] = th2
        B1[i + 1, n + i] = -th3
        B1[n + i, i + 1] = -th2
        B1[n + i, n + i] = th3

    for i in range(1, n):
        B0[n + i, 0] = -s * kr[i + 1]
        B0[n + i, 1] = kr[i + 1]
        B0[n + i, i + 1] = th2
        for j in range(1, i):
            B0[n + i, n + j] = -kr[i + 1]
        B0[n + i, n + i] = th2 + k1 - float(p.k(i + 1))
    return LogConnection('degenerate', dim, {Divisor.T1_MINUS_1: A1, Divisor.T1: A0, Divisor.T1_MINUS_T2: At,
                                             Divisor.T2_MINUS_1: B1, Divisor.T2: B0}, p)


def degenerate_embedding(p: PainleveParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    T maps the 2n-vector to the main (2n+1)-vector with w'_1 = (kappa_1+rho_1)w0 - w1;
    P drops the w'_1 row.
    """
    n = p.n
    T = np.zeros((2 * n + 1, 2 * n))
    for k in range(n + 1):
        T[k, k] = 1.0
    T[n + 1, 0] = float(p.kr(1))
    T[n + 1, 1] = -1.0
    for i in range(2, n + 1):
        T[n + i, n + i - 1] = 1.0
    P = np.delete(np.eye(2 * n + 1), n + 1, axis=0)
    return T, P


def reduce_connection_degenerate(conn: LogConnection, tol: float = 1e-12) -> LogConnection:
    """Restrict the main connection to the subspace w'_1 = (kappa_1+rho_1)w0 - w1, kappa_0 = kappa_1."""
    p = conn.params
    if conn.kind != 'main' or not isinstance(p, PainleveParams):
        raise ContractViolation("reduction needs a main connection built from PainleveParams")
    if p.k(0) != p.k(1):
        raise ContractViolation(f"reduction needs kappa_0 = kappa_1, got {p.k(0)} and {p.k(1)}")
    T, P = degenerate_embedding(p)
    res = {}
    for d, A in conn.residues.items():
        AT = A @ T
        reduced = P @ AT
        # the subspace must be invariant: A T = T (P A T)
        leak = float(np.max(np.abs(AT - T @ reduced)))
        if leak > tol * max(1.0, float(np.max(np.abs(A)))):
            raise ConsistencyError(f"subspace not invariant under residue {d.name}", leak)
        res[d] = reduced
    return LogConnection('degenerate', 2 * p.n, res, p)


def _f4_E23() -> np.ndarray:
    E = np.eye(4)
    E[[1, 2]] = E[[2, 1]]
    return E


def build_connection_F4(alpha: Sequence) -> LogConnection:
    _check_alpha(alpha)
    a0, a1, a2, a3, a4, a5 = (float(x) for x in alpha)
    S = a0 + a5 + 1.0
    S2 = a0 + a2 + a5 + 1.0
    A1 = np.array([[-S, -1, 0, 0],
                   [a0 * S, a0, 0, 0],
                   [0, 0, -S2, -1],
                   [0, 0, (a0 + a2) * S2, a0 + a2]], dtype=float)
    A0 = np.array([[-a3, 1, 0, 0],
                   [0, 0, 0, 0],
                   [0, a2, -a3, 1],
                   [0, 0, 0, 0]], dtype=float)
    At = np.array([[0, 0, 0, 0],
                   [0, a2, -a2, 0],
                   [0, -a2, a2, 0],
                   [0, 0, 0, 0]], dtype=float)
    E = _f4_E23()
    return LogConnection('F4', 4, {Divisor.T1_MINUS_1: A1, Divisor.T1: A0, Divisor.T1_MINUS_T2: At,
                                   Divisor.T2_MINUS_1: E @ A1 @ E, Divisor.T2: E @ A0 @ E},
                         tuple(to_fraction(x) for x in alpha))


def _check_point(t1: float, t2: float):
    for label, value in (('t1', t1), ('t1-1', t1 - 1.0), ('t2', t2), ('t2-1', t2 - 1.0), ('t1-t2', t1 - t2)):
        if abs(value) < SINGULAR_EPS:
            raise SingularPointError((t1, t2), label)


def matrices_at(conn: LogConnection, t1: float, t2: float) -> Tuple[np.ndarray, np.ndarray]:
    _check_point(t1, t2)
    At = conn[Divisor.T1_MINUS_T2]
    M1 = conn[Divisor.T1_MINUS_1] / (t1 - 1.0) + conn[Divisor.T1] / t1 + At / (t1 - t2)
    M2 = conn[Divisor.T2_MINUS_1] / (t2 - 1.0) + conn[Divisor.T2] / t2 + At / (t2 - t1)
    return M1, M2


def flatness_residual(conn: LogConnection, t1: float, t2: float) -> float:
    """max |d2 M1 - d1 M2 + [M1, M2]|"""
    M1, M2 = matrices_at(conn, t1, t2)
    At = conn[Divisor.T1_MINUS_T2]
    d2M1 = At / (t1 - t2) ** 2
    d1M2 = At / (t2 - t1) ** 2
    R = d2M1 - d1M2 + M1 @ M2 - M2 @ M1
    return float(np.max(np.abs(R)))


# ---------------------------------------------------------------------------
# Riemann schemes
# ---------------------------------------------------------------------------

@dataclass
class RiemannScheme:
    columns: Dict[str, Tuple[complex, ...]]
    cluster_tol: float = 1e-8

    def eigenvalues(self, column: str) -> Tuple[complex, ...]:
        return self.columns[column]

    def multiplicities(self, column: str) -> List[Tuple[complex, int]]:
        groups: List[List[complex]] = []
        for ev in self.columns[column]:
            for g in groups:
                if abs(g[0] - ev) < self.cluster_tol:
                    g.append(ev)
                    break
            else:
                groups.append([ev])
        return [(complex(np.mean(g)), len(g)) for g in groups]

    def spectral_type(self, column: str) -> Tuple[int, ...]:
        return tuple(sorted((m for _, m in self.multiplicities(column)), reverse=True))

    def spectral_types(self) -> Dict[str, Tuple[int, ...]]:
        return {c: self.spectral_type(c) for c in self.columns}


def _sorted_eigs(values) -> Tuple[complex, ...]:
    vals = [complex(v) for v in values]
    return tuple(sorted(vals, key=lambda z: (round(z.real, 8), round(z.imag, 8))))


def residue_matrices(conn: LogConnection) -> Dict[str, np.ndarray]:
    A1, A0, At = conn[Divisor.T1_MINUS_1], conn[Divisor.T1], conn[Divisor.T1_MINUS_T2]
    B1, B0 = conn[Divisor.T2_MINUS_1], conn[Divisor.T2]
    return {'t1=1': A1, 't1=0': A0, 't1=inf': -(A1 + A0 + At), 't1=t2': At,
            't2=1': B1, 't2=0': B0, 't2=inf': -(B1 + B0 + At)}


def riemann_scheme(conn: LogConnection) -> RiemannScheme:
    return RiemannScheme({c: _sorted_eigs(np.linalg.eigvals(R)) for c, R in residue_matrices(conn).items()})


def _rep(value, k: int) -> List[float]:
    return [float(value)] * k


def expected_scheme_main(p: PainleveParams) -> Dict[str, List[float]]:
    n = p.n
    s = p.sum_kr
    th2p, th3p = p.theta2 + s, p.theta3 + s
    kp = [p.theta2 + p.k(0) - p.k(i) for i in range(1, n + 1)]
    rp = [-p.theta2 - p.theta3 - p.k(0) - p.r(i) for i in range(1, n + 1)]
    t1_0 = _rep(0, 2) + sum((_rep(p.r(1) - p.r(i), 2) for i in range(2, n + 1)), []) + [float(p.k(0) + p.r(1))]
    t1_inf = sum((_rep(-p.k(i) - p.r(1), 2) for i in range(1, n + 1)), []) + [float(rp[0])]
    return {'t1=1': _rep(0, 2 * n) + [float(th3p)],
            't1=0': t1_0,
            't1=inf': t1_inf,
            't1=t2': _rep(0, 2 * n) + [float(th2p)],
            't2=1': _rep(0, n + 1) + _rep(p.theta2 + p.theta3, n),
            't2=0': _rep(0, n + 1) + [float(v) for v in kp],
            't2=inf': _rep(-p.theta2, n + 1) + [float(v) for v in rp]}


def expected_scheme_degenerate(p: PainleveParams) -> Dict[str, List[float]]:
    n = p.n
    s = p.sum_kr
    th2p, th3p = p.theta2 + s, p.theta3 + s
    kp = [p.theta2 + p.k(1) - p.k(i) for i in range(2, n + 1)]
    rp = [-p.theta2 - p.theta3 - p.k(1) - p.r(i) for i in range(1, n + 1)]
    t1_0 = _rep(0, 2) + sum((_rep(p.r(1) - p.r(i), 2) for i in range(2, n + 1)), [])
    t1_inf = (sum((_rep(-p.k(i) - p.r(1), 2) for i in range(2, n + 1)), [])
              + [float(-p.k(1) - p.r(1)), float(rp[0])])
    return {'t1=1': _rep(0, 2 * n - 1) + [float(th3p)],
            't1=0': t1_0,
            't1=inf': t1_inf,
            't1=t2': _rep(0, 2 * n - 1) + [float(th2p)],
            't2=1': _rep(0, n) + _rep(p.theta2 + p.theta3, n),
            't2=0': _rep(0, n + 1) + [float(v) for v in kp],
            't2=inf': _rep(-p.theta2, n) + [float(v) for v in rp]}


def expected_scheme_F4(alpha: Sequence) -> Dict[str, List[float]]:
    a0, a1, a2, a3, a4, a5 = (to_fraction(x) for x in alpha)
    one = _rep(-a5 - 1, 2) + _rep(0, 2)
    zero = _rep(-a3, 2) + _rep(0, 2)
    inf = _rep(a0 + a3 + a5 + 1, 2) + _rep(-a0 - a2, 2)
    return {'t1=1': one, 't1=0': zero, 't1=inf': inf, 't1=t2': [float(2 * a2)] + _rep(0, 3),
            't2=1': one, 't2=0': zero, 't2=inf': inf}


@dataclass
class SchemeReport:
    columns: Dict[str, bool]
    deviations: Dict[str, float]
    spectral_types: Dict[str, Tuple[int, ...]]

    @property
    def ok(self) -> bool:
        return all(self.columns.values())

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values())


def _multiset_deviation(actual: Sequence[complex], expected: Sequence[float]) -> float:
    if len(actual) != len(expected):
        return float('inf')
    remaining = list(actual)
    worst = 0.0
    for e in sorted(expected):
        k = min(range(len(remaining)), key=lambda i: abs(remaining[i] - e))
        worst = max(worst, abs(remaining.pop(k) - e))
    return worst


def verify_scheme(conn: LogConnection, params=None, tol: float = 1e-10) -> SchemeReport:
    params = conn.params if params is None else params
    if conn.kind == 'main':
        expected = expected_scheme_main(params)
    elif conn.kind == 'degenerate':
        expected = expected_scheme_degenerate(params)
    elif conn.kind == 'F4':
        expected = expected_scheme_F4(params)
    else:
        raise ContractViolation(f"no closed-form scheme for connection kind {conn.kind!r}")
    scheme = riemann_scheme(conn)
    dev = {c: _multiset_deviation(scheme.columns[c], expected[c]) for c in COLUMNS}
    report = SchemeReport({c: dev[c] < tol for c in COLUMNS}, dev, scheme.spectral_types())
    log(f"scheme {conn.kind}: max deviation {report.max_deviation:.3e} ok={report.ok}")
    return report


def connection_to_json(conn: LogConnection) -> dict:
    return {'kind': conn.kind, 'dim': conn.dim,
            'residues': {d.value: conn[d].tolist() for d in Divisor}}


def scheme_to_json(scheme: RiemannScheme) -> dict:
    def enc(z: complex):
        return z.real if abs(z.imag) < 1e-12 else [z.real, z.imag]
    return {'columns': {c: [{'eigenvalue': enc(ev), 'multiplicity': m} for ev, m in scheme.multiplicities(c)]
                        for c in scheme.columns},
            'spectral_types': {c: list(t) for c, t in scheme.spectral_types().items()}}


# ---------------------------------------------------------------------------
# solution vectors
# ---------------------------------------------------------------------------

@dataclass
class SolutionVector:
    """Components N_k(t)/(t1-t2)^denominator_power with N_k truncated series."""
    components: Tuple[TruncatedSeries2D, ...]
    labels: Tuple[str, ...]
    denominator_power: int = 0

    @property
    def dim(self) -> int:
        return len(self.components)

    def values(self, t1: float, t2: float) -> np.ndarray:
        d = (t1 - t2) ** self.denominator_power
        return np.array([c.jet_t(t1, t2) for c in self.components]) / d

    def derivatives(self, t1: float, t2: float) -> Tuple[np.ndarray, np.ndarray]:
        k = self.denominator_power
        N = np.array([c.jet_t(t1, t2) for c in self.components])
        N1 = np.array([c.jet_t(t1, t2, 1, 0) for c in self.components])
        N2 = np.array([c.jet_t(t1, t2, 0, 1) for c in self.components])
        D = t1 - t2
        if k == 0:
            return N1, N2
        return N1 / D ** k - k * N / D ** (k + 1), N2 / D ** k + k * N / D ** (k + 1)


def _check_chart(z: TruncatedSeries2D):
    if z.chart is not Chart.X_T1_Y_ONE_MINUS_T2:
        raise ContractViolation(f"solution vectors need chart X_T1_Y_ONE_MINUS_T2, got {z.chart.name}")


def _d1_lin(c) -> sp.Poly:
    return lin((1, 0), c)


def _products(values) -> sp.Poly:
    return pprod([_d1_lin(v) for v in values])


def construct_w_main(z: TruncatedSeries2D, hp: HGParamsF2n) -> SolutionVector:
    _check_chart(z)
    if hp.a != hp.c[0] + hp.cprime - 2:
        raise ContractViolation(f"main solution vector needs a = c1 + c' - 2, got a = {hp.a}")
    n, b, c, bp, cp = hp.n, hp.b, hp.c, hp.bprime, hp.cprime
    g = bp - cp + 1
    comps, labels = [], []

    comps.append(z.apply_euler(_products(b) * lin((0, 1), cp - 1)).scale(-1))
    labels.append('w0')
    w1_op = _products(b[1:]) * _d1_lin(c[0] - 1)
    comps.append(z.apply_euler(w1_op).scale(-b[0] * g))
    labels.append('w1')
    for i in range(2, n + 1):
        op = _products(b[i:]) * _products([cj - 1 for cj in c[:i - 1]]) * D1
        comps.append(z.apply_euler(op).scale(-(b[i - 1] - c[i - 1] + 1) * g))
        labels.append(f'w{i}')
    comps.append(z.apply_euler(w1_op * lin((0, 1), bp)).scale(b[0]))
    labels.append("w'1")
    for i in range(2, n + 1):
        op = _products(b[i:]) * _products([cj - 1 for cj in c[:i - 1]]) * D1 * lin((0, 1), bp)
        comps.append(z.apply_euler(op).scale(b[i - 1] - c[i - 1] + 1))
        labels.append(f"w'{i}")
    return SolutionVector(tuple(comps), tuple(labels))


def degenerate_z(z: TruncatedSeries2D, hp: HGParamsF2n) -> TruncatedSeries2D:
    """(d1 + c1 - 1) z"""
    return z.apply_euler(_d1_lin(hp.c[0] - 1))


def construct_w_degenerate(zt: TruncatedSeries2D, hp: HGParamsF2n) -> SolutionVector:
    """Components (w0, w1..wn, w'2..w'n) from z~ solving the degenerate system."""
    _check_chart(zt)
    n, b, c, bp, cp = hp.n, hp.b, hp.c, hp.bprime, hp.cprime
    g = bp - cp + 1
    comps = [zt.apply_euler(_products(b[1:]) * lin((0, 1), cp - 1)).scale(-1),
             zt.apply_euler(_products(b[1:])).scale(-(c[0] - 1) * g)]
    labels = ['w0', 'w1']
    inner = {}
    for i in range(2, n + 1):
        inner[i] = _products(b[i:]) * _products([cj - 1 for cj in c[1:i - 1]]) * D1
        comps.append(zt.apply_euler(inner[i]).scale(-(b[i - 1] - c[i - 1] + 1) * g))
        labels.append(f'w{i}')
    for i in range(2, n + 1):
        comps.append(zt.apply_euler(inner[i] * lin((0, 1), bp)).scale(b[i - 1] - c[i - 1] + 1))
        labels.append(f"w'{i}")
    return SolutionVector(tuple(comps), tuple(labels))


def degeneration_substitution(w: SolutionVector, p: PainleveParams) -> SolutionVector:
    """Check w'_1 = (kappa_1+rho_1)w0 - w1 exactly and drop w'_1."""
    if p.k(0) != p.k(1):
        raise ContractViolation(f"substitution needs kappa_0 = kappa_1, got {p.k(0)} and {p.k(1)}")
    n = p.n
    if w.dim != 2 * n + 1 or w.denominator_power != 0:
        raise ContractViolation(f"expected a main solution vector of dimension {2 * n + 1}")
    w0, w1, wp1 = w.components[0], w.components[1], w.components[n + 1]
    rel = w0.scale(p.kr(1)).sub(w1).sub(wp1)
    worst = rel.max_abs()
    if worst != 0:
        raise ConsistencyError("w'_1 != (kappa_1+rho_1) w0 - w1", worst)
    keep = [k for k in range(2 * n + 1) if k != n + 1]
    return SolutionVector(tuple(w.components[k] for k in keep), tuple(w.labels[k] for k in keep))


# F4 -----------------------------------------------------------------------

def _delta2_t(s: TruncatedSeries2D) -> TruncatedSeries2D:
    # t2 d/dt2 in the chart y = 1 - t2
    return s.euler_delta2().sub(s.partial_y())


def _f4_op(z: TruncatedSeries2D, u, v) -> TruncatedSeries2D:
    """(d1 + u)(d2 + v) z with d_i = t_i d/dt_i"""
    inner = _delta2_t(z).add(z.scale(v))
    return inner.euler_delta1().add(inner.scale(u))


def _times_t2(s: TruncatedSeries2D) -> TruncatedSeries2D:
    return s.sub(s.mul_y())


def _times_t1_minus_t2(s: TruncatedSeries2D) -> TruncatedSeries2D:
    # t1 - t2 = x + y - 1
    return s.mul_x().add(s.mul_y()).sub(s)


def construct_w_F4(z: TruncatedSeries2D, alpha: Sequence) -> SolutionVector:
    """
    w_k = c_k [(d1+u)(d2+v) z + a2 {t2 (d1+s) z - t1 (d2+s) z} / (t1-t2)], stored as
    numerators over (t1-t2).
    """
    _check_chart(z)
    _check_alpha(alpha)
    a0, _, a2, a3, _, _ = (to_fraction(x) for x in alpha)
    d1z, d2z = z.euler_delta1(), _delta2_t(z)

    def cross(s):
        return _times_t2(d1z.add(z.scale(s))).sub(d2z.add(z.scale(s)).mul_x())

    specs = [(-1, -a0, -a0, -a0),
             (a0, a3, -a0, a3),
             (a0, -a0, a3, a3),
             (-a0 * (a0 + a2), a3, a3, a3)]
    comps = []
    for coef, u, v, s in specs:
        num = _times_t1_minus_t2(_f4_op(z, u, v)).add(cross(s).scale(a2))
        comps.append(num.scale(coef))
    return SolutionVector(tuple(comps), ('w0', 'w1', 'w2', 'w3'), denominator_power=1)


# verification ---------------------------------------------------------------

def pfaff_residual_at(conn: LogConnection, w: SolutionVector, t1: float, t2: float) -> float:
    if w.dim != conn.dim:
        raise ContractViolation(f"vector dimension {w.dim} != connection dimension {conn.dim}")
    M1, M2 = matrices_at(conn, t1, t2)
    vals = w.values(t1, t2)
    d1, d2 = w.derivatives(t1, t2)
    return float(max(np.max(np.abs(d1 - M1 @ vals)), np.max(np.abs(d2 - M2 @ vals))))


def verify_pfaff_solution(conn: LogConnection, w: SolutionVector, points: Sequence[Tuple[float, float]]) -> float:
    if not points:
        raise ContractViolation("empty sample grid")
    worst = 0.0
    for t1, t2 in points:
        r = pfaff_residual_at(conn, w, t1, t2)
        debug(f"pfaff {conn.kind} at ({t1:.4g}, {t2:.4g}): {r:.3e}")
        worst = max(worst, r)
    log(f"pfaff solution {conn.kind}: residual={worst:.3e}")
    return worst


def verify_component_odes(w: SolutionVector, hp: HGParamsF2n,
                          points: Sequence[Tuple[float, float]]) -> Dict[str, float]:
    """
    The first-order equations satisfied by the main vector, with
    d1 = t1 d/dt1, d2 = (t2-1) d/dt2 and the shifted parameters
    c0~ = c1-1, c1~ = 0, cj~ = cj-1, b1~ = b1, bj~ = bj-cj+1.
    """
    n = hp.n
    if w.dim != 2 * n + 1:
        raise ContractViolation(f"expected a main solution vector of dimension {2 * n + 1}")
    if not points:
        raise ContractViolation("empty sample grid")
    b = [float(v) for v in hp.b]
    c = [float(v) for v in hp.c]
    bp, cp = float(hp.bprime), float(hp.cprime)
    g = bp - cp + 1
    bt = [None, b[0]] + [b[j - 1] - c[j - 1] + 1 for j in range(2, n + 1)]
    ct = [c[0] - 1, 0.0] + [c[j - 1] - 1 for j in range(2, n + 1)]
    worst = {'w0_d1': 0.0, 'wi_d1': 0.0, "w'i_d1": 0.0, 'w0_d2': 0.0, 'wi_d2': 0.0, "w'i_d2": 0.0}

    for t1, t2 in points:
        _check_point(t1, t2)
        v = w.values(t1, t2)
        p1, p2 = w.derivatives(t1, t2)
        D1v, D2v = t1 * p1, (t2 - 1.0) * p2
        w0, ws, wps = v[0], v[1:n + 1], v[n + 1:]
        S, Sp = float(np.sum(ws)), float(np.sum(wps))
        r1 = t1 / (t1 - 1.0)
        rt = t1 / (t1 - t2)
        q = (t2 - 1.0) / (t2 - t1)
        q0 = (t2 - 1.0) / t2
        X = g * w0 + S
        Y = -bp * w0 + Sp

        res = D1v[0] - (rt * Y + r1 * X - ct[0] * w0 - S - Sp)
        worst['w0_d1'] = max(worst['w0_d1'], abs(res))
        res = D2v[0] + q * (bp * w0 - Sp)
        worst['w0_d2'] = max(worst['w0_d2'], abs(res))
        for i in range(1, n + 1):
            tail = float(np.sum(ws[i:]))
            tailp = float(np.sum(wps[i:]))
            head = float(np.sum(wps[:i - 1]))
            wi, wpi = ws[i - 1], wps[i - 1]
            res = D1v[i] - (-r1 * bt[i] * X - ct[i] * wi + bt[i] * tail)
            worst['wi_d1'] = max(worst['wi_d1'], abs(res))
            res = D1v[n + i] - (-rt * bt[i] * Y - ct[i] * wpi + bt[i] * tailp)
            worst["w'i_d1"] = max(worst["w'i_d1"], abs(res))
            res = D2v[i] - (-bp * wi - g * wpi)
            worst['wi_d2'] = max(worst['wi_d2'], abs(res))
            rhs = (q * bt[i] * (bp * w0 - Sp)
                   + q0 * (-bt[i] * bp * w0 - bp * wi + bt[i] * head + (b[i - 1] - c[0] - bp + 1) * wpi)
                   + bp * wi + g * wpi)
            worst["w'i_d2"] = max(worst["w'i_d2"], abs(D2v[n + i] - rhs))
    log(f"component equations: max residual {max(worst.values()):.3e}")
    return worst


# transport -------------------------------------------------------------------

def _segment_clearance(a: Tuple[float, float], b: Tuple[float, float], margin: float):
    """Every divisor is linear in (t1, t2): check the minimum of |f| along the segment."""
    funcs = {'t1': lambda t: t[0], 't1-1': lambda t: t[0] - 1.0, 't2': lambda t: t[1],
             't2-1': lambda t: t[1] - 1.0, 't1-t2': lambda t: t[0] - t[1]}
    for label, f in funcs.items():
        fa, fb = f(a), f(b)
        closest = 0.0 if fa * fb <= 0 else min(abs(fa), abs(fb))
        if closest < margin:
            raise SingularPointError(a if abs(fa) <= abs(fb) else b, label)


def continue_solution(conn: LogConnection, w0: Sequence[float], path: Sequence[Tuple[float, float]],
                      rtol: float = 1e-11, atol: float = 1e-13, margin: float = 1e-3) -> np.ndarray:
    """Parallel transport of w0 along a polyline with adaptive Runge-Kutta (RK45)."""
    if len(path) < 1:
        raise ContractViolation("path needs at least one point")
    w = np.asarray(w0, dtype=float)
    if w.shape != (conn.dim,):
        raise ContractViolation(f"initial vector has shape {w.shape}, expected ({conn.dim},)")
    for a, b in zip(path[:-1], path[1:]):
        _segment_clearance(a, b, margin)
    if len(path) == 1:
        _segment_clearance(path[0], path[0], margin)
    for a, b in zip(path[:-1], path[1:]):
        dt1, dt2 = b[0] - a[0], b[1] - a[1]
        if dt1 == 0 and dt2 == 0:
            continue

        def rhs(s, y, a=a, dt1=dt1, dt2=dt2):
            M1, M2 = matrices_at(conn, a[0] + s * dt1, a[1] + s * dt2)
            return (dt1 * M1 + dt2 * M2) @ y

        sol = solve_ivp(rhs, (0.0, 1.0), w, method='RK45', rtol=rtol, atol=atol)
        if sol.status != 0:
            raise ConsistencyError(f"integration failed on segment {a} -> {b}: {sol.message}")
        w = sol.y[:, -1]
    return w
