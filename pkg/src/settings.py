"""
Numeric defaults for every check, loadable from a JSON config file.

Precedence: built-in defaults < config file < command line.
The seed additionally falls back to the HPLAB_SEED environment variable.
"""
import json
import os
from dataclasses import dataclass, field, fields, replace, asdict
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.errors import ContractViolation

SEED_ENV = 'HPLAB_SEED'

DEFAULT_TOLERANCES = {
    'lpde_pointwise': 1e-9,
    'lpde_prefactored': 1e-7,
    'flatness': 1e-11,
    'scheme': 1e-10,
    'pfaff_solution': 1e-9,
    'component_ode': 1e-9,
    'integral': 1e-7,
    'beta_reduction': 1e-8,
    'corollary': 1e-10,
    'transform': 1e-6,
    'drift': 1e-6,
    'reduction': 1e-6,
    'symmetry': 1e-5,
    'involution': 1e-9,
    'symplectic': 1e-9,
    'transport': 1e-8,
    'negative_lpde': 1e-4,
    'negative_pfaff': 1e-4,
    'negative_hamiltonian': 1e-3,
}


@dataclass(frozen=True)
class Settings:
    margin: float = 0.02
    tail_tol: float = 1e-10
    N: int = 24
    N_pfaff: int = 40
    quad_nodes: int = 64
    grid_n: int = 5
    grid_t1: Tuple[float, float] = (0.05, 0.15)
    grid_y: Tuple[float, float] = (0.05, 0.15)
    fd_step: float = 1e-5
    draws: int = 20
    resonance_gap: float = 1e-3
    threads: int = 4
    seed: Optional[int] = None
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def with_tolerance(self, value: float) -> 'Settings':
        """Override every positive-check tolerance, leaving negative-control floors alone."""
        tols = {k: (v if k.startswith('negative_') else value) for k, v in self.tolerances.items()}
        return replace(self, tolerances=tols)

    def to_dict(self):
        return asdict(self)


def load_settings(path: Optional[str] = None, overrides: Optional[dict] = None) -> Settings:
    values = {}
    if path:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                values.update(json.load(f))
        except (OSError, json.JSONDecodeError) as e:
            raise ContractViolation(f"cannot read config {path}: {e}")
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in fields(Settings)}
    unknown = set(values) - known
    if unknown:
        raise ContractViolation(f"unknown config keys: {sorted(unknown)}")

    if 'tolerances' in values:
        tols = dict(DEFAULT_TOLERANCES)
        bad = set(values['tolerances']) - set(tols)
        if bad:
            raise ContractViolation(f"unknown tolerance names: {sorted(bad)}")
        tols.update(values['tolerances'])
        values['tolerances'] = tols
    for key in ('grid_t1', 'grid_y'):
        if key in values:
            values[key] = tuple(values[key])
    return Settings(**values)


def resolve_seed(cli_seed: Optional[int], settings: Settings) -> int:
    if cli_seed is not None:
        return int(cli_seed)
    if settings.seed is not None:
        return int(settings.seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ContractViolation(f"{SEED_ENV} must be an integer, got {env!r}")
    return 0


def default_grid(settings: Settings) -> List[Tuple[float, float]]:
    """grid_n x grid_n points (t1, t2) with t1 and 1-t2 spread over the configured ranges."""
    t1s = np.linspace(settings.grid_t1[0], settings.grid_t1[1], settings.grid_n)
    ys = np.linspace(settings.grid_y[0], settings.grid_y[1], settings.grid_n)
    return [(float(t1), float(1.0 - y)) for t1 in t1s for y in ys]


def _near_integer(x: Fraction, gap: float) -> bool:
    return abs(float(x) - round(float(x))) <= gap


def generic_draws(rng: np.random.Generator, count: int, size: int,
                  gap: float = 1e-3, low: int = 100, high: int = 900) -> List[List[Fraction]]:
    """
    Draw `count` parameter vectors of length `size` from [0.1, 0.9], as exact
    rationals k/1000. Draws where a pairwise sum or difference falls within
    `gap` of an integer are rejected.
    """
    out = []
    while len(out) < count:
        vals = [Fraction(int(k), 1000) for k in rng.integers(low, high + 1, size=size)]
        ok = True
        for i in range(size):
            for j in range(i + 1, size):
                if _near_integer(vals[i] - vals[j], gap) or _near_integer(vals[i] + vals[j], gap):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(vals)
    return out
