import json
from fractions import Fraction

import numpy as np
import pytest

from src import logs
from src.errors import ConsistencyError, ContractViolation, HPLabError, RegionError, SingularPointError
from src.settings import DEFAULT_TOLERANCES, Settings, default_grid, generic_draws, load_settings, resolve_seed


def test_defaults():
    s = load_settings()
    assert s == Settings()
    assert s.tol('flatness') == 1e-11
    assert s.tol('corollary') == 1e-10


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'N': 30, 'grid_t1': [0.02, 0.1], 'tolerances': {'flatness': 1e-10}}))
    s = load_settings(str(path), {'N': 32, 'seed': None})
    assert s.N == 32
    assert s.grid_t1 == (0.02, 0.1)
    assert s.tol('flatness') == 1e-10
    assert s.tol('scheme') == DEFAULT_TOLERANCES['scheme']


def test_config_errors(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'nodes': 12}))
    with pytest.raises(ContractViolation):
        load_settings(str(path))
    with pytest.raises(ContractViolation):
        load_settings(None, {'tolerances': {'made_up': 1.0}})
    with pytest.raises(ContractViolation):
        load_settings(str(tmp_path / 'missing.json'))
    path.write_text('{not json')
    with pytest.raises(ContractViolation):
        load_settings(str(path))


def test_global_tolerance_keeps_negative_floors():
    s = Settings().with_tolerance(1e-3)
    assert s.tol('flatness') == 1e-3
    assert s.tol('negative_pfaff') == DEFAULT_TOLERANCES['negative_pfaff']


def test_seed_precedence(monkeypatch):
    monkeypatch.delenv('HPLAB_SEED', raising=False)
    assert resolve_seed(None, Settings()) == 0
    monkeypatch.setenv('HPLAB_SEED', '11')
    assert resolve_seed(None, Settings()) == 11
    assert resolve_seed(None, Settings(seed=5)) == 5
    assert resolve_seed(3, Settings(seed=5)) == 3
    monkeypatch.setenv('HPLAB_SEED', 'eleven')
    with pytest.raises(ContractViolation):
        resolve_seed(None, Settings())


def test_default_grid():
    grid = default_grid(Settings())
    assert len(grid) == 25
    assert grid[0] == pytest.approx((0.05, 0.95))
    assert grid[-1] == pytest.approx((0.15, 0.85))


def test_generic_draws_avoid_resonance():
    draws = generic_draws(np.random.default_rng(0), 10, 6)
    assert len(draws) == 10
    for vals in draws:
        assert all(isinstance(v, Fraction) and Fraction(1, 10) <= v <= Fraction(9, 10) for v in vals)
        for i in range(6):
            for j in range(i + 1, 6):
                assert vals[i] != vals[j]
                assert vals[i] + vals[j] != 1
    again = generic_draws(np.random.default_rng(0), 10, 6)
    assert again == draws


def test_log_file(tmp_path):
    path = tmp_path / 'logs' / 'run.log'
    logs.configure_logging(str(path), verbose=True)
    try:
        logs.log('hello')
        logs.debug('details')
    finally:
        logs.configure_logging('')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0].endswith(' hello')
    assert lines[1].endswith(' details')
    assert 'T' in lines[0].split(' ')[0]


def test_error_attributes():
    e = RegionError((0.6, 0.5), 0.98)
    assert isinstance(e, HPLabError)
    assert e.point == (0.6, 0.5)
    assert e.bound == 0.98
    assert SingularPointError((0.4, 0.4), 't1-t2').divisor == 't1-t2'
    assert ConsistencyError('leak', 1e-3).residual == 1e-3
    assert ConsistencyError('leak').residual is None
