"""Lattice point counting, remainder statistics and oscillatory integrals."""

import json

import numpy as np

from . import _latticelab as _core
from ._latticelab import (
    ConfigError,
    CountOverflow,
    DomainError,
    InputError,
    LatticeError,
    ResolutionError,
    __version__,
    bessel_j1,
    count_points,
    error_term,
    hat_chi_ball,
    pair_count_cn,
    run_cli,
    unit_ball_volume,
)

__all__ = [
    "ConfigError",
    "CountOverflow",
    "DomainError",
    "InputError",
    "LatticeError",
    "ResolutionError",
    "__version__",
    "bessel_j1",
    "cn",
    "count_points",
    "error_term",
    "hat_chi_ball",
    "oscillatory_integral",
    "pair_count_cn",
    "run_cli",
    "sample_compact",
    "sample_haar",
    "sandwich",
    "theorem1",
    "theorem2",
    "unit_ball_volume",
]


def _basis(x):
    return np.asarray(x, dtype=float)


def cn(n, tol=1e-10):
    return json.loads(_core.cn_json(n, tol))


def sandwich(basis, t, epsilon):
    return json.loads(_core.sandwich_json(_basis(basis), t, epsilon))


def sample_haar(n=3, seed=0, stream=0, **config):
    """A Haar-random unimodular basis; columns are the basis vectors."""
    return _core.sample_haar(json.dumps({"n": n, **config}), seed, stream)


def sample_compact(n=3, seed=0, stream=0, **config):
    return _core.sample_compact(json.dumps({"n": n, **config}), seed, stream)


def oscillatory_integral(spec, t):
    """Returns (value, error) for a spec dict in the CLI's JSON layout."""
    return _core.oscillatory_integral(json.dumps(spec), t)


def theorem1(config, seed=0):
    return json.loads(_core.theorem1_json(json.dumps(config), seed))


def theorem2(config, seed=0):
    return json.loads(_core.theorem2_json(json.dumps(config), seed))
