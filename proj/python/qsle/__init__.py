"""Python bindings for the qsle library."""

import json as _json
from pathlib import Path as _Path

from ._core import (
    ArgumentError,
    ConfigError,
    DomainError,
    IllConditionedError,
    QGaussian,
    SleModel,
    __version__,
    bimodal_threshold,
    cls_fit,
    hermite,
    norm_squared,
    q_bracket,
    q_factorial,
    quadrature,
    truncation_bound,
)
from . import _core


def default_config():
    return _json.loads(_core.default_config())


def normalize_config(config=None):
    """Fill defaults and validate; raises ConfigError on bad keys or values."""
    return _json.loads(_core.normalize_config(_dump(config)))


def config_hash(config=None):
    return _core.config_hash(_dump(config))


def run_experiment(config, out):
    """Run one experiment; returns (directory, [file names])."""
    directory, files = _core.run_experiment(_dump(config), str(out))
    return _Path(directory), list(files)


def _dump(config):
    return "" if config is None else _json.dumps(config)
