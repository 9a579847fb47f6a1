"""Adaptive MIMO VLC link simulator."""

import json as _json

from . import _core
from ._core import (
    Error,
    ber_bound,
    compute_evm,
    constellation_points,
    decode_mode,
    demap_symbols,
    encode_mode,
    map_bits,
    max_spectral_efficiency,
    mode_thresholds,
    predict_ber,
)


def _text(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else _json.dumps(config)


def run_link(config=None, point=20.0, seed=1):
    """Run one axis point; returns the report as a dict."""
    return _json.loads(_core.run_link(_text(config), float(point), int(seed)))


def sweep_csv(config=None):
    return _core.sweep_csv(_text(config))


def resolve_config(config=None):
    return _json.loads(_core.resolve_config(_text(config)))


__all__ = [
    "Error",
    "ber_bound",
    "compute_evm",
    "constellation_points",
    "decode_mode",
    "demap_symbols",
    "encode_mode",
    "map_bits",
    "max_spectral_efficiency",
    "mode_thresholds",
    "predict_ber",
    "resolve_config",
    "run_link",
    "sweep_csv",
]
