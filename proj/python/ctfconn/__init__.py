"""Complex tensor factorisation and phase-synchronisation connectivity."""

import json

from . import _core
from ._core import (
    Error,
    FormatError,
    GenerationFailure,
    InvalidInput,
    IoError,
    NumericalFailure,
    conn_score,
    explained_variance,
    fit,
    load_recording,
    phase_lag_index,
    reconstruct,
    save_tensor,
    scalp_map,
    sensor_pli,
)

__all__ = [
    "Error",
    "FormatError",
    "GenerationFailure",
    "InvalidInput",
    "IoError",
    "NumericalFailure",
    "conn_score",
    "default_config",
    "explained_variance",
    "fit",
    "generate",
    "load_recording",
    "load_tensor",
    "multi_init_fit",
    "phase_lag_index",
    "reconstruct",
    "save_tensor",
    "scalp_map",
    "sensor_pli",
    "tensorize",
]


def _dump(config):
    return "" if config is None else json.dumps(config)


def default_config():
    """Full default run configuration as a dict."""
    return json.loads(_core.default_config())


def generate(config=None):
    """Simulate one recording. Returns (data m x T, fs, truth dict)."""
    data, fs, truth = _core.generate(_dump(config))
    truth["scene"] = json.loads(truth["scene"])
    return data, fs, truth


def tensorize(recording, fs, config=None):
    """Recording -> (channels x frequencies x trials tensor, frequencies in Hz)."""
    return _core.tensorize(recording, fs, _dump(config))


def multi_init_fit(tensor, band, config=None):
    """Multi-start fit with coupling-based run selection; band is an inclusive (first, last) bin range."""
    return _core.multi_init_fit(tensor, _dump(config), tuple(band))


def load_tensor(path):
    tensor, meta = _core.load_tensor(str(path))
    return tensor, json.loads(meta)
