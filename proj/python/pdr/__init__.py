"""Physically disentangled representations by inverse rendering.

Thin Python layer over the native core: arrays are numpy, command results
are dicts parsed from the same JSON the ``pdr`` CLI prints.
"""

import json as _json
import os as _os

from . import _pdr
from ._pdr import (
    Model,
    UsageError,
    cluster_accuracy,
    generate_scene,
    hac_ward,
    load_tensor,
    nmi,
    num_threads,
    pcc_disentanglement,
    render,
    save_tensor,
    set_num_threads,
    weighted_f1,
)

__all__ = [
    "Model",
    "UsageError",
    "cluster_accuracy",
    "default_config",
    "evaluate",
    "generate",
    "generate_scene",
    "hac_ward",
    "load_tensor",
    "nmi",
    "num_threads",
    "pcc_disentanglement",
    "render",
    "save_tensor",
    "set_num_threads",
    "train",
    "weighted_f1",
]


def default_config():
    """The full default experiment configuration as a dict."""
    return _json.loads(_pdr.default_config_json())


def _config_text(config):
    return "" if config is None else _json.dumps(config)


def generate(out, config=None):
    """Builds a dataset into ``out``; returns the generate summary."""
    summary, _ = _pdr.cmd_generate(_config_text(config), _os.fspath(out))
    return _json.loads(summary)


def train(dataset, out, config=None, mode=None, max_epochs=None, resume=False):
    """Trains into ``out`` (config.json, metrics.jsonl, best/, last/); returns the train summary."""
    summary, _ = _pdr.cmd_train(_config_text(config), _os.fspath(dataset), _os.fspath(out), mode, max_epochs, resume)
    return _json.loads(summary)


def evaluate(checkpoint, dataset, task, **options):
    """Runs one evaluation task (cluster, probe, disentangle, attribute); returns the report."""
    report, _ = _pdr.cmd_eval(_os.fspath(checkpoint), _os.fspath(dataset), task, **options)
    return _json.loads(report)
