"""Binaural direction-of-arrival estimation.

Arrays are 1-D float64 numpy arrays. Structured values (parameters, annotations, scenes,
estimates, metrics) are plain dicts.
"""

import json

import numpy as np

from . import _doalab
from ._doalab import (
    DoaLabError,
    InvalidArgument,
    Unidentifiable,
    angle_from_itd,
    calibrate,
    gcc,
    itd_woodworth,
)

__all__ = [
    "DoaLabError",
    "InvalidArgument",
    "Unidentifiable",
    "angle_from_itd",
    "calibrate",
    "default_params",
    "default_suite",
    "gcc",
    "itd_woodworth",
    "render_scene",
    "run_pipeline",
    "score",
]


def default_params():
    return json.loads(_doalab.default_params())


def default_suite(seed=0):
    """Scene dicts of the eight training and three test recordings."""
    return json.loads(_doalab.default_suite(seed))


def render_scene(scene):
    """Returns (left, right, sample_rate, annotation)."""
    left, right, fs, ann = _doalab.render_scene(json.dumps(scene))
    return left, right, fs, json.loads(ann)


def run_pipeline(left, right, sample_rate, params=None, **model):
    params = default_params() if params is None else params
    out = _doalab.run_pipeline(np.asarray(left), np.asarray(right), sample_rate, json.dumps(params), **model)
    return json.loads(out)


def score(left, right, sample_rate, annotation, params=None):
    """Runs the pipeline and scores it against `annotation`; returns the metrics dict."""
    params = default_params() if params is None else params
    out = _doalab.score(np.asarray(left), np.asarray(right), sample_rate, json.dumps(params),
                        json.dumps(annotation))
    return json.loads(out)
