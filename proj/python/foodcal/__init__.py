"""Food volume and calorie estimation from a top and a side photo.

Photos need a One Yuan coin for scale; boxes come from a detector sidecar
or from dataset annotations.
"""

import json
import os

from ._foodcal import (
    FoodcalError,
    calories_from_volume,
    detect_coin,
    foods,
    grabcut,
    load_image,
    mean_error,
    save_png,
    write_synthetic_dataset,
)
from . import _foodcal

__all__ = [
    "FoodcalError",
    "calories_from_volume",
    "detect_coin",
    "estimate",
    "evaluate",
    "foods",
    "grabcut",
    "load_image",
    "mean_error",
    "save_png",
    "write_synthetic_dataset",
]

SIDECAR_SUFFIX = ".detections.json"


def estimate(top, side, top_sidecar=None, side_sidecar=None, score_threshold=0.5):
    """Estimate report for one photo pair, as a dict.

    Sidecars default to the image path plus ".detections.json".
    """
    top, side = os.fspath(top), os.fspath(side)
    top_sidecar = os.fspath(top_sidecar) if top_sidecar else top + SIDECAR_SUFFIX
    side_sidecar = os.fspath(side_sidecar) if side_sidecar else side + SIDECAR_SUFFIX
    return json.loads(_foodcal.estimate_json(top, side, top_sidecar, side_sidecar, score_threshold))


def evaluate(manifest, jobs=1, detector="annotations", timings=True):
    """Evaluation report for every pair of a manifest, as a dict."""
    return json.loads(_foodcal.evaluate_json(os.fspath(manifest), jobs, detector, timings))
