"""
Model files: a versioned JSON document holding everything prediction needs.

Floats are written with Python's shortest round-trip representation, so a
reloaded model reproduces the saved decision values bit for bit.
"""

import json
import logging

import numpy as np

from mvtpmsvm.exceptions import DataParseError
from mvtpmsvm.model.classifier import MvTpmModel, TrainingDiagnostics
from mvtpmsvm.model.dual import Hyperparams, ViewSplit
from mvtpmsvm.preprocess.pipeline import ViewPreprocessor

log = logging.getLogger(__name__)

MODEL_SCHEMA = "mvtpmsvm-model/1"
WEIGHT_NAMES = ("v1", "v2", "u1", "u2")


def _vector(value):
    return None if value is None else np.asarray(value, dtype=float)


def model_to_dict(model: MvTpmModel) -> dict:
    """Serialize a model into a JSON-compatible tree."""
    payload = {
        "schema": MODEL_SCHEMA,
        "hyperparams": model.hyperparams.to_dict(),
        "split": model.split.to_dict(),
        "duals": {name: getattr(model, name).tolist() for name in ("s1", "s2", "t1", "t2")},
        "weights": {
            name: None if getattr(model, name) is None else getattr(model, name).tolist() for name in WEIGHT_NAMES
        },
        "preprocessor": None if model.preprocessor is None else model.preprocessor.to_dict(),
        "label_map": {str(key): value for key, value in model.label_map.items()},
        "diagnostics": None if model.diagnostics is None else model.diagnostics.to_dict(),
    }
    return payload


def model_from_dict(payload: dict) -> MvTpmModel:
    """
    Rebuild a model from :func:`model_to_dict` output.

    Raises:
        DataParseError: If the schema tag is wrong or an entry is missing.
    """
    if not isinstance(payload, dict) or payload.get("schema") != MODEL_SCHEMA:
        raise DataParseError(f"Not a model document with schema {MODEL_SCHEMA!r}")
    try:
        duals = payload["duals"]
        weights = payload.get("weights") or {}
        preprocessor = payload.get("preprocessor")
        diagnostics = payload.get("diagnostics")
        return MvTpmModel(
            hyperparams=Hyperparams.from_dict(payload["hyperparams"]),
            split=ViewSplit.from_dict(payload["split"]),
            s1=_vector(duals["s1"]),
            s2=_vector(duals["s2"]),
            t1=_vector(duals["t1"]),
            t2=_vector(duals["t2"]),
            preprocessor=None if preprocessor is None else ViewPreprocessor.from_dict(preprocessor),
            label_map={int(key): value for key, value in payload["label_map"].items()},
            diagnostics=None if diagnostics is None else TrainingDiagnostics.from_dict(diagnostics),
            **{name: _vector(weights.get(name)) for name in WEIGHT_NAMES},
        )
    except (KeyError, TypeError) as ex:
        raise DataParseError(f"Model document is incomplete: {ex}") from ex


def save_model(model: MvTpmModel, path: str):
    """Write a model file."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_dict(model), handle, indent=1)
        handle.write("\n")
    log.info("Saved model to %s", path)


def load_model(path: str) -> MvTpmModel:
    """
    Read a model file.

    Raises:
        DataParseError: If the file is not a valid model document.
    """
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as ex:
            raise DataParseError(f"{path} is not valid JSON: {ex}") from ex
    return model_from_dict(payload)
