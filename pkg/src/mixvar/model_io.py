"""JSON serialization of model parameters.

The document layout is

    {
      "d": int, "p": int, "M": int,
      "regimes": [{"phi0": [...], "A": [[[...]]], "omega": [[...]]}, ...],
      "alpha": [...],
      "structural": {"W": [[...]], "lambdas": [[...]], "pattern": {...} | null}
    }

with all matrices stored as row-major nested lists.  The structural block
and the "ordering_waived" flag are optional.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ModelError
from .model import Dimensions, ModelParameters, Regime
from .structural import ConstraintPattern, StructuralParams


def _matrix(a):
    return [[float(v) for v in row] for row in np.asarray(a, dtype=float)]


def model_to_dict(model: ModelParameters) -> dict:
    dims = model.dims
    doc = {
        "d": dims.d,
        "p": dims.p,
        "M": dims.M,
        "regimes": [
            {
                "phi0": [float(v) for v in reg.phi0],
                "A": [_matrix(Ai) for Ai in reg.A],
                "omega": _matrix(reg.omega),
            }
            for reg in model.regimes
        ],
        "alpha": [float(v) for v in model.alpha],
        "ordering_waived": model.ordering_waived,
    }
    if model.structural is not None:
        struct = model.structural
        doc["structural"] = {
            "W": _matrix(struct.W),
            "lambdas": [[float(v) for v in lam] for lam in struct.lambdas],
            "pattern": None
            if struct.pattern is None
            else {"cells": struct.pattern.to_lists(), "d1": struct.pattern.d1},
        }
    return doc


def model_from_dict(doc: dict) -> ModelParameters:
    try:
        dims = Dimensions(d=doc["d"], p=doc["p"], M=doc["M"])
        regimes = tuple(
            Regime(
                phi0=np.asarray(r["phi0"], dtype=float),
                A=tuple(np.asarray(Ai, dtype=float) for Ai in r["A"]),
                omega=np.asarray(r["omega"], dtype=float),
            )
            for r in doc["regimes"]
        )
        alpha = np.asarray(doc["alpha"], dtype=float)
    except KeyError as exc:
        raise ModelError(f"model document is missing field {exc}") from None
    structural = None
    if doc.get("structural") is not None:
        sdoc = doc["structural"]
        pattern = None
        if sdoc.get("pattern") is not None:
            pattern = ConstraintPattern(
                cells=tuple(tuple(row) for row in sdoc["pattern"]["cells"]),
                d1=sdoc["pattern"]["d1"],
            )
        structural = StructuralParams(
            W=np.asarray(sdoc["W"], dtype=float),
            lambdas=tuple(np.asarray(l, dtype=float) for l in sdoc["lambdas"]),
            pattern=pattern,
        )
    return ModelParameters(
        dims=dims,
        regimes=regimes,
        alpha=alpha,
        structural=structural,
        ordering_waived=bool(doc.get("ordering_waived", True)),
    )


def save_model(model: ModelParameters, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> ModelParameters:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"invalid model JSON in {path}: {exc}") from None
    return model_from_dict(doc)
