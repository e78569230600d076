"""JSON interchange for models and reduction artifacts.

Complex numbers serialize as two-element arrays [re, im] and matrices as
row-major nested arrays; every file format in the package shares this
convention.  Reduced models are written as ordinary conditional-evolution
documents with an extra "reduction" block, so every command that accepts
a model also accepts a reduced one.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .model import ConditionalEvolution, Instrument, OutputMap
from .observability import LinearReducedModel
from .operators import OperatorSubspace, Superoperator, superop_from_kraus

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "superop_to_json",
    "superop_from_json",
    "ce_to_json",
    "ce_from_json",
    "reduced_ce_to_json",
    "linear_model_to_json",
    "distribution_to_json",
    "save_json",
    "load_json",
]


def matrix_to_json(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(data) -> np.ndarray:
    try:
        return np.array([[complex(z[0], z[1]) for z in row] for row in data])
    except (TypeError, IndexError) as exc:
        raise ValueError(f"malformed matrix entry: {exc}") from exc


def superop_to_json(S: Superoperator) -> dict:
    if S.kraus is not None:
        return {"kraus": [matrix_to_json(K) for K in S.kraus]}
    return {"matrix": matrix_to_json(S.matrix)}


def superop_from_json(data: dict) -> Superoperator:
    if "kraus" in data:
        return superop_from_kraus([matrix_from_json(K) for K in data["kraus"]])
    if "matrix" in data:
        return Superoperator(matrix_from_json(data["matrix"]))
    raise ValueError("superoperator entry needs a 'kraus' or 'matrix' field")


def ce_to_json(ce: ConditionalEvolution, extra: dict | None = None) -> dict:
    doc = {
        "dim": ce.dim,
        "outcomes": list(ce.outcomes),
        "instrument": {k: superop_to_json(ce.instrument.maps[k]) for k in ce.outcomes},
        "observables": [
            {"name": name, "matrix": matrix_to_json(O)}
            for name, O in zip(ce.output.names, ce.output.observables)
        ],
    }
    if ce.has_split:
        doc["split"] = {
            "evolution": superop_to_json(ce.evolution),
            "effects": {k: superop_to_json(ce.effects[k]) for k in ce.outcomes},
        }
    if extra:
        doc.update(extra)
    return doc


def ce_from_json(doc: dict) -> ConditionalEvolution:
    try:
        outcomes = tuple(str(k) for k in doc["outcomes"])
        maps = {k: superop_from_json(doc["instrument"][k]) for k in outcomes}
        names = tuple(o["name"] for o in doc["observables"])
        obs = tuple(matrix_from_json(o["matrix"]) for o in doc["observables"])
    except KeyError as exc:
        raise ValueError(f"model document missing field {exc}") from exc
    evolution = effects = None
    if "split" in doc:
        evolution = superop_from_json(doc["split"]["evolution"])
        effects = {k: superop_from_json(doc["split"]["effects"][k]) for k in outcomes}
    return ConditionalEvolution(
        instrument=Instrument(outcomes=outcomes, maps=maps),
        output=OutputMap(names=names, observables=obs),
        evolution=evolution,
        effects=effects,
    )


def reduced_ce_to_json(red) -> dict:
    """Reduced model as a valid CE document plus reduction provenance."""
    return ce_to_json(
        red.model,
        extra={
            "reduction": {
                "R": matrix_to_json(red.reduction_map.matrix),
                "U": matrix_to_json(red.factorization.decomposition.U),
                **red.provenance(),
            }
        },
    )


def linear_model_to_json(lm: LinearReducedModel) -> dict:
    return {
        "q": lm.q,
        "A": {k: matrix_to_json(lm.A[k]) for k in lm.outcomes},
        "C": matrix_to_json(lm.C),
        "basis": [matrix_to_json(B) for B in lm.subspace.basis],
    }


def distribution_to_json(table: dict) -> list:
    return [
        {"seq": list(seq), "p": p, "y": [[float(v.real), float(v.imag)] for v in y]}
        for seq, (p, y) in sorted(table.items())
    ]


def save_json(doc: dict | list, path: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=1)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str):
    with open(path) as fh:
        return json.load(fh)
