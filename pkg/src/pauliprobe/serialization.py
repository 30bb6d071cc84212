"""JSON and CSV encodings used by the command-line front end.

Complex vectors are lists of ``[re, im]`` pairs. Floats are written with
Python's shortest round-trip representation, so every value reloads
bit-exactly. All JSON documents carry ``"schema_version": 1``.
"""
from __future__ import annotations

import csv
import io
import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .hilbert import TOL, ObservableBasis, PureState
from .solver import Cluster, FixedPointRecord, SolutionSet, SweepResult

SCHEMA_VERSION = 1


class SpecError(ValueError):
    """Malformed or inconsistent experiment specification."""


def encode_vector(vec) -> list:
    arr = vec.amplitudes if isinstance(vec, PureState) else np.asarray(vec, dtype=np.complex128)
    return [[float(z.real), float(z.imag)] for z in arr]


def decode_vector(data) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise SpecError("a vector must be a non-empty list of [re, im] pairs")
    out = np.empty(len(data), dtype=np.complex128)
    for i, pair in enumerate(data):
        if isinstance(pair, (int, float)) and not isinstance(pair, bool):
            out[i] = float(pair)
            continue
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, (int, float)) for x in pair)):
            raise SpecError(f"vector entry {i} is not an [re, im] pair: {pair!r}")
        out[i] = complex(float(pair[0]), float(pair[1]))
    return out


def encode_state(state: PureState) -> list:
    return encode_vector(state)


def decode_state(data) -> PureState:
    vec = decode_vector(data)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise SpecError("state vector is zero")
    # already-normalised input is taken verbatim so that encoded states
    # reload bit-exactly
    if abs(norm - 1.0) <= TOL.norm:
        return PureState(vec)
    return PureState.from_vector(vec)


def encode_basis(basis: ObservableBasis) -> dict:
    return {"label": basis.label, "vectors": [encode_vector(basis.vectors[:, k]) for k in range(basis.dim)]}


def decode_basis(data, default_label: str = "") -> ObservableBasis:
    if not isinstance(data, dict) or "vectors" not in data:
        raise SpecError("an inline basis must be an object with a 'vectors' list")
    vectors = [decode_vector(v) for v in data["vectors"]]
    d = len(vectors)
    if any(v.shape[0] != d for v in vectors):
        raise SpecError("an inline basis needs d vectors of length d")
    try:
        return ObservableBasis.from_vectors(vectors, str(data.get("label", default_label)))
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def record_to_dict(rec: FixedPointRecord) -> dict:
    return {
        "state": encode_state(rec.state),
        "is_physical": rec.is_physical,
        "residual": rec.distributional_residual,
        "iterations": rec.iterations,
        "seed_index": rec.seed_index,
        "status": rec.status,
    }


def record_from_dict(data: dict) -> FixedPointRecord:
    return FixedPointRecord(
        state=decode_state(data["state"]),
        is_physical=bool(data["is_physical"]),
        distributional_residual=float(data["residual"]),
        iterations=int(data["iterations"]),
        seed_index=int(data["seed_index"]),
        converged=data["status"] == "converged",
    )


def solution_set_to_dict(sol: SolutionSet) -> dict:
    return {
        "n_seeds": sol.n_seeds,
        "cardinality": sol.cardinality_estimate,
        "continuum_flag": sol.continuum_flag,
        "anomaly": sol.anomaly,
        "n_nonphysical": sol.n_nonphysical,
        "n_unconverged": sol.n_unconverged,
        "saturation": [[n, c] for n, c in sol.saturation],
        "clusters": [dict(record_to_dict(c.representative), multiplicity=c.multiplicity) for c in sol.clusters],
    }


def solution_set_from_dict(data: dict) -> SolutionSet:
    return SolutionSet(
        clusters=[Cluster(record_from_dict(c), int(c["multiplicity"])) for c in data["clusters"]],
        n_seeds=int(data["n_seeds"]),
        n_nonphysical=int(data["n_nonphysical"]),
        n_unconverged=int(data["n_unconverged"]),
        saturation=[(int(n), int(c)) for n, c in data["saturation"]],
        continuum_flag=bool(data["continuum_flag"]),
    )


_NUMBER = r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
_PAIR = re.compile(rf"\[\s*({_NUMBER}),\s*({_NUMBER})\s*\]")


def dumps(doc: dict) -> str:
    """Indented JSON with number pairs kept on one line."""
    text = json.dumps(doc, indent=2, allow_nan=False)
    return _PAIR.sub(r"[\1, \2]", text) + "\n"


SWEEP_COLUMNS = ["t", "cardinality", "nearest_eigenvector_distance", "nearest_basis", "nearest_index", "anomaly"]


def sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for p in result.points:
        label, k = p.nearest_eigenvector
        writer.writerow([repr(p.t), p.cardinality, repr(p.nearest_eigenvector_distance), label, k, int(p.anomaly)])
    return buf.getvalue()


def bracket_to_dict(bracket) -> dict:
    lo, hi = bracket.lower, bracket.upper
    return {
        "t_lower": lo.t,
        "t_upper": hi.t,
        "cardinality_lower": lo.cardinality,
        "cardinality_upper": hi.cardinality,
        "generator_lower": encode_state(lo.generator),
        "generator_upper": encode_state(hi.generator),
        "nearest_eigenvector_lower": {"basis": lo.nearest_eigenvector[0], "index": lo.nearest_eigenvector[1], "distance": lo.nearest_eigenvector_distance},
        "nearest_eigenvector_upper": {"basis": hi.nearest_eigenvector[0], "index": hi.nearest_eigenvector[1], "distance": hi.nearest_eigenvector_distance},
    }


def table_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
