"""Distances between outcome distributions and between rays.

* ``hellinger``: distance between two probability vectors.
* ``distributional``: root-mean-square of Hellinger distances over several
  observables, a pseudo-metric on states that vanishes for Pauli partners.
* ``bures``: ray distance sqrt(2 - 2|<a, b>|).

The Bures distance of any pair upper-bounds the distributional distance for
any choice of observables; :func:`check_bound` evaluates both and flags a
violation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hilbert import DimensionMismatch, ObservableBasis, ProbDist, _as_complex_vector, _check_dims, born_probabilities

BOUND_SLACK = 1e-10


def _probs(p) -> np.ndarray:
    if isinstance(p, ProbDist):
        return p.probs
    return np.asarray(p, dtype=np.float64)


def hellinger(p, q) -> float:
    """sqrt(sum_k (sqrt p_k - sqrt q_k)^2)."""
    pv, qv = _probs(p), _probs(q)
    if pv.shape != qv.shape:
        raise DimensionMismatch(f"length mismatch: {pv.shape[0]} != {qv.shape[0]}")
    diff = np.sqrt(pv) - np.sqrt(qv)
    return float(np.sqrt(np.sum(diff * diff)))


def hellinger_overlap_form(p, q) -> float:
    """Same distance through the fidelity form sqrt(2 - 2 sum sqrt(p_k q_k)).

    Loses precision near zero distance; kept as a cross-check of
    :func:`hellinger`.
    """
    pv, qv = _probs(p), _probs(q)
    if pv.shape != qv.shape:
        raise DimensionMismatch(f"length mismatch: {pv.shape[0]} != {qv.shape[0]}")
    radicand = 2.0 - 2.0 * float(np.sum(np.sqrt(pv * qv)))
    return float(np.sqrt(max(radicand, 0.0)))


def hellinger_states(basis: ObservableBasis, a, b) -> float:
    return hellinger(born_probabilities(basis, a), born_probabilities(basis, b))


def distributional(bases: Sequence[ObservableBasis], a, b) -> float:
    if len(bases) == 0:
        raise ValueError("need at least one basis")
    sq = [hellinger_states(B, a, b) ** 2 for B in bases]
    return float(np.sqrt(np.mean(sq)))


def bures(a, b) -> float:
    """Bures distance between the rays of ``a`` and ``b``.

    Evaluated as ||a - e^{i g} b|| with g = arg <b, a>, which for unit vectors
    equals sqrt(2 - 2|<a, b>|) but keeps full relative precision when the rays
    nearly coincide.
    """
    va, vb = _as_complex_vector(a), _as_complex_vector(b)
    _check_dims(va.shape[0], vb.shape[0])
    return float(bures_batch(va[None, :], vb[None, :])[0])


def bures_overlap_form(a, b) -> float:
    va, vb = _as_complex_vector(a), _as_complex_vector(b)
    _check_dims(va.shape[0], vb.shape[0])
    radicand = 2.0 - 2.0 * abs(np.vdot(va, vb))
    return float(np.sqrt(max(radicand, 0.0)))


def bures_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Bures distances of two stacks of unit vectors."""
    ov = np.sum(np.conj(b) * a, axis=-1)
    mag = np.abs(ov)
    phase = np.where(mag > 0.0, ov / np.where(mag > 0.0, mag, 1.0), 1.0)
    diff = a - phase[..., None] * b
    return np.sqrt(np.sum((diff * np.conj(diff)).real, axis=-1))


@dataclass
class MetricReport:
    bures: float
    distributional: float
    per_basis_hellinger: list[float] = field(default_factory=list)
    violation: bool = False

    def to_dict(self) -> dict:
        return {
            "bures": self.bures,
            "distributional": self.distributional,
            "per_basis_hellinger": list(self.per_basis_hellinger),
            "violation": self.violation,
        }


def check_bound(bases: Sequence[ObservableBasis], a, b) -> MetricReport:
    if len(bases) == 0:
        raise ValueError("need at least one basis")
    per_basis = [hellinger_states(B, a, b) for B in bases]
    dist = float(np.sqrt(np.mean(np.square(per_basis))))
    bd = bures(a, b)
    return MetricReport(bd, dist, per_basis, violation=dist > bd + BOUND_SLACK)
