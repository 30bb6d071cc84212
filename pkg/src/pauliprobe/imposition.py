"""The physical imposition operator and its compositions.

For an observable with eigenbasis {phi_k} and a target distribution p, the
imposition operator keeps the phases of a state in that basis and overwrites
its moduli with sqrt(p_k)::

    T psi = sum_k sqrt(p_k) * (<phi_k, psi> / |<phi_k, psi>|) * phi_k

A coefficient with modulus below ``TOL.zero`` gets the phase factor 1.

The array kernels in this module take stacks of states of shape (n, d) and
treat every row independently; the solver relies on that to iterate many
seeds at once with results that do not depend on the batch size.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .hilbert import (
    TOL,
    ObservableBasis,
    ProbDist,
    PureState,
    _as_complex_vector,
    _check_dims,
    born_probabilities,
    canonical_phase,
)
from .metrics import bures

DEFAULT_ORDER = "paper_sec4"
FORWARD_ORDER = "prop10"
COMPOSITION_ORDERS = (DEFAULT_ORDER, FORWARD_ORDER)


@dataclass(frozen=True, eq=False)
class TomographyProblem:
    """Target distributions for m observables, optionally with the state
    that generated them."""

    bases: tuple
    targets: tuple
    generator: Optional[PureState] = None

    def __post_init__(self):
        bases = tuple(self.bases)
        targets = tuple(t if isinstance(t, ProbDist) else ProbDist(t) for t in self.targets)
        if not bases:
            raise ValueError("a tomography problem needs at least one basis")
        if len(bases) != len(targets):
            raise ValueError(f"{len(bases)} bases but {len(targets)} target distributions")
        d = bases[0].dim
        for B, t in zip(bases, targets):
            _check_dims(d, B.dim)
            _check_dims(d, len(t))
        if self.generator is not None:
            _check_dims(d, self.generator.dim)
            for B, t in zip(bases, targets):
                p = born_probabilities(B, self.generator).probs
                if np.max(np.abs(p - t.probs)) > 1e-10:
                    raise ValueError(f"targets for basis {B.label!r} are not generated by the generator state")
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "targets", targets)

    @property
    def dim(self) -> int:
        return self.bases[0].dim

    @property
    def m(self) -> int:
        return len(self.bases)

    def factor_indices(self, order: str = DEFAULT_ORDER) -> list[int]:
        """Basis indices in the order the factors act on a state.

        With ``paper_sec4`` the composite is T_1 o ... o T_m, so the last basis
        acts first; with ``prop10`` the first basis acts first.
        """
        if order == DEFAULT_ORDER:
            return list(range(self.m - 1, -1, -1))
        if order == FORWARD_ORDER:
            return list(range(self.m))
        raise ValueError(f"unknown composition order {order!r}; expected one of {COMPOSITION_ORDERS}")

    def residual(self, state) -> float:
        """Distributional distance between the state's statistics and the targets."""
        from .metrics import hellinger

        sq = [hellinger(born_probabilities(B, state), t) ** 2 for B, t in zip(self.bases, self.targets)]
        return float(np.sqrt(np.mean(sq)))


# -- array kernels -----------------------------------------------------------


def _impose_rows(vectors: np.ndarray, amplitudes: np.ndarray, psi: np.ndarray) -> np.ndarray:
    # coefficient c[n, k] = <phi_k, psi_n>; explicit sums keep every row
    # bit-identical whatever the batch size
    coeffs = np.sum(np.conj(vectors)[None, :, :] * psi[:, :, None], axis=1)
    mods = np.abs(coeffs)
    small = mods <= TOL.zero
    phases = np.where(small, 1.0 + 0j, coeffs / np.where(small, 1.0, mods))
    new_coeffs = amplitudes[None, :] * phases
    out = np.sum(vectors[None, :, :] * new_coeffs[:, None, :], axis=2)
    norms = np.sqrt(np.sum((out * np.conj(out)).real, axis=1))
    return canonical_phase(out / norms[:, None])


def impose_rows(basis: ObservableBasis, target: ProbDist, psi: np.ndarray) -> np.ndarray:
    return _impose_rows(basis.vectors, np.sqrt(target.probs), np.atleast_2d(psi))


def composite_rows(problem: TomographyProblem, psi: np.ndarray, order: str = DEFAULT_ORDER) -> np.ndarray:
    out = np.atleast_2d(psi)
    for j in problem.factor_indices(order):
        out = _impose_rows(problem.bases[j].vectors, np.sqrt(problem.targets[j].probs), out)
    return out


def relaxed_rows(problem: TomographyProblem, psi: np.ndarray, lam: float, order: str = DEFAULT_ORDER) -> np.ndarray:
    psi = np.atleast_2d(psi)
    image = composite_rows(problem, psi, order)
    if lam == 1.0:
        return image
    # align the image's global phase with the input so the convex
    # combination is taken between ray representatives that overlap positively
    ov = np.sum(np.conj(image) * psi, axis=1)
    mag = np.abs(ov)
    phase = np.where(mag > 0.0, ov / np.where(mag > 0.0, mag, 1.0), 1.0)
    mix = lam * image * phase[:, None] + (1.0 - lam) * psi
    norms = np.sqrt(np.sum((mix * np.conj(mix)).real, axis=1))
    return canonical_phase(mix / norms[:, None])


def _check_lambda(lam: float) -> None:
    if not (0.0 < lam <= 1.0):
        raise ValueError(f"relaxation parameter must lie in (0, 1], got {lam!r}")


# -- public operations -------------------------------------------------------


def impose(basis: ObservableBasis, target: ProbDist, state) -> PureState:
    """Apply the imposition operator for one observable to ``state``."""
    if not isinstance(target, ProbDist):
        target = ProbDist(target)
    vec = _as_complex_vector(state)
    _check_dims(basis.dim, vec.shape[0])
    _check_dims(basis.dim, len(target))
    return PureState(impose_rows(basis, target, vec)[0])


def impose_composite(problem: TomographyProblem, state, order: str = DEFAULT_ORDER) -> PureState:
    vec = _as_complex_vector(state)
    _check_dims(problem.dim, vec.shape[0])
    return PureState(composite_rows(problem, vec, order)[0])


def impose_relaxed(problem: TomographyProblem, state, lam: float, order: str = DEFAULT_ORDER) -> PureState:
    """Normalised convex combination lam * T(state) + (1 - lam) * state.

    ``lam = 1`` is the plain composite operator.
    """
    _check_lambda(lam)
    vec = _as_complex_vector(state)
    _check_dims(problem.dim, vec.shape[0])
    return PureState(relaxed_rows(problem, vec, lam, order)[0])


def lipschitz_ratio(basis: ObservableBasis, target: ProbDist, generator, probe) -> float:
    """d(T probe, generator) / d(probe, generator) in the Bures metric.

    ``target`` should be the generator's own distribution in ``basis``; the
    ratio is then bounded by 2.
    """
    denom = bures(probe, generator)
    if denom <= TOL.zero:
        raise ValueError("probe and generator represent the same ray")
    return bures(impose(basis, target, probe), generator) / denom
