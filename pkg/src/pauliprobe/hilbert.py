"""Finite-dimensional complex state space: pure states, bases, Born rule.

States are stored as unit vectors in a canonical ray form (first non-negligible
component real and non-negative) so that two representatives of the same ray
compare equal elementwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the library and its tests."""

    norm: float = 1e-12
    orthonormality: float = 1e-10
    probability_sum: float = 1e-10
    # modulus below which an amplitude counts as zero (ray canonicalisation
    # and the unit-phase rule of the imposition operator)
    zero: float = 1e-9


TOL = Tolerances()


def _as_complex_vector(values) -> np.ndarray:
    if isinstance(values, PureState):
        return values.amplitudes
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D amplitude vector, got shape {arr.shape}")
    return arr


def canonical_phase(vec: np.ndarray, zero: float = TOL.zero) -> np.ndarray:
    """Return ``vec`` times the global phase that makes its first
    component with modulus above ``zero`` real and non-negative.

    Works on a single vector or on a batch stacked along the first axis.
    """
    vec = np.asarray(vec, dtype=np.complex128)
    single = vec.ndim == 1
    batch = np.atleast_2d(vec)
    mods = np.abs(batch)
    big = mods > zero
    if not np.all(big.any(axis=1)):
        raise ValueError("cannot canonicalise an all-zero vector")
    first = big.argmax(axis=1)
    rows = np.arange(batch.shape[0])
    pivot = batch[rows, first]
    mod = np.abs(pivot)
    # componentwise real division keeps an already-real pivot's phase at exactly 1
    phase = (pivot.real / mod) - 1j * (pivot.imag / mod)
    out = batch * phase[:, None]
    # kill the residual imaginary round-off on the pivot so that the
    # operation is exactly idempotent
    out[rows, first] = np.abs(pivot)
    return out[0] if single else out


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit vector in C^d, stored in canonical ray form.

    The constructor expects a normalised vector (within ``TOL.norm``); use
    :meth:`from_vector` to normalise arbitrary non-zero input.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_complex_vector(self.amplitudes)
        if vec.shape[0] < 2:
            raise ValueError(f"dimension must be at least 2, got {vec.shape[0]}")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > TOL.norm:
            raise ValueError(f"state is not normalised (norm={norm!r})")
        vec = canonical_phase(vec).copy()
        vec.flags.writeable = False
        object.__setattr__(self, "amplitudes", vec)

    @classmethod
    def from_vector(cls, values) -> "PureState":
        vec = _as_complex_vector(values)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("cannot build a state from the zero vector")
        return cls(vec / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.amplitudes, other.amplitudes))

    def __hash__(self):
        return hash(self.amplitudes.tobytes())

    def __repr__(self):
        return f"PureState({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class ObservableBasis:
    """Orthonormal eigenbasis of a non-degenerate observable.

    ``vectors[:, k]`` is the k-th basis vector.
    """

    vectors: np.ndarray
    label: str = ""

    def __post_init__(self):
        mat = np.asarray(self.vectors, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"basis must be a square d x d matrix, got shape {mat.shape}")
        if mat.shape[0] < 2:
            raise ValueError("dimension must be at least 2")
        gram = mat.conj().T @ mat
        err = np.max(np.abs(gram - np.eye(mat.shape[0])))
        if err > TOL.orthonormality:
            raise ValueError(f"basis {self.label!r} is not orthonormal (max Gram error {err:.3e})")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "vectors", mat)

    @classmethod
    def from_vectors(cls, vectors, label: str = "") -> "ObservableBasis":
        """Build a basis from a sequence of d vectors (rows of the input)."""
        return cls(np.asarray(vectors, dtype=np.complex128).T, label)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def vector(self, k: int) -> np.ndarray:
        return self.vectors[:, k]

    def state(self, k: int) -> PureState:
        return PureState.from_vector(self.vectors[:, k])

    def coefficients(self, state) -> np.ndarray:
        """Overlaps <phi_k, state> for every k."""
        vec = _as_complex_vector(state)
        _check_dims(self.dim, vec.shape[0])
        return self.vectors.conj().T @ vec

    def __repr__(self):
        return f"ObservableBasis(label={self.label!r}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class ProbDist:
    probs: np.ndarray = field()

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1:
            raise ValueError("probability vector must be 1-D")
        if np.any(p < 0.0):
            raise ValueError("probabilities must be non-negative")
        if np.any(p > 1.0 + TOL.probability_sum):
            raise ValueError("probabilities must not exceed 1")
        total = p.sum()
        if abs(total - 1.0) > TOL.probability_sum:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.shape[0]

    def __repr__(self):
        return f"ProbDist({np.array2string(self.probs, precision=6)})"


class DimensionMismatch(ValueError):
    pass


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatch(f"dimension mismatch: {a} != {b}")


def inner(a, b) -> complex:
    """Hilbert inner product <a, b>, conjugate-linear in ``a``."""
    va, vb = _as_complex_vector(a), _as_complex_vector(b)
    _check_dims(va.shape[0], vb.shape[0])
    return complex(np.vdot(va, vb))


def born_probabilities(basis: ObservableBasis, state) -> ProbDist:
    """Outcome distribution p_k = |<phi_k, state>|^2."""
    amps = basis.coefficients(state)
    return ProbDist(np.abs(amps) ** 2)


def canonicalize_ray(state) -> PureState:
    """Representative of the ray of ``state`` with the canonical global phase.

    Raw vectors are normalised first.
    """
    if isinstance(state, PureState):
        return state
    return PureState.from_vector(canonical_phase(_as_complex_vector(state)))


def random_state(dim: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state (normalised complex Gaussian vector)."""
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState.from_vector(z)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    return orthonormalize(z)


def orthonormalize(mat: np.ndarray) -> np.ndarray:
    """QR orthonormalisation with the diagonal of R made real positive."""
    q, r = np.linalg.qr(np.asarray(mat, dtype=np.complex128))
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases[None, :]


def random_basis(dim: int, rng: np.random.Generator, label: str = "random") -> ObservableBasis:
    """Columns of a Haar-random unitary."""
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    return ObservableBasis(haar_unitary(dim, rng), label)


def stream_rng(master_seed: int, stream: int, index: int) -> np.random.Generator:
    """Random stream for task ``index`` of kind ``stream`` under ``master_seed``.

    Seeded with the entropy tuple (master_seed, stream, index), so the draws
    of one task never depend on how many other tasks ran or in which order.
    """
    return np.random.default_rng([int(master_seed), int(stream), int(index)])
