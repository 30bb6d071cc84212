"""Named observables and bases, unbiasedness, and the rank-one POVM bound.

Family names understood by :func:`resolve_family`:

``pauli``
    The three qubit bases B_x, B_y, B_z with the vectors printed in the
    bifurcation example (B_x = {(1,0), (0,1)}, B_y = {(1,1), (1,-1)}/sqrt2,
    B_z = {(1,i), (i,1)}/sqrt2). Note that these labels do not follow the
    spin matrices: B_x diagonalises S_z and B_z diagonalises S_y.
``spin-1/2``, ``spin-1``
    Eigenbases of S_x, S_y, S_z built from the ladder operators.
``fourier:<d>``
    Computational basis together with the discrete Fourier basis.
``random:<d>:<m>:<seed>``
    m Haar-random bases in dimension d.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import ObservableBasis, random_basis

SQRT_HALF = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class BasisFamily:
    name: str
    bases: tuple
    unbiasedness: float = float("nan")

    def __post_init__(self):
        bases = tuple(self.bases)
        if not bases:
            raise ValueError("a basis family needs at least one basis")
        d = bases[0].dim
        if any(B.dim != d for B in bases):
            raise ValueError(f"family {self.name!r} mixes dimensions")
        object.__setattr__(self, "bases", bases)
        if len(bases) >= 2 and np.isnan(self.unbiasedness):
            object.__setattr__(self, "unbiasedness", unbiasedness(bases))

    @property
    def dim(self) -> int:
        return self.bases[0].dim

    def get(self, label: str) -> ObservableBasis:
        for B in self.bases:
            if B.label == label:
                return B
        raise KeyError(f"family {self.name!r} has no basis labelled {label!r}")

    def select(self, labels) -> "BasisFamily":
        return BasisFamily(f"{self.name}[{','.join(labels)}]", tuple(self.get(lb) for lb in labels))


def pauli_bases() -> BasisFamily:
    bx = ObservableBasis.from_vectors([[1, 0], [0, 1]], "B_x")
    by = ObservableBasis.from_vectors([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]], "B_y")
    bz = ObservableBasis.from_vectors([[SQRT_HALF, 1j * SQRT_HALF], [1j * SQRT_HALF, SQRT_HALF]], "B_z")
    return BasisFamily("pauli", (bx, by, bz))


def spin_matrices(two_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S_x, S_y, S_z (hbar = 1) in the S_z eigenbasis ordered m = j, ..., -j."""
    j = two_j / 2.0
    m = j - np.arange(two_j + 1)
    sz = np.diag(m).astype(np.complex128)
    # <m+1| S_+ |m> = sqrt(j(j+1) - m(m+1))
    splus = np.zeros((two_j + 1, two_j + 1), dtype=np.complex128)
    for col in range(1, two_j + 1):
        mm = m[col]
        splus[col - 1, col] = np.sqrt(j * (j + 1) - mm * (mm + 1))
    sminus = splus.conj().T
    sx = (splus + sminus) / 2.0
    sy = (splus - sminus) / 2.0j
    return sx, sy, sz


def eigenbasis(matrix: np.ndarray, label: str) -> ObservableBasis:
    """Eigenvectors of a Hermitian matrix ordered by decreasing eigenvalue,
    each with its first non-negligible entry made real positive."""
    vals, vecs = np.linalg.eigh(matrix)
    order = np.argsort(-vals, kind="stable")
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        pivot = col[np.argmax(np.abs(col) > 1e-9)]
        vecs[:, k] = col * (np.conj(pivot) / abs(pivot))
    return ObservableBasis(vecs, label)


def spin_observable_bases(two_j: int) -> BasisFamily:
    if two_j not in (1, 2):
        raise ValueError(f"only spin 1/2 (two_j=1) and spin 1 (two_j=2) are supported, got two_j={two_j}")
    sx, sy, sz = spin_matrices(two_j)
    name = "spin-1/2" if two_j == 1 else "spin-1"
    return BasisFamily(name, (eigenbasis(sx, "S_x"), eigenbasis(sy, "S_y"), eigenbasis(sz, "S_z")))


def computational_basis(dim: int) -> ObservableBasis:
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    return ObservableBasis(np.eye(dim, dtype=np.complex128), "standard")


def fourier_basis(dim: int) -> ObservableBasis:
    """F_k[n] = exp(2 pi i n k / d) / sqrt(d)."""
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    n = np.arange(dim)
    mat = np.exp(2j * np.pi * np.outer(n, n) / dim) / np.sqrt(dim)
    return ObservableBasis(mat, "fourier")


def unbiasedness(family) -> float:
    """1 - S / S_max with S = sum over basis pairs and vector pairs of
    (|<phi_k, phi'_l>|^2 - 1/d)^2.

    For one pair of bases S is at most d - 1, reached when the two bases
    coincide up to order and phases, so S_max = (number of pairs) * (d - 1).
    Mutually unbiased families score 1, families containing a repeated
    basis score below 1.
    """
    bases = family.bases if isinstance(family, BasisFamily) else tuple(family)
    if len(bases) < 2:
        raise ValueError("unbiasedness needs at least two bases")
    d = bases[0].dim
    total = 0.0
    pairs = 0
    for a in range(len(bases)):
        for b in range(a + 1, len(bases)):
            overlaps = np.abs(bases[a].vectors.conj().T @ bases[b].vectors) ** 2
            total += float(np.sum((overlaps - 1.0 / d) ** 2))
            pairs += 1
    return 1.0 - total / (pairs * (d - 1))


def povm_lower_bound(dim: int) -> int:
    """Strict lower bound on the number of rank-one POVM elements of an
    informationally complete measurement for pure states.

    With a = popcount(d - 1) the bound is 4d - 2a - 4, raised to 4d - 2a - 3
    for odd d with a = 2 (mod 4) and to 4d - 2a - 2 for odd d with a = 3 (mod 4).
    """
    if dim <= 1:
        raise ValueError(f"dimension must exceed 1, got {dim}")
    alpha = bin(dim - 1).count("1")
    if dim % 2 == 1 and alpha % 4 == 2:
        return 4 * dim - 2 * alpha - 3
    if dim % 2 == 1 and alpha % 4 == 3:
        return 4 * dim - 2 * alpha - 2
    return 4 * dim - 2 * alpha - 4


def random_family(dim: int, m: int, seed: int) -> BasisFamily:
    rng = np.random.default_rng(seed)
    return BasisFamily(f"random:{dim}:{m}:{seed}", tuple(random_basis(dim, rng, f"R{j}") for j in range(m)))


def resolve_family(name: str) -> BasisFamily:
    parts = name.split(":")
    try:
        if name == "pauli":
            return pauli_bases()
        if name == "spin-1/2":
            return spin_observable_bases(1)
        if name == "spin-1":
            return spin_observable_bases(2)
        if parts[0] == "fourier" and len(parts) == 2:
            d = int(parts[1])
            return BasisFamily(name, (computational_basis(d), fourier_basis(d)))
        if parts[0] == "random" and len(parts) == 4:
            return random_family(int(parts[1]), int(parts[2]), int(parts[3]))
    except ValueError as exc:
        raise ValueError(f"bad family reference {name!r}: {exc}") from exc
    raise ValueError(f"unknown basis family {name!r}")
