"""Multi-seed fixed-point search for Pauli partners.

Every seed is iterated under the (optionally relaxed) composite imposition
operator until two successive iterates are closer than ``conv_tol`` in the
Bures metric. Limits whose statistics reproduce all targets are physical
fixed points, i.e. solutions of the reconstruction problem; the others are
discarded. Physical limits are then merged into ray-distinct clusters.

Seeds only need d - 1 random phases: the first factor of the composite
operator throws away the moduli of the seed in its own basis, so seeds are
taken with equal moduli in the basis that acts first.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .hilbert import (
    ObservableBasis,
    PureState,
    _check_dims,
    born_probabilities,
    orthonormalize,
    random_state,
    stream_rng,
)
from .imposition import (
    COMPOSITION_ORDERS,
    DEFAULT_ORDER,
    TomographyProblem,
    _check_lambda,
    relaxed_rows,
)
from .metrics import bures, bures_batch

log = logging.getLogger(__name__)

# rows per batch handed to the iteration kernel; fixed so results do not
# depend on the number of worker threads
CHUNK = 64

# stream tags mixed into the master seed for the different random draws
_SEED_STREAM = 0
_GENERATOR_STREAM = 1
_PERTURB_STREAM = 2

CONTINUUM_MIN_CLUSTERS = 25


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 10_000
    conv_tol: float = 1e-12
    physical_tol: float = 1e-8
    dedup_tol: float = 1e-6
    n_seeds: Optional[int] = None
    lam: float = 1.0
    composition_order: str = DEFAULT_ORDER
    master_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("conv_tol", "physical_tol", "dedup_tol"):
            val = getattr(self, name)
            if not (0.0 < val < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {val!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.n_seeds is not None and self.n_seeds < 1:
            raise ValueError("n_seeds must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        _check_lambda(self.lam)
        if self.composition_order not in COMPOSITION_ORDERS:
            raise ValueError(f"unknown composition order {self.composition_order!r}")

    def seeds_for(self, dim: int) -> int:
        """Seed count: explicit ``n_seeds`` or max(64, 32 d)."""
        if self.n_seeds is not None:
            return self.n_seeds
        return max(64, 32 * dim)

    def with_overrides(self, **kwargs) -> "SolverConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FixedPointRecord:
    state: PureState
    is_physical: bool
    distributional_residual: float
    iterations: int
    seed_index: int
    converged: bool = True

    @property
    def status(self) -> str:
        return "converged" if self.converged else "max_iters"


@dataclass
class Cluster:
    representative: FixedPointRecord
    multiplicity: int = 1


@dataclass
class SolutionSet:
    clusters: list
    n_seeds: int
    n_nonphysical: int
    n_unconverged: int
    saturation: list  # (seeds processed, distinct physical clusters)
    continuum_flag: bool = False

    @property
    def cardinality_estimate(self) -> int:
        return len(self.clusters)

    @property
    def anomaly(self) -> bool:
        """True when no physical fixed point was found at all."""
        return not self.clusters

    def states(self) -> list:
        return [c.representative.state for c in self.clusters]


# -- problem set-up ----------------------------------------------------------


def synthesize_problem(generator: PureState, bases: Sequence[ObservableBasis]) -> TomographyProblem:
    """Targets p^j_k = |<phi^j_k, generator>|^2 for every basis."""
    bases = tuple(bases)
    if not bases:
        raise ValueError("need at least one basis")
    for B in bases:
        _check_dims(B.dim, generator.dim)
    targets = tuple(born_probabilities(B, generator) for B in bases)
    return TomographyProblem(bases, targets, generator)


def seed_phases(dim: int, rng: np.random.Generator) -> np.ndarray:
    theta = np.zeros(dim)
    theta[1:] = rng.uniform(0.0, 2.0 * np.pi, dim - 1)
    return theta


def make_seed(dim: int, first_basis: ObservableBasis, rng: np.random.Generator) -> PureState:
    """Equal-modulus seed sum_k e^{i theta_k} phi_k / sqrt(d) with theta_0 = 0.

    Only the d - 1 phases theta_1..theta_{d-1} are random.
    """
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    _check_dims(dim, first_basis.dim)
    coeffs = np.exp(1j * seed_phases(dim, rng)) / np.sqrt(dim)
    return PureState.from_vector(first_basis.vectors @ coeffs)


def first_acting_basis(problem: TomographyProblem, order: str) -> ObservableBasis:
    return problem.bases[problem.factor_indices(order)[0]]


# -- iteration ---------------------------------------------------------------


def residual_rows(problem: TomographyProblem, psi: np.ndarray) -> np.ndarray:
    """Distributional residual of each row against the problem's targets."""
    sq = np.zeros(psi.shape[0])
    for B, t in zip(problem.bases, problem.targets):
        coeffs = np.sum(np.conj(B.vectors)[None, :, :] * psi[:, :, None], axis=1)
        diff = np.abs(coeffs) - np.sqrt(t.probs)[None, :]
        sq += np.sum(diff * diff, axis=1)
    return np.sqrt(sq / problem.m)


def _iterate_rows(problem: TomographyProblem, psi: np.ndarray, config: SolverConfig):
    psi = np.array(psi, dtype=np.complex128, copy=True)
    n = psi.shape[0]
    iters = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)
    active = np.arange(n)
    for _ in range(config.max_iters):
        if active.size == 0:
            break
        cur = psi[active]
        new = relaxed_rows(problem, cur, config.lam, config.composition_order)
        step = bures_batch(new, cur)
        psi[active] = new
        done = step < config.conv_tol
        converged[active[done]] = True
        iters[active[~done]] += 1
        active = active[~done]
    return psi, iters, converged


def _records_from_rows(problem, psi, iters, converged, config, offset=0) -> list:
    res = residual_rows(problem, psi)
    out = []
    for i in range(psi.shape[0]):
        out.append(
            FixedPointRecord(
                state=PureState.from_vector(psi[i]),
                is_physical=bool(res[i] <= config.physical_tol),
                distributional_residual=float(res[i]),
                iterations=int(iters[i]),
                seed_index=offset + i,
                converged=bool(converged[i]),
            )
        )
    return out


def iterate(problem: TomographyProblem, seed, config: SolverConfig = SolverConfig(), seed_index: int = 0) -> FixedPointRecord:
    """Iterate one seed to a fixed point.

    ``iterations`` counts the applications that moved the state by at least
    ``conv_tol``; the returned state is the image produced by the final,
    confirming application. A run that hits ``max_iters`` comes back with
    ``converged=False``.
    """
    vec = seed.amplitudes if isinstance(seed, PureState) else np.asarray(seed, dtype=np.complex128)
    _check_dims(problem.dim, vec.shape[0])
    psi, iters, conv = _iterate_rows(problem, vec[None, :], config)
    return _records_from_rows(problem, psi, iters, conv, config, seed_index)[0]


def seed_matrix(problem: TomographyProblem, config: SolverConfig) -> np.ndarray:
    """Seeds for :func:`enumerate_partners`, one per row.

    Seed i draws its phases from ``stream_rng(master_seed, 0, i)``.
    """
    d = problem.dim
    first = first_acting_basis(problem, config.composition_order)
    n = config.seeds_for(d)
    seeds = np.empty((n, d), dtype=np.complex128)
    for i in range(n):
        rng = stream_rng(config.master_seed, _SEED_STREAM, i)
        seeds[i] = make_seed(d, first, rng).amplitudes
    return seeds


def run_seeds(problem: TomographyProblem, config: SolverConfig) -> list:
    """Iterate every seed; returns one record per seed in seed order."""
    seeds = seed_matrix(problem, config)
    chunks = [(start, seeds[start : start + CHUNK]) for start in range(0, seeds.shape[0], CHUNK)]

    def work(item):
        start, rows = item
        psi, iters, conv = _iterate_rows(problem, rows, config)
        return _records_from_rows(problem, psi, iters, conv, config, start)

    if config.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return [rec for part in parts for rec in part]


def cluster_records(records: Sequence[FixedPointRecord], dedup_tol: float):
    """Greedy merge of physical, converged records in seed order.

    Returns the clusters and the saturation curve sampled at powers of two
    and at the final seed count.
    """
    clusters: list[Cluster] = []
    reps = None
    saturation = []
    n = len(records)
    checkpoints = {1 << k for k in range(n.bit_length())} | {n}
    for i, rec in enumerate(records, start=1):
        if rec.is_physical and rec.converged:
            vec = rec.state.amplitudes
            if reps is None:
                reps = vec[None, :]
                clusters.append(Cluster(rec))
            else:
                dist = bures_batch(reps, np.broadcast_to(vec, reps.shape))
                j = int(np.argmin(dist))
                if dist[j] <= dedup_tol:
                    clusters[j].multiplicity += 1
                else:
                    reps = np.vstack([reps, vec[None, :]])
                    clusters.append(Cluster(rec))
        if i in checkpoints:
            saturation.append((i, len(clusters)))
    return clusters, saturation


def looks_continuous(clusters: Sequence[Cluster], saturation: Sequence[tuple]) -> bool:
    """Heuristic test for a non-isolated solution set.

    Isolated solutions get hit again and again once there are more seeds than
    solutions. A continuum shows up as many clusters, most of them hit by a
    single seed, with the cluster count still growing over the last doubling
    of the seed count.
    """
    if len(clusters) <= CONTINUUM_MIN_CLUSTERS:
        return False
    singletons = sum(1 for c in clusters if c.multiplicity == 1)
    if singletons < 0.5 * len(clusters):
        return False
    if len(saturation) >= 2:
        (n_half, c_half), (n_all, c_all) = saturation[-2], saturation[-1]
        if n_all > n_half and c_all <= c_half:
            return False
    return True


def enumerate_partners(problem: TomographyProblem, config: SolverConfig = SolverConfig()) -> SolutionSet:
    """Find the distinct physical fixed points reachable from the seeds."""
    records = run_seeds(problem, config)
    clusters, saturation = cluster_records(records, config.dedup_tol)
    n_unconv = sum(1 for r in records if not r.converged)
    n_nonphys = sum(1 for r in records if r.converged and not r.is_physical)
    result = SolutionSet(
        clusters=clusters,
        n_seeds=len(records),
        n_nonphysical=n_nonphys,
        n_unconverged=n_unconv,
        saturation=saturation,
        continuum_flag=looks_continuous(clusters, saturation),
    )
    if result.anomaly:
        log.warning("no physical fixed point found from %d seeds (%d unconverged)", len(records), n_unconv)
    return result


# -- probes ------------------------------------------------------------------


@dataclass
class ProbeReport:
    complete: bool
    n_tested: int
    cluster_counts: list = field(default_factory=list)
    counterexample: Optional[PureState] = None
    counterexample_partners: list = field(default_factory=list)
    anomalies: int = 0


def generator_rng(master_seed: int, index: int) -> np.random.Generator:
    return stream_rng(master_seed, _GENERATOR_STREAM, index)


def completeness_probe(bases: Sequence[ObservableBasis], n_generators: int, config: SolverConfig = SolverConfig()) -> ProbeReport:
    """Search for a generator with a Pauli partner.

    ``complete=True`` only means that none of the sampled generators had more
    than one physical fixed point.
    """
    bases = tuple(bases)
    if n_generators < 1:
        raise ValueError("n_generators must be at least 1")
    d = bases[0].dim
    report = ProbeReport(complete=True, n_tested=0)
    for i in range(n_generators):
        gen = random_state(d, generator_rng(config.master_seed, i))
        sol = enumerate_partners(synthesize_problem(gen, bases), config)
        report.n_tested += 1
        report.cluster_counts.append(sol.cardinality_estimate)
        if sol.anomaly:
            report.anomalies += 1
        if sol.cardinality_estimate >= 2:
            report.complete = False
            report.counterexample = gen
            report.counterexample_partners = sol.states()
            break
    return report


def random_near_identity(dim: int, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Unitary exp(i eps H) with ||H||_F = 1, hence ||U - 1||_F <= eps."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (z + z.conj().T) / 2.0
    h /= np.linalg.norm(h)
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * epsilon * vals)[None, :]) @ vecs.conj().T


def perturb_bases(bases: Sequence[ObservableBasis], epsilon: float, master_seed: int) -> tuple:
    out = []
    for j, B in enumerate(bases):
        rng = stream_rng(master_seed, _PERTURB_STREAM, j)
        u = random_near_identity(B.dim, epsilon, rng)
        out.append(ObservableBasis(orthonormalize(u @ B.vectors), f"{B.label}~"))
    return tuple(out)


@dataclass
class PerturbationReport:
    epsilon: float
    baseline: ProbeReport
    perturbed: ProbeReport
    perturbed_bases: tuple

    @property
    def incompleteness_persisted(self) -> bool:
        return (not self.baseline.complete) and (not self.perturbed.complete)

    @property
    def verdict_unchanged(self) -> bool:
        return self.baseline.complete == self.perturbed.complete


def perturbation_probe(
    bases: Sequence[ObservableBasis],
    epsilon: float,
    config: SolverConfig = SolverConfig(),
    n_generators: int = 20,
) -> PerturbationReport:
    """Re-run the completeness probe after rotating every basis by a random
    unitary within Frobenius distance ``epsilon`` of the identity."""
    if not (0.0 <= epsilon <= 1e-2):
        raise ValueError(f"epsilon must lie in [0, 1e-2], got {epsilon!r}")
    bases = tuple(bases)
    baseline = completeness_probe(bases, n_generators, config)
    if epsilon == 0.0:
        moved = bases
    else:
        moved = perturb_bases(bases, epsilon, config.master_seed)
    perturbed = completeness_probe(moved, n_generators, config)
    return PerturbationReport(epsilon, baseline, perturbed, moved)


# -- bifurcation sweep -------------------------------------------------------


def geodesic(start: PureState, end: PureState) -> Callable[[float], PureState]:
    """Shortest path between two rays, parametrised by t in [0, 1].

    The end point's global phase is aligned with the start point and the
    path is the great circle through both unit vectors.
    """
    _check_dims(start.dim, end.dim)
    a = start.amplitudes
    ov = np.vdot(end.amplitudes, a)
    b = end.amplitudes * (ov / abs(ov) if abs(ov) > 0 else 1.0)
    omega = float(np.arccos(np.clip(abs(ov), 0.0, 1.0)))

    def path(t: float) -> PureState:
        if omega < 1e-15:
            return start
        vec = (np.sin((1.0 - t) * omega) * a + np.sin(t * omega) * b) / np.sin(omega)
        return PureState.from_vector(vec)

    return path


def nearest_eigenvector(bases: Sequence[ObservableBasis], state: PureState) -> tuple:
    """(Bures distance, basis label, index) of the basis vector closest to ``state``."""
    best = (np.inf, "", -1)
    for j, B in enumerate(bases):
        for k in range(B.dim):
            dist = bures(B.vectors[:, k], state)
            if dist < best[0]:
                best = (dist, B.label or str(j), k)
    return best


@dataclass
class SweepPoint:
    t: float
    generator: PureState
    cardinality: int
    nearest_eigenvector_distance: float
    nearest_eigenvector: tuple  # (basis label, index)
    anomaly: bool = False


@dataclass
class Bracket:
    lower: SweepPoint
    upper: SweepPoint

    @property
    def t_interval(self) -> tuple:
        return (self.lower.t, self.upper.t)

    @property
    def nearest_eigenvector_distance(self) -> float:
        return min(self.lower.nearest_eigenvector_distance, self.upper.nearest_eigenvector_distance)


@dataclass
class SweepResult:
    points: list
    brackets: list

    @property
    def counts(self) -> list:
        return [(p.t, p.cardinality) for p in self.points]


def bifurcation_sweep(
    bases: Sequence[ObservableBasis],
    path: Callable[[float], PureState],
    t_grid: Sequence[float],
    config: SolverConfig = SolverConfig(),
) -> SweepResult:
    """Count physical fixed points along a curve of generator states.

    Every grid interval over which the count changes is reported as a
    bracket; no refinement inside the interval is attempted.
    """
    bases = tuple(bases)
    points = []
    for t in t_grid:
        gen = path(float(t))
        sol = enumerate_partners(synthesize_problem(gen, bases), config)
        dist, label, k = nearest_eigenvector(bases, gen)
        points.append(SweepPoint(float(t), gen, sol.cardinality_estimate, dist, (label, k), sol.anomaly))
    brackets = [
        Bracket(lo, hi) for lo, hi in zip(points[:-1], points[1:]) if lo.cardinality != hi.cardinality
    ]
    return SweepResult(points, brackets)
