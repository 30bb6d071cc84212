import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliprobe.catalog import computational_basis
from pauliprobe.hilbert import DimensionMismatch, PureState, born_probabilities, random_basis, random_state
from pauliprobe.imposition import (
    DEFAULT_ORDER,
    FORWARD_ORDER,
    TomographyProblem,
    impose,
    impose_composite,
    impose_relaxed,
    lipschitz_ratio,
)
from pauliprobe.metrics import bures
from pauliprobe.solver import synthesize_problem

from conftest import columns, perturb_state
from oracles import impose_oracle, ray_equal

DIMS = range(2, 7)


def _instance(rng, d):
    B = random_basis(d, rng)
    phi = random_state(d, rng)
    return B, phi, born_probabilities(B, phi), random_state(d, rng)


class TestImpose:
    def test_generator_is_fixed(self, rng):
        std = computational_basis(3)
        phi = random_state(3, rng)
        out = impose(std, born_probabilities(std, phi), phi)
        assert bures(out, phi) < 1e-12

    def test_d2_substitution(self):
        a, b, theta = 0.6, 0.8, 0.7
        state = np.array([1, np.exp(1j * theta)]) / math.sqrt(2)
        out = impose(computational_basis(2), [a * a, b * b], state)
        assert ray_equal(out.amplitudes, [a, b * np.exp(1j * theta)], 1e-14)

    def test_zero_overlap_rule(self):
        # state orthogonal to phi_0 with a surviving phase beta on phi_1
        beta = 1.1
        state = np.array([0.0, np.exp(1j * beta)])
        out = impose(computational_basis(2), [0.5, 0.5], state)
        expected = np.array([1.0, np.exp(1j * beta)]) / math.sqrt(2)
        assert ray_equal(out.amplitudes, expected, 1e-14)

    def test_matches_oracle(self, rng):
        for _ in range(200):
            d = int(rng.integers(2, 7))
            B, phi, p, psi = _instance(rng, d)
            ref = impose_oracle(columns(B), list(p.probs), list(psi.amplitudes))
            assert ray_equal(impose(B, p, psi).amplitudes, ref, 1e-12)

    def test_output_statistics_exact(self, rng):
        for d in DIMS:
            for _ in range(200):
                B, phi, p, psi = _instance(rng, d)
                out = impose(B, p, psi)
                assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-12
                assert np.max(np.abs(born_probabilities(B, out).probs - p.probs)) < 1e-10

    def test_dimension_mismatch(self, pauli):
        with pytest.raises(DimensionMismatch):
            impose(pauli.get("B_x"), [0.5, 0.5], PureState.from_vector([1, 0, 0]))

    def test_invalid_target(self, pauli):
        with pytest.raises(ValueError):
            impose(pauli.get("B_x"), [0.5, 0.6], PureState.from_vector([1, 0]))


class TestComposite:
    def test_generator_fixed(self, rng):
        for d in DIMS:
            phi = random_state(d, rng)
            prob = synthesize_problem(phi, [random_basis(d, rng) for _ in range(3)])
            for order in (DEFAULT_ORDER, FORWARD_ORDER):
                assert bures(impose_composite(prob, phi, order), phi) < 1e-12

    def test_single_factor_equals_impose(self, rng):
        B, phi, p, psi = _instance(rng, 4)
        prob = TomographyProblem([B], [p])
        assert impose_composite(prob, psi) == impose(B, p, psi)

    def test_default_order_ends_with_first_basis(self, pauli, rng):
        # with the default order the first listed basis acts last, so its
        # statistics are exact in the output
        by = pauli.get("B_y")
        prob = synthesize_problem(by.state(0), [pauli.get("B_x"), pauli.get("B_z")])
        psi = random_state(2, rng)
        # oracle: apply the factors by hand, last basis first
        step = impose(prob.bases[1], prob.targets[1], psi)
        step = impose(prob.bases[0], prob.targets[0], step)
        out = impose_composite(prob, psi)
        assert bures(out, step) < 1e-14
        np.testing.assert_allclose(born_probabilities(prob.bases[0], out).probs, prob.targets[0].probs, atol=1e-10)

    def test_forward_order_reverses(self, pauli, rng):
        prob = synthesize_problem(pauli.get("B_y").state(0), [pauli.get("B_x"), pauli.get("B_z")])
        psi = random_state(2, rng)
        step = impose(prob.bases[0], prob.targets[0], psi)
        step = impose(prob.bases[1], prob.targets[1], step)
        assert bures(impose_composite(prob, psi, FORWARD_ORDER), step) < 1e-14

    def test_unknown_order(self, pauli):
        prob = synthesize_problem(PureState.from_vector([1, 0]), pauli.bases)
        with pytest.raises(ValueError):
            impose_composite(prob, prob.generator, "sideways")

    def test_problem_rejects_inconsistent_generator(self, pauli):
        with pytest.raises(ValueError):
            TomographyProblem([pauli.get("B_x")], [[0.5, 0.5]], PureState.from_vector([1, 0]))

    def test_problem_rejects_count_mismatch(self, pauli):
        with pytest.raises(ValueError):
            TomographyProblem([pauli.get("B_x"), pauli.get("B_y")], [[0.5, 0.5]])
        with pytest.raises(ValueError):
            TomographyProblem([], [])


class TestRelaxed:
    def test_lambda_one_is_composite(self, rng):
        phi = random_state(3, rng)
        prob = synthesize_problem(phi, [random_basis(3, rng) for _ in range(2)])
        psi = random_state(3, rng)
        assert impose_relaxed(prob, psi, 1.0) == impose_composite(prob, psi)

    def test_generator_preserved_for_any_lambda(self, rng):
        phi = random_state(3, rng)
        prob = synthesize_problem(phi, [random_basis(3, rng) for _ in range(2)])
        for lam in (1e-6, 0.3, 0.7, 1.0):
            assert bures(impose_relaxed(prob, phi, lam), phi) < 1e-12

    def test_matches_direct_convex_combination(self, rng):
        phi = random_state(3, rng)
        prob = synthesize_problem(phi, [random_basis(3, rng) for _ in range(2)])
        psi = random_state(3, rng)
        lam = 0.4
        image = impose_composite(prob, psi).amplitudes
        image = image * np.vdot(image, psi.amplitudes) / abs(np.vdot(image, psi.amplitudes))
        ref = lam * image + (1 - lam) * psi.amplitudes
        assert ray_equal(impose_relaxed(prob, psi, lam).amplitudes, ref / np.linalg.norm(ref), 1e-12)

    def test_small_lambda_barely_moves(self, rng):
        phi = random_state(3, rng)
        prob = synthesize_problem(phi, [random_basis(3, rng) for _ in range(2)])
        psi = random_state(3, rng)
        assert bures(impose_relaxed(prob, psi, 1e-9), psi) < 1e-8

    @pytest.mark.parametrize("lam", [0.0, -0.1, 1.5])
    def test_lambda_range(self, pauli, lam):
        prob = synthesize_problem(PureState.from_vector([1, 0]), pauli.bases)
        with pytest.raises(ValueError):
            impose_relaxed(prob, prob.generator, lam)


class TestLipschitz:
    def test_coincident_rays_rejected(self, rng):
        B, phi, p, _ = _instance(rng, 3)
        with pytest.raises(ValueError):
            lipschitz_ratio(B, p, phi, phi)

    def test_bounded_by_two(self, rng):
        ratios = []
        for _ in range(5000):
            d = int(rng.integers(2, 7))
            B, phi, p, psi = _instance(rng, d)
            ratios.append(lipschitz_ratio(B, p, phi, psi))
        assert max(ratios) <= 2 + 1e-9

    def test_not_a_contraction_in_d2(self, rng):
        # plain random search over d = 2 configurations
        best = 0.0
        for _ in range(3000):
            B, phi, p, psi = _instance(rng, 2)
            best = max(best, lipschitz_ratio(B, p, phi, psi))
        assert best > 1.0


# Properties of a single imposition on a modest sample here;
# the acceptance suite runs the full 10^3 per dimension.


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_p1_moves_no_further_than_generator(d, seed):
    B, phi, p, psi = _instance(np.random.default_rng(seed), d)
    assert bures(impose(B, p, psi), psi) <= bures(psi, phi) + 1e-9


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_p2_eigenvector_distances_preserved(d, seed):
    B, phi, p, psi = _instance(np.random.default_rng(seed), d)
    out = impose(B, p, psi)
    got = np.abs(B.vectors.conj().T @ out.amplitudes)
    want = np.abs(B.vectors.conj().T @ phi.amplitudes)
    assert np.max(np.abs(got - want)) <= 1e-10


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_p3_distance_to_generator(d, seed):
    B, phi, p, psi = _instance(np.random.default_rng(seed), d)
    dmin = min(bures(B.vectors[:, k], phi) for k in range(d))
    assert abs(dmin - math.sqrt(2) * math.sqrt(1 - np.sqrt(p.probs).max())) <= 1e-10
    assert bures(impose(B, p, psi), phi) <= 2 * dmin + 1e-9


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_p5_local_attractiveness(d, seed):
    rng = np.random.default_rng(seed)
    B, phi, p, _ = _instance(rng, d)
    psi = perturb_state(phi, 1e-3, rng)
    assert bures(impose(B, p, psi), phi) <= bures(psi, phi) + 1e-9


def test_composite_monotone_chain(rng):
    worst = -np.inf
    for d in DIMS:
        for _ in range(1000):
            phi = random_state(d, rng)
            prob = synthesize_problem(phi, [random_basis(d, rng) for _ in range(3)])
            cur = perturb_state(phi, 1e-3, rng)
            prev = bures(cur, phi)
            for j in prob.factor_indices():
                cur = impose(prob.bases[j], prob.targets[j], cur)
                dist = bures(cur, phi)
                worst = max(worst, dist - prev)
                prev = dist
    assert worst <= 1e-9, f"distance grew by {worst:.3e} across one factor"


def test_composite_monotone_chain_inside_conditioned_radius(rng):
    # the neighbourhood on which the chain is monotone shrinks with the
    # smallest coefficient modulus of the fixed point in any imposed basis
    worst = -np.inf
    for d in DIMS:
        for _ in range(1000):
            phi = random_state(d, rng)
            prob = synthesize_problem(phi, [random_basis(d, rng) for _ in range(3)])
            rmin = min(np.sqrt(t.probs).min() for t in prob.targets)
            cur = perturb_state(phi, min(1e-3, 1e-2 * rmin), rng)
            prev = bures(cur, phi)
            for j in prob.factor_indices():
                cur = impose(prob.bases[j], prob.targets[j], cur)
                dist = bures(cur, phi)
                worst = max(worst, dist - prev)
                prev = dist
    assert worst <= 1e-9


def test_attractiveness_defect_is_second_order():
    # the growth allowed by a single factor near the generator shrinks like
    # eps^2, i.e. the map is non-expansive to first order
    worst = {}
    for eps in (1e-2, 1e-3):
        rng = np.random.default_rng(5)
        grow = 0.0
        for _ in range(5000):
            d = int(rng.integers(2, 7))
            B, phi, p, _ = _instance(rng, d)
            psi = perturb_state(phi, eps, rng)
            grow = max(grow, bures(impose(B, p, psi), phi) - bures(psi, phi))
        worst[eps] = grow
    assert worst[1e-2] <= 0.1 * 1e-2**2
    assert worst[1e-3] <= 0.1 * 1e-3**2
