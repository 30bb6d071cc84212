import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliprobe.hilbert import DimensionMismatch, PureState, born_probabilities, random_basis, random_state
from pauliprobe.metrics import (
    bures,
    bures_overlap_form,
    check_bound,
    distributional,
    hellinger,
    hellinger_overlap_form,
    hellinger_states,
)

from oracles import bures_oracle, hellinger_oracle

E0 = PureState(np.array([1.0, 0.0]))
E1 = PureState(np.array([0.0, 1.0]))


def _dirichlet(rng, d):
    return rng.dirichlet(np.ones(d))


class TestHellinger:
    def test_identity(self):
        assert hellinger([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_disjoint_support(self):
        assert hellinger([1, 0], [0, 1]) == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_half_vs_delta(self):
        # hand evaluation: (sqrt(1/2) - 1)^2 + 1/2 = 2 - sqrt(2)
        expected = hellinger_oracle([0.5, 0.5], [1, 0])
        assert expected == pytest.approx(math.sqrt(2 - math.sqrt(2)), abs=1e-15)
        assert hellinger([0.5, 0.5], [1, 0]) == pytest.approx(0.7653668647301795, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hellinger([1, 0], [1, 0, 0])

    def test_two_formulas_agree(self, rng):
        for _ in range(500):
            d = int(rng.integers(2, 9))
            p, q = _dirichlet(rng, d), _dirichlet(rng, d)
            assert abs(hellinger(p, q) - hellinger_overlap_form(p, q)) < 1e-10
            assert abs(hellinger(p, q) - hellinger_oracle(p, q)) < 1e-12


class TestStates:
    def test_hellinger_states_identity(self, rng):
        B = random_basis(3, rng)
        a = random_state(3, rng)
        assert hellinger_states(B, a, a) == 0.0

    def test_pauli_partners_have_zero_hellinger(self, pauli):
        # the two B_y elements share the B_x and B_z statistics
        by = pauli.get("B_y")
        a, b = by.state(0), by.state(1)
        for label in ("B_x", "B_z"):
            assert hellinger_states(pauli.get(label), a, b) < 1e-15
        assert bures(a, b) == pytest.approx(math.sqrt(2))

    def test_distributional_single_basis_reduces(self, rng):
        B = random_basis(4, rng)
        a, b = random_state(4, rng), random_state(4, rng)
        assert distributional([B], a, b) == pytest.approx(hellinger_states(B, a, b), abs=1e-15)

    def test_distributional_hand_example(self, pauli):
        # B_x contributes D^2 = 2, B_z contributes 0: sqrt((2 + 0) / 2) = 1
        bases = [pauli.get("B_x"), pauli.get("B_z")]
        assert distributional(bases, E0, E1) == pytest.approx(1.0, abs=1e-15)

    def test_distributional_requires_bases(self):
        with pytest.raises(ValueError):
            distributional([], E0, E1)

    def test_commuting_reduction(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 7))
            B = random_basis(d, rng)
            a, b = random_state(d, rng), random_state(d, rng)
            m = int(rng.integers(1, 5))
            assert abs(distributional([B] * m, a, b) - hellinger_states(B, a, b)) < 1e-12


class TestBures:
    def test_examples(self):
        assert bures(E0, E0) == 0.0
        assert bures(E0, E1) == pytest.approx(math.sqrt(2), abs=1e-15)
        # |<a,b>| = 1/2  ->  sqrt(2 - 1) = 1
        b = PureState.from_vector([0.5, math.sqrt(3) / 2])
        assert bures(E0, b) == pytest.approx(1.0, abs=1e-15)

    def test_phase_invariance(self, rng):
        a, b = random_state(3, rng), random_state(3, rng)
        rotated = np.exp(1.234j) * b.amplitudes
        assert bures(a, rotated) == pytest.approx(bures(a, b), abs=1e-15)

    def test_matches_overlap_form_and_oracle(self, rng):
        for _ in range(500):
            d = int(rng.integers(2, 9))
            a, b = random_state(d, rng), random_state(d, rng)
            ref = bures_oracle(list(a.amplitudes), list(b.amplitudes))
            assert abs(bures(a, b) - ref) < 1e-10
            assert abs(bures_overlap_form(a, b) - ref) < 1e-12

    def test_resolves_tiny_distances(self, rng):
        a = random_state(3, rng)
        direction = random_state(3, rng).amplitudes
        tangent = direction - np.vdot(a.amplitudes, direction) * a.amplitudes
        tangent /= np.linalg.norm(tangent)
        b = PureState.from_vector(a.amplitudes + 1e-11 * tangent)
        assert bures(a, b) == pytest.approx(1e-11, rel=1e-3)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            bures(E0, PureState.from_vector([1, 0, 0]))


class TestCheckBound:
    def test_identical_states(self, pauli):
        rep = check_bound(pauli.bases, E0, E0)
        assert rep.bures == 0.0 and rep.distributional == 0.0
        assert rep.per_basis_hellinger == [0.0, 0.0, 0.0]
        assert not rep.violation

    def test_partner_pair(self, pauli):
        by = pauli.get("B_y")
        rep = check_bound([pauli.get("B_x"), pauli.get("B_z")], by.state(0), by.state(1))
        assert rep.distributional < 1e-15
        assert rep.bures > 1.0

    def test_random_instances(self, rng):
        for _ in range(300):
            d = int(rng.integers(2, 9))
            bases = [random_basis(d, rng) for _ in range(int(rng.integers(1, 5)))]
            rep = check_bound(bases, random_state(d, rng), random_state(d, rng))
            assert not rep.violation
            assert 0 <= rep.distributional <= math.sqrt(2) + 1e-12
            assert 0 <= rep.bures <= math.sqrt(2) + 1e-12

    def test_to_dict_fields(self, pauli):
        rep = check_bound(pauli.bases, E0, E1)
        assert set(rep.to_dict()) >= {"bures", "distributional", "per_basis_hellinger"}


def _triple(seed, d):
    rng = np.random.default_rng(seed)
    return rng, [random_state(d, rng) for _ in range(3)]


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_symmetry(d, seed):
    rng, (a, b, _) = _triple(seed, d)
    bases = [random_basis(d, rng) for _ in range(3)]
    assert abs(bures(a, b) - bures(b, a)) <= 1e-12
    assert abs(distributional(bases, a, b) - distributional(bases, b, a)) <= 1e-12
    assert abs(hellinger_states(bases[0], a, b) - hellinger_states(bases[0], b, a)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_triangle_inequalities(d, seed):
    rng, (a, b, c) = _triple(seed, d)
    bases = [random_basis(d, rng) for _ in range(2)]
    assert bures(a, c) <= bures(a, b) + bures(b, c) + 1e-10
    assert distributional(bases, a, c) <= distributional(bases, a, b) + distributional(bases, b, c) + 1e-10
    pa, pb, pc = (born_probabilities(bases[0], s) for s in (a, b, c))
    assert hellinger(pa, pc) <= hellinger(pa, pb) + hellinger(pb, pc) + 1e-10
