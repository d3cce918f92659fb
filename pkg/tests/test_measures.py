import numpy as np
import pytest

from rdelab import (
    MarkovMeasure,
    WordMeasure,
    invariance_residual,
    markov_to_word,
    mix,
    pushforward,
    pushforward_markov,
    restrict,
    stationary_starts,
)
from rdelab.measures import MeasureError


class TestStationaryStarts:
    def test_worked_example(self, gm, gm_measure):
        assert gm_measure.starts[0] == pytest.approx([0.75, 0.25], abs=1e-12)
        assert gm_measure.starts[1] == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_matches_eigenvector_oracle(self, gm, gm_measure):
        cycle = gm_measure.transitions[0] @ gm_measure.transitions[1]
        w, v = np.linalg.eig(cycle.T)
        p = np.abs(v[:, np.argmax(w.real)].real)
        p /= p.sum()
        assert gm_measure.starts[0] == pytest.approx(p, abs=1e-10)

    def test_doubly_stochastic_gives_uniform(self, full2):
        mu = stationary_starts(full2, [np.full((2, 2), 0.5)])
        assert mu.starts[0] == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_identity_chain_flagged_non_unique(self, id2):
        mu = stationary_starts(id2, [np.eye(2)])
        assert any("non-unique" in f for f in mu.flags)
        assert mu.starts[0] == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_support_condition_enforced(self, gm):
        bad = [np.full((2, 2), 0.5), np.full((2, 2), 0.5)]  # mass on b->b
        with pytest.raises(MeasureError, match="forbidden edge"):
            stationary_starts(gm, bad)


class TestInvarianceResidual:
    def test_constructed_measures_are_invariant(self, gm_measure):
        assert invariance_residual(gm_measure) <= 1e-12

    def test_uniform_starts_fail_by_a_half(self, gm, gm_measure):
        lopsided = MarkovMeasure(
            bundle=gm,
            transitions=gm_measure.transitions,
            starts=(np.array([0.5, 0.5]), np.array([0.5, 0.5])),
            check=False,
        )
        assert invariance_residual(lopsided) == pytest.approx(0.5, abs=1e-12)

    def test_constructor_rejects_inconsistent_starts(self, gm, gm_measure):
        with pytest.raises(MeasureError, match="orbit consistent"):
            MarkovMeasure(
                bundle=gm,
                transitions=gm_measure.transitions,
                starts=(np.array([0.5, 0.5]), np.array([0.5, 0.5])),
            )

    def test_pushforward_of_invariant_is_identical(self, gm_measure):
        pushed = pushforward_markov(gm_measure)
        assert invariance_residual(pushed) <= 1e-12
        for omega in range(2):
            assert pushed.starts[omega] == pytest.approx(
                gm_measure.starts[omega], abs=1e-12
            )


class TestWordMeasures:
    def test_horizon_one_is_the_start_vector(self, gm, gm_measure):
        nu = markov_to_word(gm_measure, 1)
        assert nu.weight(0, (0,)) == pytest.approx(0.75, abs=1e-12)
        assert nu.weight(1, (1,)) == pytest.approx(0.5, abs=1e-12)

    def test_two_step_weight(self, gm_measure):
        nu = markov_to_word(gm_measure, 2)
        assert nu.weight(1, (1, 0)) == pytest.approx(0.5, abs=1e-12)

    def test_forbidden_word_has_zero_weight(self, gm_measure):
        nu = markov_to_word(gm_measure, 2)
        assert nu.weight(1, (1, 1)) == 0.0

    def test_weights_validate_support_and_normalization(self, gm):
        with pytest.raises(MeasureError, match="inadmissible"):
            WordMeasure(
                bundle=gm, horizon=2, weights=({(0, 0): 1.0}, {(1, 1): 1.0})
            )
        with pytest.raises(MeasureError, match="sum"):
            WordMeasure(
                bundle=gm, horizon=1, weights=({(0,): 0.9}, {(0,): 1.0})
            )


class TestPushforward:
    def test_invariant_markov_pushforward_is_restriction(self, gm_measure):
        nu = markov_to_word(gm_measure, 5)
        pushed = pushforward(nu)
        direct = markov_to_word(gm_measure, 4)
        for omega in range(2):
            keys = set(pushed.weights[omega]) | set(direct.weights[omega])
            for w in keys:
                assert pushed.weight(omega, w) == pytest.approx(
                    direct.weight(omega, w), abs=1e-12
                )

    def test_point_mass_shifts(self, gm):
        nu = WordMeasure(
            bundle=gm,
            horizon=3,
            weights=({(0, 0, 1): 1.0}, {(0, 1, 0): 1.0}),
        )
        pushed = pushforward(nu)
        # theta swaps the fibers
        assert pushed.weight(1, (0, 1)) == 1.0
        assert pushed.weight(0, (1, 0)) == 1.0

    def test_uniform_triple_collapses(self, gm):
        nu = WordMeasure(
            bundle=gm,
            horizon=2,
            weights=(
                {(0, 0): 0.25, (0, 1): 0.25, (1, 0): 0.25, (1, 1): 0.25},
                {(0, 0): 1 / 3, (0, 1): 1 / 3, (1, 0): 1 / 3},
            ),
        )
        pushed = pushforward(nu)
        assert pushed.weight(0, (0,)) == pytest.approx(2 / 3, abs=1e-12)
        assert pushed.weight(0, (1,)) == pytest.approx(1 / 3, abs=1e-12)

    def test_single_coordinate_rejected(self, gm, gm_measure):
        with pytest.raises(MeasureError, match="horizon"):
            pushforward(markov_to_word(gm_measure, 1))


class TestMixAndRestrict:
    def test_mix_identity(self, gm_measure):
        nu = markov_to_word(gm_measure, 2)
        same = mix([nu], [1.0])
        for omega in range(2):
            assert same.weights[omega] == nu.weights[omega]

    def test_mix_two_point_masses(self, gm):
        a = WordMeasure(bundle=gm, horizon=1, weights=({(0,): 1.0}, {(0,): 1.0}))
        b = WordMeasure(bundle=gm, horizon=1, weights=({(1,): 1.0}, {(1,): 1.0}))
        m = mix([a, b], [0.5, 0.5])
        assert m.weight(0, (0,)) == m.weight(0, (1,)) == 0.5

    def test_mix_horizon_mismatch(self, gm, gm_measure):
        with pytest.raises(MeasureError, match="horizon"):
            mix([markov_to_word(gm_measure, 2), markov_to_word(gm_measure, 3)], [0.5, 0.5])

    def test_mix_requires_simplex_weights(self, gm_measure):
        nu = markov_to_word(gm_measure, 2)
        with pytest.raises(MeasureError, match="simplex"):
            mix([nu, nu], [0.7, 0.7])

    def test_restrict_marginalizes_right(self, gm_measure):
        nu = markov_to_word(gm_measure, 4)
        short = restrict(nu, 2)
        direct = markov_to_word(gm_measure, 2)
        for omega in range(2):
            for w, x in direct.weights[omega].items():
                assert short.weight(omega, w) == pytest.approx(x, abs=1e-12)
