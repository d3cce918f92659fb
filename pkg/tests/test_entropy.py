import math

import numpy as np
import pytest

from rdelab import (
    block_power_system,
    cover_complexity,
    cover_conditional_entropy,
    full_word_partition,
    h_minus_report,
    h_plus_value,
    join,
    markov_to_word,
    mass_shift_entropy_check,
    partition_conditional_entropy,
    partition_entropy_report,
    product_cover,
    product_partitions_finer,
    pullback,
    shannon,
    stationary_starts,
    topological_cover_entropy,
    trivial_cover,
    zero_cylinders,
)
from rdelab.covercomb import global_min_subcover_count
from rdelab.entropy import EnumerationGuardError
from rdelab.harness import gen_instance, random_word_measure
from rdelab.measures import WordMeasure, pushforward

from conftest import brute_assignment_minimum

LN2 = math.log(2)
LN3 = math.log(3)


class TestShannon:
    def test_point_mass(self):
        assert shannon([1.0, 0.0]) == 0.0

    def test_fair_coin(self):
        assert shannon([0.5, 0.5]) == pytest.approx(LN2, abs=1e-12)

    def test_three_quarters(self):
        assert shannon([0.75, 0.25]) == pytest.approx(0.5623351446188083, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            shannon([0.5, -0.1])


class TestMassShiftCheck:
    def test_worked_example(self):
        res = mass_shift_entropy_check([0.3, 0.5], [0.1, 0.1])
        assert res.hypothesis_errors == () and res.holds
        assert res.lhs == pytest.approx(0.7077654315777535, abs=1e-12)
        assert res.rhs == pytest.approx(0.6283829567464145, abs=1e-12)
        assert res.margin == pytest.approx(0.0793824748313390, abs=1e-12)

    def test_zero_first_shift_is_a_hypothesis_error(self):
        res = mass_shift_entropy_check([0.3, 0.5], [0.0, 0.0])
        assert res.holds is None
        assert any("strictly" in e for e in res.hypothesis_errors)

    def test_unsorted_reported(self):
        res = mass_shift_entropy_check([0.5, 0.3], [0.1, 0.1])
        assert any("ascending" in e for e in res.hypothesis_errors)

    def test_unbalanced_shift_reported(self):
        res = mass_shift_entropy_check([0.3, 0.5], [0.1, 0.05])
        assert any("equal delta" in e for e in res.hypothesis_errors)

    def test_fuzzed_draws_all_hold(self):
        rng = np.random.default_rng(0)
        made = 0
        while made < 100:
            k = int(rng.integers(2, 7))
            p = np.sort(rng.dirichlet(np.ones(k + 1))[:k])
            if p[0] <= 1e-6:
                continue
            d1 = float(p[0]) * 0.5
            split = rng.dirichlet(np.ones(k - 1)) * d1
            delta = [d1] + [float(x) for x in split]
            if any(delta[i] >= 1.0 - p[i] for i in range(1, k)):
                continue
            res = mass_shift_entropy_check([float(x) for x in p], delta)
            if res.hypothesis_errors:
                continue
            assert res.holds and res.margin > 0
            made += 1


class TestCoverComplexity:
    def test_worked_value(self, gm):
        expect = 0.5 * (math.log(4) + math.log(3))
        got = cover_complexity(gm, zero_cylinders(gm), 2)
        assert got == pytest.approx(expect, abs=1e-12)
        assert got == pytest.approx(1.242453, abs=1e-6)

    def test_full_shift_linear(self, full2):
        u = zero_cylinders(full2)
        for n in (1, 2, 5):
            assert cover_complexity(full2, u, n) == pytest.approx(n * LN2, abs=1e-12)

    def test_trivial_cover_is_zero(self, gm):
        for n in (1, 3):
            assert cover_complexity(gm, trivial_cover(gm), n) == 0.0


class TestTopologicalCoverEntropy:
    def test_full_shift_exact(self, full2):
        rep = topological_cover_entropy(full2, zero_cylinders(full2), 4)
        assert rep.exact_rate == pytest.approx(LN2, abs=1e-12)
        assert rep.certified_upper == pytest.approx(LN2, abs=1e-12)

    def test_two_fixed_points_zero(self, id2):
        rep = topological_cover_entropy(id2, zero_cylinders(id2), 4)
        assert rep.exact_rate == pytest.approx(0.0, abs=1e-12)

    def test_alternating_golden_mean(self, gm):
        rep = topological_cover_entropy(gm, zero_cylinders(gm), 12)
        assert rep.exact_rate == pytest.approx(0.5 * LN3, abs=1e-12)
        assert 0.549306 <= rep.certified_upper <= 0.70
        mins = rep.prefix_minima()
        assert all(mins[i + 1] <= mins[i] for i in range(len(mins) - 1))
        assert rep.exact_rate <= rep.certified_upper + 1e-9

    def test_no_exact_rate_for_proper_covers(self, gm):
        overlap = product_cover(gm, [[(0,), (1,)], [(1,)]])
        rep = topological_cover_entropy(gm, overlap, 3)
        assert rep.exact_rate is None


class TestConditionalEntropy:
    def test_worked_partition_value(self, gm, gm_measure):
        got = partition_conditional_entropy(gm_measure, zero_cylinders(gm))
        expect = 0.5 * (shannon([0.75, 0.25]) + shannon([0.5, 0.5]))
        assert got == pytest.approx(expect, abs=1e-12)
        assert got == pytest.approx(0.627741, abs=1e-6)

    def test_point_mass_measure_gives_zero(self, gm):
        nu = WordMeasure(
            bundle=gm, horizon=2, weights=({(0, 1): 1.0}, {(1, 0): 1.0})
        )
        assert partition_conditional_entropy(nu, zero_cylinders(gm)) == 0.0
        assert partition_conditional_entropy(nu, full_word_partition(gm, 0, 2)) == 0.0

    def test_trivial_partition_gives_zero(self, gm, gm_measure):
        assert partition_conditional_entropy(gm_measure, trivial_cover(gm)) == 0.0

    def test_partition_agrees_with_cover_modes(self, gm, gm_measure):
        part = zero_cylinders(gm)
        expect = partition_conditional_entropy(gm_measure, part)
        for mode in ("general", "product"):
            assert cover_conditional_entropy(gm_measure, part, mode) == pytest.approx(
                expect, abs=1e-12
            )

    def test_trivial_cover_zero_both_modes(self, gm, gm_measure):
        for mode in ("general", "product"):
            assert cover_conditional_entropy(gm_measure, trivial_cover(gm), mode) == 0.0

    def test_overlap_cover_worked_example(self, gm, gm_measure):
        # elements {a,b} and {b}: the coarse refinement has zero entropy
        u = product_cover(gm, [[(0,), (1,)], [(1,)]])
        assert cover_conditional_entropy(gm_measure, u, "product") == 0.0
        assert cover_conditional_entropy(gm_measure, u, "general") == 0.0

    def test_product_mode_is_minimum_over_refinements(self, gm, gm_measure):
        u = product_cover(gm, [[(0, 0), (0, 1)], [(0, 1), (1, 0)], [(1, 0), (1, 1)]])
        by_enum = min(
            partition_conditional_entropy(gm_measure, p)
            for p in product_partitions_finer(u)
        )
        got = cover_conditional_entropy(gm_measure, u, "product")
        assert got == pytest.approx(by_enum, abs=1e-12)

    def test_general_never_exceeds_product(self, gm, gm_measure):
        u = product_cover(gm, [[(0, 0), (0, 1)], [(0, 1), (1, 0)], [(1, 0), (1, 1)]])
        g = cover_conditional_entropy(gm_measure, u, "general")
        p = cover_conditional_entropy(gm_measure, u, "product")
        assert g <= p + 1e-12

    @pytest.mark.parametrize("seed", [5, 13, 31, 47])
    def test_general_mode_matches_bruteforce(self, seed):
        inst = gen_instance(seed)
        b = inst.bundle
        rng = np.random.default_rng(seed)
        for name in sorted(inst.covers):
            cov = inst.covers[name]
            nu = random_word_measure(b, cov.stop + 1, rng)
            joined = join(cov, pullback(cov, 1))
            got = cover_conditional_entropy(nu, joined, "general")
            expect = 0.0
            skip = False
            for omega in range(b.base.omega_count):
                member = joined.membership(omega)
                masses = {
                    w: x
                    for w, x in nu.window_masses(
                        omega, joined.start, joined.length
                    ).items()
                    if x > 0
                }
                size = 1
                for w in masses:
                    size *= len(member[w])
                if size > 30000:
                    skip = True
                    break
                expect += b.base.weights[omega] * brute_assignment_minimum(
                    masses, member
                )
            if not skip:
                assert got == pytest.approx(expect, abs=1e-11)

    def test_enumeration_guard_in_product_mode(self, gm, gm_measure):
        u = product_cover(
            gm, [[(0, 0), (0, 1)], [(0, 1), (1, 0)], [(1, 0), (1, 1)]]
        )
        with pytest.raises(EnumerationGuardError):
            cover_conditional_entropy(gm_measure, u, "product", enum_cap=3)


class TestRefinementLaws:
    """Bounds, monotonicity, subadditivity, and the shift identity."""

    @pytest.mark.parametrize("seed", [1, 8, 21])
    def test_bounded_by_log_min_subcover(self, seed):
        inst = gen_instance(seed)
        rng = np.random.default_rng(seed + 1)
        names = sorted(inst.covers)
        u = inst.covers[names[0]]
        nu = random_word_measure(inst.bundle, u.stop + 1, rng)
        h = cover_conditional_entropy(nu, u, "general")
        assert -1e-12 <= h <= math.log(global_min_subcover_count(u)) + 1e-9

    @pytest.mark.parametrize("seed", [1, 8, 21])
    def test_finer_is_larger_and_join_subadditive(self, seed):
        inst = gen_instance(seed)
        rng = np.random.default_rng(seed + 2)
        names = sorted(inst.covers)
        u = inst.covers[names[0]]
        v = inst.covers[names[1 % len(names)]]
        w = join(u, v)
        nu = random_word_measure(inst.bundle, w.stop + 1, rng)
        hu = cover_conditional_entropy(nu, u, "general")
        hv = cover_conditional_entropy(nu, v, "general")
        hw = cover_conditional_entropy(nu, w, "general")
        assert hw >= hu - 1e-9
        assert hw <= hu + hv + 1e-9

    @pytest.mark.parametrize("seed", [1, 8, 21, 34])
    def test_pullback_shift_identity(self, seed):
        inst = gen_instance(seed)
        rng = np.random.default_rng(seed + 3)
        names = sorted(inst.covers)
        u = inst.covers[names[0]]
        nu = random_word_measure(inst.bundle, u.stop + 1, rng)
        lhs = cover_conditional_entropy(nu, pullback(u, 1), "general")
        rhs = cover_conditional_entropy(pushforward(nu), u, "general")
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_subcover_partition_witnesses_corollary(self, gm, gm_measure):
        # build the refinement from a minimal subcover by first-containing
        # assignment; it refines the cover, uses at most the subcover's many
        # cells with positive mass, and cannot beat the exact infimum
        u = product_cover(gm, [[(0,), (1,)], [(1,)]])
        from rdelab.covercomb import min_subcover_count

        sup_n = max(min_subcover_count(u, om) for om in range(2))
        nu = markov_to_word(gm_measure, u.stop)
        total = 0.0
        for omega in range(2):
            member = u.membership(omega)
            cells = {}
            for w, x in nu.window_masses(omega, u.start, u.length).items():
                cells[member[w][0]] = cells.get(member[w][0], 0.0) + x
            assert len([c for c, x in cells.items() if x > 0]) <= sup_n
            total += 0.5 * shannon(cells.values())
        assert total >= cover_conditional_entropy(gm_measure, u, "general") - 1e-12


class TestRateReports:
    def test_partition_rate_chain_rule(self, gm, gm_measure):
        rep = partition_entropy_report(gm_measure, zero_cylinders(gm), 6)
        assert rep.exact_rate == pytest.approx(0.75 * LN2, abs=1e-12)
        assert rep.exact_rate == pytest.approx(0.519860, abs=1e-6)
        assert rep.certified_upper >= rep.exact_rate - 1e-9

    def test_uniform_bernoulli_full_shift(self, full2):
        mu = stationary_starts(full2, [np.full((2, 2), 0.5)])
        rep = partition_entropy_report(mu, zero_cylinders(full2), 3)
        assert rep.exact_rate == pytest.approx(LN2, abs=1e-12)

    def test_deterministic_chain_rate_zero(self, full2):
        mu = stationary_starts(full2, [np.array([[0.0, 1.0], [1.0, 0.0]])])
        rep = partition_entropy_report(mu, zero_cylinders(full2), 4)
        assert rep.exact_rate == pytest.approx(0.0, abs=1e-12)
        # two equally likely deterministic orbits: the step-n average is ln2/n
        for n, v in rep.sequence:
            assert v == pytest.approx(LN2 / n, abs=1e-12)

    def test_hminus_on_partition_matches_rate_sequence(self, gm, gm_measure):
        part = zero_cylinders(gm)
        a = h_minus_report(gm_measure, part, 4)
        b = partition_entropy_report(gm_measure, part, 4)
        assert a.sequence == b.sequence

    def test_hminus_decreases_toward_chain_rate(self, gm, gm_measure):
        rep = h_minus_report(gm_measure, zero_cylinders(gm), 8)
        values = [v for _, v in rep.sequence]
        assert all(values[i + 1] <= values[i] + 1e-12 for i in range(len(values) - 1))
        assert values[-1] == pytest.approx(0.53334, abs=1e-4)
        assert rep.certified_upper >= 0.75 * LN2 - 1e-12

    def test_hminus_rejects_non_invariant(self, gm, gm_measure):
        from rdelab.measures import MarkovMeasure

        broken = MarkovMeasure(
            bundle=gm,
            transitions=gm_measure.transitions,
            starts=(np.array([0.5, 0.5]), np.array([0.5, 0.5])),
            check=False,
        )
        with pytest.raises(ValueError, match="invariant"):
            h_minus_report(broken, zero_cylinders(gm), 2)

    def test_hminus_finite_values_below_complexity(self, gm, gm_measure):
        u = product_cover(gm, [[(0,), (1,)], [(1,)]])
        rep = h_minus_report(gm_measure, u, 4)
        for n, v in rep.sequence:
            assert v * n <= cover_complexity(gm, u, n) + 1e-9


class TestHPlus:
    def test_partition_case_equals_rate(self, gm, gm_measure):
        part = zero_cylinders(gm)
        res = h_plus_value(gm_measure, part, 4)
        rep = partition_entropy_report(gm_measure, part, 4)
        assert res.value == pytest.approx(rep.certified_upper, abs=1e-12)

    def test_overlap_cover_minimizes_over_two(self, gm, gm_measure):
        u = product_cover(gm, [[(0,), (1,)], [(1,)]])
        res = h_plus_value(gm_measure, u, 4)
        assert len(res.candidate_values) == 2
        assert res.value == pytest.approx(min(res.candidate_values), abs=1e-15)
        assert res.value == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", [6, 19])
    def test_upper_bounds_hminus(self, seed):
        inst = gen_instance(seed)
        mu = inst.measures[sorted(inst.measures)[0]]
        for name in sorted(inst.covers):
            cov = inst.covers[name]
            if not cov.product_form:
                continue
            enum = product_partitions_finer(cov, enum_cap=64)
            if enum.lazy:
                continue
            minus = h_minus_report(mu, cov, 3).certified_upper
            plus = h_plus_value(mu, cov, 3, enum_cap=64).value
            assert minus <= plus + 1e-9
            break


class TestPowerSystem:
    def test_single_step_reproduces_base(self, gm):
        ps = block_power_system(gm, zero_cylinders(gm), 1)
        assert ps.block_alphabet_sizes() == (2, 2)
        from rdelab import word_count

        for omega in range(2):
            for k in (1, 2, 4):
                assert ps.block_word_count(omega, k) == word_count(gm, omega, k)

    def test_two_step_blocks(self, gm):
        ps = block_power_system(gm, zero_cylinders(gm), 2)
        assert ps.block_alphabet_sizes() == (4, 3)
        from rdelab import word_count

        for omega in range(2):
            for k in (1, 2, 3):
                assert ps.block_word_count(omega, k) == word_count(gm, omega, 2 * k)

    @pytest.mark.parametrize("steps", [2, 3])
    def test_rate_identity_with_base(self, gm, gm_measure, steps):
        ps = block_power_system(gm, zero_cylinders(gm), steps)
        power = ps.h_value_sequence(gm_measure, 3)
        base = h_minus_report(gm_measure, zero_cylinders(gm), 3 * steps)
        base_vals = dict(base.sequence)
        for k, v in power.sequence:
            assert v / steps == pytest.approx(base_vals[k * steps], abs=1e-9)

    def test_requires_anchored_cover(self, gm):
        from rdelab.covers import CoverError

        shifted = pullback(zero_cylinders(gm), 1)
        with pytest.raises(CoverError, match="anchored"):
            block_power_system(gm, shifted, 2)

    @pytest.mark.parametrize("steps", [2, 3])
    def test_rate_identity_with_wider_window(self, gm, gm_measure, steps):
        pairs = full_word_partition(gm, 0, 2)
        ps = block_power_system(gm, pairs, steps)
        power = ps.h_value_sequence(gm_measure, 2)
        base_vals = dict(h_minus_report(gm_measure, pairs, 2 * steps).sequence)
        for k, v in power.sequence:
            assert v / steps == pytest.approx(base_vals[k * steps], abs=1e-9)

    def test_product_mode_rates_dominate_general(self, gm, gm_measure):
        u = product_cover(gm, [[(0,), (1,)], [(1,)]])
        gen = h_minus_report(gm_measure, u, 4, "general")
        prod = h_minus_report(gm_measure, u, 4, "product")
        for (_, gv), (_, pv) in zip(gen.sequence, prod.sequence):
            assert pv >= gv - 1e-12
