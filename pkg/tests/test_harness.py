import pytest

from rdelab import cycle_growth_rate, validate, word_count
from rdelab.harness import (
    CHECK_IDS,
    GenParams,
    Instance,
    SuiteConfig,
    gen_instance,
    run_suite,
)
from rdelab.measures import MarkovMeasure


class TestGeneration:
    def test_instances_are_valid(self):
        for seed in (1, 2, 77):
            inst = gen_instance(seed)
            assert validate(inst.bundle).ok
            for mu in inst.measures.values():
                from rdelab import invariance_residual

                assert invariance_residual(mu) <= 1e-12

    def test_same_seed_is_bit_identical(self):
        a = gen_instance(42)
        b = gen_instance(42)
        assert a.bundle.base.weights == b.bundle.base.weights
        assert a.bundle.base.theta == b.bundle.base.theta
        for w in range(a.bundle.base.omega_count):
            assert (a.bundle.adjacency[w] == b.bundle.adjacency[w]).all()
        for name in a.covers:
            assert a.covers[name].sections == b.covers[name].sections
        for name in a.measures:
            for w in range(a.bundle.base.omega_count):
                assert (
                    a.measures[name].transitions[w] == b.measures[name].transitions[w]
                ).all()

    def test_single_symbol_alphabet_degenerates(self):
        inst = gen_instance(5, GenParams(alphabet_max=1))
        assert inst.bundle.alphabet_size == 1
        assert cycle_growth_rate(inst.bundle).integrated == pytest.approx(0.0, abs=1e-12)
        for omega in range(inst.bundle.base.omega_count):
            assert word_count(inst.bundle, omega, 5) == 1

    def test_caps_are_respected(self):
        params = GenParams(omega_max=3, alphabet_max=2, window_max=1)
        for seed in range(6):
            inst = gen_instance(seed, params)
            assert inst.bundle.base.omega_count <= 3
            assert inst.bundle.alphabet_size <= 2
            for cov in inst.covers.values():
                assert cov.length <= 1


class TestSuite:
    def test_default_gate_passes(self):
        report = run_suite(SuiteConfig(seed=7, instances=4, draws=40))
        assert report.ok
        hard = [r for r in report.results if r.kind == "exact"]
        assert hard and all(r.failures == 0 for r in hard)

    def test_only_filter(self):
        report = run_suite(
            SuiteConfig(seed=7, instances=2, draws=10, only=("mass-shift",))
        )
        assert [r.check for r in report.results] == ["mass-shift"]

    def test_planted_invariance_fault_is_caught(self):
        inst = gen_instance(3)
        name = sorted(inst.measures)[0]
        mu = inst.measures[name]
        starts = list(mu.starts)
        bumped = starts[0].copy()
        bumped[0] = min(1.0, bumped[0] + 0.2)
        bumped /= bumped.sum()
        starts[0] = bumped
        broken = MarkovMeasure(
            bundle=mu.bundle,
            transitions=mu.transitions,
            starts=tuple(starts),
            check=False,
        )
        planted = Instance(
            seed=inst.seed,
            params=inst.params,
            bundle=inst.bundle,
            covers=inst.covers,
            measures={name: broken},
        )
        report = run_suite(
            SuiteConfig(seed=7, only=("measure-invariance",)),
            instances=[planted],
        )
        assert not report.ok
        (res,) = report.results
        assert res.failures >= 1
        assert res.failure_bundles[0]["measure"] == name
        assert res.failure_bundles[0]["residual"] > 1e-12

    def test_workers_do_not_change_the_report(self):
        cfg = SuiteConfig(seed=11, instances=3, draws=20)
        a = run_suite(cfg, workers=1)
        b = run_suite(cfg, workers=4)
        assert a.to_dict() == b.to_dict()

    def test_config_caps_validated(self):
        with pytest.raises(ValueError, match="caps"):
            SuiteConfig(params=GenParams(omega_max=9))

    def test_check_catalog_exposed(self):
        assert "separated-bound" in CHECK_IDS
        assert "witness-certificates" in CHECK_IDS
