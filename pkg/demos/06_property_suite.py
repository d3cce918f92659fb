"""The mechanical property suite.

Every identity and inequality of the calculus is ground against randomly
generated instances: counting laws, the cover algebra, refinement-entropy
laws, separated-set bounds, the power-step identity, and the witness
certificates.  Exact statements are hard failures; limit-flavored statements
(drift of the outer rates, the search gap) are soft and reported separately.
Reports are canonical JSON, byte-stable for a given seed.
"""

from rdelab.harness import SuiteConfig, gen_instance, run_suite
from rdelab.instances import canonical_json

instance = gen_instance(seed=1)
print("a generated instance:",
      f"{instance.bundle.base.omega_count} fibers,",
      f"{instance.bundle.alphabet_size} symbols,",
      f"covers {sorted(instance.covers)},",
      f"measures {sorted(instance.measures)}")

report = run_suite(SuiteConfig(seed=7, instances=8, draws=100))
print("\ncheck results:")
for result in report.results:
    mark = "ok " if result.failures == 0 else "FAIL"
    print(f"  {mark} {result.check:28s} [{result.kind}] "
          f"pass={result.passes} fail={result.failures}")
print("\nsuite ok:", report.ok)

digest = canonical_json(report.to_dict())
print("canonical report:", len(digest), "bytes (stable across runs and thread counts)")
