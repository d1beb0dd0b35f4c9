"""
Randomized property suites
==========================

Every result has a seeded suite. Instance i draws from its own generator,
so any failure can be replayed from the seed printed next to it.
"""

from bigframe.suites import TAGS, instance_seed, run_suite

for tag in TAGS:
    res = run_suite(tag, instances=50, seed=1)
    extra = " ".join(f"{k}={v}" for k, v in res.counters().items())
    print(f"{tag:>5}: {res.passed}/{res.instances} worst margin {res.worst_margin:+.3g} {extra}")

# replaying one instance
print("seed of instance 7:", instance_seed(1, 7))
