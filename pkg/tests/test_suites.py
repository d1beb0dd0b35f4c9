import numpy as np
import pytest

from bigframe.suites import TAGS, TRIALS, SuiteResult, Trial, instance_seed, run_suite


def test_every_tag_has_a_trial():
    assert set(TAGS) == set(TRIALS) and len(TAGS) == 14


@pytest.mark.parametrize("tag", TAGS)
def test_small_runs_pass(tag):
    res = run_suite(tag, instances=12, seed=11)
    assert res.failed == 0, [t.note for t in res.trials if not t.ok]
    assert len(res.trials) == 12 and np.isfinite(res.worst_margin)


def test_instance_seeds_are_distinct_and_stable():
    seeds = {instance_seed(0, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert instance_seed(3, 4) == instance_seed(3, 4) != instance_seed(4, 3)


@pytest.mark.parametrize("tag", ["3.7", "4.2", "5.1"])
def test_runs_are_reproducible(tag):
    a, b = run_suite(tag, 6, 2), run_suite(tag, 6, 2)
    assert [t.margin for t in a.trials] == [t.margin for t in b.trials]


def test_trials_do_not_depend_on_order():
    """Instance i of a long run equals instance i of a short run."""
    long = run_suite("3.11", 8, 4)
    short = run_suite("3.11", 3, 4)
    assert [t.margin for t in long.trials[:3]] == [t.margin for t in short.trials]


def test_engineered_failures_in_square_root_suite():
    res = run_suite("3.13", 8, 0)
    assert res.counters()["engineered"] == 2
    for i in (0, 4):
        assert res.trials[i].ok and res.trials[i].note.startswith("rejected")


def test_counters_and_summary_properties():
    res = SuiteResult("x", 0, 3, [Trial(True, 0.5, flags={"a": 1}), Trial(False, -1.0),
                                  Trial(True, float("nan"), flags={"a": 0, "b": True})])
    assert (res.passed, res.failed, res.failing) == (2, 1, [1])
    assert res.worst_margin == -1.0
    assert res.counters() == {"a": 1, "b": 1}


def test_unknown_tag():
    with pytest.raises(KeyError):
        run_suite("2.1", 1)
