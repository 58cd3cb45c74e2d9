import itertools

import numpy as np
import pytest

from stdadi.enumeration import (
    REFERENCE_COUNT,
    RankReport,
    count_summary,
    enumerate_specs,
    independence_rank,
    match_stdadi,
)
from stdadi.invariants import STDADI_NAMES, STDADI_SPECS, MonomialSpec


def brute_force_count(max_degree, max_order):
    """Count balanced exponent vectors over the sorted triples, modulo sign.

    A ratio is a vector ``e`` of integer exponents, one per triple, with as
    many positive as negative factors (at most ``max_degree`` each) and a
    zero order-weighted sum.  ``e`` and ``-e`` are the same ratio.
    """
    triples = list(itertools.combinations(range(max_order + 1), 3))
    weights = [sum(t) for t in triples]
    seen = set()
    rng = range(-max_degree, max_degree + 1)
    for e in itertools.product(rng, repeat=len(triples)):
        pos = sum(x for x in e if x > 0)
        neg = -sum(x for x in e if x < 0)
        if pos == 0 or pos != neg or pos > max_degree:
            continue
        if sum(w * x for w, x in zip(weights, e)) != 0:
            continue
        seen.add(max(e, tuple(-x for x in e)))
    return len(seen)


def test_degree_one_order_two_is_empty():
    assert enumerate_specs(1, 2) == []


def test_degree_one_order_four():
    specs = enumerate_specs(1, 4)
    assert [str(s) for s in specs] == ["M014/M023", "M024/M123", "M034/M124"]
    assert [match_stdadi(s) for s in specs] == ["I1", "I2", "I3"]


@pytest.mark.parametrize("degree, order", [(1, 3), (1, 4), (2, 3), (2, 4)])
def test_count_matches_brute_force(degree, order):
    assert len(enumerate_specs(degree, order)) == brute_force_count(degree, order)


def test_all_eight_present():
    specs = enumerate_specs(2, 4)
    names = {match_stdadi(s) for s in specs} - {None}
    assert names == set(STDADI_NAMES)
    summary = count_summary(specs)
    assert summary["all_stdadi_present"]
    assert summary["count"] == 111
    assert summary["by_degree"] == {1: 3, 2: 108}
    assert summary["reference_count"] == REFERENCE_COUNT == 55


def test_emitted_specs_are_valid_and_canonical():
    specs = enumerate_specs(2, 4)
    for spec in specs:
        spec.validate()
        assert spec.canonical() == spec
    assert len({s for s in specs}) == len(specs)


def test_deterministic_order():
    assert enumerate_specs(2, 4) == enumerate_specs(2, 4)


def test_invalid_bounds():
    with pytest.raises(ValueError):
        enumerate_specs(0, 4)
    with pytest.raises(ValueError):
        enumerate_specs(2, 1)


def test_duplicate_specs_rank_one():
    report = independence_rank([STDADI_SPECS[0], STDADI_SPECS[0]], trials=20)
    assert report.modal_rank == 1


def test_power_is_dependent():
    squared = MonomialSpec(((0, 2, 3), (0, 2, 3)), ((0, 1, 4), (0, 1, 4)))
    report = independence_rank([STDADI_SPECS[0], squared], trials=20)
    assert report.modal_rank == 1


def test_two_distinct_specs_rank_two():
    report = independence_rank(STDADI_SPECS[:2], trials=20)
    assert report.count(2) == 20


def test_rank_bounded_by_orbit_dimension():
    # 15 stack entries, minus 9 for A and 1 for c, leaves at most 5 independent invariants
    report = independence_rank(STDADI_SPECS, trials=30)
    assert max(report.ranks) <= 5
    assert report.modal_rank == 5


def test_rank_report_dict():
    report = RankReport(n_specs=3, ranks=[2, 2, 3], resamples=1)
    assert report.modal_rank == 2
    assert report.to_dict() == {
        "n_specs": 3, "trials": 3, "modal_rank": 2, "rank_counts": {2: 2, 3: 1}, "resamples": 1,
    }


def test_rank_is_seeded():
    a = independence_rank(STDADI_SPECS[:3], trials=5, seed=3)
    b = independence_rank(STDADI_SPECS[:3], trials=5, seed=3)
    assert a.ranks == b.ranks
    assert all(np.array_equal(x, y) for x, y in zip(a.singular_values, b.singular_values))


def test_rank_needs_trials():
    with pytest.raises(ValueError):
        independence_rank(STDADI_SPECS, trials=0)
