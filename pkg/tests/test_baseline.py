import itertools
import math

import numpy as np
import pytest

from phicov.baseline import count_bases, exact, exact_tuples, greedy
from phicov.counting import make_family
from phicov.errors import ResourceLimitError
from phicov.instance import (
    Cardinality,
    CoverageInstance,
    PartitionMatroid,
    from_resource_allocation,
    random_instance,
    random_resource_allocation,
)

PAV = make_family("pav")


def independent_value(inst, phi, selected):
    # recomputes C^phi from the set lists, bypassing the incidence structures
    counts = {}
    for i in selected:
        for a in inst.sets[i]:
            counts[a] = counts.get(a, 0) + 1
    return math.fsum(inst.weights[a] * phi.at(c) for a, c in counts.items())


def test_greedy_disjoint_is_optimal():
    inst = CoverageInstance(9, [1.0] * 9, [[0], [1, 2, 3], [4, 5], [6, 7, 8]])
    for k in range(1, 5):
        assert greedy(inst, PAV, Cardinality(k)).value == exact(inst, PAV, Cardinality(k)).value


def test_greedy_gap_threshold_two():
    # seeded instance where greedy stops one unit short under threshold:l=2
    phi = make_family("threshold:l=2")
    inst = random_instance(8, 6, 0.4, seed=27)
    g, e = greedy(inst, phi, Cardinality(3)), exact(inst, phi, Cardinality(3))
    assert g.selected == (0, 1, 3) and g.value == 11.0
    assert e.selected == (0, 3, 4) and e.value == 12.0


def test_greedy_selects_everything():
    inst = random_instance(5, 4, 0.5, seed=0)
    assert greedy(inst, PAV, Cardinality(4)).selected == (0, 1, 2, 3)


def test_greedy_tie_breaks_to_smallest_index():
    inst = CoverageInstance(2, [1.0, 1.0], [[0], [1], [0]])
    assert greedy(inst, PAV, Cardinality(1)).selected == (0,)
    assert exact(inst, PAV, Cardinality(1)).selected == (0,)


def test_greedy_respects_partition():
    inst = CoverageInstance(3, [1.0, 1.0, 1.0], [[0, 1, 2], [0, 1], [2]])
    sel = greedy(inst, PAV, PartitionMatroid([[0, 1], [2]], [1, 1])).selected
    assert sel == (0, 2)


@pytest.mark.parametrize("seed", range(40))
def test_lazy_greedy_matches_naive(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 12))
    inst = random_instance(10, m, 0.35, (0.5, 2.0) if seed % 2 else (1, 1), seed=seed)
    phi = make_family(["pav", "threshold:l=2", "geo:p=0.3", "power:d=0.5"][seed % 4])
    if seed % 3:
        c = Cardinality(int(rng.integers(1, m + 1)))
    else:
        cut = m // 2
        c = PartitionMatroid([range(cut), range(cut, m)], [1, 1]) if cut else Cardinality(1)
    assert greedy(inst, phi, c) == greedy(inst, phi, c, lazy=True)


def test_exact_single_set():
    inst = CoverageInstance(2, [1.0, 1.0], [[0, 1]])
    assert exact(inst, PAV, Cardinality(1)).selected == (0,)


@pytest.mark.parametrize("seed", [3, 17, 29])
def test_exact_cross_checked(seed):
    inst = random_instance(9, 7, 0.4, (0.5, 2.0), seed=seed)
    best = max(
        (independent_value(inst, PAV, S), S) for S in itertools.combinations(range(7), 3)
    )
    got = exact(inst, PAV, Cardinality(3))
    assert got.value == pytest.approx(best[0], abs=1e-12)
    assert independent_value(inst, PAV, got.selected) == pytest.approx(got.value, abs=1e-12)


def test_exact_guard():
    inst = random_instance(3, 40, 0.3, seed=0)
    assert count_bases(inst, Cardinality(20)) == math.comb(40, 20)
    with pytest.raises(ResourceLimitError):
        exact(inst, PAV, Cardinality(20))


def test_exact_ge_greedy_ge_classical_bound():
    rng = np.random.default_rng(7)
    for s in range(100):
        m = int(rng.integers(1, 9))
        inst = random_instance(int(rng.integers(1, 11)), m, 0.4, (0.5, 2.0), seed=s)
        phi = make_family(["pav", "threshold:l=2", "geo:p=0.3", "power:d=0.5"][s % 4])
        c = Cardinality(int(rng.integers(1, min(4, m) + 1)))
        e, g = exact(inst, phi, c).value, greedy(inst, phi, c).value
        assert e >= g - 1e-12
        assert g >= (1 - math.exp(-1)) * e - 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_exact_tuples_matches_matroid_enumeration(seed):
    phi = make_family("geo:p=0.5")
    actions, weights = random_resource_allocation(5, 3, 3, 0.5, seed)
    inst, c = from_resource_allocation(actions, weights)
    _, best = exact_tuples(actions, weights, phi)
    assert exact(inst, phi, c).value == pytest.approx(best, abs=1e-12)
