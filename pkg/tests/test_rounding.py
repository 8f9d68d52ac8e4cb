import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phicov.baseline import exact
from phicov.counting import from_values, make_family
from phicov.errors import InfeasibleError
from phicov.instance import (
    Cardinality,
    CoverageInstance,
    PartitionMatroid,
    evaluate,
    from_resource_allocation,
    is_feasible,
    random_instance,
    random_resource_allocation,
)
from phicov.poisson import poisson_expectation
from phicov.rounding import (
    multilinear_value,
    pb_distribution,
    pb_distribution_dft,
    pipage_round,
    solve,
)

PAV = make_family("pav")


def enumerate_F(inst, phi, x):
    total = 0.0
    for bits in itertools.product([0, 1], repeat=inst.m):
        pr = np.prod([xi if b else 1 - xi for xi, b in zip(x, bits)])
        if pr:
            total += pr * evaluate(inst, phi, [i for i, b in enumerate(bits) if b])
    return total


def brute_pmf(probs):
    d = len(probs)
    out = np.zeros(d + 1)
    for bits in itertools.product([0, 1], repeat=d):
        out[sum(bits)] += np.prod([p if b else 1 - p for p, b in zip(probs, bits)])
    return out


def test_pb_examples():
    for f in (pb_distribution, pb_distribution_dft):
        assert np.allclose(f([1.0, 1.0]), [0, 0, 1], atol=1e-12)
        assert np.allclose(f([0.5, 0.5]), [0.25, 0.5, 0.25], atol=1e-12)
        assert np.allclose(f([0.3, 0.7, 0.5]), brute_pmf([0.3, 0.7, 0.5]), atol=1e-12)
        assert np.allclose(f([]), [1.0])
    with pytest.raises(ValueError):
        pb_distribution([1.2])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), max_size=64))
def test_pb_methods_agree(probs):
    a, b = pb_distribution(probs), pb_distribution_dft(probs)
    assert np.max(np.abs(a - b)) <= 1e-8
    assert abs(a.sum() - 1.0) <= 1e-10
    assert np.all(a >= 0)


def test_multilinear_examples():
    inst = CoverageInstance(1, [1.0], [[0], [0]])
    assert multilinear_value(inst, PAV, [0.5, 0.5]) == pytest.approx(0.875, abs=1e-15)
    inst = random_instance(8, 6, 0.5, (0.5, 2.0), seed=2)
    for S in [(), (0, 3), (1, 2, 5)]:
        x = np.zeros(6)
        x[list(S)] = 1
        assert multilinear_value(inst, PAV, x) == pytest.approx(evaluate(inst, PAV, S), abs=1e-12)
    lin = from_values([0, 1, 2, 3, 4, 5, 6, 7])
    x = np.random.default_rng(0).random(6)
    load = sum(inst.weights[a] * sum(x[i] for i in inst.incidence[a]) for a in range(inst.n))
    assert multilinear_value(inst, lin, x) == pytest.approx(load, abs=1e-12)
    with pytest.raises(ValueError):
        multilinear_value(inst, PAV, np.ones(5))


@pytest.mark.parametrize("seed", range(8))
def test_multilinear_matches_enumeration(seed):
    inst = random_instance(7, 9, 0.4, (0.5, 2.0), seed=seed)
    phi = make_family(["pav", "threshold:l=2", "geo:p=0.3", "power:d=0.5"][seed % 4])
    x = np.random.default_rng(seed).random(inst.m)
    assert multilinear_value(inst, phi, x) == pytest.approx(enumerate_F(inst, phi, x), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(
    probs=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10),
    spec=st.sampled_from(["pav", "threshold:l=1", "threshold:l=3", "geo:p=0.5", "power:d=0.3"]),
)
def test_convex_order(probs, spec):
    phi = make_family(spec)
    pb = float(np.dot(pb_distribution(probs), phi.table(len(probs))))
    assert pb >= poisson_expectation(phi, sum(probs), 1e-13) - 1e-9


def test_pipage_integral_unchanged():
    inst = random_instance(6, 5, 0.5, seed=1)
    assert pipage_round(inst, PAV, [1, 0, 1, 0, 0], Cardinality(2)) == (0, 2)


def test_pipage_symmetric():
    inst = CoverageInstance(1, [1.0], [[0], [0]])
    traj = []
    sel = pipage_round(inst, PAV, [0.5, 0.5], Cardinality(1), traj)
    # both endpoints are singletons with F = 1; the tie raises x_0
    assert sel == (0,)
    assert [t["F"] for t in traj] == [0.875, 1.0]


def test_pipage_rejects_infeasible():
    inst = random_instance(4, 3, 0.5, seed=1)
    with pytest.raises(InfeasibleError):
        pipage_round(inst, PAV, [0.5, 0.5, 0.5], Cardinality(1))
    with pytest.raises(InfeasibleError):
        pipage_round(inst, PAV, [1.2, -0.2, 0.0], Cardinality(1))


def _random_base_point(rng, parts, caps, m):
    x = np.zeros(m)
    for part, d in zip(parts, caps):
        part = list(part)
        y = rng.random(len(part))
        # scale into the base polytope by pouring mass greedily
        y = y / y.sum() * d
        while np.any(y > 1):
            over = y > 1
            excess = (y[over] - 1).sum()
            y[over] = 1
            free = ~over & (y < 1)
            y[free] += excess * (1 - y[free]) / (1 - y[free]).sum()
        x[part] = y
    return x


@pytest.mark.parametrize("seed", range(20))
def test_pipage_monotone(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 9))
    inst = random_instance(8, m, 0.5, (0.5, 2.0), seed=seed)
    phi = make_family(["pav", "threshold:l=2", "geo:p=0.3"][seed % 3])
    if seed % 2:
        constraint = Cardinality(int(rng.integers(1, m)))
    else:
        cut = m // 2
        constraint = PartitionMatroid([range(cut), range(cut, m)], [1, max(1, (m - cut) // 2)])
    parts, caps = constraint.parts(m)
    x = _random_base_point(rng, parts, caps, m)
    traj = []
    sel = pipage_round(inst, phi, x, constraint, traj)
    assert is_feasible(constraint, m, sel)
    F0 = enumerate_F(inst, phi, x)
    assert evaluate(inst, phi, sel) >= F0 - 1e-9 * (1 + abs(F0))
    Fs = [t["F"] for t in traj]
    assert all(b >= a - 1e-9 for a, b in zip(Fs, Fs[1:]))
    assert len(traj) - 1 <= m


def test_solve_integral_optimum():
    # three disjoint pairs covering [6]: the LP optimum is integral
    inst = CoverageInstance(6, [1.0] * 6, [[0, 1], [2, 3], [4, 5], [0]])
    res = solve(inst, make_family("threshold:l=1"), Cardinality(3))
    assert res.selection.selected == (0, 1, 2)
    assert res.selection.value == pytest.approx(res.lp_objective, abs=1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_solve_guarantee(seed):
    rng = np.random.default_rng(1000 + seed)
    n, m = int(rng.integers(1, 11)), int(rng.integers(1, 9))
    k = int(rng.integers(1, min(4, m) + 1))
    inst = random_instance(n, m, float(rng.uniform(0.2, 0.8)), (0.5, 2.0), seed=seed)
    phi = make_family(["threshold:l=2", "pav", "geo:p=0.3"][seed % 3])
    res = solve(inst, phi, Cardinality(k))
    opt = exact(inst, phi, Cardinality(k)).value
    assert res.selection.value >= res.certified_ratio_bound * opt - 1e-6
    assert res.selection.value >= res.multilinear_at_lp - 1e-6
    assert res.lp_objective >= opt - 1e-7
    assert opt >= res.selection.value - 1e-9


def test_solve_resource_allocation():
    phi = make_family("geo:p=0.3")
    actions, weights = random_resource_allocation(6, 3, 3, 0.4, seed=8)
    actions = [a + [a[0]] * (3 - len(a)) for a in actions]
    inst, c = from_resource_allocation(actions, weights)
    res = solve(inst, phi, c)
    best = max(
        evaluate(inst, phi, sel) for sel in itertools.product(*c.parts(inst.m)[0])
    )
    assert res.selection.value >= res.certified_ratio_bound * best - 1e-6
