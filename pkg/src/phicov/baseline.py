"""Greedy and exhaustive reference solvers."""

import heapq
import itertools
import math

import numpy as np

from phicov.errors import ResourceLimitError
from phicov.instance import SelectionValue, selection_value, welfare

EXACT_LIMIT = 10**7


def _membership(inst):
    M = np.zeros((inst.m, inst.n), dtype=np.int64)
    for i, s in enumerate(inst.sets):
        M[i, list(s)] = 1
    return M


class _Marginals:
    """Marginal gains against a running coverage count vector."""

    def __init__(self, inst, phi):
        self.inst = inst
        self.table = phi.table(inst.m + 1)
        self.counts = np.zeros(inst.n, dtype=np.int64)
        self.members = [np.asarray(s, dtype=np.int64) for s in inst.sets]

    def gain(self, i):
        idx = self.members[i]
        if idx.size == 0:
            return 0.0
        c = self.counts[idx]
        return float(np.dot(self.inst.weight_array[idx], self.table[c + 1] - self.table[c]))

    def add(self, i):
        self.counts[self.members[i]] += 1


def _part_layout(inst, constraint):
    parts, caps = constraint.parts(inst.m)
    part_of = [0] * inst.m
    for p, part in enumerate(parts):
        for i in part:
            part_of[i] = p
    return part_of, list(caps)


def greedy(inst, phi, constraint, lazy=False):
    """Add the best feasible set (ties to the smallest index) until a base is reached."""
    constraint.check(inst.m)
    part_of, room = _part_layout(inst, constraint)
    marg = _Marginals(inst, phi)
    chosen = []
    if not lazy:
        remaining = set(range(inst.m))
        while any(room):
            best_i, best_g = None, -math.inf
            for i in sorted(remaining):
                if room[part_of[i]] == 0:
                    continue
                g = marg.gain(i)
                if g > best_g:
                    best_i, best_g = i, g
            remaining.discard(best_i)
            room[part_of[best_i]] -= 1
            marg.add(best_i)
            chosen.append(best_i)
    else:
        # stale gains only shrink (submodularity), so a refreshed top that
        # still beats the next stale key is the true argmax
        heap = [(-marg.gain(i), i) for i in range(inst.m)]
        heapq.heapify(heap)
        while any(room):
            _, i = heapq.heappop(heap)
            if room[part_of[i]] == 0:
                continue
            key = (-marg.gain(i), i)
            if heap and key > heap[0]:
                heapq.heappush(heap, key)
                continue
            room[part_of[i]] -= 1
            marg.add(i)
            chosen.append(i)
    return selection_value(inst, phi, chosen)


def count_bases(inst, constraint):
    parts, caps = constraint.parts(inst.m)
    return math.prod(math.comb(len(p), d) for p, d in zip(parts, caps))


def exact(inst, phi, constraint, limit=EXACT_LIMIT):
    """Global optimum by enumerating every base; ties to the lexicographically smallest."""
    constraint.check(inst.m)
    total = count_bases(inst, constraint)
    if total > limit:
        raise ResourceLimitError(f"{total} bases to enumerate, limit is {limit}")
    parts, caps = constraint.parts(inst.m)
    M = _membership(inst)
    table = phi.table(inst.m)
    w = inst.weight_array
    best_sel, best_val = None, -math.inf
    choices = [itertools.combinations(p, d) for p, d in zip(parts, caps)]
    for combo in itertools.product(*choices):
        sel = tuple(sorted(itertools.chain.from_iterable(combo)))
        counts = M[list(sel)].sum(axis=0)
        val = float(np.dot(w, table[counts]))
        if val > best_val or (val == best_val and sel < best_sel):
            best_sel, best_val = sel, val
    return SelectionValue(best_sel, best_val)


def exact_tuples(action_sets, weights, phi):
    """Best action tuple of a resource-allocation game by direct enumeration."""
    best, best_choice = -math.inf, None
    for choice in itertools.product(*(range(len(a)) for a in action_sets)):
        v = welfare(action_sets, weights, phi, choice)
        if v > best:
            best, best_choice = v, choice
    return best_choice, best
