"""phi-MaxCoverage instances: data model, evaluation, JSON I/O and generators."""

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from phicov import kernels
from phicov.errors import ConstraintError, DomainError, GadgetError, ResourceLimitError, SchemaError
from phicov.poisson import binomial_expectation, concavity_ratio


@dataclass(frozen=True)
class CoverageInstance:
    """Universe ``0..n-1`` with positive weights and ``m`` cover sets."""

    n: int
    weights: tuple
    sets: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "sets", tuple(tuple(sorted(int(a) for a in s)) for s in self.sets))
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if len(self.weights) != self.n:
            raise DomainError(f"expected {self.n} weights, got {len(self.weights)}")
        for a, w in enumerate(self.weights):
            if not w > 0 or not math.isfinite(w):
                raise DomainError(f"weight of element {a} must be positive, got {w}")
        for i, s in enumerate(self.sets):
            if len(set(s)) != len(s):
                raise DomainError(f"set {i} has repeated members")
            if s and (s[0] < 0 or s[-1] >= self.n):
                raise DomainError(f"set {i} has members outside 0..{self.n - 1}")

    @property
    def m(self):
        return len(self.sets)

    @cached_property
    def incidence(self):
        """Per-element tuple of the set indices containing it."""
        inc = [[] for _ in range(self.n)]
        for i, s in enumerate(self.sets):
            for a in s:
                inc[a].append(i)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def csr(self):
        """(indptr, indices) of the element -> sets incidence, as int64 arrays."""
        inc = self.incidence
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in inc])
        indices = np.fromiter(itertools.chain.from_iterable(inc), dtype=np.int64, count=indptr[-1])
        return indptr, indices

    @cached_property
    def weight_array(self):
        return np.asarray(self.weights, dtype=float)

    @cached_property
    def max_degree(self):
        return max((len(x) for x in self.incidence), default=0)


@dataclass(frozen=True)
class Cardinality:
    k: int

    def parts(self, m):
        return (tuple(range(m)),), (self.k,)

    def check(self, m):
        if not 1 <= self.k <= m:
            raise ConstraintError(f"cardinality k={self.k} must lie in 1..{m}")

    def to_json(self):
        return {"type": "cardinality", "k": self.k}


@dataclass(frozen=True)
class PartitionMatroid:
    """Bases take exactly ``capacities[p]`` sets from ``parts[p]``."""

    parts_: tuple
    capacities: tuple

    def __init__(self, parts, capacities):
        object.__setattr__(self, "parts_", tuple(tuple(sorted(int(i) for i in p)) for p in parts))
        object.__setattr__(self, "capacities", tuple(int(d) for d in capacities))

    def parts(self, m):
        return self.parts_, self.capacities

    def check(self, m):
        if len(self.parts_) != len(self.capacities):
            raise ConstraintError("parts and capacities differ in length")
        seen = sorted(i for p in self.parts_ for i in p)
        if seen != list(range(m)):
            raise ConstraintError(f"parts must partition 0..{m - 1}")
        for p, (part, d) in enumerate(zip(self.parts_, self.capacities)):
            if not 1 <= d <= len(part):
                raise ConstraintError(
                    f"capacity {d} of part {p} must lie in 1..{len(part)}"
                )

    def to_json(self):
        return {
            "type": "partition",
            "parts": [list(p) for p in self.parts_],
            "capacities": list(self.capacities),
        }


def is_feasible(constraint, m, selected):
    """True iff ``selected`` is a base of the constraint."""
    sel = set(selected)
    if len(sel) != len(list(selected)) or any(not 0 <= i < m for i in sel):
        return False
    parts, caps = constraint.parts(m)
    return all(len(sel.intersection(p)) == d for p, d in zip(parts, caps))


def selection_mask(m, selected):
    mask = np.zeros(m, dtype=np.uint8)
    for i in selected:
        if not 0 <= i < m:
            raise IndexError(f"set index {i} out of range 0..{m - 1}")
        mask[i] = 1
    return mask


def evaluate(inst, phi, selected):
    """C^phi(S) = sum_a w_a phi(|S|_a)."""
    mask = selection_mask(inst.m, selected)
    counts = np.zeros(inst.n, dtype=np.int64)
    for i in np.flatnonzero(mask):
        counts[list(inst.sets[i])] += 1
    table = phi.table(int(counts.max(initial=0)))
    return float(np.dot(inst.weight_array, table[counts]))


def evaluate_mask(inst, phi_table, mask):
    """Kernel-backed evaluation for a 0/1 mask; ``phi_table`` covers 0..max degree."""
    indptr, indices = inst.csr
    return kernels.coverage_value(indptr, indices, mask, inst.weight_array, phi_table)


# JSON I/O --------------------------------------------------------------------


def to_json(inst, constraint, phi_spec, seed=None):
    doc = {
        "n": inst.n,
        "weights": [repr(w) for w in inst.weights],
        "sets": [list(s) for s in inst.sets],
        "constraint": constraint.to_json(),
        "phi": phi_spec,
    }
    if seed is not None:
        doc["seed"] = seed
    return doc


def save(path, inst, constraint, phi_spec, seed=None):
    text = json.dumps(to_json(inst, constraint, phi_spec, seed), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _need(doc, key, kind, path):
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "required field is missing")
    val = doc[key]
    ok = isinstance(val, kind) and not (kind is int and isinstance(val, bool))
    if not ok:
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}")
    return val


def _int_list(val, path):
    if not isinstance(val, list):
        raise SchemaError(path, "expected list of integers")
    for j, v in enumerate(val):
        if not isinstance(v, int) or isinstance(v, bool):
            raise SchemaError(f"{path}[{j}]", "expected integer")
    return val


def from_json(doc):
    """Parse a document into ``(instance, constraint, phi_spec, seed)``."""
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    n = _need(doc, "n", int, "$")
    weights_raw = _need(doc, "weights", list, "$")
    weights = []
    for a, w in enumerate(weights_raw):
        if not isinstance(w, str):
            raise SchemaError(f"$.weights[{a}]", "weights are decimal strings")
        try:
            weights.append(float(w))
        except ValueError:
            raise SchemaError(f"$.weights[{a}]", f"cannot parse {w!r}") from None
    sets_raw = _need(doc, "sets", list, "$")
    sets = [_int_list(s, f"$.sets[{i}]") for i, s in enumerate(sets_raw)]
    try:
        inst = CoverageInstance(n, weights, sets)
    except DomainError as exc:
        raise SchemaError("$", str(exc)) from None

    cdoc = _need(doc, "constraint", dict, "$")
    ctype = _need(cdoc, "type", str, "$.constraint")
    if ctype == "cardinality":
        constraint = Cardinality(_need(cdoc, "k", int, "$.constraint"))
    elif ctype == "partition":
        parts = [
            _int_list(p, f"$.constraint.parts[{j}]")
            for j, p in enumerate(_need(cdoc, "parts", list, "$.constraint"))
        ]
        caps = _int_list(_need(cdoc, "capacities", list, "$.constraint"), "$.constraint.capacities")
        constraint = PartitionMatroid(parts, caps)
    else:
        raise SchemaError("$.constraint.type", f"unknown constraint type {ctype!r}")
    try:
        constraint.check(inst.m)
    except ConstraintError as exc:
        raise SchemaError("$.constraint", str(exc)) from None

    phi_spec = _need(doc, "phi", str, "$")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise SchemaError("$.seed", "expected integer")
    return inst, constraint, phi_spec, seed


def load(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc}") from None
    return from_json(doc)


# generators ------------------------------------------------------------------


def random_instance(n, m, density, weight_range=(1.0, 1.0), seed=0):
    """Independent memberships with probability ``density``; PCG64 stream from ``seed``."""
    if n < 1 or m < 1:
        raise DomainError("n and m must be >= 1")
    if not 0.0 <= density <= 1.0:
        raise DomainError(f"density must lie in [0, 1], got {density}")
    lo, hi = weight_range
    if not 0 < lo <= hi:
        raise DomainError(f"weight range must satisfy 0 < lo <= hi, got {weight_range}")
    rng = np.random.default_rng(seed)
    member = rng.random((m, n)) < density
    weights = rng.uniform(lo, hi, size=n) if hi > lo else np.full(n, float(lo))
    sets = [np.flatnonzero(row).tolist() for row in member]
    return CoverageInstance(n, weights.tolist(), sets)


def from_resource_allocation(action_sets, weights):
    """Reduce a resource-allocation game to coverage under a partition matroid.

    ``action_sets[i]`` lists agent i's available resource subsets. The sets of
    agent i occupy a contiguous block of indices and each block has capacity 1.
    """
    if not action_sets:
        raise DomainError("need at least one agent")
    n = len(weights)
    sets, parts = [], []
    for agent, actions in enumerate(action_sets):
        if not actions:
            raise DomainError(f"agent {agent} has no actions")
        start = len(sets)
        sets.extend(list(a) for a in actions)
        parts.append(list(range(start, len(sets))))
    inst = CoverageInstance(n, weights, sets)
    constraint = PartitionMatroid(parts, [1] * len(parts))
    return inst, constraint


def welfare(action_sets, weights, phi, choice):
    """W^phi of an action tuple, computed directly from resource counts."""
    counts = [0] * len(weights)
    for agent, j in enumerate(choice):
        for r in action_sets[agent][j]:
            counts[r] += 1
    return math.fsum(w * phi.at(c) for w, c in zip(weights, counts))


def random_resource_allocation(n_resources, n_agents, n_actions, density, seed):
    """Seeded random action sets; every action is a nonempty resource subset."""
    rng = np.random.default_rng(seed)
    actions = []
    for _ in range(n_agents):
        mine = []
        k = int(rng.integers(1, n_actions + 1))
        for _ in range(k):
            row = np.flatnonzero(rng.random(n_resources) < density).tolist()
            if not row:
                row = [int(rng.integers(n_resources))]
            mine.append(row)
        actions.append(mine)
    weights = rng.uniform(0.5, 2.0, size=n_resources).tolist()
    return actions, weights


# partitioning system -------------------------------------------------------------

GADGET_MAX_CHOICES = 10**6


def _sample_cover(rng, n, h, x):
    """h equal blocks of size x*n/h covering each element exactly x times.

    x permutations are concatenated and cut into consecutive blocks. A block
    straddling two permutations must not repeat an element, so the head of
    the later permutation is drawn from the elements absent from the earlier
    tail -- the same law as resampling that permutation until no duplicate.
    """
    size = x * n // h
    seq = []
    for t in range(x):
        start = t * n
        cut = (-start) % size  # head length of this permutation inside a straddling block
        tail_len = size - cut if cut else 0
        if t == 0 or tail_len == 0 or cut == 0:
            seq.extend(rng.permutation(n).tolist())
            continue
        banned = set(seq[len(seq) - tail_len :])
        allowed = np.array([a for a in range(n) if a not in banned], dtype=np.int64)
        head = rng.choice(allowed, size=cut, replace=False).tolist()
        taken = set(head)
        rest = np.array([a for a in range(n) if a not in taken], dtype=np.int64)
        seq.extend(head)
        seq.extend(rng.permutation(rest).tolist())
    return [seq[j * size : (j + 1) * size] for j in range(h)]


def verify_partition_system(collections, n, phi, x_phi, h, eta):
    """Largest |C^phi(Q) - psi_{|T|,h} n| / n over every choice function.

    Also checks that each collection is an x_phi-cover of equal blocks; raises
    GadgetError otherwise.
    """
    size = x_phi * n // h
    for i, coll in enumerate(collections):
        cover = np.zeros(n, dtype=np.int64)
        for block in coll:
            if len(block) != size or len(set(block)) != size:
                raise GadgetError(f"collection {i} has a malformed block")
            cover[list(block)] += 1
        if not np.all(cover == x_phi):
            raise GadgetError(f"collection {i} is not an {x_phi}-cover")

    R = len(collections)
    table = phi.table(R)
    psi = [binomial_expectation(phi, k, x_phi / h) for k in range(R + 1)]
    indicators = [
        [np.bincount(np.asarray(b, dtype=np.int64), minlength=n) for b in coll]
        for coll in collections
    ]
    worst = 0.0
    # depth-first over choices (None or a block) per collection
    stack = [(0, np.zeros(n, dtype=np.int64), 0)]
    while stack:
        i, counts, used = stack.pop()
        if i == R:
            val = float(table[counts].sum())
            worst = max(worst, abs(val - psi[used] * n) / n)
            continue
        stack.append((i + 1, counts, used))
        for ind in indicators[i]:
            stack.append((i + 1, counts + ind, used + 1))
    return worst


def gadget_partition_system(n, h, R, eta, phi, seed=0, max_attempts=50, x_phi=None):
    """Sample and verify an (n, h, R, phi, eta) partitioning system.

    Returns R collections, each a list of h sorted blocks.
    """
    if x_phi is None:
        x_phi = concavity_ratio(phi).argmin_x
    if h < x_phi:
        raise DomainError(f"need h >= x_phi, got h={h}, x_phi={x_phi}")
    if (x_phi * n) % h:
        raise DomainError(f"x_phi * n / h = {x_phi}*{n}/{h} is not an integer")
    if not 0 < eta < 1:
        raise DomainError("eta must lie in (0, 1)")
    if n > 2000 or R > 12 or h > 8:
        raise ResourceLimitError("desk-scale caps are n <= 2000, R <= 12, h <= 8")
    if (h + 1) ** R > GADGET_MAX_CHOICES:
        raise ResourceLimitError(
            f"(h+1)^R = {(h + 1) ** R} choice functions exceed {GADGET_MAX_CHOICES}"
        )
    rng = np.random.default_rng(seed)
    worst_seen = math.inf
    for _ in range(max_attempts):
        collections = [_sample_cover(rng, n, h, x_phi) for _ in range(R)]
        worst = verify_partition_system(collections, n, phi, x_phi, h, eta)
        worst_seen = min(worst_seen, worst)
        if worst <= eta:
            return [[sorted(b) for b in coll] for coll in collections]
    raise GadgetError(
        f"no verified system in {max_attempts} attempts (best worst-case deviation "
        f"{worst_seen:.4g} > eta={eta})",
        worst_deviation=worst_seen,
    )


@dataclass(frozen=True)
class SelectionValue:
    selected: tuple
    value: float


def selection_value(inst, phi, selected):
    sel = tuple(sorted(int(i) for i in selected))
    return SelectionValue(sel, evaluate(inst, phi, sel))
