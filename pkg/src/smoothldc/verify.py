"""Verification battery for locally decodable codes.

Checks the structural definitions (correctness, perfect smoothness,
universality), the distilled properties of capacity-achieving codes, the
full N-ary decoding-set tree together with the converse inequality chain it
drives (so tightness of the rate bound can be audited level by level), the
exhaustive-erasure minimum distance, and the corruption-survival guarantee.

Every check is exact: entropies come from the rank oracle, probabilities
are rationals, and all enumeration orders are fixed so witnesses are
deterministic (the lexicographically smallest witness is reported first).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .codespec import LinearCodeSpec
from .entropy import distinct_information, oracle_for, same_information

DEFAULT_DISTANCE_BUDGET = 24
DEFAULT_TREE_BUDGET = 512


class TreeConstructionError(ValueError):
    """No qualifying decoding set exists for some node (non-universal code)."""


class BudgetError(ValueError):
    """Exhaustive enumeration would exceed the configured budget."""


@dataclass
class CheckResult:
    name: str
    passed: bool
    witnesses: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "witnesses": self.witnesses,
            "details": self.details,
        }


def check_correctness(code: LinearCodeSpec) -> CheckResult:
    """Every decoding set must determine its source symbol exactly."""
    ora = oracle_for(code)
    witnesses = []
    for sup in code.supersets:
        for set_index, members in enumerate(sup.sets):
            residual = ora.message_entropy_given(sup.k, members)
            if residual != 0:
                witnesses.append(
                    {
                        "k": sup.k,
                        "set_index": set_index,
                        "set": [code.label(m) for m in members],
                        "residual_bits": residual,
                    }
                )
    return CheckResult("correctness", not witnesses, witnesses)


def membership_counts(code: LinearCodeSpec, k: int) -> list[int]:
    counts = [0] * code.params.M
    for members in code.supersets[k - 1].sets:
        for m in members:
            counts[m] += 1
    return counts


def check_smoothness(code: LinearCodeSpec) -> bool:
    """Perfect smoothness: per superset, all symbols appear equally often."""
    for k in range(1, code.params.K + 1):
        counts = membership_counts(code, k)
        if len(set(counts)) != 1:
            return False
    return True


def check_universality(code: LinearCodeSpec) -> bool:
    """Universality: every symbol appears at least once in every superset."""
    for k in range(1, code.params.K + 1):
        if min(membership_counts(code, k)) == 0:
            return False
    return True


# --- properties of capacity-achieving codes --------------------------------

PROPERTY_NAMES = ("p1", "p2a", "p2b", "p2c", "p3")


@dataclass
class PropertyReport:
    """Outcome of the five-property battery; failures carry witnesses."""

    results: dict[str, CheckResult]
    universal: bool

    def all_pass(self) -> bool:
        return self.universal and all(r.passed for r in self.results.values())

    def failed(self) -> list[str]:
        return [name for name, r in self.results.items() if not r.passed]


def check_capacity_properties(code: LinearCodeSpec) -> PropertyReport:
    ora = oracle_for(code)
    p = code.params
    all_k = range(1, p.K + 1)
    universal = check_universality(code)

    p1 = CheckResult("p1-nonzero-entropy", True)
    for i in range(p.M):
        for k in all_k:
            others = frozenset(all_k) - {k}
            if ora.entropy((i,), others) == 0:
                p1.witnesses.append({"i": code.label(i), "k": k})
    p1.passed = not p1.witnesses

    p2a = CheckResult("p2a-same-interference", True)
    p2b = CheckResult("p2b-distinct-desired", True)
    p2c = CheckResult("p2c-independence", True)
    for sup in code.supersets:
        k = sup.k
        for set_index, members in enumerate(sup.sets):
            for i1, i2 in itertools.combinations(members, 2):
                for k_prime in all_k:
                    if k_prime == k:
                        continue
                    if not same_information(code, i1, i2, (k_prime,)):
                        others = frozenset(all_k) - {k_prime}
                        h12 = ora.entropy((i1, i2), others)
                        p2a.witnesses.append(
                            {
                                "k": k,
                                "set_index": set_index,
                                "i1": code.label(i1),
                                "i2": code.label(i2),
                                "k_prime": k_prime,
                                "h_i1_given_i2": h12 - ora.entropy((i2,), others),
                                "h_i2_given_i1": h12 - ora.entropy((i1,), others),
                            }
                        )
                if not (
                    distinct_information(code, i1, i2, k)
                    and distinct_information(code, i2, i1, k)
                ):
                    p2b.witnesses.append(
                        {"k": k, "set_index": set_index, "i1": code.label(i1), "i2": code.label(i2)}
                    )
                h1 = ora.entropy((i1,))
                h2 = ora.entropy((i2,))
                h12 = ora.entropy((i1, i2))
                if h12 != h1 + h2:
                    p2c.witnesses.append(
                        {
                            "k": k,
                            "set_index": set_index,
                            "i1": code.label(i1),
                            "i2": code.label(i2),
                            "joint": h12,
                            "sum": h1 + h2,
                        }
                    )
    p2a.passed = not p2a.witnesses
    p2b.passed = not p2b.witnesses
    p2c.passed = not p2c.witnesses

    p3 = CheckResult("p3-incompatibility", True)
    for k in all_k:
        for i1 in range(p.M):
            for i2 in range(p.M):
                if same_information(code, i1, i2, (k,)) and distinct_information(code, i1, i2, k):
                    p3.witnesses.append({"i1": code.label(i1), "i2": code.label(i2), "k": k})
    p3.passed = not p3.witnesses

    return PropertyReport(
        results={"p1": p1, "p2a": p2a, "p2b": p2b, "p2c": p2c, "p3": p3},
        universal=universal,
    )


# --- the full N-ary decoding tree ------------------------------------------


@dataclass(frozen=True)
class NaryTree:
    """Depth-K tree of nested decoding sets.

    permutation: order in which source symbols are consumed, depth 1..K;
    sets_by_depth[d-1]: the N^(d-1) sets at depth d as (set id within the
    superset of the depth-d source symbol, members ordered parent-first).
    """

    permutation: tuple[int, ...]
    root: int
    sets_by_depth: tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]

    def labels_at_depth(self, depth: int) -> tuple[int, ...]:
        if depth == 0:
            return (self.root,)
        return tuple(
            label for _, members in self.sets_by_depth[depth - 1] for label in members
        )

    @property
    def leaves(self) -> tuple[int, ...]:
        return self.labels_at_depth(len(self.permutation))

    @property
    def choices(self) -> tuple[int, ...]:
        return tuple(set_id for level in self.sets_by_depth for set_id, _ in level)


def _normalize_chooser(chooser):
    if chooser is None or chooser == "first":
        return lambda node, k, qualifying: qualifying[0]
    if isinstance(chooser, (list, tuple)):
        explicit = iter(chooser)

        def from_list(node, k, qualifying):
            try:
                choice = next(explicit)
            except StopIteration:
                raise ValueError("explicit chooser ran out of set indices") from None
            if choice not in qualifying:
                raise ValueError(
                    f"explicit set {choice} does not contain node {node} (valid: {qualifying})"
                )
            return choice

        return from_list
    if isinstance(chooser, int):
        rng = random.Random(chooser)
        return lambda node, k, qualifying: rng.choice(qualifying)
    if isinstance(chooser, random.Random):
        return lambda node, k, qualifying: chooser.choice(qualifying)
    raise TypeError("chooser must be 'first', an explicit index list, or a seed/Random")


def build_nary_tree(
    code: LinearCodeSpec,
    permutation: Sequence[int],
    root: int,
    chooser="first",
) -> NaryTree:
    """Construct one tree realization; deterministic given the chooser.

    Nodes are processed breadth-first; within a set the parent label comes
    first, remaining members in ascending index order.
    """
    p = code.params
    permutation = tuple(permutation)
    if sorted(permutation) != list(range(1, p.K + 1)):
        raise ValueError(f"permutation must rearrange [1..{p.K}]")
    if not 0 <= root < p.M:
        raise IndexError(f"root symbol {root} out of range")
    choose = _normalize_chooser(chooser)

    sets_by_depth = []
    frontier = [root]
    for k in permutation:
        sup = code.supersets[k - 1]
        level = []
        next_frontier = []
        for node in frontier:
            qualifying = [i for i, s in enumerate(sup.sets) if node in s]
            if not qualifying:
                raise TreeConstructionError(
                    f"no decoding set of source symbol {k} contains {code.label(node)}"
                )
            set_id = choose(node, k, qualifying)
            members = sup.sets[set_id]
            ordered = (node,) + tuple(m for m in members if m != node)
            level.append((set_id, ordered))
            next_frontier.extend(ordered)
        sets_by_depth.append(tuple(level))
        frontier = next_frontier
    return NaryTree(permutation=permutation, root=root, sets_by_depth=tuple(sets_by_depth))


def enumerate_trees(
    code: LinearCodeSpec,
    permutations: Iterable[Sequence[int]] | None = None,
    roots: Iterable[int] | None = None,
) -> Iterator[NaryTree]:
    """All tree realizations: every permutation, root, and qualifying-set
    choice, in lexicographic order. May be combinatorially large; slice it
    or fall back to sample_trees."""
    p = code.params
    if permutations is None:
        permutations = itertools.permutations(range(1, p.K + 1))
    if roots is None:
        roots = range(p.M)
    roots = list(roots)

    def expand(perm, root, depth, frontier, chosen):
        if depth == p.K:
            yield build_nary_tree(code, perm, root, list(chosen))
            return
        k = perm[depth]
        sup = code.supersets[k - 1]
        options = []
        for node in frontier:
            qualifying = [i for i, s in enumerate(sup.sets) if node in s]
            if not qualifying:
                raise TreeConstructionError(
                    f"no decoding set of source symbol {k} contains {code.label(node)}"
                )
            options.append(qualifying)
        for combo in itertools.product(*options):
            next_frontier = []
            for node, set_id in zip(frontier, combo):
                members = sup.sets[set_id]
                next_frontier.extend((node,) + tuple(m for m in members if m != node))
            yield from expand(perm, root, depth + 1, next_frontier, chosen + list(combo))

    for perm in permutations:
        for root in roots:
            yield from expand(tuple(perm), root, 0, [root], [])


def sample_trees(code: LinearCodeSpec, count: int, seed: int = 0) -> list[NaryTree]:
    """Seeded random tree realizations (permutation, root, and choices)."""
    rng = random.Random(seed)
    p = code.params
    out = []
    for _ in range(count):
        perm = list(range(1, p.K + 1))
        rng.shuffle(perm)
        root = rng.randrange(p.M)
        out.append(build_nary_tree(code, perm, root, chooser=rng))
    return out


def trees_for_audit(
    code: LinearCodeSpec, budget: int = DEFAULT_TREE_BUDGET, samples: int = 100, seed: int = 0
) -> tuple[list[NaryTree], bool]:
    """All realizations when there are at most *budget* of them, otherwise
    *samples* seeded draws. Returns (trees, exhaustive)."""
    trees = list(itertools.islice(enumerate_trees(code), budget + 1))
    if len(trees) <= budget:
        return trees, True
    return sample_trees(code, samples, seed), False


def leaf_distinctness(tree: NaryTree) -> tuple[bool, int | None]:
    """Whether all leaf labels are distinct; if not, the smallest repeated
    symbol index (lexicographically smallest witness wins)."""
    seen: set[int] = set()
    duplicates: set[int] = set()
    for label in tree.leaves:
        if label in seen:
            duplicates.add(label)
        seen.add(label)
    if duplicates:
        return False, min(duplicates)
    return True, None


@dataclass(frozen=True)
class LevelAudit:
    depth: int
    message: int  # source symbol consumed at this depth
    lhs_bits: int
    rhs_bits: int

    @property
    def slack(self) -> int:
        return self.lhs_bits - self.rhs_bits


@dataclass(frozen=True)
class ConverseAudit:
    """Per-level accounting of the rate-bound inequality chain.

    Descending the tree, the symbol entropies at depth d (conditioned on
    all later sources) must exceed N^(d-1)*Lw plus the depth-(d-1) total;
    a capacity-achieving code is tight (zero slack) at every level."""

    levels: tuple[LevelAudit, ...]
    total_bits: int
    bound_bits: int

    @property
    def total_slack(self) -> int:
        return self.total_bits - self.bound_bits

    @property
    def tight(self) -> bool:
        return all(level.slack == 0 for level in self.levels)


def audit_converse_chain(code: LinearCodeSpec, tree: NaryTree) -> ConverseAudit:
    ora = oracle_for(code)
    p = code.params
    perm = tree.permutation

    def level_total(depth: int) -> int:
        conditioned = perm[depth:]
        return sum(ora.entropy((label,), conditioned) for label in tree.labels_at_depth(depth))

    totals = [level_total(d) for d in range(p.K + 1)]
    levels = []
    for depth in range(1, p.K + 1):
        rhs = p.N ** (depth - 1) * p.Lw + totals[depth - 1]
        levels.append(
            LevelAudit(depth=depth, message=perm[depth - 1], lhs_bits=totals[depth], rhs_bits=rhs)
        )
    bound = sum(p.N**d for d in range(p.K)) * p.Lw + totals[0]
    return ConverseAudit(levels=tuple(levels), total_bits=totals[p.K], bound_bits=bound)


# --- erasures and corruption ------------------------------------------------


@dataclass(frozen=True)
class DistanceResult:
    distance: int
    witnesses: tuple[tuple[int, ...], ...]  # all minimal failing erasures, lex order

    @property
    def witness(self) -> tuple[int, ...]:
        return self.witnesses[0]


def min_distance(code: LinearCodeSpec, budget: int = DEFAULT_DISTANCE_BUDGET) -> DistanceResult:
    """Smallest number of erased symbols that makes some source symbol
    unrecoverable from the remaining ones, by exhaustive search."""
    p = code.params
    if p.M > budget:
        raise BudgetError(
            f"exhaustive erasure search over M = {p.M} symbols exceeds the budget of {budget};"
            " use corruption_trial in sampled mode instead"
        )
    ora = oracle_for(code)
    all_k = range(1, p.K + 1)
    for erased_count in range(1, p.M + 1):
        failing = []
        for erased in itertools.combinations(range(p.M), erased_count):
            remaining = [m for m in range(p.M) if m not in erased]
            if any(ora.message_entropy_given(k, remaining) > 0 for k in all_k):
                failing.append(erased)
        if failing:
            return DistanceResult(distance=erased_count, witnesses=tuple(failing))
    raise AssertionError("erasing every symbol must lose data")


@dataclass(frozen=True)
class CorruptionReport:
    delta: Fraction
    corrupted_count: int
    mode: str
    per_message_min: dict[int, Fraction]
    min_success: Fraction
    every_pattern_leaves_clean_set: bool
    guarantee_void: bool  # delta >= 1/N, the survival bound does not apply


def corruption_trial(
    code: LinearCodeSpec,
    delta,
    mode: str = "exact",
    samples: int = 1000,
    seed: int = 0,
    budget: int = DEFAULT_DISTANCE_BUDGET,
) -> CorruptionReport:
    """Success probability of a uniformly random decoding-set choice when a
    delta fraction of symbols is corrupted.

    Exact mode enumerates every pattern of floor(delta*M) corrupted symbols;
    sampled mode draws patterns with a seeded generator. Success for a
    (message, pattern) pair is the fraction of decoding sets untouched by
    the pattern; the report carries the minimum over patterns per message.
    """
    p = code.params
    delta = Fraction(delta).limit_denominator(10**6) if not isinstance(delta, Fraction) else delta
    if delta < 0 or delta > 1:
        raise ValueError("delta must lie in [0, 1]")
    corrupted = int(delta * p.M)
    if mode == "exact":
        if p.M > budget:
            raise BudgetError(f"exact corruption enumeration needs M <= {budget}, got {p.M}")
        patterns: Iterable[tuple[int, ...]] = itertools.combinations(range(p.M), corrupted)
    elif mode == "sampled":
        rng = random.Random(seed)
        patterns = (tuple(sorted(rng.sample(range(p.M), corrupted))) for _ in range(samples))
    else:
        raise ValueError("mode must be 'exact' or 'sampled'")

    per_message_min: dict[int, Fraction] = {}
    every_clean = True
    pattern_list = list(patterns)
    for sup in code.supersets:
        worst = Fraction(1)
        for pattern in pattern_list:
            hit = set(pattern)
            clean = sum(1 for members in sup.sets if hit.isdisjoint(members))
            if clean == 0:
                every_clean = False
            worst = min(worst, Fraction(clean, len(sup.sets)))
        per_message_min[sup.k] = worst
    return CorruptionReport(
        delta=delta,
        corrupted_count=corrupted,
        mode=mode,
        per_message_min=per_message_min,
        min_success=min(per_message_min.values()),
        every_pattern_leaves_clean_set=every_clean,
        guarantee_void=delta >= Fraction(1, p.N),
    )
