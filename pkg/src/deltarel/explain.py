"""Single explanations: deletion-based min-Idelta sets and cardinality-minimal delta sets."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .measure import MeasureEngine, as_subset
from .model import DecisionTree, FeatureSpace, as_rational

IDRS = "idelta-subset-minimal"
MINCARD = "delta-cardinality-minimal"
CDRS = "cdelta-deletion-minimal"


class InfeasibleSeedError(ValueError):
    """The seed set handed to the deletion algorithm is not relevant."""

    def __init__(self, seed: frozenset[int], eps: Fraction, delta: Fraction):
        super().__init__(f"seed {sorted(seed)} has error {eps} > delta {delta}")
        self.seed = seed
        self.epsilon = eps
        self.delta = delta


class BudgetExhaustedError(RuntimeError):
    def __init__(self, budget: int, best: "Explanation"):
        super().__init__(
            f"no delta-relevant set of size <= {budget}; best known has size {len(best.subset)}")
        self.budget = budget
        self.best = best


@dataclass(frozen=True)
class DeletionStep:
    feature: int
    epsilon: Fraction
    kept: bool


@dataclass(frozen=True)
class Explanation:
    subset: frozenset[int]
    epsilon: Fraction
    precision: Fraction
    kind: str
    delta: Fraction
    trace: tuple[DeletionStep, ...] = ()
    minimal: bool | None = None
    measure: str = "joint"

    def __len__(self) -> int:
        return len(self.subset)

    @property
    def features(self) -> list[int]:
        return sorted(self.subset)


@dataclass(frozen=True)
class IDRSCheck:
    relevant: bool
    minimal: bool
    epsilon: Fraction


@dataclass
class SearchNode:
    """Partial assignment of the inclusion variables in branch-and-bound.

    ``killed`` holds the indices of paths made inconsistent by some chosen
    feature; ``bound`` is an upper bound on the precision of any completion.
    """

    chosen: frozenset[int]
    excluded: frozenset[int]
    undecided: tuple[int, ...]
    killed: frozenset[int] = field(default_factory=frozenset)
    bound: Fraction = Fraction(1)


def check_delta(delta) -> Fraction:
    delta = as_rational(delta)
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    return delta


def _engine(tree, inst, fs, measure) -> MeasureEngine:
    return MeasureEngine(tree, inst, fs, measure)


def resolve_order(order, seed: Iterable[int]) -> list[int] | str:
    """Normalise a deletion order against ``seed``.

    ``"asc"`` (or ``None``) gives ascending ids and ``"greedy"`` is returned
    as-is.  An explicit list is filtered to the seed; seed features it does
    not mention are appended in ascending order.
    """
    seed = sorted(seed)
    if order is None or order == "asc":
        return seed
    if order == "greedy":
        return "greedy"
    if isinstance(order, str):
        raise ValueError(f"unknown order {order!r}")
    order = [int(i) for i in order]
    if len(set(order)) != len(order):
        raise ValueError("deletion order repeats a feature")
    in_seed = set(seed)
    listed = [i for i in order if i in in_seed]
    return listed + [i for i in seed if i not in set(listed)]


def min_idrs(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None, order="asc",
             seed: Iterable[int] | None = None, measure: str = "joint",
             engine: MeasureEngine | None = None) -> Explanation:
    """Subset-minimal Idelta-relevant set by one-at-a-time deletion.

    Starts from ``seed`` (all features by default), tries to drop each
    feature in ``order`` and puts it back whenever the error would exceed
    ``delta``.  Because the error is monotone, one pass yields a
    subset-minimal set.
    """
    delta = check_delta(delta)
    engine = engine or _engine(tree, inst, fs, measure)
    m = engine.m
    seed = frozenset(range(1, m + 1)) if seed is None else as_subset(seed, m)
    state = engine.deletion_state(seed)
    scaled_delta = delta * engine.scale
    if state.error_num() > scaled_delta:
        raise InfeasibleSeedError(seed, Fraction(state.error_num(), engine.scale), delta)

    plan = resolve_order(order, seed)
    trace = []
    if plan == "greedy":
        pending = sorted(seed)
        while pending:
            scored = [(state.error_without(i), i) for i in pending]
            err, i = min(scored)
            pending.remove(i)
            trace.append(_step(state, i, err, scaled_delta, engine.scale))
    else:
        for i in plan:
            err = state.error_without(i)
            trace.append(_step(state, i, err, scaled_delta, engine.scale))

    subset = engine.subset(state.mask)
    return Explanation(
        subset=subset,
        epsilon=Fraction(state.error_num(), engine.scale),
        precision=engine.precision(state.mask),
        kind=IDRS,
        delta=delta,
        trace=tuple(trace),
        minimal=True,
        measure=engine.measure,
    )


def _step(state, feature: int, err: int, scaled_delta: Fraction, scale: int) -> DeletionStep:
    keep = err > scaled_delta
    if not keep:
        state.remove(feature)
    return DeletionStep(feature, Fraction(err, scale), keep)


def check_idrs(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
               subset: Iterable[int] = (), measure: str = "joint") -> IDRSCheck:
    delta = check_delta(delta)
    engine = _engine(tree, inst, fs, measure)
    mask = engine.mask(subset)
    eps = engine.epsilon(mask)
    relevant = eps <= delta
    minimal = relevant and all(
        not engine.is_relevant(mask & ~(1 << (i - 1)), delta) for i in engine.subset(mask))
    return IDRSCheck(relevant, minimal, eps)


def _precision_bound(engine: MeasureEngine, excluded: int, killed: frozenset[int]) -> Fraction:
    # Conditioned on v_S, path j keeps mass prod_{i not in S} w_i(E_i^j); features that may
    # still join S contribute at most 1, so only excluded features shrink the bound.
    num = 0
    for j, is_target in enumerate(engine.target):
        if not is_target or j in killed:
            continue
        n = 1
        for k in range(engine.m):
            n *= engine.mass_num[j][k] if excluded >> k & 1 else engine.full_num[k]
        num += n
    return Fraction(num, engine.scale)


def min_cardinality_drs(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
                        budget: int | None = None) -> Explanation:
    """Smallest set whose conditional precision reaches ``delta``.

    Iterative deepening on the size bound ``k``; for each ``k`` a
    depth-first branch-and-bound decides features in ascending id, trying
    inclusion before exclusion, and verifies each complete candidate with
    the exact measure engine.  The first hit is therefore the
    lexicographically smallest minimum-size set.
    """
    delta = check_delta(delta)
    engine = _engine(tree, inst, fs, "joint")
    m = engine.m
    limit = m if budget is None else min(budget, m)
    for k in range(limit + 1):
        found = _search(engine, delta, k)
        if found is not None:
            return _cardinality_explanation(engine, found, delta)
    best = _deletion_on_precision(engine, delta, list(range(1, m + 1)))
    raise BudgetExhaustedError(limit, _cardinality_explanation(engine, engine.mask(best), delta, minimal=False))


def _cardinality_explanation(engine, mask: int, delta: Fraction, minimal: bool = True) -> Explanation:
    return Explanation(
        subset=engine.subset(mask),
        epsilon=engine.epsilon(mask),
        precision=engine.precision(mask),
        kind=MINCARD,
        delta=delta,
        minimal=minimal,
    )


def _search(engine: MeasureEngine, delta: Fraction, k: int) -> int | None:
    root = SearchNode(frozenset(), frozenset(), tuple(range(1, engine.m + 1)))
    stack = [root]
    while stack:
        node = stack.pop()
        chosen = engine.mask(node.chosen)
        if len(node.chosen) == k or not node.undecided:
            if len(node.chosen) == k and engine.meets_precision(chosen, delta):
                return chosen
            continue
        if len(node.chosen) + len(node.undecided) < k:
            continue
        excluded = engine.mask(node.excluded)
        node.bound = _precision_bound(engine, excluded, node.killed)
        if node.bound < delta:
            continue
        i, rest = node.undecided[0], node.undecided[1:]
        bit = 1 << (i - 1)
        killed = node.killed | {j for j, c in enumerate(engine.conflict) if c & bit}
        # pushed last so the inclusion branch is explored first
        stack.append(SearchNode(node.chosen, node.excluded | {i}, rest, node.killed))
        stack.append(SearchNode(node.chosen | {i}, node.excluded, rest, frozenset(killed)))
    return None


def _deletion_on_precision(engine: MeasureEngine, delta: Fraction, order: Sequence[int]) -> frozenset[int]:
    current = set(range(1, engine.m + 1))
    for i in order:
        if engine.meets_precision(current - {i}, delta):
            current.discard(i)
    return frozenset(current)


def min_cdrs(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None, order="asc",
             certify: bool = False) -> Explanation:
    """Deletion-minimal Cdelta-relevant set (conditional precision >= delta).

    Precision is not monotone, so one deletion pass only guarantees that no
    single feature can be dropped.  With ``certify=True`` every proper
    subset is checked as well (exponential; meant for small ``m``), and
    ``minimal`` reports whether the set is truly subset-minimal.
    """
    delta = check_delta(delta)
    engine = _engine(tree, inst, fs, "joint")
    m = engine.m
    plan = resolve_order(order, range(1, m + 1))
    if plan == "greedy":
        raise ValueError("greedy order is only defined for the Idelta error")
    subset = _deletion_on_precision(engine, delta, plan)
    minimal = None
    if certify:
        minimal = not any(engine.meets_precision(frozenset(c), delta)
                          for r in range(len(subset)) for c in combinations(sorted(subset), r))
    mask = engine.mask(subset)
    return Explanation(subset, engine.epsilon(mask), engine.precision(mask), CDRS, delta, minimal=minimal)


def explain_instance(tree: DecisionTree, inst, delta, algorithm: str = "idrs", **kwargs) -> Explanation:
    if algorithm == "idrs":
        return min_idrs(tree, inst, delta, **kwargs)
    if algorithm == "mincard":
        return min_cardinality_drs(tree, inst, delta, **kwargs)
    raise ValueError(f"unknown algorithm {algorithm!r}")


__all__ = [
    "BudgetExhaustedError", "DeletionStep", "Explanation", "IDRSCheck", "InfeasibleSeedError",
    "SearchNode", "check_idrs", "explain_instance", "min_cardinality_drs", "min_cdrs", "min_idrs",
]
