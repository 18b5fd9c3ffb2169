"""Enumeration of all minimal Idelta-relevant sets and their minimal duals.

With ``C(S) = [error(S) <= delta]`` and ``D(T) = not C(F \\ T)`` both
monotone, the minimal C-sets are exactly the minimal hitting sets of the
minimal D-sets and vice versa.  A :class:`DualitySession` walks the subset
lattice MARCO-style: it keeps the minimal sets found so far as a map of
explored regions, asks a backtracking search for a seed outside that map,
and shrinks the seed to a new minimal C-set or a new minimal D-set.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .explain import IDRS, Explanation, check_delta, min_idrs
from .measure import MeasureEngine
from .model import DecisionTree, FeatureSpace


@dataclass
class EnumerationResult:
    items: list
    truncated: bool = False

    def __iter__(self) -> Iterator:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, idx):
        return self.items[idx]

    def sets(self) -> list[frozenset[int]]:
        return [x.subset if isinstance(x, Explanation) else x for x in self.items]


@dataclass(frozen=True)
class DualityVerdict:
    ok: bool
    counterexample: frozenset[int] | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class DualitySession:
    def __init__(self, tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
                 measure: str = "joint"):
        self.delta = check_delta(delta)
        self.engine = MeasureEngine(tree, inst, fs, measure)
        self.m = self.engine.m
        self.full = self.engine.full_mask
        self.cmin: list[int] = []
        self.dmin: list[int] = []
        self.exhausted = False

    def C(self, mask: int) -> bool:
        return self.engine.is_relevant(mask, self.delta)

    def D(self, mask: int) -> bool:
        return not self.C(self.full & ~mask)

    def next_seed(self) -> int | None:
        """A subset that contains no known minimal C-set and hits every known minimal D-set.

        Backtracks over features in ascending id, inclusion first.
        """
        m, cmin, dmin = self.m, self.cmin, self.dmin
        stack = [(0, 0, 0)]
        while stack:
            k, chosen, dropped = stack.pop()
            if any(s & chosen == s for s in cmin):
                continue
            if any(t & dropped == t for t in dmin):
                continue
            if k == m:
                return chosen
            bit = 1 << k
            stack.append((k + 1, chosen, dropped | bit))
            stack.append((k + 1, chosen | bit, dropped))
        return None

    def _shrink_c(self, seed: int) -> int:
        expl = min_idrs(self.engine.tree, self.engine.instance, self.delta,
                        seed=self.engine.subset(seed), engine=self.engine)
        return self.engine.mask(expl.subset)

    def _shrink_d(self, seed: int) -> int:
        t = seed
        for k in range(self.m):
            bit = 1 << k
            if t & bit and self.D(t & ~bit):
                t &= ~bit
        return t

    def step(self) -> tuple[str, frozenset[int]] | None:
        """Find one new minimal set; returns ``("C", S)``, ``("D", T)`` or ``None`` when done."""
        if self.exhausted:
            return None
        seed = self.next_seed()
        if seed is None:
            self.exhausted = True
            return None
        if self.C(seed):
            s = self._shrink_c(seed)
            self.cmin.append(s)
            return "C", self.engine.subset(s)
        t = self._shrink_d(self.full & ~seed)
        self.dmin.append(t)
        return "D", self.engine.subset(t)

    def run(self) -> "DualitySession":
        while self.step() is not None:
            pass
        return self

    def explanation(self, subset: frozenset[int]) -> Explanation:
        mask = self.engine.mask(subset)
        return Explanation(subset, self.engine.epsilon(mask), self.engine.precision(mask), IDRS,
                           self.delta, minimal=True, measure=self.engine.measure)


def _collect(session: DualitySession, kind: str, limit: int | None) -> tuple[list[frozenset[int]], bool]:
    found: list[frozenset[int]] = []
    while True:
        res = session.step()
        if res is None:
            return found, False
        if res[0] != kind:
            continue
        if limit is not None and len(found) >= limit:
            return found, True
        found.append(res[1])


def enumerate_min_idrs(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
                       limit: int | None = None, measure: str = "joint") -> EnumerationResult:
    """All subset-minimal Idelta-relevant sets, in discovery order.

    With ``limit`` the search stops after that many sets; ``truncated`` is
    set only when a further set actually exists.
    """
    session = DualitySession(tree, inst, delta, fs, measure)
    sets, truncated = _collect(session, "C", limit)
    return EnumerationResult([session.explanation(s) for s in sets], truncated)


def enumerate_min_duals(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
                        limit: int | None = None, measure: str = "joint") -> EnumerationResult:
    """All subset-minimal sets T whose freeing pushes the error above delta."""
    session = DualitySession(tree, inst, delta, fs, measure)
    sets, truncated = _collect(session, "D", limit)
    return EnumerationResult(sets, truncated)


def minimal_hitting_sets(family: Iterable[Iterable[int]]) -> set[frozenset[int]]:
    """Exhaustive minimal hitting sets, smallest candidates first."""
    family = [frozenset(s) for s in family]
    universe = sorted(set().union(*family)) if family else []
    found: list[frozenset[int]] = []
    for r in range(len(universe) + 1):
        for combo in combinations(universe, r):
            cand = frozenset(combo)
            if any(f <= cand for f in found):
                continue
            if all(cand & s for s in family):
                found.append(cand)
    return set(found)


def _fmt(s: Iterable[int]) -> str:
    return "{" + ",".join(map(str, sorted(s))) + "}"


def verify_duality(cmin: Sequence[Iterable[int]], dmin: Sequence[Iterable[int]]) -> DualityVerdict:
    """Check that each family is exactly the minimal hitting sets of the other."""
    cs = {frozenset(s) for s in cmin}
    ds = {frozenset(s) for s in dmin}
    for mine, other, name, other_name in ((cs, ds, "C", "D"), (ds, cs, "D", "C")):
        mhs = minimal_hitting_sets(other)
        for s in sorted(mine - mhs, key=lambda x: (len(x), sorted(x))):
            missed = next((t for t in sorted(other, key=sorted) if not s & t), None)
            if missed is not None:
                why = f"{name}-set {_fmt(s)} misses {other_name}-set {_fmt(missed)}"
            else:
                why = f"{name}-set {_fmt(s)} hits every {other_name}-set but is not minimal"
            return DualityVerdict(False, s, why)
        for s in sorted(mhs - mine, key=lambda x: (len(x), sorted(x))):
            return DualityVerdict(False, s, f"minimal hitting set {_fmt(s)} of the {other_name}-sets is not a {name}-set")
    return DualityVerdict(True)
